"""Real zeros of random polynomial systems and components of real plane curves."""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import bivariate as bv
from .ensembles import KostlanSample, MomentEstimate, rng_for, sample_kostlan_rng
from .homog import HomPoly
from .polycore import MultiPoly, PolyMap, dehomogenize
from .spheremesh import level_for_faces, sphere_mesh


class DegenerateSystem(Exception):
    """The system has a positive-dimensional zero set (resultant vanishes identically)."""


@dataclass
class RootReport:
    count: int
    boxes: List[Tuple[int, Tuple[float, float]]] = field(default_factory=list)
    points: List[np.ndarray] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    certified: bool = True
    discarded_reason: str = ""


@dataclass
class ComponentReport:
    b0: int
    resolution: int
    certified: bool
    history: List[Tuple[int, int]] = field(default_factory=list)
    singular_points: List[np.ndarray] = field(default_factory=list)


# univariate: exact Sturm sequences

def _to_fraction_coeffs(p: MultiPoly) -> List[Fraction]:
    if p.nvars != 1:
        raise ValueError("expected a polynomial in one variable")
    if not p.terms:
        raise ValueError("zero polynomial has infinitely many roots")
    deg = p.degree
    c = [Fraction(0)] * (deg + 1)
    for (e,), v in p.terms.items():
        c[e] = Fraction(v)
    return c


def _integer_coeffs(c: Sequence[Fraction]) -> List[int]:
    den = 1
    for x in c:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return [int(x * den) for x in c]


def _content_free(c: List[int]) -> List[int]:
    g = 0
    for x in c:
        g = math.gcd(g, x)
    return [x // g for x in c] if g > 1 else c


def _neg_prem(a: List[int], b: List[int]) -> List[int]:
    """-|lc(b)|^(deg a - deg b + 1) * (a mod b), ascending coefficient lists."""
    a = list(a)
    lb = b[-1]
    mult = abs(lb)
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        la = a[-1]
        shift = len(a) - 1 - db
        # a <- |lb| * a - sign(lb) * la * x^shift * b
        sgn = 1 if lb > 0 else -1
        a = [mult * x for x in a]
        for i, bi in enumerate(b):
            a[shift + i] -= sgn * la * bi
        a.pop()
        while len(a) > 1 and a[-1] == 0:
            a.pop()
        if len(a) - 1 < db:
            break
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return [-x for x in a]


def sturm_sequence(coeffs: Sequence[int]) -> List[List[int]]:
    """Sturm chain with positive rescalings, ascending integer coefficients."""
    p0 = _content_free(list(coeffs))
    p1 = _content_free([i * c for i, c in enumerate(p0)][1:] or [0])
    seq = [p0, p1]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        if len(seq[-1]) == 1:
            break
        r = _neg_prem(seq[-2], seq[-1])
        if all(x == 0 for x in r):
            break
        seq.append(_content_free_keep_sign(r))
    return seq


def _content_free_keep_sign(c: List[int]) -> List[int]:
    g = 0
    for x in c:
        g = math.gcd(g, x)
    return [x // g for x in c] if g > 1 else c


def _sign_changes(vals: Sequence[int]) -> int:
    s = [v for v in vals if v != 0]
    return sum(1 for a, b in zip(s, s[1:]) if (a > 0) != (b > 0))


def count_real_roots_univariate(p: MultiPoly, projective_degree: Optional[int] = None) -> RootReport:
    """Number of distinct real roots of p via an exact Sturm sequence.

    With ``projective_degree`` set, p is read as the chart x_0 = 1 of a binary
    form of that degree and a root at infinity is added when deg p is smaller.
    """
    c = _integer_coeffs(_to_fraction_coeffs(p))
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if len(c) == 1:
        count = 0
    else:
        seq = sturm_sequence(c)
        at_pos = [q[-1] for q in seq]
        at_neg = [q[-1] * (-1) ** (len(q) - 1) for q in seq]
        count = _sign_changes(at_neg) - _sign_changes(at_pos)
    if projective_degree is not None and p.degree < projective_degree:
        count += 1
    return RootReport(count)


# univariate: certified angular count for binary forms of high degree

def _binary_basis(d: int, theta: np.ndarray) -> np.ndarray:
    """sqrt(C(d,i)) cos^(d-i) sin^i, computed in log space, shape (len(theta), d+1)."""
    i = np.arange(d + 1)
    lc = 0.5 * (math.lgamma(d + 1) - np.array([math.lgamma(k + 1) + math.lgamma(d - k + 1)
                                               for k in i]))
    c, s = np.cos(theta), np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        lac, las = np.log(np.abs(c)), np.log(np.abs(s))
        # 0 * log 0 counts as 0
        ex = lc[None, :] + np.where(d - i > 0, (d - i)[None, :] * lac[:, None], 0.0) \
            + np.where(i > 0, i[None, :] * las[:, None], 0.0)
        mag = np.exp(ex)
    sign = np.where((d - i)[None, :] % 2 == 1, np.sign(c)[:, None], 1.0) * \
        np.where(i[None, :] % 2 == 1, np.sign(s)[:, None], 1.0)
    return mag * sign


@lru_cache(maxsize=16)
def _circle_basis(d: int) -> np.ndarray:
    Ms = 2 * d + 2
    B = _binary_basis(d, 2 * np.pi * np.arange(Ms) / Ms)
    B.setflags(write=False)
    return B


def count_binary_form_roots(a: np.ndarray) -> RootReport:
    """Real zeros on RP^1 of sum_i a_i sqrt(C(d,i)) x_0^(d-i) x_1^i.

    The form restricted to the unit circle is a trigonometric polynomial of
    degree d. Its Fourier coefficients give rigorous bounds M1 >= |f'| and
    M2 >= |f''|. A grid interval with no sign change is root free when
    |f(a)| + |f(b)| > M1 * h; one with a sign change holds exactly one root
    when |f'| > M2 * h at an endpoint. Undecided intervals are bisected.
    """
    a = np.asarray(a, dtype=float)
    d = len(a) - 1
    Ms = 2 * d + 2
    vals = _circle_basis(d) @ a
    F = np.fft.rfft(vals) / Ms
    m = np.arange(len(F))
    weight = np.where(m == 0, 1.0, 2.0)
    absF = np.abs(F) * weight
    slack = 1e-12 * absF.sum()
    M1 = float(np.sum(absF * m)) + slack
    M2 = float(np.sum(absF * m * m)) + slack
    M3 = float(np.sum(absF * m ** 3)) + slack
    N = 1 << max(8, int(math.ceil(math.log2(8.0 * d ** 1.5 + 64))))
    Fp = np.zeros(N // 2 + 1, dtype=complex)
    Fp[: len(F)] = F
    mm = np.arange(N // 2 + 1)
    f = np.fft.irfft(Fp, n=N) * N
    fp = np.fft.irfft(Fp * 1j * mm, n=N) * N
    fpp = np.fft.irfft(-Fp * mm * mm, n=N) * N
    # [0, pi) covers RP^1 once
    half = N // 2
    fa, fb = f[:half], f[1:half + 1]
    dfa, dfb = fp[:half], fp[1:half + 1]
    h = 2 * np.pi / N
    # local derivative bounds: every point of an interval is within h/2 of an endpoint
    loc1 = np.maximum(np.abs(dfa), np.abs(dfb)) + 0.5 * h * M2
    loc2 = np.maximum(np.abs(fpp[:half]), np.abs(fpp[1:half + 1])) + 0.5 * h * M3
    ml = np.arange(len(F))

    def ev(t):
        e = np.exp(1j * np.outer(t, ml))
        return (e @ (F * weight)).real, (e @ (F * weight * 1j * ml)).real

    count = 0
    certified = True
    lo = np.arange(half) * h
    change = np.sign(fa) != np.sign(fb)
    no_root = (~change) & (np.abs(fa) + np.abs(fb) > loc1 * h)
    one_root = change & ((np.abs(dfa) > loc2 * h) | (np.abs(dfb) > loc2 * h))
    if np.any(fa == 0):
        certified = False
    count += int(np.sum(one_root))
    und = ~(no_root | one_root)
    stack = [(t, h) for t in lo[und]]
    depth = 0
    while stack and depth < 40:
        ts = np.array([t for t, _ in stack])
        hs = np.array([w for _, w in stack]) / 2
        left = ts
        mid = ts + hs
        right = ts + 2 * hs
        pts = np.concatenate([left, mid, right])
        v, dv = ev(pts)
        k = len(ts)
        vl, vm, vr = v[:k], v[k:2 * k], v[2 * k:]
        dl, dm, dr = dv[:k], dv[k:2 * k], dv[2 * k:]
        new = []
        for (a0, a1, b0, b1, da0, da1, db0, db1, w, t0) in zip(
                vl, vm, vm, vr, dl, dm, dm, dr, hs, ts):
            for (x0, x1, g0, g1, s) in ((a0, a1, da0, da1, t0), (b0, b1, db0, db1, t0 + w)):
                if (x0 > 0) != (x1 > 0):
                    if abs(g0) > M2 * w or abs(g1) > M2 * w:
                        count += 1
                        continue
                elif abs(x0) + abs(x1) > M1 * w:
                    continue
                new.append((s, w))
        stack = new
        depth += 1
    if stack:
        certified = False
    return RootReport(count, certified=certified)


def kostlan_basis_coeffs(s: KostlanSample, component: int = 0) -> np.ndarray:
    """Coefficients a_i of a binary Kostlan form in the basis sqrt(C(d,i)) x_0^(d-i) x_1^i."""
    if s.n != 1:
        raise ValueError("binary forms only")
    from .ensembles import kostlan_weights
    w = kostlan_weights(2, s.d)
    # exps are (d - i, i) in lexicographic order of the first entry, i.e. i descending
    i = s.exps[:, 1]
    out = np.zeros(s.d + 1)
    out[i] = s.coefs[component] / w
    return out


# plane systems

def _hompolys(P) -> List[HomPoly]:
    if isinstance(P, KostlanSample):
        return [HomPoly(P.exps, row) for row in P.coefs]
    if isinstance(P, PolyMap):
        return [HomPoly.from_multipoly(c) for c in P.components]
    return [p if isinstance(p, HomPoly) else HomPoly.from_multipoly(p) for p in P]


def _grad_fn(p: HomPoly):
    g = p.gradient()
    return lambda x: np.array([gi(x[None])[0] for gi in g])


def _pencil_singular(S: Sequence[np.ndarray], tol: float = 1e-11) -> bool:
    """True when the Sylvester matrix is singular at three fixed random complex arguments.

    An identically vanishing resultant means a common component; LU pivots
    are a cheap singularity test at each argument.
    """
    rng = np.random.default_rng(12345)
    for _ in range(3):
        t = complex(*rng.standard_normal(2))
        M = sum(Sk * t ** k for k, Sk in enumerate(S))
        piv = np.abs(np.diag(scipy.linalg.lu(M, permute_l=True, check_finite=False)[1]))
        if piv.min() > tol * max(piv.max(), 1e-300):
            return False
    return True


def solve_plane_system(polys: Sequence[HomPoly], real: bool = True, method: str = "charts",
                       rng: Optional[np.random.Generator] = None, tol: float = 1e-9,
                       extra: Optional[Sequence[np.ndarray]] = None):
    """Zeros in RP^2 (or CP^2 when ``real`` is False) of two homogeneous polynomials.

    ``method='charts'`` solves in each of the three standard charts and keeps
    candidates with affine coordinates of modulus at most 1 (plus a small
    margin). ``method='rotated'`` uses one chart after a random orthogonal
    (unitary when complex) change of coordinates. Returns ``(points,
    residuals, n_failed)`` where ``n_failed`` counts real-looking candidates
    on which Newton's method did not converge.
    """
    f, g = polys
    fns = [f, g]
    jacs = [_grad_fn(f), _grad_fn(g)]
    degs = [f.degree, g.degree]
    scales = [max(p.abs_coef_sum(), 1e-300) for p in polys]
    if method == "charts":
        setups = [(np.eye(3), c, 1.0 + 1e-3) for c in range(3)]
    elif method == "rotated":
        if rng is None:
            raise ValueError("rotated method needs an rng")
        setups = [(bv.random_orthogonal(rng, complex_=not real), 0, None)]
    else:
        raise ValueError(f"unknown method {method!r}")
    cands = []
    for Q, chart, radius in setups:
        F = bv.chart_coefficients(f, degs[0], Q, chart)
        G = bv.chart_coefficients(g, degs[1], Q, chart)
        if real:
            F, G = F.real, G.real
        F = bv._trim(F, 1e-13)
        G = bv._trim(G, 1e-13)
        S = bv.sylvester_pencil(F, G)
        if _pencil_singular(S):
            raise DegenerateSystem("resultant vanishes identically")
        for u, v in bv.chart_candidates(F, G, real, radius=radius):
            x = Q @ bv.lift(u, v, chart)
            cands.append(x.real if real else x)
    if extra:
        cands.extend(extra)
    pts, res = [], []
    failed = 0
    for x0 in cands:
        r = bv.newton_projective(fns, jacs, x0, scales, tol=tol)
        if r.converged:
            pts.append(r.x)
            res.append(r.residual)
        else:
            failed += 1
    uniq = bv.dedupe_projective(pts)
    residuals = []
    for p in uniq:
        residuals.append(max(abs(fn(p[None])[0]) / s for fn, s in zip(fns, scales)))
    return uniq, residuals, failed


def count_projective_zeros(P, method: str = "charts", rng=None) -> RootReport:
    """Real zeros in RP^n of n homogeneous polynomials, n in {1, 2}."""
    polys = _hompolys(P)
    nv = polys[0].nvars
    n = nv - 1
    if len(polys) != n:
        raise ValueError("need k = n components")
    if n == 1:
        if isinstance(P, KostlanSample):
            return count_binary_form_roots(kostlan_basis_coeffs(P))
        mp = polys[0].to_multipoly()
        d = polys[0].degree
        return count_real_roots_univariate(dehomogenize(mp.with_degree(None), 0),
                                           projective_degree=d)
    if n != 2:
        raise ValueError("only n in {1, 2} is supported")
    if max(p.degree for p in polys) > 24:
        raise ValueError("degree above 24 is not supported")
    pts, res, failed = solve_plane_system(polys, real=True, method=method, rng=rng)
    rep = RootReport(len(pts), points=pts, residuals=res)
    if failed and method == "charts":
        # a candidate that looks real but does not converge: retry from a rotated chart
        rng2 = rng or np.random.default_rng(0)
        pts2, res2, failed2 = solve_plane_system(polys, real=True, method="rotated", rng=rng2,
                                                 extra=pts)
        rep = RootReport(len(pts2), points=pts2, residuals=res2, certified=failed2 == 0)
    elif failed:
        rep.certified = False
    rep.boxes = [(int(np.argmax(np.abs(p))), tuple(np.delete(p / p[np.argmax(np.abs(p))],
                                                        np.argmax(np.abs(p))))) for p in rep.points]
    return rep


# components of plane curves

def _sign_components(vals: np.ndarray, mesh):
    """Label crossing edges by connected component of the piecewise-linear zero set."""
    s = vals > 0
    e = mesh.edges
    cross = s[e[:, 0]] != s[e[:, 1]]
    fe = mesh.face_edges
    fc = cross[fe]
    mixed = np.any(fc, axis=1)
    pairs = fe[mixed]
    pc = fc[mixed]
    # each mixed triangle has exactly two crossing edges
    a = np.where(pc[:, 0], pairs[:, 0], pairs[:, 1])
    b = np.where(pc[:, 2], pairs[:, 2], pairs[:, 1])
    idx = np.nonzero(cross)[0]
    if len(idx) == 0:
        return idx, np.zeros(0, dtype=int), 0
    remap = -np.ones(len(e), dtype=int)
    remap[idx] = np.arange(len(idx))
    A = coo_matrix((np.ones(len(a)), (remap[a], remap[b])), shape=(len(idx), len(idx)))
    nc, labels = connected_components(A, directed=False)
    return idx, labels, nc


def _orbit_count(idx, labels, nc, mesh, merge: Sequence[Sequence[int]] = ()) -> int:
    """Components on RP^2: quotient of the sphere components by the antipodal map."""
    if nc == 0:
        return 0
    parent = list(range(nc))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    remap = -np.ones(len(mesh.edges), dtype=int)
    remap[idx] = np.arange(len(idx))
    anti = remap[mesh.antipode_edge[idx]]
    for c1, c2 in set(zip(labels.tolist(), labels[anti].tolist())):
        union(c1, c2)
    for group in merge:
        group = list(group)
        for c in group[1:]:
            union(group[0], c)
    return len({find(c) for c in range(nc)})


def _find_singular_points(p: HomPoly, seeds: np.ndarray, tol: float = 1e-10) -> List[np.ndarray]:
    """Gauss-Newton for grad p = 0 on the unit sphere, all seeds at once."""
    grads = p.gradient()
    hess = [[gi.derivative(j) for j in range(3)] for gi in grads]
    scale = max(p.abs_coef_sum(), 1e-300) * max(p.degree, 1)
    X = np.array(seeds, dtype=float).reshape(-1, 3)
    for _ in range(25):
        r = np.stack([gi(X).real for gi in grads], axis=1) / scale
        H = np.stack([np.stack([h(X).real for h in row], axis=1) for row in hess], axis=1) / scale
        J = np.concatenate([H, 2 * X[:, None, :]], axis=1)
        rr = np.concatenate([r, (np.sum(X * X, axis=1) - 1)[:, None]], axis=1)
        # normal equations of the 4 x 3 least-squares step
        JT = np.swapaxes(J, 1, 2)
        A = JT @ J + 1e-300 * np.eye(3)
        try:
            dx = np.linalg.solve(A, -(JT @ rr[:, :, None]))[:, :, 0]
        except np.linalg.LinAlgError:
            break
        X = X + dx
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        if np.max(np.abs(dx)) < 1e-14:
            break
    r = np.stack([gi(X).real for gi in grads], axis=1) / scale
    found = [x for x, ok in zip(X, np.max(np.abs(r), axis=1) < tol) if ok]
    return bv.dedupe_projective(found, 1e-6)


def count_components_rp2(p, resolution: int = 2 ** 14, max_resolution: int = 2 ** 20,
                         check_singular: bool = True) -> ComponentReport:
    """Connected components of {p = 0} in RP^2 for a homogeneous p in 3 variables.

    Signs of p on the vertices of an icosahedral mesh define a
    piecewise-linear approximation of the zero set on S^2; its components
    are found by union-find over crossing edges and then identified under
    x -> -x. The mesh is refined uniformly until two successive levels agree.
    Singular points of the curve (where the whole gradient vanishes) are
    located by Gauss-Newton; branches meeting at one are merged and the
    report is marked uncertified.
    """
    hp = p if isinstance(p, HomPoly) else HomPoly.from_multipoly(p)
    if hp.nvars != 3:
        raise ValueError("expected a polynomial in 3 variables")
    if hp.degree > 24:
        raise ValueError("degree above 24 is not supported")
    L0 = level_for_faces(resolution)
    Lmax = level_for_faces(max_resolution)
    vals = None
    history: List[Tuple[int, int]] = []
    singular: List[np.ndarray] = []
    prev = None
    L = L0
    while True:
        mesh = sphere_mesh(L)
        nv = mesh.vertices.shape[0]
        if vals is None:
            vals = hp(mesh.vertices).real
        elif len(vals) < nv:
            vals = np.concatenate([vals, hp(mesh.vertices[len(vals):]).real])
        idx, labels, nc = _sign_components(vals[:nv], mesh)
        merge = []
        if check_singular and nc:
            e = mesh.edges[idx]
            mids = mesh.vertices[e[:, 0]] + mesh.vertices[e[:, 1]]
            mids /= np.linalg.norm(mids, axis=1, keepdims=True)
            if L == L0:
                g = np.stack([gi(mids).real for gi in hp.gradient()], axis=1)
                gt = g - np.sum(g * mids, axis=1, keepdims=True) * mids
                gn = np.linalg.norm(gt, axis=1)
                scale = np.max(np.abs(vals)) * max(hp.degree, 1)
                small = np.nonzero(gn < 4 * mesh.edge_length * scale * hp.degree)[0]
                order = small[np.argsort(gn[small])][:24]
                singular = _find_singular_points(hp, mids[order]) if len(order) else []
            for sp in singular:
                near = np.nonzero(np.minimum(np.linalg.norm(mids - sp, axis=1),
                                             np.linalg.norm(mids + sp, axis=1))
                                  < 3 * mesh.edge_length)[0]
                if len(near):
                    merge.append(sorted(set(labels[near].tolist())))
        b0 = _orbit_count(idx, labels, nc, mesh, merge)
        history.append((mesh.n_faces, b0))
        if prev is not None and prev == b0:
            return ComponentReport(b0, mesh.n_faces, not singular, history, singular)
        if L >= Lmax:
            return ComponentReport(b0, mesh.n_faces, False, history, singular)
        prev = b0
        L += 1


def estimate_component_density(d: int, n_trials: int, seed: int,
                               resolution: int = 2 ** 14, scale: float = 1.0):
    """Mean b0/d over Kostlan plane curves of degree d.

    Returns ``(estimate, rows)``; rows have keys trial, seed, count,
    certified, discarded_reason. Raises when more than 5% of trials are
    uncertified.
    """
    rows = []
    vals = []
    unc = 0
    for t in range(n_trials):
        s = sample_kostlan_rng(2, d, 1, rng_for(seed, t)).scaled(scale)
        rep = count_components_rp2(HomPoly(s.exps, s.coefs[0]), resolution)
        if not rep.certified:
            unc += 1
        rows.append({"trial": t, "seed": seed, "count": rep.b0,
                     "certified": rep.certified, "discarded_reason": ""})
        vals.append(rep.b0 / d)
    if unc > 0.05 * n_trials:
        raise RuntimeError(f"{unc} of {n_trials} component counts uncertified")
    est = MomentEstimate.from_samples(f"E(b0)/d(d={d})", np.array(vals), seed)
    return est, rows


def kostlan_root_counts(n: int, d: int, n_trials: int, seed: int, method: str = "charts"):
    """Real zero counts of Kostlan systems with k = n; returns (estimate, rows).

    Degenerate systems are resampled from the same stream. Rows record the
    solver's certification flag and whether the count has the parity of d^n;
    the parity is reported, not enforced.
    """
    rows, vals = [], []
    for t in range(n_trials):
        rng = rng_for(seed, t)
        reason = ""
        for attempt in range(5):
            s = sample_kostlan_rng(n, d, n, rng)
            try:
                rep = count_projective_zeros(s, method=method, rng=rng)
                break
            except DegenerateSystem:
                reason = "resampled"
        else:
            raise RuntimeError("repeated degenerate systems")
        # real zeros come with their complex conjugates removed in pairs, so the
        # count has the parity of the Bezout number d^n
        parity_ok = rep.count % 2 == (d ** n) % 2
        rows.append({"trial": t, "seed": seed, "count": rep.count, "certified": rep.certified,
                     "parity_ok": parity_ok, "discarded_reason": reason})
        vals.append(rep.count)
    est = MomentEstimate.from_samples(f"E#zeros(n={n},d={d})", np.array(vals, dtype=float), seed)
    return est, rows
