"""Kac-Rice value of E #Crit(p restricted to the Kostlan curve) / (2d) at finite d.

Independent of the polynomial solver: uses the O(3)-invariance of the Kostlan
ensemble, under which the ambient 2-jet of sigma at x in an orthonormal frame
(x, t1, t2) has explicit independent Gaussian entries. Prints the per-index
density for several d and, without arguments, freezes them in kac_rice.json:

    python3 tests/oracles/kac_rice_crit.py
"""
import json
import math
import pathlib
import sys

import numpy as np

A = np.array([1.0, 2.0, 3.0])
B = np.array([1.0, 1.0, 1.0])


def fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = math.pi * (1 + 5 ** 0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def frame(x):
    a = np.array([1.0, 0, 0]) if abs(x[0]) < 0.9 else np.array([0, 1.0, 0])
    t1 = np.cross(x, a)
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(x, t1)


def density_at(x, d, n_inner, rng):
    t1, t2 = frame(x)
    T = np.array([x, t1, t2])            # rows: frame vectors
    w = np.cross(2 * A * x, 2 * B * x)   # grad A x grad B
    wt = np.array([w @ t1, w @ t2])
    nw = np.linalg.norm(wt)
    if nw < 1e-12:
        return 0.0
    w_frame = T @ w                      # (w0, w1, w2)
    # joint density of (sigma(x), h(x)) at 0: sigma ~ N(0, 1/2), h = b . wt with b ~ N(0, d/2)
    p00 = 1 / math.sqrt(math.pi) / math.sqrt(2 * math.pi * (d / 2) * nw * nw)
    nperp = np.array([-wt[1], wt[0]]) / nw
    beta = rng.standard_normal(n_inner) * math.sqrt(d / 2)
    b = beta[:, None] * nperp[None, :]   # tangential gradient, conditioned on h = 0
    s11 = rng.standard_normal(n_inner) * math.sqrt(d * (d - 1))
    s22 = rng.standard_normal(n_inner) * math.sqrt(d * (d - 1))
    s12 = rng.standard_normal(n_inner) * math.sqrt(d * (d - 1) / 2)
    C = np.stack([np.stack([s11, s12], 1), np.stack([s12, s22], 1)], 1)  # (N, 2, 2)
    g_amb = b[:, 0:1] * t1 + b[:, 1:2] * t2
    rows = []
    for j, t in enumerate((t1, t2)):
        # t_j^T H w with H in frame coordinates: H_j0 = (d-1) b_j, H_jk = C_jk
        Hw = (d - 1) * b[:, j] * w_frame[0] + C[:, j, 0] * w_frame[1] + C[:, j, 1] * w_frame[2]
        dw = np.cross(2 * A * t, 2 * B * x) + np.cross(2 * A * x, 2 * B * t)
        rows.append(Hw + g_amb @ dw)
    dh = np.stack(rows, 1)               # (N, 2)
    det = b[:, 0] * dh[:, 1] - b[:, 1] * dh[:, 0]
    return p00 * float(np.mean(np.abs(det)))


def per_index_density(d, n_outer=3000, n_inner=4000, seed=0):
    rng = np.random.default_rng(seed)
    X = fibonacci_sphere(n_outer)
    vals = np.array([density_at(x, d, n_inner, rng) for x in X])
    total_sphere = 4 * math.pi * vals.mean()
    total_rp2 = total_sphere / 2
    return total_rp2 / (2 * d)


if __name__ == "__main__":
    ds = [int(a) for a in sys.argv[1:]] or [4, 6, 10, 20, 30, 100, 1000, 100000]
    print("asymptotic sqrt(2)/pi =", math.sqrt(2) / math.pi)
    out = {}
    for d in ds:
        out[str(d)] = per_index_density(d)
        print(d, out[str(d)])
    if not sys.argv[1:]:
        path = pathlib.Path(__file__).with_name("kac_rice.json")
        path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
