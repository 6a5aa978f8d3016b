"""Icosahedral triangulations of the unit sphere with antipodal bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import numpy as np


@dataclass(frozen=True)
class SphereMesh:
    level: int
    vertices: np.ndarray      # (V, 3), unit vectors
    faces: np.ndarray         # (F, 3) vertex indices
    edges: np.ndarray         # (E, 2) vertex indices, sorted pairs
    face_edges: np.ndarray    # (F, 3) edge indices
    antipode_vertex: np.ndarray
    antipode_edge: np.ndarray

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def edge_length(self) -> float:
        a, b = self.vertices[self.edges[0, 0]], self.vertices[self.edges[0, 1]]
        return float(np.linalg.norm(a - b))


def _icosahedron():
    t = (1.0 + 5 ** 0.5) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]], dtype=int)
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def _subdivide(v: np.ndarray, f: np.ndarray):
    e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(e, axis=0, return_inverse=True)
    inv = inv.ravel()
    mid = v[uniq[:, 0]] + v[uniq[:, 1]]
    mid /= np.linalg.norm(mid, axis=1, keepdims=True)
    nv = v.shape[0]
    F = f.shape[0]
    m01 = nv + inv[:F]
    m12 = nv + inv[F:2 * F]
    m20 = nv + inv[2 * F:]
    a, b, c = f[:, 0], f[:, 1], f[:, 2]
    nf = np.concatenate([
        np.stack([a, m01, m20], 1), np.stack([b, m12, m01], 1),
        np.stack([c, m20, m12], 1), np.stack([m01, m12, m20], 1)])
    return np.vstack([v, mid]), nf


def _antipodes(v: np.ndarray) -> np.ndarray:
    key = {tuple(np.round(p, 9)): i for i, p in enumerate(v)}
    out = np.empty(v.shape[0], dtype=int)
    for i, p in enumerate(v):
        out[i] = key[tuple(np.round(-p, 9) + 0.0)]
    return out


@lru_cache(maxsize=None)
def sphere_mesh(level: int) -> SphereMesh:
    """Icosahedron subdivided ``level`` times (20 * 4**level faces).

    Vertices of level L are a prefix of the vertices of level L + 1.
    """
    if level == 0:
        v, f = _icosahedron()
    else:
        prev = sphere_mesh(level - 1)
        v, f = _subdivide(prev.vertices, prev.faces)
    e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    edges, inv = np.unique(e, axis=0, return_inverse=True)
    inv = inv.ravel()
    F = f.shape[0]
    face_edges = np.stack([inv[:F], inv[F:2 * F], inv[2 * F:]], axis=1)
    if level == 0:
        av = _antipodes(v)
    else:
        prev = sphere_mesh(level - 1)
        av = np.empty(v.shape[0], dtype=int)
        av[: prev.vertices.shape[0]] = prev.antipode_vertex
        # midpoints are appended in the order of prev.edges, so a midpoint's
        # antipode is the midpoint of the antipodal edge
        nv = prev.vertices.shape[0]
        av[nv:] = nv + prev.antipode_edge
    ae_pairs = np.sort(av[edges], axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    sorted_edges = edges[order]
    keys = ae_pairs[:, 0].astype(np.int64) * (v.shape[0] + 1) + ae_pairs[:, 1]
    skeys = sorted_edges[:, 0].astype(np.int64) * (v.shape[0] + 1) + sorted_edges[:, 1]
    pos = np.searchsorted(skeys, keys)
    antipode_edge = order[pos]
    for arr in (v, f, edges, face_edges, av, antipode_edge):
        arr.setflags(write=False)
    return SphereMesh(level, v, f, edges, face_edges, av, antipode_edge)


def level_for_faces(n_faces: int) -> int:
    """Smallest level whose face count is at least ``n_faces``."""
    L = 0
    while 20 * 4 ** L < n_faces:
        L += 1
    return L
