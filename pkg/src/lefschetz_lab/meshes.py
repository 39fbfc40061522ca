"""Triangulations of the catalog models.

All meshes are symmetric under the boundary isometries used by the
catalog maps: quads are split along alternating diagonals (parity of
layer + angular index), which is invariant under reflections, ring
reversal and rotations by an even number of angular steps.  Angular
resolutions are therefore even.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

TWO_PI = 2 * math.pi


def layered_nodes(collar: float, n_collar: int, n_inner: int, both_ends: bool) -> np.ndarray:
    """Nodes on [0, 1] with the collar [0, collar] (and [1-collar, 1]) subdivided."""
    parts = [np.linspace(0.0, collar, n_collar + 1)]
    if both_ends:
        parts.append(np.linspace(collar, 1 - collar, n_inner + 1)[1:])
        parts.append(np.linspace(1 - collar, 1.0, n_collar + 1)[1:])
    else:
        parts.append(np.linspace(collar, 1.0, n_inner + 1)[1:])
    return np.concatenate(parts)


def interval_mesh(nodes: np.ndarray):
    verts = nodes.reshape(-1, 1)
    edges = [(i, i + 1) for i in range(len(nodes) - 1)]
    labels = [("x", i) for i in range(len(nodes))]
    return verts, edges, labels


def _quad_split(a, b, c, d, kind):
    """Quad with corners a=(i,j), b=(i,j+1), c=(i+1,j+1), d=(i+1,j)."""
    if kind == 0:
        return [(a, b, c), (a, c, d)]
    return [(a, b, d), (b, c, d)]


def disk_mesh(radii: Sequence[float], n_ang: int):
    """Center vertex plus rings at ``radii`` (last = 1), ``n_ang`` vertices each."""
    labels = [("c",)]
    verts = [(0.0, 0.0)]
    idx: Dict[tuple, int] = {("c",): 0}
    for i, r in enumerate(radii, start=1):
        for j in range(n_ang):
            t = TWO_PI * j / n_ang
            idx[("r", i, j)] = len(labels)
            labels.append(("r", i, j))
            verts.append((r * math.cos(t), r * math.sin(t)))
    tris = []
    for j in range(n_ang):
        jn = (j + 1) % n_ang
        tris.append((0, idx[("r", 1, j)], idx[("r", 1, jn)]))
    for i in range(1, len(radii)):
        for j in range(n_ang):
            jn = (j + 1) % n_ang
            a, b = idx[("r", i, j)], idx[("r", i, jn)]
            c, d = idx[("r", i + 1, jn)], idx[("r", i + 1, j)]
            tris.extend(_quad_split(a, b, c, d, (i + j) % 2))
    return np.array(verts), tris, labels


def annulus_mesh(s_nodes: Sequence[float], n_ang: int):
    labels, verts = [], []
    idx: Dict[tuple, int] = {}
    for i, s in enumerate(s_nodes):
        for j in range(n_ang):
            idx[("r", i, j)] = len(labels)
            labels.append(("r", i, j))
            verts.append((s, TWO_PI * j / n_ang))
    tris = []
    for i in range(len(s_nodes) - 1):
        for j in range(n_ang):
            jn = (j + 1) % n_ang
            a, b = idx[("r", i, j)], idx[("r", i, jn)]
            c, d = idx[("r", i + 1, jn)], idx[("r", i + 1, j)]
            tris.extend(_quad_split(a, b, c, d, (i + j) % 2))
    return np.array(verts), tris, labels


def _mean_angle(angles: Sequence[float]) -> float:
    base = angles[0]
    offs = [((a - base + math.pi) % TWO_PI) - math.pi for a in angles]
    return (base + sum(offs) / len(offs)) % TWO_PI


def _polar_mean(points):
    """Mean in polar coordinates, so cells in a radial layer keep their centers inside it."""
    points = np.asarray(points, float)
    radii = np.hypot(points[:, 0], points[:, 1])
    if radii.min() < 1e-12:
        return points.mean(axis=0)
    t = _mean_angle(list(np.arctan2(points[:, 1], points[:, 0])))
    r = radii.mean()
    return np.array([r * math.cos(t), r * math.sin(t)])


def solid_torus_mesh(radii: Sequence[float], n_ang: int, n_phi: int):
    """Disk mesh times a circle of ``n_phi`` layers.

    Each prism (triangle x layer interval) is coned from its center over
    its two triangles and its three vertical quads, each quad being coned
    from its own center.  This is invariant under any symmetry of the
    disk mesh combined with any dihedral symmetry of the layers.
    """
    dverts, dtris, dlabels = disk_mesh(radii, n_ang)
    phis = [TWO_PI * l / n_phi for l in range(n_phi)]
    labels: List[tuple] = []
    verts: List[Tuple[float, float, float]] = []
    idx: Dict[tuple, int] = {}

    def add(lab, p):
        idx[lab] = len(labels)
        labels.append(lab)
        verts.append(p)

    for l in range(n_phi):
        for k, lab in enumerate(dlabels):
            add(("v", lab, l), (dverts[k, 0], dverts[k, 1], phis[l]))
    edges = set()
    for t in dtris:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
            edges.add((min(a, b), max(a, b)))
    edges = sorted(edges)
    for l in range(n_phi):
        ph = _mean_angle([phis[l], phis[(l + 1) % n_phi]])
        for a, b in edges:
            m = _polar_mean(dverts[[a, b]])
            add(("q", frozenset((dlabels[a], dlabels[b])), l), (m[0], m[1], ph))
        for t in dtris:
            m = _polar_mean(dverts[list(t)])
            add(("p", frozenset(dlabels[v] for v in t), l), (m[0], m[1], ph))
    tets = []
    for l in range(n_phi):
        ln = (l + 1) % n_phi
        for t in dtris:
            p = idx[("p", frozenset(dlabels[v] for v in t), l)]
            lo = [idx[("v", dlabels[v], l)] for v in t]
            hi = [idx[("v", dlabels[v], ln)] for v in t]
            tets.append((p, *lo))
            tets.append((p, *hi))
            for x, y in ((0, 1), (1, 2), (0, 2)):
                qc = idx[("q", frozenset((dlabels[t[x]], dlabels[t[y]])), l)]
                ring = [lo[x], lo[y], hi[y], hi[x]]
                for k in range(4):
                    tets.append((p, qc, ring[k], ring[(k + 1) % 4]))
    return np.array(verts), tets, labels
