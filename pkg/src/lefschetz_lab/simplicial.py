"""Oriented simplicial complexes with a boundary subcomplex and exact
(co)homology over the rationals."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exact import Column, Reduction, antitranspose, matmul_is_zero, reduce_columns

Simplex = Tuple[int, ...]


class SimplicialError(ValueError):
    pass


def _faces(s: Simplex) -> List[Tuple[int, Simplex]]:
    return [((-1) ** i, s[:i] + s[i + 1:]) for i in range(len(s))]


@dataclass
class ChainComplex:
    """Chain complex C_0 <- C_1 <- ... <- C_m given by boundary columns.

    ``boundaries[q]`` holds the columns of d_q : C_q -> C_{q-1} (entry 0 is
    empty).  ``labels[q]`` names the basis simplices of C_q.
    """

    labels: List[List[Simplex]]
    boundaries: List[List[Column]]

    @property
    def top(self) -> int:
        return len(self.labels) - 1

    def size(self, q: int) -> int:
        return len(self.labels[q]) if 0 <= q <= self.top else 0

    def coboundaries(self) -> List[List[Column]]:
        """Columns of delta_q : C^q -> C^{q+1}, i.e. transposes of d_{q+1}."""
        out = []
        for q in range(self.top + 1):
            cols: List[Column] = [dict() for _ in range(self.size(q))]
            if q < self.top:
                for j, col in enumerate(self.boundaries[q + 1]):
                    for i, v in col.items():
                        cols[i][j] = v
            out.append(cols)
        return out

    def is_complex(self) -> bool:
        return all(matmul_is_zero(self.boundaries[q - 1], self.boundaries[q])
                   for q in range(2, self.top + 1))

    def cochain_is_complex(self) -> bool:
        cob = self.coboundaries()
        return all(matmul_is_zero(cob[q + 1], cob[q]) for q in range(self.top - 1))


@dataclass
class HomologyData:
    """Betti numbers with matched cycle and cocycle representatives."""

    betti: List[int]
    ranks: List[int]
    cycles: List[List[Column]]
    cocycles: List[List[Column]]
    pairing: List[List[List[Fraction]]]


def compute_homology(cc: ChainComplex) -> HomologyData:
    m = cc.top
    sizes = [cc.size(q) for q in range(m + 1)]
    red: List[Optional[Reduction]] = [None] * (m + 2)
    clear: set = set()
    for q in range(m, 0, -1):
        red[q] = reduce_columns(cc.boundaries[q], sizes[q - 1], skip=clear)
        clear = set(red[q].pivot_of_row)
    ranks = [0] + [red[q].rank for q in range(1, m + 1)] + [0]
    betti = [sizes[q] - ranks[q] - ranks[q + 1] for q in range(m + 1)]

    cycles: List[List[Column]] = []
    for q in range(m + 1):
        killed = set(red[q + 1].pivot_of_row) if q < m else set()
        reps = []
        for j in range(sizes[q]):
            if j in killed:
                continue
            if q == 0:
                reps.append({j: Fraction(1)})
            elif not red[q].reduced[j] and red[q].combos[j] is not None:
                reps.append(red[q].combos[j])
        cycles.append(reps)

    # cocycles: reduce the anti-transposed coboundaries (reverse orders)
    cored: List[Optional[Reduction]] = [None] * (m + 1)
    for q in range(m):
        cored[q] = reduce_columns(antitranspose(cc.boundaries[q + 1], sizes[q]), sizes[q + 1])
    cocycles: List[List[Column]] = []
    for q in range(m + 1):
        n = sizes[q]
        killed = set()
        if q > 0:
            killed = {sizes[q] - 1 - r for r in cored[q - 1].pivot_of_row}
        reps = []
        for j in range(n):
            if j in killed:
                continue
            if q == m:
                reps.append({j: Fraction(1)})
                continue
            jj = n - 1 - j
            if not cored[q].reduced[jj]:
                reps.append({n - 1 - k: v for k, v in cored[q].combos[jj].items()})
        cocycles.append(reps)

    pairing = []
    for q in range(m + 1):
        if len(cycles[q]) != betti[q] or len(cocycles[q]) != betti[q]:
            raise SimplicialError(f"representative count mismatch in degree {q}")
        pairing.append([[_dot(h, z) for z in cycles[q]] for h in cocycles[q]])
    return HomologyData(betti, ranks[: m + 1], cycles, cocycles, pairing)


def _dot(a: Column, b: Column) -> Fraction:
    if len(a) > len(b):
        a, b = b, a
    return sum((v * b[k] for k, v in a.items() if k in b), Fraction(0))


class SimplicialComplex:
    """Pure oriented simplicial manifold with boundary.

    Parameters
    ----------
    vertices : (n, d) chart coordinates of the vertices.
    top : top-dimensional simplices as vertex tuples.
    labels : hashable label per vertex, used to express vertex maps.
    periodic : per chart coordinate, period (``None`` if not periodic).
    """

    def __init__(self, vertices: np.ndarray, top: Sequence[Sequence[int]],
                 labels: Sequence, periodic: Sequence[Optional[float]]):
        self.vertices = np.asarray(vertices, dtype=float)
        self.labels = list(labels)
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.label_index) != len(self.labels):
            raise SimplicialError("duplicate vertex labels")
        self.periodic = list(periodic)
        tops = sorted({tuple(sorted(s)) for s in top})
        if len(tops) != len(top):
            raise SimplicialError("duplicate top simplices")
        self.dim = len(tops[0]) - 1
        simplices: List[set] = [set() for _ in range(self.dim + 1)]
        for s in tops:
            for k in range(1, self.dim + 2):
                simplices[k - 1].update(combinations(s, k))
        self.simplices: List[List[Simplex]] = [sorted(s) for s in simplices]
        self.index: List[Dict[Simplex, int]] = [
            {s: i for i, s in enumerate(ss)} for ss in self.simplices]
        self._boundary_subcomplex()

    # -- structure ---------------------------------------------------------
    def _boundary_subcomplex(self) -> None:
        count: Dict[Simplex, int] = {}
        for s in self.simplices[self.dim]:
            for _, f in _faces(s):
                count[f] = count.get(f, 0) + 1
        if any(v > 2 for v in count.values()):
            raise SimplicialError("facet shared by more than two top simplices")
        facets = [f for f, v in count.items() if v == 1]
        self.boundary_facets = sorted(facets)
        bnd: List[set] = [set() for _ in range(self.dim + 1)]
        for f in facets:
            for k in range(1, len(f) + 1):
                bnd[k - 1].update(combinations(f, k))
        self.on_boundary: List[set] = bnd

    def chart_diff(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = np.asarray(a, float) - np.asarray(b, float)
        for k, per in enumerate(self.periodic):
            if per:
                d[..., k] = (d[..., k] + per / 2) % per - per / 2
        return d

    def chart_volume(self, s: Simplex) -> float:
        """Signed volume (times m!) of a top simplex in chart coordinates."""
        p = self.vertices[list(s)]
        e = self.chart_diff(p[1:], p[0])
        return float(np.linalg.det(e.T)) if self.dim > 1 else float(e[0, 0])

    @cached_property
    def top_orientation(self) -> Dict[Simplex, int]:
        """Coherent orientation of the top simplices.

        Propagated across shared facets from the best-conditioned simplex,
        whose sign is taken from the chart; chart volumes elsewhere are not
        trusted since cells may be curved in the chart.
        """
        tops = self.simplices[self.dim]
        vols = [self.chart_volume(s) for s in tops]
        seed = int(np.argmax(np.abs(vols)))
        if abs(vols[seed]) < 1e-14:
            raise SimplicialError("all simplices are degenerate in the chart")
        by_facet: Dict[Simplex, List[Tuple[int, int]]] = {}
        for k, s in enumerate(tops):
            for sign, f in _faces(s):
                by_facet.setdefault(f, []).append((k, sign))
        orient = [0] * len(tops)
        orient[seed] = 1 if vols[seed] > 0 else -1
        stack = [seed]
        while stack:
            k = stack.pop()
            for sign, f in _faces(tops[k]):
                for k2, sign2 in by_facet[f]:
                    if k2 == k:
                        continue
                    want = -sign * orient[k] * sign2
                    if orient[k2] == 0:
                        orient[k2] = want
                        stack.append(k2)
                    elif orient[k2] != want:
                        raise SimplicialError("triangulation is not orientable")
        if 0 in orient:
            raise SimplicialError("triangulation is not connected")
        return dict(zip(tops, orient))

    def check_oriented_manifold(self) -> None:
        """Interior facets must receive opposite induced orientations."""
        induced: Dict[Simplex, int] = {}
        for s, o in self.top_orientation.items():
            for sign, f in _faces(s):
                induced[f] = induced.get(f, 0) + sign * o
        for f, v in induced.items():
            if f in self.on_boundary[self.dim - 1]:
                if abs(v) != 1:
                    raise SimplicialError(f"bad boundary facet {f}")
            elif v != 0:
                raise SimplicialError(f"incoherent orientation across facet {f}")

    def boundary_facet_orientation(self) -> Dict[Simplex, int]:
        """Induced (outward-normal-first) orientation sign of each boundary facet."""
        out: Dict[Simplex, int] = {}
        for s, o in self.top_orientation.items():
            for sign, f in _faces(s):
                if f in self.on_boundary[self.dim - 1]:
                    out[f] = sign * o
        return out

    # -- chain complexes ---------------------------------------------------
    def chain_complex(self, relative: bool = False) -> ChainComplex:
        labels: List[List[Simplex]] = []
        index: List[Dict[Simplex, int]] = []
        for q in range(self.dim + 1):
            if relative:
                ss = [s for s in self.simplices[q] if s not in self.on_boundary[q]]
            else:
                ss = list(self.simplices[q])
            labels.append(ss)
            index.append({s: i for i, s in enumerate(ss)})
        boundaries: List[List[Column]] = [[{} for _ in labels[0]]]
        for q in range(1, self.dim + 1):
            cols = []
            for s in labels[q]:
                col: Column = {}
                for sign, f in _faces(s):
                    i = index[q - 1].get(f)
                    if i is not None:
                        col[i] = Fraction(sign)
                cols.append(col)
            boundaries.append(cols)
        return ChainComplex(labels, boundaries)

    @cached_property
    def absolute(self) -> ChainComplex:
        return self.chain_complex(relative=False)

    @cached_property
    def relative(self) -> ChainComplex:
        return self.chain_complex(relative=True)

    @cached_property
    def absolute_homology(self) -> HomologyData:
        return compute_homology(self.absolute)

    @cached_property
    def relative_homology(self) -> HomologyData:
        return compute_homology(self.relative)

    # -- vertex maps -------------------------------------------------------
    def push_simplex(self, vmap: Sequence[int], s: Simplex) -> Tuple[int, Optional[Simplex]]:
        """Image of an oriented simplex: (sign, sorted image) or (0, None) if degenerate."""
        img = [vmap[v] for v in s]
        if len(set(img)) < len(img):
            return 0, None
        order = sorted(range(len(img)), key=img.__getitem__)
        sign = _perm_sign(order)
        t = tuple(img[i] for i in order)
        if t not in self.index[len(t) - 1]:
            raise SimplicialError(f"vertex map is not simplicial: {s} -> {tuple(img)}")
        return sign, t

    def validate_vertex_map(self, vmap: Sequence[int]) -> None:
        if len(vmap) != len(self.labels):
            raise SimplicialError("vertex map has wrong length")
        for s in self.simplices[self.dim]:
            self.push_simplex(vmap, s)
        for q in range(self.dim):
            for s in self.on_boundary[q]:
                _, t = self.push_simplex(vmap, s)
                if t is not None and t not in self.on_boundary[q]:
                    raise SimplicialError(f"vertex map is not boundary-preserving at {s}")
        for v in self.on_boundary[0]:
            if (vmap[v[0]],) not in self.on_boundary[0]:
                raise SimplicialError(f"boundary vertex {v[0]} leaves the boundary")

    def to_off(self) -> str:
        """OFF-style text: vertex coordinates and top simplices as faces."""
        lines = ["OFF", f"{len(self.vertices)} {len(self.simplices[self.dim])} 0"]
        for p in self.vertices:
            xyz = list(p) + [0.0] * (3 - len(p))
            lines.append(" ".join(f"{x:.12g}" for x in xyz[:3]))
        for s in self.simplices[self.dim]:
            lines.append(f"{len(s)} " + " ".join(str(v) for v in s))
        return "\n".join(lines) + "\n"


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = list(order)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign
