"""Absolute and relative cohomology, induced traces and Lefschetz numbers.

Two independent routes compute the traces of f* on H^q(M) and H^q(M, Y):

* simplicial: exact rational traces of a boundary-preserving simplicial
  approximation, via matched cycle and cocycle representatives;
* analytic: periods of pulled-back generator forms over homology cycles,
  the degree as a signed preimage count, and the remaining relative
  traces from the cup-product duality ``t_rel(q) = deg * Tr(A_{m-q}^{-1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import exact
from .catalog import CatalogError, ModelManifold
from .forms import integrate
from .selfmap import FixedPointSearchError, SelfMap, preimages
from .simplicial import ChainComplex, SimplicialError

Number = Union[Fraction, float]


class TraceError(ValueError):
    pass


@dataclass
class CochainComplexRep:
    """Cochain complex over the rationals; relative = cochains vanishing on the boundary."""

    flavor: str
    sizes: List[int]
    coboundaries: List[List[exact.Column]]
    betti: List[int]
    chains: ChainComplex = field(repr=False)

    def d_squared_zero(self) -> bool:
        return self.chains.cochain_is_complex() and self.chains.is_complex()


def build_cochain_complexes(model: ModelManifold) -> Tuple[CochainComplexRep, CochainComplexRep]:
    tri = model.triangulation
    out = []
    for flavor, cc, hom, declared in (
            ("absolute", tri.absolute, tri.absolute_homology, model.descriptor.betti_abs),
            ("relative", tri.relative, tri.relative_homology, model.descriptor.betti_rel)):
        if tuple(hom.betti) != tuple(declared):
            raise CatalogError(f"{flavor} betti {hom.betti} differ from catalog {declared}")
        rep = CochainComplexRep(flavor, [cc.size(q) for q in range(cc.top + 1)], cc.coboundaries(),
                                list(hom.betti), cc)
        out.append(rep)
    return out[0], out[1]


@dataclass
class TraceTable:
    """Per-degree traces of f* on H^q(M) and H^q(M, Y)."""

    absolute: List[Number]
    relative: List[Number]
    route: str
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.absolute + self.relative)

    def as_dict(self) -> dict:
        conv = (lambda x: str(x)) if self.exact else float
        return {"route": self.route, "absolute": [conv(x) for x in self.absolute],
                "relative": [conv(x) for x in self.relative]}


def _push_chain(tri, cc: ChainComplex, q: int, vmap: Sequence[int], chain: exact.Column) -> exact.Column:
    index = {s: i for i, s in enumerate(cc.labels[q])}
    out: exact.Column = {}
    for j, v in chain.items():
        sign, img = tri.push_simplex(vmap, cc.labels[q][j])
        if not sign:
            continue
        k = index.get(img)
        if k is None:
            continue  # lands in the boundary subcomplex: zero as a relative chain
        out[k] = out.get(k, Fraction(0)) + sign * v
        if out[k] == 0:
            del out[k]
    return out


def induced_trace_simplicial(model: ModelManifold, vertex_map: Sequence[int]) -> TraceTable:
    """Exact traces of the map induced by a simplicial vertex map."""
    tri = model.triangulation
    try:
        tri.validate_vertex_map(vertex_map)
    except SimplicialError as exc:
        raise TraceError(str(exc)) from exc
    tables = []
    for cc, hom in ((tri.absolute, tri.absolute_homology), (tri.relative, tri.relative_homology)):
        traces = []
        for q in range(cc.top + 1):
            if not hom.betti[q]:
                traces.append(Fraction(0))
                continue
            images = [_push_chain(tri, cc, q, vertex_map, z) for z in hom.cycles[q]]
            mat = [[exact.dot(h, w) for w in images] for h in hom.cocycles[q]]
            traces.append(exact.trace_of_quotient(mat, hom.pairing[q]))
        tables.append(traces)
    return TraceTable(tables[0], tables[1], "simplicial")


# ---------------------------------------------------------------------------
# analytic route


def _period_matrix(model: ModelManifold, q: int, f: Optional[SelfMap]) -> np.ndarray:
    gens = model.generators("abs")[q]
    cycles = model.cycles("abs")[q]
    out = np.zeros((len(gens), len(cycles)))
    for i, w in enumerate(gens):
        for j, z in enumerate(cycles):
            if q == 0:
                pts, _ = z.param(np.zeros((1, 0)))
                if f is not None:
                    pts = f(pts)
                out[i, j] = w.evaluate(pts, np.zeros((1, model.dim, 0)))[0]
            else:
                out[i, j] = integrate(w, z, pullback=f)
    return out


def absolute_matrix(model: ModelManifold, f: SelfMap, q: int, max_condition: float = 1e6) -> np.ndarray:
    """Matrix A of f* on H^q(M) in the generator basis: f* w_i = sum_k A_ki w_k."""
    p = _period_matrix(model, q, None)
    if p.size == 0:
        return p
    if np.linalg.cond(p) > max_condition:
        raise TraceError(f"period matrix for H^{q} is ill-conditioned")
    qm = _period_matrix(model, q, f)
    return np.linalg.solve(p.T, qm.T)


def map_degree(model: ModelManifold, f: SelfMap, retries: int = 5, seed: int = 0,
               grid_resolution: int = 48) -> Tuple[float, dict]:
    """Degree of f as a signed preimage count at a regular interior value.

    Falls back to the integral of the pulled-back top relative generator
    when no regular value is found after ``retries`` perturbations.
    """
    rng = np.random.default_rng(seed)
    base = model.regular_value()
    collar_image = max(getattr(f, "c", 1.0), 1.0) * model.collar_width
    for attempt in range(retries + 1):
        v = base + (0 if attempt == 0 else 0.02 * rng.standard_normal(base.shape))
        if model.collar_coords(v.reshape(1, -1))[0][0] <= collar_image:
            continue
        try:
            pts = preimages(f, v, grid_resolution)
        except FixedPointSearchError:
            continue
        if len(pts) == 0:
            return 0.0, {"method": "preimage count", "value": v.tolist(), "retries": attempt, "preimages": 0}
        dets = np.linalg.det(f.jacobian(pts))
        if np.min(np.abs(dets)) < 1e-8:
            continue
        deg = float(np.sum(np.sign(dets)))
        return deg, {"method": "preimage count", "value": v.tolist(), "retries": attempt,
                     "preimages": int(len(pts))}
    top = model.generators("rel")[model.dim][0]
    cyc = model.cycles("rel")[model.dim][0]
    value = integrate(top, cyc, pullback=f, n=16, panels=16)
    return value, {"method": "quadrature", "retries": retries, "note": "no regular value found"}


def induced_trace_analytic(model: ModelManifold, f: SelfMap) -> TraceTable:
    m = model.dim
    mats = [absolute_matrix(model, f, q) for q in range(m + 1)]
    absolute = [float(np.trace(a)) if a.size else 0.0 for a in mats]
    deg, info = map_degree(model, f)
    relative = []
    for q in range(m + 1):
        a = mats[m - q]
        if not a.size:
            relative.append(0.0)
            continue
        if abs(np.linalg.det(a)) < 1e-8:
            raise TraceError(f"f* on H^{m - q}(M) is singular; duality route unavailable")
        relative.append(float(deg * np.trace(np.linalg.inv(a))))
    return TraceTable(absolute, relative, "analytic", {"degree": info})


def lefschetz_numbers(traces: TraceTable) -> Dict[str, Number]:
    """L_abs, L_rel and the mixed numbers L_P0, L_P1."""
    ab, rel = traces.absolute, traces.relative
    zero = Fraction(0) if traces.exact else 0.0
    out = {
        "L_abs": sum((x if q % 2 == 0 else -x for q, x in enumerate(ab)), zero),
        "L_rel": sum((x if q % 2 == 0 else -x for q, x in enumerate(rel)), zero),
        "L_P0": sum((rel[q] if q % 2 == 0 else -ab[q] for q in range(len(ab))), zero),
        "L_P1": sum((ab[q] if q % 2 == 0 else -rel[q] for q in range(len(ab))), zero),
    }
    lhs = out["L_P0"] + out["L_P1"]
    rhs = out["L_abs"] + out["L_rel"]
    if (lhs != rhs) if traces.exact else abs(lhs - rhs) > 1e-9:
        raise TraceError("L_P0 + L_P1 differs from L_abs + L_rel")
    return out
