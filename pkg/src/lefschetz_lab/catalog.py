"""Catalog of model manifolds with flat product boundary collars.

Every model lives in a single chart:

==========  ===============  ==========================  ================
model       chart            boundary Y                  collar coordinate
==========  ===============  ==========================  ================
interval    x in [0, 1]      two points                  u = x, u = 1 - x
disk        (x, y), r <= 1   circle                      u = 1 - r
annulus     (s, theta)       two circles                 u = s, u = 1 - s
solid_torus (x, y, phi)      flat torus (theta, phi)     u = 1 - r
==========  ===============  ==========================  ================

Chart lengths are normalized; the Riemannian metric is the chart metric
multiplied by ``scale``.  Only the heat computations see ``scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import meshes
from .forms import Chain, Form, angle_form, bump_form, constant_function, integrate
from .isometry import TWO_PI, BoundaryIsometry, parse_isometry, wrap
from .simplicial import SimplicialComplex


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class ModelDescriptor:
    name: str
    dim: int
    boundary: str
    betti_abs: Tuple[int, ...]
    betti_rel: Tuple[int, ...]
    min_resolution: int
    default_resolution: int
    max_collar: float
    default_collar: float


_DESCRIPTORS = {
    "interval": ModelDescriptor("interval", 1, "two points", (1, 0), (0, 1), 4, 32, 0.4, 0.2),
    "disk": ModelDescriptor("disk", 2, "circle", (1, 0, 0), (0, 0, 1), 6, 32, 0.6, 0.1),
    "annulus": ModelDescriptor("annulus", 2, "two circles", (1, 1, 0), (0, 1, 1), 6, 32, 0.4, 0.1),
    "solid_torus": ModelDescriptor("solid_torus", 3, "flat torus", (1, 1, 0, 0), (0, 0, 1, 1),
                                   4, 6, 0.6, 0.2),
}


def list_models() -> List[ModelDescriptor]:
    return list(_DESCRIPTORS.values())


# ---------------------------------------------------------------------------
# boundary


@dataclass(frozen=True)
class BoundaryComponent:
    index: int
    kind: str           # point | circle | torus
    orientation: int    # induced orientation relative to dy_1 ^ ... ^ dy_n


@dataclass(frozen=True)
class BoundaryManifold:
    """Disjoint union of flat n-tori of side 2*pi*scale (n = 0 gives points)."""

    n: int
    components: Tuple[BoundaryComponent, ...]
    scale: float = 1.0

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def circumference(self) -> float:
        return TWO_PI * self.scale

    @property
    def orientations(self) -> Tuple[int, ...]:
        return tuple(c.orientation for c in self.components)

    def harmonic_dims(self) -> List[int]:
        return [self.n_components * math.comb(self.n, q) for q in range(self.n + 1)]

    def isometry(self, descriptor: str) -> BoundaryIsometry:
        return parse_isometry(descriptor, self.n, self.n_components)


# ---------------------------------------------------------------------------
# models


class ModelManifold:
    """Base class; subclasses fill in the chart geometry."""

    name = ""
    dim = 0
    boundary_n = 0
    n_components = 1
    kind = ""
    periodic: Tuple[Optional[float], ...] = ()

    def __init__(self, resolution: int, collar_width: float, scale: float = 1.0):
        desc = _DESCRIPTORS[self.name]
        if resolution < desc.min_resolution:
            raise CatalogError(f"resolution {resolution} below minimum {desc.min_resolution} "
                               f"for {self.name}: boundary mesh cannot resolve the collar")
        if resolution % 2:
            raise CatalogError("resolution must be even")
        if not (0 < collar_width <= desc.max_collar):
            raise CatalogError(f"collar width must lie in (0, {desc.max_collar}]")
        if scale <= 0:
            raise CatalogError("scale must be positive")
        self.descriptor = desc
        self.resolution = int(resolution)
        self.collar_width = float(collar_width)
        self.scale = float(scale)

    def __repr__(self) -> str:
        return (f"{type(self).__name__}(resolution={self.resolution}, "
                f"collar_width={self.collar_width}, scale={self.scale})")

    @property
    def key(self):
        return (self.name, self.resolution, self.collar_width, self.scale)

    # -- chart helpers -----------------------------------------------------
    def chart_diff(self, a, b) -> np.ndarray:
        d = np.asarray(a, float) - np.asarray(b, float)
        for k, per in enumerate(self.periodic):
            if per:
                d[..., k] = (d[..., k] + per / 2) % per - per / 2
        return d

    def normalize(self, p) -> np.ndarray:
        p = np.array(p, dtype=float)
        for k, per in enumerate(self.periodic):
            if per:
                p[..., k] = np.mod(p[..., k], per)
        return p

    # subclasses: collar_coords, from_collar, contains, core_grid,
    # _mesh, generators and cycles, regular_value

    def in_core(self, p) -> np.ndarray:
        u, _, _ = self.collar_coords(np.atleast_2d(p))
        return u >= self.collar_width

    # -- triangulation -----------------------------------------------------
    @cached_property
    def triangulation(self) -> SimplicialComplex:
        verts, top, labels = self._mesh()
        return SimplicialComplex(verts, top, labels, self.periodic)

    def betti(self) -> Tuple[List[int], List[int]]:
        tri = self.triangulation
        return tri.absolute_homology.betti, tri.relative_homology.betti

    def collar_is_product(self) -> bool:
        """Collar is a subcomplex whose inner rim carries the boundary mesh."""
        tri = self.triangulation
        u, comp, y = self.collar_coords(tri.vertices)
        eps = self.collar_width
        tol = 1e-9
        for s in tri.simplices[self.dim]:
            us = u[list(s)]
            if us.min() < eps - tol and us.max() > eps + tol:
                return False

        def rim(level):
            sel = np.abs(u - level) < tol
            return {(int(c),) + tuple(np.round(np.cos(v), 9)) + tuple(np.round(np.sin(v), 9))
                    for c, v in zip(comp[sel], y[sel])}

        return rim(0.0) == rim(eps)

    def boundary(self) -> BoundaryManifold:
        orient = self._derived_orientations()
        kinds = {0: "point", 1: "circle", 2: "torus"}
        comps = tuple(BoundaryComponent(i, kinds[self.boundary_n], o) for i, o in enumerate(orient))
        return BoundaryManifold(self.boundary_n, comps, self.scale)

    def _derived_orientations(self) -> Tuple[int, ...]:
        """Induced boundary orientation per component, read off the mesh."""
        tri = self.triangulation
        tri.check_oriented_manifold()
        _, comp, y = self.collar_coords(tri.vertices)
        found: Dict[int, set] = {}
        for facet, sign in tri.boundary_facet_orientation().items():
            c = int(comp[facet[0]])
            if self.boundary_n == 0:
                o = 1
            else:
                ys = y[list(facet)]
                d = wrap(ys[1:] - ys[0])
                det = np.linalg.det(d.T) if self.boundary_n > 1 else d[0, 0]
                o = 1 if det > 0 else -1
            found.setdefault(c, set()).add(sign * o)
        out = []
        for c in range(self.n_components):
            vals = found.get(c, set())
            if len(vals) != 1:
                raise CatalogError(f"boundary component {c} is not coherently oriented")
            out.append(vals.pop())
        return tuple(out)

    # -- generators --------------------------------------------------------
    def generators(self, flavor: str) -> Dict[int, List[Form]]:
        return self.abs_generators if flavor == "abs" else self.rel_generators

    def cycles(self, flavor: str) -> Dict[int, List[Chain]]:
        return self.abs_cycles if flavor == "abs" else self.rel_cycles

    def pairing_matrix(self, flavor: str, q: int) -> np.ndarray:
        gens = self.generators(flavor).get(q, [])
        cyc = self.cycles(flavor).get(q, [])
        return np.array([[_pair(h, z) for z in cyc] for h in gens]).reshape(len(gens), len(cyc))

    def check_invariants(self) -> None:
        """Raise CatalogError if any model invariant fails."""
        d = self.descriptor
        babs, brel = self.betti()
        if tuple(babs) != d.betti_abs or tuple(brel) != d.betti_rel:
            raise CatalogError(f"betti mismatch: {babs}, {brel}")
        m = self.dim
        for q in range(m + 1):
            if brel[q] != babs[m - q]:
                raise CatalogError("duality count fails")
        for flavor, betti in (("abs", d.betti_abs), ("rel", d.betti_rel)):
            for q in range(m + 1):
                p = self.pairing_matrix(flavor, q)
                if p.shape != (betti[q], betti[q]) or not np.allclose(p, np.eye(betti[q]), atol=1e-8):
                    raise CatalogError(f"pairing matrix {flavor} H^{q} is not the identity: {p}")
        if not self.collar_is_product():
            raise CatalogError("collar mesh is not a product")
        self.triangulation.check_oriented_manifold()
        if sum(self.boundary().harmonic_dims()) % 2:
            raise CatalogError("boundary cohomology has odd total dimension")

    def describe(self) -> Dict[str, str]:
        d = self.descriptor
        return {
            "name": self.name, "dim": str(self.dim), "boundary": d.boundary,
            "collar_width": repr(self.collar_width), "resolution": str(self.resolution),
            "scale": repr(self.scale),
            "betti_abs": " ".join(map(str, d.betti_abs)),
            "betti_rel": " ".join(map(str, d.betti_rel)),
        }


def _pair(form: Form, chain: Chain) -> float:
    if form.degree == 0:
        pts, _ = chain.param(np.zeros((1, 0)))
        return float(form.evaluate(pts, np.zeros((1, form.dim, 0)))[0])
    if chain.fundamental and form.support is not None:
        lo, hi = form.support
        return integrate(form, box_chain(lo, hi), n=16, panels=4)
    return integrate(form, chain)


def box_chain(lo: np.ndarray, hi: np.ndarray) -> Chain:
    """Chart box [lo, hi] (top dimensional) with the chart orientation."""
    m = len(lo)

    def param(s):
        return s.copy(), np.broadcast_to(np.eye(m), (s.shape[0], m, m)).copy()

    return Chain(m, m, list(zip(lo, hi)), param, [False] * m, name="box")


def point_chain(p: Sequence[float]) -> Chain:
    p = np.asarray(p, float)
    m = len(p)
    return Chain(m, 0, [], lambda s: (np.tile(p, (s.shape[0], 1)), np.zeros((s.shape[0], m, 0))),
                 name="point")


def _polar_param(s, phi: Optional[float] = None):
    r, t = s[:, 0], s[:, 1]
    c, sn = np.cos(t), np.sin(t)
    n = s.shape[0]
    if phi is None:
        pts = np.stack([r * c, r * sn], axis=1)
        tan = np.zeros((n, 2, 2))
    else:
        pts = np.stack([r * c, r * sn, np.full(n, phi)], axis=1)
        tan = np.zeros((n, 3, 2))
    tan[:, 0, 0], tan[:, 1, 0] = c, sn
    tan[:, 0, 1], tan[:, 1, 1] = -r * sn, r * c
    return pts, tan


class IntervalModel(ModelManifold):
    name, dim, boundary_n, n_components = "interval", 1, 0, 2
    periodic = (None,)

    def collar_coords(self, p):
        x = np.atleast_2d(p)[:, 0]
        comp = (x > 0.5).astype(int)
        u = np.where(comp == 0, x, 1 - x)
        return u, comp, np.zeros((x.size, 0))

    def from_collar(self, u, comp, y=None):
        u = np.asarray(u, float)
        return np.where(np.asarray(comp) == 0, u, 1 - u).reshape(-1, 1)

    def contains(self, p, tol=1e-12):
        x = np.atleast_2d(p)[:, 0]
        return (x >= -tol) & (x <= 1 + tol)

    def core_grid(self, n):
        e = self.collar_width
        return np.linspace(e, 1 - e, n + 1).reshape(-1, 1)

    def _mesh(self):
        n_c = max(1, self.resolution // 8)
        nodes = meshes.layered_nodes(self.collar_width, n_c, max(2, self.resolution - 2 * n_c), True)
        return meshes.interval_mesh(nodes)

    @property
    def _bump_width(self):
        return 0.8 * min(0.5 - self.collar_width, 0.25)

    @cached_property
    def abs_generators(self):
        return {0: [constant_function(1)], 1: []}

    @cached_property
    def rel_generators(self):
        return {0: [], 1: [bump_form(1, [0.5], [self._bump_width], [0], "bump dx")]}

    @cached_property
    def abs_cycles(self):
        return {0: [point_chain([0.5])], 1: []}

    @cached_property
    def rel_cycles(self):
        ch = Chain(1, 1, [(0.0, 1.0)], lambda s: (s.copy(), np.ones((s.shape[0], 1, 1))), name="[0,1]")
        ch.fundamental = True
        return {0: [], 1: [ch]}

    def regular_value(self):
        return np.array([0.5])


class DiskModel(ModelManifold):
    name, dim, boundary_n, n_components = "disk", 2, 1, 1
    periodic = (None, None)

    @property
    def flat_radius(self) -> float:
        """The metric is Euclidean for r <= flat_radius and a product for r >= 1 - collar."""
        return 0.8 * (1 - self.collar_width)

    def metric_profile(self, r):
        """g(r) in the metric dr^2 + g(r)^2 dtheta^2."""
        r = np.asarray(r, float)
        a, b = self.flat_radius, 1 - self.collar_width
        z = np.clip((r - a) / (b - a), 0, 1)
        step = z ** 3 * (10 - 15 * z + 6 * z * z)
        return r + (1 - r) * step

    def collar_coords(self, p):
        p = np.atleast_2d(p)
        r = np.hypot(p[:, 0], p[:, 1])
        th = np.mod(np.arctan2(p[:, 1], p[:, 0]), TWO_PI)
        return 1 - r, np.zeros(r.size, dtype=int), th.reshape(-1, 1)

    def from_collar(self, u, comp, y):
        r = 1 - np.asarray(u, float)
        th = np.asarray(y, float).reshape(-1)
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)

    def contains(self, p, tol=1e-12):
        p = np.atleast_2d(p)
        return np.hypot(p[:, 0], p[:, 1]) <= 1 + tol

    def core_grid(self, n):
        rmax = 1 - self.collar_width
        g = np.linspace(-rmax, rmax, n + 1)
        xx, yy = np.meshgrid(g, g, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
        return pts[np.hypot(pts[:, 0], pts[:, 1]) <= rmax]

    def _radii(self):
        n_inner = max(1, self.resolution // 16)
        n_c = max(1, self.resolution // 32)
        e = self.collar_width
        return list(np.linspace(0, 1 - e, n_inner + 1)[1:]) + list(np.linspace(1 - e, 1, n_c + 1)[1:])

    def _mesh(self):
        return meshes.disk_mesh(self._radii(), self.resolution)

    @property
    def _bump(self):
        a = 1 - self.collar_width
        return [0.3 * a, 0.2 * a], [0.25 * a, 0.25 * a]

    @cached_property
    def abs_generators(self):
        return {0: [constant_function(2)], 1: [], 2: []}

    @cached_property
    def rel_generators(self):
        c, w = self._bump
        return {0: [], 1: [], 2: [bump_form(2, c, w, [0, 1], "bump dx^dy")]}

    @cached_property
    def abs_cycles(self):
        return {0: [point_chain([0.0, 0.0])], 1: [], 2: []}

    @cached_property
    def rel_cycles(self):
        ch = Chain(2, 2, [(0.0, 1.0), (0.0, TWO_PI)], _polar_param, [False, True], name="disk")
        ch.fundamental = True
        return {0: [], 1: [], 2: [ch]}

    def regular_value(self):
        return np.array(self._bump[0])


class AnnulusModel(ModelManifold):
    """Flat cylinder [0, 1] x S^1 with metric ds^2 + dtheta^2."""

    name, dim, boundary_n, n_components = "annulus", 2, 1, 2
    periodic = (None, TWO_PI)

    def collar_coords(self, p):
        p = np.atleast_2d(p)
        s = p[:, 0]
        comp = (s > 0.5).astype(int)
        u = np.where(comp == 0, s, 1 - s)
        return u, comp, np.mod(p[:, 1:2], TWO_PI)

    def from_collar(self, u, comp, y):
        u = np.asarray(u, float)
        s = np.where(np.asarray(comp) == 0, u, 1 - u)
        return np.stack([s, np.asarray(y, float).reshape(-1)], axis=1)

    def contains(self, p, tol=1e-12):
        s = np.atleast_2d(p)[:, 0]
        return (s >= -tol) & (s <= 1 + tol)

    def core_grid(self, n):
        e = self.collar_width
        s = np.linspace(e, 1 - e, max(2, n // 2) + 1)
        t = np.linspace(0, TWO_PI, 2 * n, endpoint=False)
        ss, tt = np.meshgrid(s, t, indexing="ij")
        return np.stack([ss.ravel(), tt.ravel()], axis=1)

    def _mesh(self):
        n_c = max(1, self.resolution // 32)
        n_inner = 2 * max(1, self.resolution // 16)
        nodes = meshes.layered_nodes(self.collar_width, n_c, n_inner, True)
        return meshes.annulus_mesh(nodes, self.resolution)

    @property
    def _bump_width(self):
        return 0.8 * min(0.5 - self.collar_width, 0.25)

    @cached_property
    def abs_generators(self):
        return {0: [constant_function(2)], 1: [angle_form(2, 1, "dtheta/2pi")], 2: []}

    @cached_property
    def rel_generators(self):
        w = self._bump_width
        return {0: [], 1: [bump_form(2, [0.5], [w], [0], "bump ds")],
                2: [bump_form(2, [0.5, math.pi], [w, 1.0], [0, 1], "bump ds^dtheta")]}

    @cached_property
    def abs_cycles(self):
        circ = Chain(2, 1, [(0.0, TWO_PI)],
                     lambda s: (np.stack([np.full(s.shape[0], 0.5), s[:, 0]], axis=1),
                                np.tile(np.array([[0.0], [1.0]]), (s.shape[0], 1, 1))),
                     [True], name="circle s=1/2")
        return {0: [point_chain([0.5, 0.0])], 1: [circ], 2: []}

    @cached_property
    def rel_cycles(self):
        seg = Chain(2, 1, [(0.0, 1.0)],
                    lambda s: (np.stack([s[:, 0], np.zeros(s.shape[0])], axis=1),
                               np.tile(np.array([[1.0], [0.0]]), (s.shape[0], 1, 1))),
                    name="segment theta=0")
        m = Chain(2, 2, [(0.0, 1.0), (0.0, TWO_PI)],
                  lambda s: (s.copy(), np.broadcast_to(np.eye(2), (s.shape[0], 2, 2)).copy()),
                  [False, True], name="annulus")
        m.fundamental = True
        return {0: [], 1: [seg], 2: [m]}

    def regular_value(self):
        return np.array([0.5, math.pi])


class SolidTorusModel(ModelManifold):
    """Disk times circle, chart (x, y, phi), metric of the disk model plus dphi^2."""

    name, dim, boundary_n, n_components = "solid_torus", 3, 2, 1
    periodic = (None, None, TWO_PI)

    flat_radius = DiskModel.flat_radius
    metric_profile = DiskModel.metric_profile

    def collar_coords(self, p):
        p = np.atleast_2d(p)
        r = np.hypot(p[:, 0], p[:, 1])
        th = np.mod(np.arctan2(p[:, 1], p[:, 0]), TWO_PI)
        return 1 - r, np.zeros(r.size, dtype=int), np.stack([th, np.mod(p[:, 2], TWO_PI)], axis=1)

    def from_collar(self, u, comp, y):
        r = 1 - np.asarray(u, float)
        y = np.atleast_2d(y)
        return np.stack([r * np.cos(y[:, 0]), r * np.sin(y[:, 0]), y[:, 1]], axis=1)

    def contains(self, p, tol=1e-12):
        p = np.atleast_2d(p)
        return np.hypot(p[:, 0], p[:, 1]) <= 1 + tol

    def core_grid(self, n):
        rmax = 1 - self.collar_width
        g = np.linspace(-rmax, rmax, n + 1)
        ph = np.linspace(0, TWO_PI, n, endpoint=False)
        xx, yy, pp = np.meshgrid(g, g, ph, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel(), pp.ravel()], axis=1)
        return pts[np.hypot(pts[:, 0], pts[:, 1]) <= rmax]

    def _mesh(self):
        e = self.collar_width
        return meshes.solid_torus_mesh([1 - e, 1.0], self.resolution, self.resolution)

    @property
    def _bump(self):
        a = 1 - self.collar_width
        return [0.3 * a, 0.2 * a], [0.25 * a, 0.25 * a]

    @cached_property
    def abs_generators(self):
        return {0: [constant_function(3)], 1: [angle_form(3, 2, "dphi/2pi")], 2: [], 3: []}

    @cached_property
    def rel_generators(self):
        c, w = self._bump
        return {0: [], 1: [],
                2: [bump_form(3, c, w, [0, 1], "bump dx^dy")],
                3: [bump_form(3, c + [math.pi], w + [1.0], [0, 1, 2], "bump dx^dy^dphi")]}

    @cached_property
    def abs_cycles(self):
        circ = Chain(3, 1, [(0.0, TWO_PI)],
                     lambda s: (np.stack([np.zeros(s.shape[0]), np.zeros(s.shape[0]), s[:, 0]], axis=1),
                                np.tile(np.array([[0.0], [0.0], [1.0]]), (s.shape[0], 1, 1))),
                     [True], name="core circle")
        return {0: [point_chain([0.0, 0.0, 0.0])], 1: [circ], 2: [], 3: []}

    @cached_property
    def rel_cycles(self):
        mer = Chain(3, 2, [(0.0, 1.0), (0.0, TWO_PI)], lambda s: _polar_param(s, 0.0),
                    [False, True], name="meridian disk")

        def full(s):
            pts, tan2 = _polar_param(s[:, :2], 0.0)
            pts[:, 2] = s[:, 2]
            tan = np.zeros((s.shape[0], 3, 3))
            tan[:, :, :2] = tan2
            tan[:, 2, 2] = 1.0
            return pts, tan

        m = Chain(3, 3, [(0.0, 1.0), (0.0, TWO_PI), (0.0, TWO_PI)], full, [False, True, True],
                  name="solid torus")
        m.fundamental = True
        return {0: [], 1: [], 2: [mer], 3: [m]}

    def regular_value(self):
        return np.array(self._bump[0] + [math.pi])


_CLASSES = {"interval": IntervalModel, "disk": DiskModel, "annulus": AnnulusModel,
            "solid_torus": SolidTorusModel}

_CACHE: Dict[tuple, ModelManifold] = {}


def build_model(name: str, resolution: Optional[int] = None, collar_width: Optional[float] = None,
                scale: float = 1.0, validate: bool = False) -> ModelManifold:
    """Build (or fetch from cache) a catalog model.

    ``validate`` runs the full invariant check (exact Betti numbers,
    pairing matrices, collar product structure, orientation).
    """
    if name not in _CLASSES:
        raise CatalogError(f"unknown model {name!r}; known: {sorted(_CLASSES)}")
    d = _DESCRIPTORS[name]
    resolution = d.default_resolution if resolution is None else int(resolution)
    collar_width = d.default_collar if collar_width is None else float(collar_width)
    key = (name, resolution, collar_width, float(scale))
    model = _CACHE.get(key)
    if model is None:
        model = _CLASSES[name](resolution, collar_width, scale)
        _CACHE[key] = model
    if validate:
        model.check_invariants()
    return model


def boundary_of(model: ModelManifold) -> BoundaryManifold:
    return model.boundary()


def catalog_text() -> str:
    """Key-value serialization of the catalog (one block per model)."""
    out = []
    for d in list_models():
        out.append(f"[model {d.name}]")
        out.append(f"dim = {d.dim}")
        out.append(f"boundary = {d.boundary}")
        out.append("betti_abs = " + " ".join(map(str, d.betti_abs)))
        out.append("betti_rel = " + " ".join(map(str, d.betti_rel)))
        out.append(f"min_resolution = {d.min_resolution}")
        out.append(f"default_resolution = {d.default_resolution}")
        out.append(f"max_collar = {d.max_collar}")
        out.append(f"default_collar = {d.default_collar}")
        out.append("")
    return "\n".join(out)


def parse_catalog_text(text: str) -> Dict[str, Dict[str, str]]:
    blocks: Dict[str, Dict[str, str]] = {}
    cur = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("[model ") and line.endswith("]"):
            cur = blocks.setdefault(line[7:-1], {})
        else:
            k, _, v = line.partition("=")
            cur[k.strip()] = v.strip()
    return blocks
