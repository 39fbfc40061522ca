"""Condition A self-maps, their fixed points and local indices.

A Condition A map equals ``(u, y) -> (c u, B(y))`` on the collar.  On
the catalog models the maps are built from a one-dimensional profile:

* interval:    x -> sigma(x)
* annulus:     (s, theta) -> (sigma(s), B theta)
* disk:        x -> rho(|x|) R x / |x|, R the orthogonal map inducing B
* solid torus: disk map times the circle map phi -> B_phi(phi)

``sigma`` is increasing (``B`` fixes the components) or decreasing
(``B`` swaps them); ``rho`` is increasing with ``rho(r) = k r`` near 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import ModelManifold
from .forms import exterior_power
from .isometry import TWO_PI, BoundaryIsometry, wrap
from .profiles import Profile
from .simplicial import SimplicialError

NEWTON_TOL = 1e-12
MERGE_RADIUS = 1e-6
SIMPLE_THRESHOLD = 1e-8


class MapError(ValueError):
    pass


class NotSimple(MapError):
    def __init__(self, point, det):
        self.point = tuple(float(x) for x in np.ravel(point))
        self.det = float(det)
        super().__init__(f"fixed point {self.point} is not simple: det(I - df) = {self.det:.3e}")


class FixedPointSearchError(MapError):
    pass


@dataclass(frozen=True)
class FixedPointRecord:
    location: Tuple[float, ...]
    kind: str                       # interior | boundary
    jacobian: np.ndarray = field(compare=False)
    index: int
    det: float
    a_value: Optional[float] = None
    classification: Optional[str] = None
    component: Optional[int] = None

    def as_dict(self) -> dict:
        d = {"location": [float(x) for x in self.location], "kind": self.kind,
             "index": self.index, "det": float(self.det)}
        if self.kind == "boundary":
            d.update(a_value=self.a_value, classification=self.classification,
                     component=self.component)
        return d


@dataclass(frozen=True)
class PullbackOperator:
    """Lambda^q(df(x)^T): pulls q-covectors at f(x) back to x."""

    degree: int
    point: Tuple[float, ...]
    matrix: np.ndarray


def _theta_matrix(sign: int, shift: float) -> np.ndarray:
    c, s = math.cos(shift), math.sin(shift)
    if sign == 1:
        return np.array([[c, -s], [s, c]])
    return np.array([[c, s], [s, -c]])


class SelfMap:
    """Smooth self-map of a model chart (vectorized over points)."""

    model: ModelManifold

    def __call__(self, p):
        raise NotImplementedError

    def jacobian(self, p):
        raise NotImplementedError

    def pullback_operator(self, q: int, x) -> PullbackOperator:
        x = np.asarray(x, float).reshape(1, -1)
        jac = self.jacobian(x)[0]
        return PullbackOperator(q, tuple(x[0]), exterior_power(jac.T, q))


class ComposedMap(SelfMap):
    """``second o first``."""

    def __init__(self, first: SelfMap, second: SelfMap):
        self.first, self.second = first, second
        self.model = first.model

    def __call__(self, p):
        return self.second(self.first(p))

    def jacobian(self, p):
        p = np.atleast_2d(p)
        return np.einsum("nij,njk->nik", self.second.jacobian(self.first(p)), self.first.jacobian(p))


class ConditionAMap(SelfMap):
    """Self-map of a catalog model satisfying Condition A.

    Use :func:`make_condition_a_map` to build and validate one.
    """

    def __init__(self, model: ModelManifold, c: float, B: BoundaryIsometry, profile: Profile,
                 collar: Optional[float] = None, profile_params: Optional[dict] = None):
        self.model = model
        self.c = float(c)
        self.B = B
        self.profile = profile
        self.collar = model.collar_width if collar is None else float(collar)
        self.profile_params = dict(profile_params or {})
        if model.name in ("disk", "solid_torus"):
            self._R = _theta_matrix(B.signs[0], B.shift[0])

    def __repr__(self) -> str:
        return f"ConditionAMap({self.model.name}, c={self.c}, B={self.B.descriptor!r})"

    # -- evaluation --------------------------------------------------------
    def _radial(self, p):
        r = np.hypot(p[:, 0], p[:, 1])
        rho = self.profile(r)
        drho = self.profile(r, 1)
        small = r < 1e-12
        rs = np.where(small, 1.0, r)
        h = np.where(small, drho, rho / rs)
        dh = np.where(small, 0.0, (drho - h) / rs ** 2)
        return h, dh

    def __call__(self, p):
        p = np.atleast_2d(np.asarray(p, float))
        name = self.model.name
        if name == "interval":
            return self.profile(p[:, :1])
        if name == "annulus":
            th = self.B.signs[0] * p[:, 1] + self.B.shift[0]
            return np.stack([self.profile(p[:, 0]), np.mod(th, TWO_PI)], axis=1)
        h, _ = self._radial(p)
        xy = h[:, None] * (p[:, :2] @ self._R.T)
        if name == "disk":
            return xy
        ph = self.B.signs[1] * p[:, 2] + self.B.shift[1]
        return np.concatenate([xy, np.mod(ph, TWO_PI)[:, None]], axis=1)

    def jacobian(self, p):
        p = np.atleast_2d(np.asarray(p, float))
        n = p.shape[0]
        name = self.model.name
        if name == "interval":
            return self.profile(p[:, 0], 1).reshape(n, 1, 1)
        if name == "annulus":
            jac = np.zeros((n, 2, 2))
            jac[:, 0, 0] = self.profile(p[:, 0], 1)
            jac[:, 1, 1] = self.B.signs[0]
            return jac
        h, dh = self._radial(p)
        x = p[:, :2]
        rx = x @ self._R.T
        disk = h[:, None, None] * self._R + dh[:, None, None] * np.einsum("ni,nj->nij", rx, x)
        if name == "disk":
            return disk
        jac = np.zeros((n, 3, 3))
        jac[:, :2, :2] = disk
        jac[:, 2, 2] = self.B.signs[1]
        return jac

    def residual(self, p):
        """f(p) - p as a chart difference (angles wrapped)."""
        return self.model.chart_diff(self(p), p)


# ---------------------------------------------------------------------------
# construction


def build_profile(model: ModelManifold, c: float, swap: bool, params: Optional[dict] = None) -> Profile:
    """Profile for a Condition A map on ``model``.

    Parameters (all optional) in ``params``:

    inner_slope : slope k of rho at the origin (disk-like models), default 0.5.
    crossings : position(s) x of corners placed on the diagonal.
    knots : explicit interior corner points [(x, y), ...]; overrides crossings.
    smoothing : corner rounding half-width, default 0.02.
    collar : collar width the profile is linear on, default the model's.
    """
    params = dict(params or {})
    eps = float(params.get("collar", model.collar_width))
    h = float(params.get("smoothing", 0.02))
    radial = model.name in ("disk", "solid_torus")
    if radial:
        if swap:
            raise MapError("disk-like models have a single boundary component")
        k = float(params.get("inner_slope", 0.5))
        if k <= 0:
            raise MapError("inner slope must be positive")
        if "knots" in params:
            knots = [tuple(map(float, kn)) for kn in params["knots"]]
        else:
            xs = params.get("crossings")
            if xs is None:
                xs = [0.5 * (1 - eps)] if (k - 1) * (c - 1) > 0 else []
            knots = [(float(x), float(x)) for x in np.atleast_1d(xs)]
        first = knots[0][0] if knots else 1 - eps
        a = float(params.get("linear_radius", 0.2 * first))
        start = [(a, k * a)]
        start_slope = k
        end = [(1 - eps - h, 1 - c * (eps + h))]
    else:
        if "knots" in params:
            knots = [tuple(map(float, kn)) for kn in params["knots"]]
        else:
            xs = params.get("crossings")
            if xs is None:
                xs = [] if swap else [0.5]
            knots = [(float(x), float(x)) for x in np.atleast_1d(xs)]
        if swap:
            start_slope = -c
            start = [(eps + h, 1 - c * (eps + h))]
            end = [(1 - eps - h, c * (eps + h))]
        else:
            start_slope = c
            start = [(eps + h, c * (eps + h))]
            end = [(1 - eps - h, 1 - c * (eps + h))]
    end_slope = -c if swap else c
    try:
        prof = Profile.through(start_slope, start + knots + end, end_slope, h)
    except ValueError as exc:
        raise MapError(f"invalid profile: {exc}") from exc
    if not prof.is_strictly_monotone():
        raise MapError(f"profile not monotone (segment slopes {prof.segment_slopes})")
    return prof


def make_condition_a_map(model: ModelManifold, c: float, B_descriptor,
                         profile_params: Optional[dict] = None, validate: bool = True) -> ConditionAMap:
    """Build a Condition A map ``(u, y) -> (c u, B y)`` on the collar of ``model``."""
    c = float(c)
    if c <= 0:
        raise MapError("c must be positive")
    if c == 1:
        raise MapError("c must differ from 1")
    B = B_descriptor if isinstance(B_descriptor, BoundaryIsometry) else \
        model.boundary().isometry(str(B_descriptor))
    if B.n != model.boundary_n or len(B.perm) != model.n_components:
        raise MapError("isometry does not match the model boundary")
    if B.distance_check() > 1e-12:
        raise MapError("B is not an isometry")
    if c * model.collar_width >= (0.5 if model.n_components == 2 else 1.0):
        raise MapError("c times collar width pushes the collar image past the core")
    prof = build_profile(model, c, B.swaps, profile_params)
    f = ConditionAMap(model, c, B, prof, profile_params=profile_params)
    if validate:
        rep = verify_condition_a(f, 400)
        if not rep.passed:
            raise MapError(f"Condition A fails at {rep.worst_sample}: residual {rep.worst_residual:.3e}")
        if not is_self_map(f):
            raise MapError("map leaves the model")
    return f


def is_self_map(f: SelfMap, n: int = 40) -> bool:
    pts = np.concatenate([f.model.core_grid(n), _collar_samples(f.model, 200, 0, f.model.collar_width)[0]])
    return bool(np.all(f.model.contains(f(pts), tol=1e-12)))


def _collar_samples(model: ModelManifold, n: int, seed: int, width: float):
    rng = np.random.default_rng(seed)
    u = rng.uniform(0, width, n)
    u[0] = 0.0
    comp = rng.integers(model.n_components, size=n)
    y = rng.uniform(0, TWO_PI, (n, model.boundary_n))
    return model.from_collar(u, comp, y), u, comp, y


@dataclass
class ConditionAReport:
    passed: bool
    worst_residual: float
    worst_sample: Tuple[float, ...]
    samples: int


def verify_condition_a(f: ConditionAMap, sample_count: int = 1000, seed: int = 0,
                       tol: float = 1e-12) -> ConditionAReport:
    """Compare f with (u, y) -> (c u, B y) on random collar samples."""
    model = f.model
    pts, u, comp, y = _collar_samples(model, sample_count, seed, f.collar)
    bcomp, by = f.B.apply(comp, y)
    expect = model.from_collar(f.c * u, bcomp, by)
    res = np.linalg.norm(model.chart_diff(f(pts), expect), axis=1)
    k = int(np.argmax(res))
    worst = float(res[k])
    return ConditionAReport(worst < tol, worst, tuple(float(v) for v in pts[k]), sample_count)


# ---------------------------------------------------------------------------
# fixed points


def local_index(f: SelfMap, p, threshold: float = SIMPLE_THRESHOLD) -> int:
    p = np.asarray(p, float).reshape(1, -1)
    jac = f.jacobian(p)[0]
    det = float(np.linalg.det(np.eye(jac.shape[0]) - jac))
    if abs(det) < threshold:
        raise NotSimple(p, det)
    return 1 if det > 0 else -1


def classify_boundary_point(f: ConditionAMap, y, component: int = 0, tol: float = 1e-10):
    """(a_value, classification) at a boundary fixed point y of B."""
    y = np.atleast_1d(np.asarray(y, float))
    bc, by = f.B.apply(component, y)
    if int(bc) != component or (y.size and np.max(np.abs(wrap(by - y))) > tol):
        raise MapError(f"{tuple(y)} on component {component} is not a fixed point of B")
    return f.c, ("attracting" if f.c < 1 else "repelling")


def _record(f: SelfMap, p: np.ndarray, kind: str, threshold: float, **extra) -> FixedPointRecord:
    jac = f.jacobian(p.reshape(1, -1))[0]
    det = float(np.linalg.det(np.eye(jac.shape[0]) - jac))
    if abs(det) < threshold:
        raise NotSimple(p, det)
    return FixedPointRecord(tuple(float(v) for v in p), kind, jac, 1 if det > 0 else -1, det, **extra)


def newton(g, jac, x0: np.ndarray, wrap_fn, tol: float, max_iter: int = 60):
    """Vectorized Newton iteration for g(x) = 0; returns (x, converged)."""
    x = np.array(x0, float)
    done = np.zeros(x.shape[0], bool)
    for _ in range(max_iter):
        r = g(x)
        norm = np.linalg.norm(r, axis=1)
        done = norm < tol
        if done.all():
            break
        act = ~done & np.isfinite(norm)
        if not act.any():
            break
        J = jac(x[act])
        try:
            step = np.linalg.solve(J, r[act][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(a, b, rcond=None)[0] for a, b in zip(J, r[act])])
        x[act] = wrap_fn(x[act] - step)
    r = g(x)
    return x, np.linalg.norm(r, axis=1) < tol


def _dedupe(model: ModelManifold, pts: np.ndarray, radius: float) -> np.ndarray:
    out: List[np.ndarray] = []
    for p in sorted(pts.tolist()):
        p = np.array(p)
        if all(np.linalg.norm(model.chart_diff(p, q)) > radius for q in out):
            out.append(p)
    return np.array(out).reshape(len(out), model.dim)


def _grid_spacing(model: ModelManifold, seeds: np.ndarray) -> float:
    d = np.linalg.norm(model.chart_diff(seeds[1:], seeds[0]), axis=1)
    d = d[d > 1e-12]
    return float(d.min()) if d.size else 1.0


def _lipschitz(jac: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(jac, ord=2, axis=(1, 2))))


def _cell_excluded(model: ModelManifold, g, jac, center: np.ndarray, half: float, roots: np.ndarray,
                   tol: float, depth: int = 3) -> bool:
    """Refine the cell around ``center``; True if (up to a local Lipschitz
    estimate) it holds no root of ``g`` besides the known ``roots``."""
    n = 5
    ticks = np.linspace(-half, half, n)
    offs = np.stack([a.ravel() for a in np.meshgrid(*([ticks] * model.dim), indexing="ij")], axis=1)
    pts = model.normalize(center + offs)
    pts = pts[model.contains(pts, tol=0.0) & model.in_core(pts)]
    if not len(pts):
        return True
    r = np.linalg.norm(g(pts), axis=1)
    lip = 1.5 * _lipschitz(jac(pts))
    h = half / (n - 1)
    live = pts[r <= lip * h * math.sqrt(model.dim)]
    if not len(live):
        return True
    x, ok = newton(g, jac, live, model.normalize, tol)
    for p, good in zip(x, ok):
        if good and model.in_core(p.reshape(1, -1))[0]:
            if not len(roots) or np.min(np.linalg.norm(model.chart_diff(roots, p), axis=1)) > MERGE_RADIUS:
                return False  # a root the coarse search missed
    if depth == 0:
        return False
    return all(_cell_excluded(model, g, jac, p, h, roots, tol, depth - 1) for p in live)


def solve_on_core(model: ModelManifold, g, jac, grid_resolution: int, tol: float = NEWTON_TOL,
                  merge_radius: float = MERGE_RADIUS, min_u: float = 0.0) -> np.ndarray:
    """All roots of ``g`` on the model core, by grid-seeded Newton.

    Seeds are core grid points whose residual is within a Lipschitz bound of
    zero.  Roots closer than ``min_u`` to the boundary are dropped.  A seed
    whose Newton run fails must lie next to a found root or in a cell that
    refinement shows to be root-free; otherwise FixedPointSearchError.
    """
    grid = model.core_grid(grid_resolution)
    spacing = _grid_spacing(model, grid)
    r = np.linalg.norm(g(grid), axis=1)
    seeds = grid[r <= 1.5 * _lipschitz(jac(grid)) * spacing * math.sqrt(model.dim)]
    if not len(seeds):
        return np.zeros((0, model.dim))
    x, ok = newton(g, jac, seeds, model.normalize, tol)
    inside = model.contains(x, tol=0.0)
    u = np.full(len(x), -1.0)
    u[inside] = model.collar_coords(x[inside])[0]
    roots = _dedupe(model, x[ok & inside & (u >= min_u)], merge_radius)
    failures = []
    for s in seeds[~ok & inside]:
        if len(roots) and np.min(np.linalg.norm(model.chart_diff(roots, s), axis=1)) < spacing:
            continue
        if not _cell_excluded(model, g, jac, s, spacing, roots, tol):
            failures.append(s)
    if failures:
        raise FixedPointSearchError(
            f"Newton did not converge from {len(failures)} candidate cell(s), e.g. {failures[0].tolist()}")
    return roots


def find_fixed_points(f: ConditionAMap, grid_resolution: int = 64, newton_tol: float = NEWTON_TOL,
                      merge_radius: float = MERGE_RADIUS,
                      threshold: float = SIMPLE_THRESHOLD) -> List[FixedPointRecord]:
    """All fixed points: interior ones by grid-seeded Newton, boundary ones from B.

    Interior seeds come from the core only: on the open collar Condition A
    leaves no room for fixed points off the boundary.
    """
    model = f.model
    eye = np.eye(model.dim)
    roots = solve_on_core(model, f.residual, lambda p: f.jacobian(p) - eye, grid_resolution,
                          newton_tol, merge_radius, min_u=0.5 * f.collar)
    records = [_record(f, p, "interior", threshold) for p in roots]
    try:
        bpts = f.B.fixed_points()
    except ValueError as exc:
        raise NotSimple(np.zeros(model.dim), 0.0) from exc
    for comp, y in bpts:
        p = model.from_collar(np.zeros(1), np.array([comp]), np.array([y]).reshape(1, -1))[0]
        a, cls = classify_boundary_point(f, np.array(y), comp)
        records.append(_record(f, p, "boundary", threshold, a_value=a, classification=cls,
                               component=comp))
    for rec in records:
        if np.linalg.norm(f.residual(np.array(rec.location).reshape(1, -1))) >= newton_tol:
            raise FixedPointSearchError(f"record {rec.location} is not a fixed point")
    return records


def preimages(f: SelfMap, value, grid_resolution: int = 48, tol: float = NEWTON_TOL) -> np.ndarray:
    """All core points x with f(x) = value."""
    model = f.model
    v = np.asarray(value, float).reshape(1, -1)
    return solve_on_core(model, lambda p: model.chart_diff(f(p), v), f.jacobian, grid_resolution, tol)


# ---------------------------------------------------------------------------
# simplicial approximations


def simplicial_approximation(f: ConditionAMap) -> List[int]:
    """Vertex map on the model triangulation homotopic to ``f`` rel the boundary behavior.

    Radial profiles become the identity on layers (or layer reversal for a
    component swap); the boundary isometry becomes the nearest mesh symmetry
    of the same type.  The checkerboard quad splitting is only preserved by
    angular shifts of one parity, so candidate shifts are tried in order of
    distance from B's own shift.
    """
    model = f.model
    tri = model.triangulation
    B = f.B
    if model.name == "interval":
        last = max(lab[1] for lab in tri.labels)
        img = {lab: ("x", last - lab[1]) if B.swaps else lab for lab in tri.labels}
        return [tri.label_index[img[lab]] for lab in tri.labels]
    n_ang = model.resolution
    ideal = B.shift[0] / (TWO_PI / n_ang)
    base = int(math.floor(ideal))
    candidates = sorted(range(base - 1, base + 3), key=lambda k: (abs(k - ideal), k))
    last_error = None
    for k in candidates:
        vmap = _vertex_map(model, B, k)
        try:
            tri.validate_vertex_map(vmap)
        except SimplicialError as exc:
            last_error = exc
            continue
        return vmap
    raise MapError(f"no simplicial approximation of {B.descriptor!r} on this mesh: {last_error}")


def _vertex_map(model: ModelManifold, B: BoundaryIsometry, k: int) -> List[int]:
    """Vertex map with angular shift ``k`` mesh steps (rotation) or axis ``k`` (reflection)."""
    tri = model.triangulation
    n_ang = model.resolution

    def theta_map(j: int) -> int:
        return (j + k) % n_ang if B.signs[0] == 1 else (k - j) % n_ang

    if model.name == "annulus":
        last = max(lab[1] for lab in tri.labels)
        img = {lab: ("r", last - lab[1] if B.swaps else lab[1], theta_map(lab[2])) for lab in tri.labels}
    else:
        def disk_label(lab):
            return lab if lab == ("c",) else ("r", lab[1], theta_map(lab[2]))

        if model.name == "disk":
            img = {lab: disk_label(lab) for lab in tri.labels}
        else:
            n_phi = model.resolution
            pstep = TWO_PI / n_phi
            m = int(round(B.shift[1] / pstep))

            def layer(l):
                return (l + m) % n_phi if B.signs[1] == 1 else (m - l) % n_phi

            def slab(l):
                return (l + m) % n_phi if B.signs[1] == 1 else (m - l - 1) % n_phi

            img = {}
            for lab in tri.labels:
                if lab[0] == "v":
                    img[lab] = ("v", disk_label(lab[1]), layer(lab[2]))
                else:
                    img[lab] = (lab[0], frozenset(disk_label(d) for d in lab[1]), slab(lab[2]))
    return [tri.label_index[img[lab]] for lab in tri.labels]
