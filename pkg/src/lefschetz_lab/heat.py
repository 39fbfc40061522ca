"""Heat-kernel side: cylinder kernels, the parametrix, boundary trace
integrals and their t -> 0 limits, and the interior index check.

All lengths here are metric lengths: a chart length is multiplied by the
model ``scale``.  The collar coordinate u is the inward normal distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erf

from .catalog import ModelManifold
from .forms import exterior_power
from .isometry import TWO_PI, BoundaryIsometry
from .selfmap import ConditionAMap, FixedPointRecord, find_fixed_points
from .spectral import (COS, HARMONIC, MINUS, PLUS, KSplit, SpectralBasis, SpectralError,
                       b_star_harmonic, compute_k_split, default_cutoff, equivariant_heat_trace,
                       harmonic_labels, index_tuples, spectral_basis)

BCS = ("PminusL0", "PplusL1")
VARIANTS = ("tangential_dirichlet", "tangential_neumann", "normal_dirichlet", "normal_neumann")
DEFAULT_T_GRID = (0.2, 0.1, 0.05, 0.025)


class HeatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# elementary pieces


def smoothstep(a: float, b: float, u):
    """rho(a, b): 0 for u <= a, 1 for u >= b, degree-5 smoothstep in between."""
    z = np.clip((np.asarray(u, float) - a) / (b - a), 0.0, 1.0)
    return np.clip(z ** 3 * (10 - 15 * z + 6 * z * z), 0.0, 1.0)


@dataclass(frozen=True)
class Cutoffs:
    """phi_1, psi_1, phi_2, psi_2 with breakpoints k eps / 7."""

    eps: float

    def phi1(self, u):
        return 1 - smoothstep(5 * self.eps / 7, 6 * self.eps / 7, u)

    def psi1(self, u):
        return 1 - smoothstep(3 * self.eps / 7, 4 * self.eps / 7, u)

    def phi2(self, u):
        return smoothstep(self.eps / 7, 2 * self.eps / 7, u)

    def psi2(self, u):
        return smoothstep(3 * self.eps / 7, 4 * self.eps / 7, u)

    def partition_residual(self, n: int = 2001) -> float:
        u = np.linspace(0, 1.5 * self.eps, n)
        return float(np.max(np.abs(self.phi1(u) * self.psi1(u) + self.phi2(u) * self.psi2(u) - 1)))


def gaussian_factor(c: float, variant: str) -> float:
    """1/2 (1/|1-c| -+ 1/(1+c)), times c for the normal variants."""
    if variant not in VARIANTS:
        raise HeatError(f"unknown variant {variant!r}")
    c = float(c)
    if c <= 0:
        raise HeatError("c must be positive")
    if c == 1:
        raise HeatError("c must differ from 1: the factor 1/|1-c| is singular")
    sign = -1.0 if variant.endswith("dirichlet") else 1.0
    val = 0.5 * (1 / abs(1 - c) + sign / (1 + c))
    return c * val if variant.startswith("normal") else val


def _block_sign(bc: str, parity: int) -> float:
    """-1 (Dirichlet-type difference of Gaussians) or +1 (Neumann-type sum)."""
    if bc not in BCS:
        raise HeatError(f"unknown boundary condition {bc!r}")
    dirichlet = (parity == MINUS) == (bc == "PminusL0")
    return -1.0 if dirichlet else 1.0


def _gauss_pair(u, v, t, sign):
    return (np.exp(-(u - v) ** 2 / (4 * t)) + sign * np.exp(-(u + v) ** 2 / (4 * t))) / math.sqrt(4 * math.pi * t)


def erf_factor(c: float, a: float, t: float, sign: float) -> float:
    """(1/sqrt(4 pi t)) int_0^a (e^{-(c-1)^2 u^2/4t} + sign e^{-(c+1)^2 u^2/4t}) du."""
    k1, k2 = abs(c - 1), c + 1
    s = 2 * math.sqrt(t)
    return 0.5 * (erf(k1 * a / s) / k1 + sign * erf(k2 * a / s) / k2)


# ---------------------------------------------------------------------------
# cylinder kernels


def cylinder_kernel_eval(basis: SpectralBasis, bc: str, q: int, t: float, x, z,
                         tail_tol: float = 1e-12) -> np.ndarray:
    """Heat kernel of the half-infinite cylinder at (x, z) by spectral summation.

    ``x = (u, comp, y)``, ``z = (v, comp', y')`` with u, v metric normal
    coordinates.  Returns the matrix from the fibre at z to the fibre at x
    in the basis (e_J, du ^ e_J').
    """
    if t <= 0:
        raise HeatError("t must be positive")
    u, cx, yx = x
    v, cz, yz = z
    n = basis.boundary.n
    blocks = []
    for deg in (q, q - 1):
        if deg < 0 or deg > n:
            blocks.append(None)
            continue
        tail = basis.tail_bound(deg, t) * 2.0 / basis.volume / math.sqrt(4 * math.pi * t)
        if tail > tail_tol:
            raise HeatError(f"tail bound {tail:.1e} exceeds {tail_tol:g} at t = {t:g}")
        d = basis.degrees[deg]
        ex = basis.evaluate(deg, [cx], np.atleast_1d(np.asarray(yx, float)).reshape(1, n))[:, 0, :]
        ez = basis.evaluate(deg, [cz], np.atleast_1d(np.asarray(yz, float)).reshape(1, n))[:, 0, :]
        w = np.exp(-t * d.eig)
        out = 0.0
        for par in (MINUS, PLUS):
            g = _gauss_pair(u, v, t, _block_sign(bc, par))
            sel = d.parity == par
            out = out + g * np.einsum("l,li,lj->ij", w[sel], ex[sel], ez[sel])
        blocks.append(out)
    nt = len(index_tuples(n, q)) if q <= n else 0
    nn = len(index_tuples(n, q - 1)) if 1 <= q <= n + 1 else 0
    mat = np.zeros((nt + nn, nt + nn))
    if blocks[0] is not None:
        mat[:nt, :nt] = blocks[0]
    if blocks[1] is not None:
        mat[nt:, nt:] = blocks[1]
    return mat


# ---------------------------------------------------------------------------
# boundary trace integrals


@dataclass
class BoundaryIntegral:
    t: float
    q: int
    bc: str
    route_i: float
    route_ii: float

    @property
    def difference(self) -> float:
        return abs(self.route_i - self.route_ii)


class BoundaryContext:
    """Spectral data shared by the boundary computations of one map."""

    def __init__(self, f: ConditionAMap, t_min: float, cutoff: Optional[float] = None,
                 split: Optional[KSplit] = None):
        self.f = f
        self.model = f.model
        self.boundary = self.model.boundary()
        self.split = split or compute_k_split(self.model)
        self.cutoff = cutoff or default_cutoff(t_min)
        self.basis = spectral_basis(self.boundary, self.cutoff, self.split)
        self.a = self.model.scale * f.collar / 7  # metric length of [0, eps/7]


def _route_i(ctx: BoundaryContext, bc: str, q: int, t: float) -> float:
    f = ctx.f
    total = 0.0
    for deg, weight in ((q, 1.0), (q - 1, f.c)):
        if deg < 0 or deg > ctx.boundary.n:
            continue
        for par, name in ((MINUS, "minus"), (PLUS, "plus")):
            g = erf_factor(f.c, ctx.a, t, _block_sign(bc, par))
            total += weight * g * equivariant_heat_trace(ctx.basis, f.B, deg, name, t)
    return total


# -- route (ii): direct quadrature with image-sum kernels -------------------


def _circle_images(d, t, length):
    """sum_n (4 pi t)^{-1/2} exp(-(d + n L)^2 / 4t) for metric displacements d."""
    reach = int(math.ceil(math.sqrt(4 * t * 40) / length)) + 1
    out = np.zeros_like(d)
    for n in range(-reach, reach + 1):
        out += np.exp(-(d + n * length) ** 2 / (4 * t))
    return out / math.sqrt(4 * math.pi * t)


def _scalar_heat(ctx: BoundaryContext, t, cy, y, cx, x):
    """Scalar heat kernel of Y between (cy, y) and (cx, x), by images."""
    bd = ctx.boundary
    lam = bd.scale
    out = (cy == cx).astype(float)
    for k in range(bd.n):
        d = lam * (((y[:, k] - x[:, k]) + math.pi) % TWO_PI - math.pi)
        out = out * _circle_images(d, t, bd.circumference)
    return out


def _harmonic_projector(ctx: BoundaryContext, deg: int, cols: np.ndarray, cy, cx) -> np.ndarray:
    """Kernel of the orthogonal projector onto span(cols), shape (points, J', J)."""
    bd = ctx.boundary
    labels = harmonic_labels(bd, deg)
    idx = index_tuples(bd.n, deg)
    npts = len(cy)
    vy = np.zeros((cols.shape[1], npts, len(idx)))
    vx = np.zeros((cols.shape[1], npts, len(idx)))
    for row, (i, I) in enumerate(labels):
        vy[:, :, idx.index(I)] += np.outer(cols[row], cy == i)
        vx[:, :, idx.index(I)] += np.outer(cols[row], cx == i)
    vol = bd.circumference ** bd.n
    return np.einsum("lpa,lpb->pab", vy, vx) / vol


def _parity_kernels(ctx: BoundaryContext, deg: int, t, cy, y, cx, x):
    """(minus, plus) kernels of e^{-t Delta_Y^deg} between (cy, y) and (cx, x)."""
    bd = ctx.boundary
    n = bd.n
    dim = len(index_tuples(n, deg))
    full = _scalar_heat(ctx, t, cy, y, cx, x)[:, None, None] * np.eye(dim)
    pk = _harmonic_projector(ctx, deg, ctx.split.minus(deg), cy, cx)
    ps = _harmonic_projector(ctx, deg, ctx.split.plus(deg), cy, cx)
    if n == 0:
        return pk, ps
    if deg == 0:
        return pk, full - pk
    if deg == n:
        return full - ps, ps
    # torus 1-forms: the exact non-harmonic part depends on y - x only; sum its
    # Fourier series once per distinct displacement
    exact = np.zeros_like(full)
    same = cy == cx
    disp = np.round(((y - x) + math.pi) % TWO_PI - math.pi, 13)[same]
    if disp.size:
        uniq, inv = np.unique(disp, axis=0, return_inverse=True)
        exact[same] = _exact_one_form_kernel(ctx, t, uniq)[inv.reshape(-1)]
    return exact + pk, full - pk - ps - exact + ps


def _exact_one_form_kernel(ctx: BoundaryContext, t: float, disp: np.ndarray, chunk: int = 64) -> np.ndarray:
    """sum_k e^{-t|k|^2/lam^2} (2/V) k k^T/|k|^2 cos(k.d) over the half lattice."""
    bd = ctx.boundary
    d = ctx.basis.degrees[1]
    sel = (d.kind == COS) & (d.parity == MINUS) & (d.comp == 0)
    k = d.k[sel].astype(float)
    w = np.exp(-t * d.eig[sel]) * 2.0 / ctx.basis.volume
    kk = k[:, :, None] * k[:, None, :] / np.sum(k * k, axis=1)[:, None, None]
    d1, i1 = np.unique(disp[:, 0], return_inverse=True)
    d2, i2 = np.unique(disp[:, 1], return_inverse=True)
    if len(d1) * len(d2) <= 4 * len(disp) + 4096:
        # separable route: cos(k.d) = Re e^{i k1 d1} e^{i k2 d2}, summed by two matmuls
        ki = np.rint(k).astype(int)
        K = int(np.max(np.abs(ki))) if len(ki) else 0
        kr = np.arange(-K, K + 1)
        e1, e2 = np.exp(1j * np.outer(d1, kr)), np.exp(1j * np.outer(d2, kr))
        out = np.empty((len(disp), 2, 2))
        for a in range(2):
            for b in range(2):
                M = np.zeros((2 * K + 1, 2 * K + 1))
                M[ki[:, 0] + K, ki[:, 1] + K] += 0.5 * w * kk[:, a, b]
                M[-ki[:, 0] + K, -ki[:, 1] + K] += 0.5 * w * kk[:, a, b]
                grid = (e1 @ M @ e2.T).real
                out[:, a, b] = grid[i1.reshape(-1), i2.reshape(-1)]
        return out
    out = np.empty((len(disp), 2, 2))
    for s in range(0, len(disp), chunk):
        cosv = np.cos(disp[s:s + chunk] @ k.T)
        out[s:s + chunk] = np.einsum("pl,l,lab->pab", cosv, w, kk)
    return out


def route_ii_cost(ctx: BoundaryContext) -> int:
    """Rough work estimate of route (ii): lattice lines times distinct displacements."""
    if ctx.boundary.n < 2:
        return 0
    kmax = ctx.boundary.scale * math.sqrt(ctx.cutoff)
    return int(2 * math.pi * kmax * kmax * 4096)


def _panel_nodes(breaks: np.ndarray, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[:-1], breaks[1:]
    nodes = (0.5 * (hi - lo)[:, None] * x[None, :] + 0.5 * (hi + lo)[:, None]).ravel()
    weights = (0.5 * (hi - lo)[:, None] * w[None, :]).ravel()
    return nodes, weights


def _angle_breaks(centers: Sequence[float], width: float, panels: int = 32) -> np.ndarray:
    pts = list(np.linspace(0, TWO_PI, panels + 1))
    for c in centers:
        for s in (0.5, 1, 2, 4, 8, 16, 32, 64):
            for sign in (-1, 1):
                pts.append((c + sign * s * width) % TWO_PI)
        pts.append(c % TWO_PI)
    return np.unique(np.round(np.array(pts), 15))


def _route_ii(ctx: BoundaryContext, bc: str, q: int, t: float, order: Optional[int] = None,
              chunk: int = 200_000) -> float:
    """Direct quadrature of Tr(T_q(x) E_cyl(t, f(x), x)) over [0, eps/7] x Y."""
    f, model, bd = ctx.f, ctx.model, ctx.boundary
    lam, n, m = model.scale, bd.n, model.dim
    if q > m:
        return 0.0
    order = order or (12 if n < 2 else 8)
    # u nodes (metric), graded toward the Gaussian scale
    s = math.sqrt(t) / abs(f.c - 1)
    ub = np.unique(np.clip(np.concatenate([[0.0], s * np.array([0.5, 1, 2, 4, 8, 16, 32]),
                                           np.linspace(0, ctx.a, 9 if n < 2 else 3)]), 0, ctx.a))
    un, uw = _panel_nodes(ub, order)
    # y nodes: panels refined around the angles B fixes or reflects about
    width = math.sqrt(t) / lam
    per_axis = []
    for k in range(n):
        centers = []
        if f.B.signs[k] == -1:
            b = f.B.shift[k]
            centers = [b / 2, b / 2 + math.pi]
        per_axis.append(_panel_nodes(_angle_breaks(centers, width, 32 if n < 2 else 16), order))
    if n:
        grids = np.meshgrid(*[p[0] for p in per_axis], indexing="ij")
        wgrid = np.meshgrid(*[p[1] for p in per_axis], indexing="ij")
        yn = np.stack([g.ravel() for g in grids], axis=1)
        yw = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1) * lam ** n
    else:
        yn, yw = np.zeros((1, 0)), np.ones(1)
    # position of each basis element of Lambda^q in the (tangential, normal) blocks
    full_basis = list(combinations(range(m), q))
    pos = [("n", tuple(i - 1 for i in I[1:])) if 0 in I else ("t", tuple(i - 1 for i in I))
           for I in full_basis]
    U_all, Y_all = np.meshgrid(np.arange(len(un)), np.arange(len(yn)), indexing="ij")
    U_all, Y_all = U_all.ravel(), Y_all.ravel()
    total = 0.0
    for comp in range(bd.n_components):
        for s0 in range(0, len(U_all), chunk):
            U, Yi = U_all[s0:s0 + chunk], Y_all[s0:s0 + chunk]
            total += _route_ii_chunk(ctx, bc, q, t, comp, un[U], yn[Yi], uw[U] * yw[Yi], pos)
    return total


def _route_ii_chunk(ctx, bc, q, t, comp, u_metric, y, weights, pos) -> float:
    f, model, n = ctx.f, ctx.model, ctx.boundary.n
    lam = model.scale
    u_chart = u_metric / lam
    cvec = np.full(len(u_chart), comp)
    x = model.from_collar(u_chart, cvec, y)
    fx = f(x)
    uf, cf, yf = model.collar_coords(fx)
    D = _metric_jacobian(model, x, fx, f.jacobian(x), (u_chart, cvec, y), (uf, cf, yf))
    T = exterior_power(np.transpose(D, (0, 2, 1)), q)  # (P, full, full)
    E = np.zeros(T.shape)
    for kind, deg in (("t", q), ("n", q - 1)):
        if deg < 0 or deg > n:
            continue
        km, kp = _parity_kernels(ctx, deg, t, cf, yf, cvec, y)
        idx = index_tuples(n, deg)
        rows = [(a, idx.index(J)) for a, (ka, J) in enumerate(pos) if ka == kind]
        for par, kern in ((MINUS, km), (PLUS, kp)):
            g = _gauss_pair(lam * uf, u_metric, t, _block_sign(bc, par))
            for a, ja in rows:
                for b, jb in rows:
                    E[:, a, b] += g * kern[:, ja, jb]
    return float(np.sum(np.einsum("pij,pji->p", T, E) * weights))


def _collar_frame(model: ModelManifold, u, comp, y, h: float = 1e-6) -> np.ndarray:
    """Chart vectors of the metric-unit frame (d/dU, d/dY_k) at collar points."""
    lam = model.scale
    n = model.boundary_n
    cols = []
    du = (model.from_collar(u + h, comp, y) - model.from_collar(np.maximum(u - h, 0), comp, y))
    du = du / ((u + h) - np.maximum(u - h, 0))[:, None]
    cols.append(du / lam)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dy = model.chart_diff(model.from_collar(u, comp, y + e), model.from_collar(u, comp, y - e)) / (2 * h)
        cols.append(dy / lam)
    return np.stack(cols, axis=2)


def _metric_jacobian(model, x, fx, jac, xc, fc) -> np.ndarray:
    """df in the orthonormal frames (dU, e_y) at x and f(x)."""
    fr_x = _collar_frame(model, *xc)
    fr_f = _collar_frame(model, *fc)
    return np.linalg.solve(fr_f, jac @ fr_x)


def boundary_trace_integral(f: ConditionAMap, bc: str, q: int, t: float,
                            ctx: Optional[BoundaryContext] = None, check: bool = True) -> BoundaryIntegral:
    """int_Y int_0^{eps/7} Tr(T_q E_cyl(t, f(x), x)) du dvol by two routes.

    Route (i): closed-form erf factor times equivariant heat traces.
    Route (ii): tensor Gauss quadrature in (u, y) of the pointwise trace,
    with image-sum kernels and the map's own Jacobian.
    """
    if t <= 0:
        raise HeatError("t must be positive")
    _block_sign(bc, MINUS)
    ctx = ctx or BoundaryContext(f, t)
    r1 = _route_i(ctx, bc, q, t)
    r2 = _route_ii(ctx, bc, q, t)
    res = BoundaryIntegral(t, q, bc, r1, r2)
    if check and res.difference > 1e-4:
        raise HeatError(f"boundary integral routes disagree at t={t:g}, q={q}, {bc}: {r1} vs {r2}")
    return res


# ---------------------------------------------------------------------------
# extrapolation and limits


def richardson(ts: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Polynomial extrapolation to t = 0 (Neville); returns (R_n, |R_n - R_{n-1}|).

    R_{n-1} uses every point but the largest t.
    """
    ts = np.asarray(ts, float)
    vs = np.asarray(values, float)
    order = np.argsort(ts)
    ts, vs = ts[order], vs[order]

    def neville(tt, vv):
        p = list(vv)
        k = len(tt)
        for lev in range(1, k):
            for i in range(k - lev):
                p[i] = ((0 - tt[i + lev]) * p[i] - (0 - tt[i]) * p[i + 1]) / (tt[i] - tt[i + lev])
        return p[0]

    full = neville(ts, vs)
    prev = neville(ts[:-1], vs[:-1]) if len(ts) > 1 else full
    return float(full), float(abs(full - prev))


@dataclass
class BoundaryLimit:
    limit: float
    residual: float
    target: float
    per_t: List[Dict[str, float]]
    details: Dict[str, float] = field(default_factory=dict)


def boundary_target(f: ConditionAMap, records: Sequence[FixedPointRecord], split: KSplit) -> Tuple[float, dict]:
    """1/2 sum_{F_Y} sign det(I - df) + 1/2 (Tr B* on star K - Tr B* on K)."""
    half_sum = 0.5 * sum(r.index for r in records if r.kind == "boundary")
    tk = split.trace_on_K(f.B)
    ts = split.trace_on_starK(f.B)
    return half_sum + 0.5 * (ts - tk), {"half_fixed_sum": half_sum, "trace_K": tk, "trace_starK": ts}


def combined_boundary_limit(f: ConditionAMap, t_grid: Sequence[float] = DEFAULT_T_GRID,
                            records: Optional[Sequence[FixedPointRecord]] = None,
                            cutoff: Optional[float] = None, tol: float = 1e-3,
                            route_ii="auto", max_route_ii_cost: float = 2e8) -> BoundaryLimit:
    """Extrapolated limit of sum_even (P-L0 integrals) - sum_odd (P+L1 integrals).

    The extrapolation uses route (i).  Route (ii) is evaluated alongside
    when ``route_ii`` is true, or under "auto" when its work estimate is
    below ``max_route_ii_cost``; the largest route gap is reported.
    """
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 4 or any(a <= b for a, b in zip(t_grid, t_grid[1:])):
        raise HeatError("t_grid must be decreasing with at least 4 points")
    ctx = BoundaryContext(f, min(t_grid), cutoff)
    if route_ii == "auto":
        route_ii = route_ii_cost(ctx) <= max_route_ii_cost
    per_t = []
    vals = []
    for t in t_grid:
        row = {"t": t, "route_i": 0.0, "route_ii": 0.0}
        for q in range(f.model.dim + 1):
            bc = "PminusL0" if q % 2 == 0 else "PplusL1"
            sign = 1.0 if q % 2 == 0 else -1.0
            r1 = _route_i(ctx, bc, q, t)
            row["route_i"] += sign * r1
            if route_ii:
                row["route_ii"] += sign * _route_ii(ctx, bc, q, t)
        per_t.append(row)
        vals.append(row["route_i"])
    limit, resid = richardson(t_grid, vals)
    if resid > tol:
        raise HeatError(f"extrapolation residual {resid:.2e} exceeds {tol:g}")
    records = records if records is not None else find_fixed_points(f)
    target, info = boundary_target(f, records, ctx.split)
    info["route_ii"] = bool(route_ii)
    if route_ii:
        info["max_route_gap"] = max(abs(r["route_i"] - r["route_ii"]) for r in per_t)
    else:
        for r in per_t:
            r["route_ii"] = None
    return BoundaryLimit(limit, resid, target, per_t, info)


# ---------------------------------------------------------------------------
# parametrix on the interval


@dataclass(frozen=True)
class IntervalGeometry:
    """Interval of metric length ``length`` with collar ``eps`` (metric) at both ends."""

    length: float = 40.0
    eps: float = 14.0

    @classmethod
    def from_model(cls, model: ModelManifold) -> "IntervalGeometry":
        if model.name != "interval":
            raise HeatError("the parametrix check runs on the interval")
        return cls(model.scale, model.scale * model.collar_width)


def exact_interval_kernel(bc: str, q: int, t: float, x, y, length: float):
    """Exact kernel on [0, L] by images: antiperiodic or periodic with period L.

    The P-L0 condition is antiperiodic on functions and periodic on the
    dx-coefficient of 1-forms; P+L1 is the reverse.
    """
    anti = (bc == "PminusL0") == (q == 0)
    x = np.asarray(x, float)[:, None]
    y = np.asarray(y, float)[None, :]
    reach = int(math.ceil(math.sqrt(160 * t) / length)) + 2
    out = 0.0
    for n in range(-reach, reach + 1):
        sign = (-1) ** n if anti else 1
        out = out + sign * np.exp(-(x - y - n * length) ** 2 / (4 * t))
    return out / math.sqrt(4 * math.pi * t)


def double_kernel(t: float, x, y, length: float):
    """Kernel of the closed double (circle of length 2L) for points of one sheet."""
    x = np.asarray(x, float)[:, None]
    y = np.asarray(y, float)[None, :]
    reach = int(math.ceil(math.sqrt(160 * t) / (2 * length))) + 2
    out = 0.0
    for n in range(-reach, reach + 1):
        out = out + np.exp(-(x - y - 2 * n * length) ** 2 / (4 * t))
    return out / math.sqrt(4 * math.pi * t)


def interval_cylinder_kernel(bc: str, q: int, t: float, x, y, geo: IntervalGeometry, basis: SpectralBasis):
    """Cylinder kernel over the two-point boundary, in the dx frame.

    With a zero-dimensional boundary the kernel factors into a Gaussian
    pair in (u, v) times a 2x2 spectral coefficient per parity.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    cx = (x > geo.length / 2).astype(int)
    cy = (y > geo.length / 2).astype(int)
    ux = np.where(cx == 0, x, geo.length - x)
    vy = np.where(cy == 0, y, geo.length - y)
    d = basis.degrees[0]
    ev = basis.evaluate(0, [0, 1], np.zeros((2, 0)))[:, :, 0]
    w = np.exp(-t * d.eig)
    out = 0.0
    for par in (MINUS, PLUS):
        sel = d.parity == par
        coef = np.einsum("l,la,lb->ab", w[sel], ev[sel], ev[sel])
        out = out + _gauss_pair(ux[:, None], vy[None, :], t, _block_sign(bc, par)) * coef[cx][:, cy]
    if q == 1:  # du = dx at the left end, -dx at the right end
        out = out * np.outer(1 - 2 * cx, 1 - 2 * cy)
    return out


def parametrix_kernel(bc: str, q: int, t: float, x, y, geo: IntervalGeometry, basis: SpectralBasis):
    cut = Cutoffs(geo.eps)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ux = np.minimum(x, geo.length - x)
    vy = np.minimum(y, geo.length - y)
    cyl = interval_cylinder_kernel(bc, q, t, x, y, geo, basis)
    dbl = double_kernel(t, x, y, geo.length)
    return (cut.phi1(ux)[:, None] * cyl * cut.psi1(vy)[None, :]
            + cut.phi2(ux)[:, None] * dbl * cut.psi2(vy)[None, :])


def _interval_basis(model: Optional[ModelManifold] = None) -> SpectralBasis:
    from .catalog import build_model
    model = model or build_model("interval", collar_width=0.2)
    split = compute_k_split(model)
    return spectral_basis(model.boundary(), 1.0, split)


def parametrix_error(bc: str, t: float, q: int = 0, geo: IntervalGeometry = IntervalGeometry(),
                     n_grid: int = 121, region: Optional[Tuple[float, float]] = None) -> float:
    """Sup over a sample grid of |exact kernel - parametrix| on the interval.

    ``region`` restricts both points to u in [lo, hi] (metric, measured
    from either end).
    """
    if not (0 < t <= 1):
        raise HeatError("t must lie in (0, 1]")
    basis = _interval_basis()
    if region is None:
        x = np.linspace(0, geo.length, n_grid)
    else:
        lo, hi = region
        side = np.linspace(lo, hi, max(3, n_grid // 4))
        x = np.concatenate([side, geo.length - side[::-1]])
    ex = exact_interval_kernel(bc, q, t, x, x, geo.length)
    par = parametrix_kernel(bc, q, t, x, x, geo, basis)
    return float(np.max(np.abs(ex - par)))


def fit_log_error(ts: Sequence[float], errors: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares fit log(err) = a + b / t; returns (a, b, R^2)."""
    inv = 1 / np.asarray(ts, float)
    le = np.log(np.asarray(errors, float))
    b, a = np.polyfit(inv, le, 1)
    pred = a + b * inv
    ss_res = float(np.sum((le - pred) ** 2))
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    return float(a), float(b), 1 - ss_res / ss_tot if ss_tot > 0 else 1.0


# ---------------------------------------------------------------------------
# interior contributions


def _supertrace_integrand(f, x, t, lam):
    m = f.model.dim
    d = f.model.chart_diff(f(x), x) * lam
    g = np.exp(-np.sum(d * d, axis=1) / (4 * t)) * lam ** m / (4 * math.pi * t) ** (m / 2)
    jac = f.jacobian(x)
    st = 0.0
    for q in range(m + 1):
        tq = exterior_power(np.transpose(jac, (0, 2, 1)), q)
        st = st + (-1) ** q * np.trace(tq, axis1=1, axis2=2)
    return g * st


@dataclass
class InteriorCheck:
    point: Tuple[float, ...]
    limit: float
    residual: float
    local_index: int
    per_t: List[Tuple[float, float]]


def interior_index_heat_check(f: ConditionAMap, record: FixedPointRecord,
                              t_grid: Sequence[float] = DEFAULT_T_GRID,
                              others: Sequence[FixedPointRecord] = (), nodes: int = 48,
                              tol: float = 1e-2) -> InteriorCheck:
    """t -> 0 limit of int_U sum_q (-1)^q Tr(T_q E(t, f(x), x)) near an interior fixed point.

    The local model is the Euclidean kernel.  U is the image of the cube
    |w_k| <= R under x = p + (I - df(p))^{-1} w, in which the Gaussian is
    isotropic to leading order; R is 8 sqrt(4t) / scale, shrunk if needed
    to keep U in the flat part of the chart and away from other fixed
    points.
    """
    if record.kind != "interior":
        raise HeatError("interior_index_heat_check needs an interior fixed point")
    model = f.model
    lam, m = model.scale, model.dim
    p = np.array(record.location)
    minv = np.linalg.inv(np.eye(m) - record.jacobian)
    stretch = float(np.linalg.norm(minv, 2)) * math.sqrt(m)
    delta = _flat_room(model, p)
    for o in others:
        if o.location != record.location:
            delta = min(delta, 0.45 * float(np.linalg.norm(model.chart_diff(np.array(o.location), p))))
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    per_t = []
    for t in t_grid:
        R = min(16 * math.sqrt(t) / lam, delta / stretch)
        grids = np.meshgrid(*([R * xs] * m), indexing="ij")
        wg = np.meshgrid(*([R * ws] * m), indexing="ij")
        w = np.stack([g.ravel() for g in grids], axis=1)
        weight = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1) * abs(np.linalg.det(minv))
        pts = p + w @ minv.T
        per_t.append((float(t), float(np.sum(_supertrace_integrand(f, pts, t, lam) * weight))))
    limit, resid = richardson([a for a, _ in per_t], [b for _, b in per_t])
    if resid > tol:
        raise HeatError(f"interior extrapolation residual {resid:.2e} exceeds {tol:g}")
    return InteriorCheck(tuple(p), limit, resid, record.index, per_t)


def _flat_room(model: ModelManifold, p: np.ndarray) -> float:
    """Chart distance from p to where the metric stops being flat (or to the collar)."""
    if model.name in ("disk", "solid_torus"):
        return float(model.flat_radius - np.hypot(p[0], p[1]))
    u = model.collar_coords(p.reshape(1, -1))[0][0]
    return float(u - model.collar_width)


def w_region_sup(f: ConditionAMap, records: Sequence[FixedPointRecord], t: float = 0.02,
                 radius: float = 0.05, n: int = 48) -> float:
    """Sup of the local supertrace integrand over W: u >= eps/7, away from interior fixed points."""
    model = f.model
    grid = np.concatenate([model.core_grid(n), _collar_grid(model, f.collar, n)])
    u = model.collar_coords(grid)[0]
    keep = u >= f.collar / 7
    for r in records:
        if r.kind == "interior":
            d = np.linalg.norm(model.chart_diff(grid, np.array(r.location)), axis=1)
            keep &= d >= radius
    vals = np.abs(_supertrace_integrand(f, grid[keep], t, model.scale))
    return float(vals.max()) if vals.size else 0.0


def _collar_grid(model: ModelManifold, eps: float, n: int) -> np.ndarray:
    us = np.linspace(0, eps, max(4, n // 4))
    ys = TWO_PI * np.arange(n) / n
    out = []
    for comp in range(model.n_components):
        if model.boundary_n == 0:
            out.append(model.from_collar(us, np.full(len(us), comp)))
            continue
        axes = [ys] * model.boundary_n
        g = np.meshgrid(us, *axes, indexing="ij")
        uu = g[0].ravel()
        yy = np.stack([a.ravel() for a in g[1:]], axis=1)
        out.append(model.from_collar(uu, np.full(len(uu), comp), yy))
    return np.concatenate(out)
