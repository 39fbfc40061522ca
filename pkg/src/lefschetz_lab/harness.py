"""Scenario definitions and the identity-verification harness.

For each scenario every side of the fixed point identities is computed by
independent routes: cohomology traces (exact simplicial, analytic), a
fixed-point inventory, the boundary correction K0 from the boundary
harmonic forms, and optionally the heat-kernel limits.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .catalog import CatalogError, build_model
from .cohomology import (TraceError, TraceTable, induced_trace_analytic, induced_trace_simplicial,
                         lefschetz_numbers)
from .heat import DEFAULT_T_GRID, HeatError, combined_boundary_limit, interior_index_heat_check
from .isometry import parse_angle
from .selfmap import (ConditionAMap, FixedPointRecord, MapError, find_fixed_points, make_condition_a_map,
                      simplicial_approximation)
from .spectral import SpectralError, compute_k0, compute_k_split, orientation_sign

ROUTES = ("simplicial", "analytic", "heat")
K0_ROUNDING_TOL = 1e-9


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """A model, a Condition A map on it, and what to verify."""

    name: str
    model: str
    c: float
    B: str
    collar: Optional[float] = None
    resolution: Optional[int] = None
    scale: float = 1.0
    profile: Tuple[Tuple[str, object], ...] = ()
    routes: Tuple[str, ...] = ("simplicial", "analytic")
    tolerance: float = 0.0
    analytic_tolerance: float = 1e-6
    heat_tolerance: float = 1e-3
    t_grid: Tuple[float, ...] = DEFAULT_T_GRID
    cutoff: Optional[float] = None
    seed_grid: Optional[int] = None
    label: str = ""

    @property
    def title(self) -> str:
        return self.label or f"{self.name} c={self.c:g}"

    def profile_params(self) -> dict:
        return dict(self.profile)

    def with_routes(self, routes: Sequence[str]) -> "Scenario":
        return replace(self, routes=tuple(routes))

    def validate(self) -> ConditionAMap:
        """Build model and map, raising ScenarioError on any invalid setting."""
        if not self.routes:
            raise ScenarioError(f"{self.name}: no routes selected")
        for r in self.routes:
            if r not in ROUTES:
                raise ScenarioError(f"{self.name}: unknown route {r!r}; choose from {', '.join(ROUTES)}")
        if not (isinstance(self.c, (int, float)) and math.isfinite(self.c)):
            raise ScenarioError(f"{self.name}: c must be a finite number")
        if self.c <= 0:
            raise ScenarioError(f"{self.name}: c must be positive")
        if self.c == 1:
            raise ScenarioError(f"{self.name}: c = 1 is degenerate (Condition A needs c != 1)")
        if "heat" in self.routes:
            ts = list(self.t_grid)
            if len(ts) < 4 or any(a <= b for a, b in zip(ts, ts[1:])) or ts[-1] <= 0:
                raise ScenarioError(f"{self.name}: t_grid must be positive, decreasing, with at least 4 points")
        try:
            model = build_model(self.model, self.resolution, self.collar, self.scale)
            return make_condition_a_map(model, self.c, self.B, self.profile_params())
        except (CatalogError, MapError, ValueError) as exc:
            raise ScenarioError(f"{self.name}: {exc}") from exc

    def as_dict(self) -> dict:
        d = asdict(self)
        d["profile"] = dict(self.profile)
        d["routes"] = list(self.routes)
        d["t_grid"] = list(self.t_grid)
        return d


def _builtin() -> Dict[str, Scenario]:
    S = Scenario
    items = [
        S("disk-reflection", "disk", 0.5, "refl", collar=0.5, scale=400.0),
        S("disk-reflection-repelling", "disk", 3.0, "refl", collar=0.15, scale=100.0),
        S("disk-rotation", "disk", 0.5, "rot=pi/3", collar=0.2, scale=300.0),
        S("disk-rotation-repelling", "disk", 2.0, "rot=pi/3", collar=0.2, scale=150.0),
        S("annulus-swap", "annulus", 0.5, "swap+rot=0.6", collar=0.3, scale=200.0),
        S("annulus-swap-repelling", "annulus", 2.0, "swap+rot=0.6", collar=0.1, scale=300.0),
        S("annulus-rotation", "annulus", 2.0, "rot=pi/4", collar=0.1, scale=300.0),
        S("annulus-reflection", "annulus", 0.5, "refl", collar=0.3, scale=200.0),
        S("annulus-swap-reflection", "annulus", 0.5, "swap+refl", collar=0.3, scale=200.0),
        S("annulus-swap-reflection-repelling", "annulus", 2.0, "swap+refl", collar=0.1, scale=300.0),
        S("interval-identity", "interval", 0.5, "id", collar=0.35, scale=150.0),
        S("interval-identity-repelling", "interval", 2.0, "id", collar=0.15, scale=200.0),
        S("interval-swap", "interval", 0.5, "swap", collar=0.35, scale=150.0),
        S("interval-swap-repelling", "interval", 3.0, "swap", collar=0.1, scale=150.0),
        S("solid-torus-reflection", "solid_torus", 3.0, "refl+phi-rot=0.9", collar=0.15, scale=60.0),
        S("solid-torus-double-reflection", "solid_torus", 0.5, "refl+phi-refl", collar=0.6, scale=400.0),
    ]
    return {s.name: s for s in items}


BUILTIN_SCENARIOS: Dict[str, Scenario] = _builtin()


def get_scenario(name: str) -> Scenario:
    """Look up a built-in scenario by name, or by its title ``name c=...``."""
    if name in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name]
    for s in BUILTIN_SCENARIOS.values():
        if s.title == name:
            return s
    raise ScenarioError(f"unknown scenario {name!r}; see list-scenarios")


# ---------------------------------------------------------------------------
# report


@dataclass
class Identity:
    name: str
    lhs: object
    rhs: object
    tolerance: float
    routes: Dict[str, str]

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)

    @property
    def exact(self) -> bool:
        return isinstance(self.lhs, Fraction) and isinstance(self.rhs, Fraction)

    @property
    def passed(self) -> bool:
        if self.exact:
            return self.residual == 0
        return float(self.residual) <= self.tolerance

    def as_dict(self) -> dict:
        out = {"name": self.name, "lhs": float(self.lhs), "rhs": float(self.rhs),
               "residual": float(self.residual), "verdict": "pass" if self.passed else "FAIL",
               "exact": self.exact, "tolerance": 0.0 if self.exact else self.tolerance,
               "routes": dict(self.routes)}
        if self.exact:
            out["lhs_exact"], out["rhs_exact"] = str(self.lhs), str(self.rhs)
        return out


@dataclass
class IdentityReport:
    scenario: Scenario
    identities: List[Identity] = field(default_factory=list)
    fixed_points: List[FixedPointRecord] = field(default_factory=list)
    k0: Optional[Fraction] = None
    k0_info: Dict[str, object] = field(default_factory=dict)
    traces: Dict[str, TraceTable] = field(default_factory=dict)
    lefschetz: Dict[str, Dict[str, object]] = field(default_factory=dict)
    heat: Dict[str, object] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and all(i.passed for i in self.identities)

    def identity(self, name: str) -> Identity:
        for i in self.identities:
            if i.name == name:
                return i
        raise KeyError(name)

    def as_dict(self) -> dict:
        fp_sums = _fixed_point_sums(self.fixed_points, self.scenario.c) if self.fixed_points else None
        return {
            "scenario": self.scenario.title,
            "parameters": self.scenario.as_dict(),
            "verdict": "pass" if self.passed else "FAIL",
            "identities": [i.as_dict() for i in self.identities],
            "fixed_points": [r.as_dict() for r in self.fixed_points],
            "fixed_point_sums": {k: str(v) for k, v in fp_sums.items()} if fp_sums else {},
            "k0": None if self.k0 is None else float(self.k0),
            "k0_info": self.k0_info,
            "traces": {k: v.as_dict() for k, v in self.traces.items()},
            "lefschetz": {k: {n: str(x) if isinstance(x, Fraction) else float(x) for n, x in v.items()}
                          for k, v in self.lefschetz.items()},
            "heat": self.heat,
            "errors": list(self.errors),
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
        }


def _fixed_point_sums(records: Sequence[FixedPointRecord], c: float) -> Dict[str, Fraction]:
    f0 = sum((Fraction(r.index) for r in records if r.kind == "interior"), Fraction(0))
    bd = [r for r in records if r.kind == "boundary"]
    fplus = sum((Fraction(r.index) for r in bd if r.classification == "attracting"), Fraction(0))
    fminus = sum((Fraction(r.index) for r in bd if r.classification == "repelling"), Fraction(0))
    return {"F0": f0, "F_plus": fplus, "F_minus": fminus, "F_Y": fplus + fminus,
            "n_attracting": Fraction(sum(r.classification == "attracting" for r in bd)),
            "n_repelling": Fraction(sum(r.classification == "repelling" for r in bd))}


def _exact_k0(value: float) -> Tuple[Fraction, float]:
    """Round a numerically computed K0 (always an integer trace) to an exact value."""
    k = round(value)
    dev = abs(value - k)
    if dev > K0_ROUNDING_TOL:
        raise SpectralError(f"K0 = {value!r} is not within {K0_ROUNDING_TOL:g} of an integer")
    return Fraction(k), dev


# ---------------------------------------------------------------------------
# verification


def verify_identities(scenario: Scenario) -> IdentityReport:
    """Compute every side of the identities for one scenario.

    Raises ScenarioError for invalid scenarios and NotSimple when a fixed
    point is degenerate.  Route disagreements are reported as failing
    identities, never reconciled.
    """
    t_start = time.perf_counter()
    f = scenario.validate()
    model = f.model
    rep = IdentityReport(scenario)
    t0 = time.perf_counter()
    grid = scenario.seed_grid or (64 if model.dim < 3 else 24)
    rep.fixed_points = find_fixed_points(f, grid)
    sums = _fixed_point_sums(rep.fixed_points, scenario.c)
    rep.timings["fixed_points"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    split = compute_k_split(model)
    k0_float = compute_k0(model, f.B, split)
    rep.k0, dev = _exact_k0(k0_float)
    orient = orientation_sign(model.boundary(), f.B)
    rep.k0_info = {"value": float(rep.k0), "computed": k0_float, "rounding_deviation": dev,
                   "orientation": "preserving" if orient > 0 else "reversing",
                   "trace_on_K": split.trace_on_K(f.B), "trace_on_starK": split.trace_on_starK(f.B),
                   "orientation_convention": "induced boundary orientation (outward normal first)"}
    rep.timings["k0"] = time.perf_counter() - t0

    half = Fraction(1, 2)
    rhs_c = sums["F0"] + half * sums["F_Y"] - rep.k0
    rhs_d = sums["F0"] + half * sums["F_Y"] + rep.k0
    fp_route = "fixed-point inventory"
    k_route = "fixed-point inventory + boundary harmonic K0"

    # boundary fixed points are all attracting or all repelling, decided by c
    expect_empty = "n_repelling" if scenario.c < 1 else "n_attracting"
    rep.identities.append(Identity("disjointness: one of F+_Y, F-_Y is empty", sums[expect_empty],
                                   Fraction(0), 0.0, {"lhs": fp_route, "rhs": "c vs 1"}))

    for route in ("simplicial", "analytic"):
        if route not in scenario.routes:
            continue
        t0 = time.perf_counter()
        try:
            if route == "simplicial":
                table = induced_trace_simplicial(model, simplicial_approximation(f))
            else:
                table = induced_trace_analytic(model, f)
            L = lefschetz_numbers(table)
        except (TraceError, MapError) as exc:
            rep.errors.append(f"{route}: {exc}")
            continue
        finally:
            rep.timings[route] = time.perf_counter() - t0
        rep.traces[route] = table
        rep.lefschetz[route] = L
        tol = scenario.tolerance if table.exact else max(scenario.tolerance, scenario.analytic_tolerance)
        ab, rel = table.absolute, table.relative
        even_abs = sum(x for q, x in enumerate(ab) if q % 2 == 0)
        even_rel = sum(x for q, x in enumerate(rel) if q % 2 == 0)
        odd_abs = sum(x for q, x in enumerate(ab) if q % 2 == 1)
        odd_rel = sum(x for q, x in enumerate(rel) if q % 2 == 1)
        lhs_route = f"{route} cohomology traces"
        add = lambda name, lhs, rhs, rr: rep.identities.append(
            Identity(f"{name} [{route}]", lhs, rhs, tol, {"lhs": lhs_route, "rhs": rr}))
        add("absolute Lefschetz = sum over F0 and attracting F_Y", L["L_abs"],
            sums["F0"] + sums["F_plus"], fp_route)
        add("relative Lefschetz = sum over F0 and repelling F_Y", L["L_rel"],
            sums["F0"] + sums["F_minus"], fp_route)
        add("L_P0 = F0 + 1/2 F_Y - K0", L["L_P0"], rhs_c, k_route)
        add("L_P1 = F0 + 1/2 F_Y + K0", L["L_P1"], rhs_d, k_route)
        add("even traces: abs - rel = 1/2 F+ - 1/2 F- + K0", even_abs - even_rel,
            half * sums["F_plus"] - half * sums["F_minus"] + rep.k0, k_route)
        add("odd traces: abs - rel = -1/2 F+ + 1/2 F- + K0", odd_abs - odd_rel,
            -half * sums["F_plus"] + half * sums["F_minus"] + rep.k0, k_route)
        add("cross: L_P1 - L_P0 = 2 K0", L["L_P1"] - L["L_P0"], 2 * rep.k0, "boundary harmonic K0")
        add("cross: L_P0 + L_P1 = L_abs + L_rel", L["L_P0"] + L["L_P1"], L["L_abs"] + L["L_rel"], lhs_route)
        add("cross: RHS sum = 2 F0 + F_Y", rhs_c + rhs_d, 2 * sums["F0"] + sums["F_Y"], fp_route)

    if "simplicial" in rep.traces and "analytic" in rep.traces:
        s, a = rep.traces["simplicial"], rep.traces["analytic"]
        gap = max(abs(float(x) - float(y)) for x, y in zip(s.absolute + s.relative, a.absolute + a.relative))
        rep.identities.append(Identity("routes: simplicial and analytic traces agree", gap, 0.0,
                                       scenario.analytic_tolerance,
                                       {"lhs": "max |simplicial - analytic| over all traces", "rhs": "0"}))

    if "heat" in scenario.routes:
        t0 = time.perf_counter()
        try:
            _heat_identities(rep, f, rhs_c)
        except (HeatError, SpectralError) as exc:
            rep.errors.append(f"heat: {exc}")
        rep.timings["heat"] = time.perf_counter() - t0
    rep.timings["total"] = time.perf_counter() - t_start
    return rep


def _heat_identities(rep: IdentityReport, f: ConditionAMap, rhs_c: Fraction) -> None:
    sc = rep.scenario
    interior = [r for r in rep.fixed_points if r.kind == "interior"]
    total = 0.0
    checks = []
    for r in interior:
        chk = interior_index_heat_check(f, r, sc.t_grid, others=rep.fixed_points)
        checks.append({"point": list(chk.point), "limit": chk.limit, "residual": chk.residual,
                       "local_index": chk.local_index, "per_t": chk.per_t})
        rep.identities.append(Identity(f"heat: interior limit at {tuple(round(float(x), 6) for x in chk.point)}",
                                       chk.limit, float(chk.local_index), sc.heat_tolerance,
                                       {"lhs": "heat supertrace, Richardson limit", "rhs": "local index"}))
        total += chk.limit
    lim = combined_boundary_limit(f, sc.t_grid, rep.fixed_points, sc.cutoff)
    rep.identities.append(Identity("heat: boundary limit = closed-form boundary target", lim.limit, lim.target,
                                   sc.heat_tolerance,
                                   {"lhs": "boundary trace integrals, Richardson limit",
                                    "rhs": "1/2 F_Y + 1/2 (Tr B* on star K - Tr B* on K)"}))
    if lim.details.get("route_ii"):
        rep.identities.append(Identity("heat: boundary integral routes agree", lim.details["max_route_gap"], 0.0,
                                       1e-4, {"lhs": "reduced erf form", "rhs": "direct quadrature"}))
    rep.identities.append(Identity("heat: interior + boundary limits = F0 + 1/2 F_Y - K0", total + lim.limit,
                                   float(rhs_c), sc.heat_tolerance,
                                   {"lhs": "heat route", "rhs": "fixed-point inventory + boundary harmonic K0"}))
    rep.heat = {"interior": checks, "boundary": {"limit": lim.limit, "residual": lim.residual,
                                                 "target": lim.target, "per_t": lim.per_t, **lim.details}}


def _verify_safe(scenario: Scenario) -> IdentityReport:
    try:
        return verify_identities(scenario)
    except Exception as exc:  # reported, never swallowed silently
        rep = IdentityReport(scenario)
        rep.errors.append(f"{type(exc).__name__}: {exc}")
        return rep


def run_suite(scenarios: Sequence[Scenario], jobs: int = 1) -> List[IdentityReport]:
    """Validate every scenario first, then verify them (in parallel if jobs > 1).

    The report order follows the input order.
    """
    for s in scenarios:
        s.validate()
    if jobs <= 1 or len(scenarios) <= 1:
        return [_verify_safe(s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_verify_safe, scenarios))


def summary_rows(reports: Sequence[IdentityReport]) -> List[dict]:
    """Flat per-identity rows for the CSV summary."""
    rows = []
    for rep in reports:
        for i in rep.identities:
            d = i.as_dict()
            rows.append({"scenario": rep.scenario.title, "identity": d["name"], "lhs": d["lhs"],
                         "rhs": d["rhs"], "residual": d["residual"], "verdict": d["verdict"],
                         "exact": d["exact"]})
        for e in rep.errors:
            rows.append({"scenario": rep.scenario.title, "identity": "error", "lhs": "", "rhs": "",
                         "residual": "", "verdict": "FAIL", "exact": "", "message": e})
    return rows


def parse_routes(text: str) -> Tuple[str, ...]:
    routes = tuple(r.strip() for r in text.split(",") if r.strip())
    bad = [r for r in routes if r not in ROUTES]
    if bad or not routes:
        raise ScenarioError(f"bad routes {text!r}; choose from {', '.join(ROUTES)}")
    return routes


__all__ = ["Scenario", "ScenarioError", "Identity", "IdentityReport", "BUILTIN_SCENARIOS", "get_scenario",
           "verify_identities", "run_suite", "summary_rows", "parse_routes", "parse_angle"]
