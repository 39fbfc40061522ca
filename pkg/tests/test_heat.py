import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from lefschetz_lab import heat
from lefschetz_lab.catalog import build_model
from lefschetz_lab.harness import BUILTIN_SCENARIOS, get_scenario
from lefschetz_lab.selfmap import find_fixed_points, make_condition_a_map
from lefschetz_lab.spectral import compute_k_split, equivariant_heat_trace, spectral_basis

c_values = st.one_of(st.floats(0.05, 0.95), st.floats(1.05, 20.0))


def quad_factor(c, variant):
    sign = -1.0 if variant.endswith("dirichlet") else 1.0
    X = 12 / min(abs(1 - c), 1 + c)
    val, _ = integrate.quad(lambda x: math.exp(-(c - 1) ** 2 * x * x) + sign * math.exp(-(c + 1) ** 2 * x * x),
                            0, X, epsabs=1e-13, epsrel=1e-13, limit=200)
    val /= math.sqrt(math.pi)
    return c * val if variant.startswith("normal") else val


# -- gaussian factors -------------------------------------------------------

def test_gaussian_factor_examples():
    assert heat.gaussian_factor(3, "tangential_dirichlet") == pytest.approx(1 / 8, abs=1e-15)
    assert heat.gaussian_factor(0.5, "tangential_neumann") == pytest.approx(4 / 3, abs=1e-15)
    assert heat.gaussian_factor(3, "normal_dirichlet") == pytest.approx(3 / 8, abs=1e-15)


def test_gaussian_factor_errors():
    with pytest.raises(heat.HeatError, match="differ from 1"):
        heat.gaussian_factor(1.0, "tangential_dirichlet")
    with pytest.raises(heat.HeatError):
        heat.gaussian_factor(-2.0, "tangential_dirichlet")
    with pytest.raises(heat.HeatError):
        heat.gaussian_factor(2.0, "sideways")


@settings(max_examples=40, deadline=None)
@given(c=c_values, variant=st.sampled_from(heat.VARIANTS))
def test_gaussian_factor_matches_quadrature(c, variant):
    assert heat.gaussian_factor(c, variant) == pytest.approx(quad_factor(c, variant), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(c=c_values)
def test_factor_pattern_under_inversion(c):
    # 1/|1 - 1/c| -+ 1/(1 + 1/c) = c (1/|1 - c| -+ 1/(1 + c))
    for tang, norm in (("tangential_dirichlet", "normal_dirichlet"), ("tangential_neumann", "normal_neumann")):
        assert heat.gaussian_factor(1 / c, tang) == pytest.approx(heat.gaussian_factor(c, norm), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(c=c_values, sign=st.sampled_from([-1.0, 1.0]))
def test_erf_factor_saturates_to_gaussian_factor(c, sign):
    t = 0.01
    a = 12 * math.sqrt(4 * t) / min(abs(1 - c), 1 + c)
    variant = "tangential_dirichlet" if sign < 0 else "tangential_neumann"
    assert heat.erf_factor(c, a, t, sign) == pytest.approx(heat.gaussian_factor(c, variant), abs=1e-12)


@pytest.mark.parametrize("c", [0.25, 0.5, 2.0, 3.0])
def test_collar_tail_is_negligible(c):
    t = 0.02
    k = min(abs(1 - c), 1 + c)
    u = 12 * math.sqrt(t) / k
    total = abs(heat.erf_factor(c, u, t, 1.0))
    integrand = (math.exp(-((c - 1) * u) ** 2 / (4 * t)) + math.exp(-((c + 1) * u) ** 2 / (4 * t))) \
        / math.sqrt(4 * math.pi * t)
    assert integrand < 1e-12 * total


# -- cutoffs ----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.0, 1.0), w=st.floats(0.01, 1.0), u=st.floats(-1.0, 3.0))
def test_smoothstep_shape(a, w, u):
    b = a + w
    val = float(heat.smoothstep(a, b, u))
    assert 0.0 <= val <= 1.0
    if u <= a:
        assert val == 0.0
    if u >= b:
        assert val == 1.0
    assert float(heat.smoothstep(a, b, u + 1e-3)) >= val


def test_cutoffs_partition_of_unity():
    cut = heat.Cutoffs(0.7)
    assert cut.partition_residual() < 1e-15
    u = np.linspace(0, 0.7, 701)
    assert np.all(cut.phi1(u)[u < 0.5 - 1e-12] == 1) and np.all(cut.phi2(u)[u < 0.1 - 1e-12] == 0)


# -- cylinder kernels ---------------------------------------------------------

@pytest.fixture(scope="module")
def circle():
    model = build_model("disk")
    split = compute_k_split(model)
    return model, spectral_basis(model.boundary(), 2000.0, split), spectral_basis(model.boundary(), 1e-9, split)


def _k(basis, bc, q, t, u, v, y=0.3, z=1.1, tail=1e-12):
    return heat.cylinder_kernel_eval(basis, bc, q, t, (u, 0, np.array([y])), (v, 0, np.array([z])), tail)


def test_constant_mode_kernel(circle):
    _, _, harm = circle
    t, u = 0.3, 0.4
    val = _k(harm, "PplusL1", 0, t, u, u, tail=math.inf)[0, 0]
    assert val == pytest.approx((1 + math.exp(-u * u / t)) / math.sqrt(4 * math.pi * t) / (2 * math.pi), rel=1e-14)
    assert _k(harm, "PminusL0", 0, t, 0.0, 0.0, tail=math.inf)[0, 0] == 0.0


@pytest.mark.parametrize("bc", heat.BCS)
@pytest.mark.parametrize("q", [0, 1, 2])
def test_kernel_boundary_conditions(circle, bc, q):
    """Dirichlet-type modes vanish at u = 0; Neumann-type modes have zero u-derivative."""
    _, full, harm = circle
    t, v, h = 0.2, 0.5, 1e-5
    tail = math.inf
    for basis, sub in ((harm, None), (full, harm)):
        def K(u):
            k = _k(basis, bc, q, t, u, v, tail=tail)
            return k - _k(sub, bc, q, t, u, v, tail=tail) if sub is not None else k
        value, slope = K(0.0), (K(h) - K(-h)) / (2 * h)
        # each diagonal block is either Dirichlet or Neumann for this mode class
        for i in range(value.shape[0]):
            assert min(abs(value[i, i]), abs(slope[i, i])) < 1e-9


def test_kernel_solves_heat_equation(circle):
    _, basis, _ = circle
    t, u, v, y, z = 0.5, 0.7, 0.4, 0.3, 1.1
    ht, hx = 1e-4, 1e-3
    for bc in heat.BCS:
        for q in (0, 1, 2):
            def K(tt=t, uu=u, yy=y):
                return _k(basis, bc, q, tt, uu, v, yy, z)
            dt = (K(tt=t + ht) - K(tt=t - ht)) / (2 * ht)
            duu = (K(uu=u + hx) - 2 * K() + K(uu=u - hx)) / hx ** 2
            dyy = (K(yy=y + hx) - 2 * K() + K(yy=y - hx)) / hx ** 2
            assert np.max(np.abs(dt - duu - dyy)) < 1e-6


def test_kernel_gaussian_decay(circle):
    model = circle[0]
    basis = spectral_basis(model.boundary(), 5000.0, compute_k_split(model))
    t = 0.01
    theta = sum(math.exp(-t * k * k) for k in range(-400, 401)) / (2 * math.pi)
    for ratio in (100.0, 400.0):
        d = math.sqrt(ratio * t)
        val = np.max(np.abs(_k(basis, "PplusL1", 0, t, 0.0, d, 0.3, 0.3)))
        assert val <= 2 * math.exp(-ratio / 4) / math.sqrt(4 * math.pi * t) * theta * (1 + 1e-12)
    assert val < 1e-20


# -- boundary trace integrals ------------------------------------------------

def test_route_i_block_formula():
    model = build_model("disk", collar_width=0.2, scale=100.0)
    f = make_condition_a_map(model, 0.5, "rot=pi/3")
    ctx = heat.BoundaryContext(f, 0.1)
    t = 0.1
    r = heat.boundary_trace_integral(f, "PminusL0", 0, t, ctx)
    expect = sum(heat.erf_factor(0.5, ctx.a, t, s) * equivariant_heat_trace(ctx.basis, f.B, 0, part, t)
                 for s, part in ((-1.0, "minus"), (1.0, "plus")))
    assert r.route_i == pytest.approx(expect, abs=1e-15)
    assert r.difference < 1e-5


@pytest.mark.parametrize("name", [n for n, s in BUILTIN_SCENARIOS.items() if s.model != "solid_torus"])
def test_routes_agree_on_scenarios(name):
    f = get_scenario(name).validate()
    ctx = heat.BoundaryContext(f, 0.05)
    for t in (1.0, 0.05):
        for q in range(f.model.dim + 1):
            for bc in heat.BCS:
                assert heat.boundary_trace_integral(f, bc, q, t, ctx).difference < 1e-5


@pytest.mark.parametrize("B", ["refl+phi-rot=0.9", "refl+phi-refl", "rot=0.5+phi-refl"])
def test_routes_agree_on_solid_torus(B):
    model = build_model("solid_torus", collar_width=0.15, scale=2.0)
    f = make_condition_a_map(model, 3.0, B)
    ctx = heat.BoundaryContext(f, 0.05)
    for t in (1.0, 0.05):
        for q in range(4):
            bc = "PminusL0" if q % 2 == 0 else "PplusL1"
            assert heat.boundary_trace_integral(f, bc, q, t, ctx).difference < 1e-5


def test_richardson_exact_on_polynomials():
    ts = [0.2, 0.1, 0.05, 0.025]
    lim, res = heat.richardson(ts, [2 - t + 3 * t * t for t in ts])
    assert lim == pytest.approx(2.0, abs=1e-12) and res < 1e-12


@pytest.mark.parametrize("name,target", [
    ("disk-reflection", 0.0), ("annulus-rotation", 0.0), ("interval-identity", 1.0),
])
def test_combined_boundary_limit_examples(name, target):
    f = get_scenario(name).validate()
    lim = heat.combined_boundary_limit(f)
    assert lim.target == pytest.approx(target, abs=1e-12)
    assert abs(lim.limit - target) < 1e-3
    assert len(lim.per_t) == 4


def test_combined_boundary_limit_needs_four_points():
    f = get_scenario("interval-identity").validate()
    with pytest.raises(heat.HeatError):
        heat.combined_boundary_limit(f, (0.2, 0.1, 0.05))


@pytest.mark.slow
@pytest.mark.parametrize("name", list(BUILTIN_SCENARIOS))
def test_combined_boundary_limit_on_every_scenario(name):
    f = get_scenario(name).validate()
    lim = heat.combined_boundary_limit(f)
    assert abs(lim.limit - lim.target) < 1e-3


# -- interior contributions ---------------------------------------------------

@pytest.mark.parametrize("name,where,index", [
    ("disk-reflection", "origin", 1), ("disk-rotation", "origin", 1), ("interval-identity", "interior", -1),
])
def test_interior_heat_check(name, where, index):
    f = get_scenario(name).validate()
    recs = find_fixed_points(f)
    interior = [r for r in recs if r.kind == "interior"]
    rec = min(interior, key=lambda r: np.linalg.norm(r.location)) if where == "origin" else interior[0]
    chk = heat.interior_index_heat_check(f, rec, others=recs)
    assert chk.local_index == index
    assert abs(chk.limit - index) < 1e-3


def test_interior_check_rejects_boundary_points():
    f = get_scenario("interval-identity").validate()
    bd = [r for r in find_fixed_points(f) if r.kind == "boundary"]
    with pytest.raises(heat.HeatError):
        heat.interior_index_heat_check(f, bd[0])


@pytest.mark.parametrize("name", list(BUILTIN_SCENARIOS))
def test_integrand_vanishes_on_w_region(name):
    f = get_scenario(name).validate()
    assert heat.w_region_sup(f, find_fixed_points(f, 24 if f.model.dim == 3 else 64), t=0.02) < 1e-10


# -- parametrix -----------------------------------------------------------------

def test_vectorized_interval_kernel_matches_pointwise():
    basis = heat._interval_basis()
    geo = heat.IntervalGeometry()
    x = np.linspace(0, geo.length, 9)
    for bc in heat.BCS:
        for q in (0, 1):
            ref = np.empty((len(x), len(x)))
            for i, a in enumerate(x):
                for j, b in enumerate(x):
                    ca, cb = int(a > geo.length / 2), int(b > geo.length / 2)
                    k = heat.cylinder_kernel_eval(basis, bc, q, 0.3, (min(a, geo.length - a), ca, np.zeros(0)),
                                                  (min(b, geo.length - b), cb, np.zeros(0)))[0, 0]
                    ref[i, j] = k * ((1 - 2 * ca) * (1 - 2 * cb) if q == 1 else 1)
            assert np.array_equal(ref, heat.interval_cylinder_kernel(bc, q, 0.3, x, x, geo, basis))


def test_exact_interval_kernel_gluing():
    """The glued kernel is antiperiodic or periodic under x -> x + L."""
    L, t = 40.0, 0.5
    x, y = np.array([0.5, 3.0, 19.0]), np.array([3.0, 17.0])
    for bc in heat.BCS:
        for q in (0, 1):
            sign = -1.0 if (bc == "PminusL0") == (q == 0) else 1.0
            k0 = heat.exact_interval_kernel(bc, q, t, x, y, L)
            k1 = heat.exact_interval_kernel(bc, q, t, x + L, y, L)
            assert np.allclose(k1, sign * k0, atol=1e-15)


@pytest.mark.parametrize("bc", heat.BCS)
@pytest.mark.parametrize("q", [0, 1])
def test_parametrix_error_decay(bc, q):
    ts = [0.5, 0.25, 0.125, 0.0625]
    errs = [heat.parametrix_error(bc, t, q=q) for t in ts]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    _, slope, r2 = heat.fit_log_error(ts, errs)
    assert slope < 0 and r2 > 0.99
    assert heat.parametrix_error(bc, 0.02, q=q) < 1e-8
    eps = heat.IntervalGeometry().eps
    for t in (0.1, 0.05, 0.02):
        assert heat.parametrix_error(bc, t, q=q, region=(3 * eps / 7, 4 * eps / 7)) < 1e-8


def test_parametrix_rejects_large_t():
    with pytest.raises(heat.HeatError):
        heat.parametrix_error("PminusL0", 1.5)
