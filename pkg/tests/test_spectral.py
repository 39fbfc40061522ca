import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lefschetz_lab.catalog import build_model
from lefschetz_lab.harness import BUILTIN_SCENARIOS
from lefschetz_lab.spectral import (MINUS, PLUS, SpectralError, b_star_harmonic, b_star_matrix, compute_k0,
                                    compute_k_split, equivariant_heat_trace, equivariant_heat_trace_lines,
                                    lefschetz_number_of, spectral_basis)


def circle_basis(cutoff=100.0, model="disk"):
    m = build_model(model)
    split = compute_k_split(m)
    return m, spectral_basis(m.boundary(), cutoff, split)


def test_circle_eigenvalues():
    _, basis = circle_basis()
    for q in (0, 1):
        eig = np.sort(basis.degrees[q].eig)
        expect = np.sort([0.0] + [k * k for k in range(1, 11) for _ in range(2)])
        assert np.array_equal(eig, expect)


def test_two_circle_boundary_duplicates_lines():
    _, one = circle_basis()
    _, two = circle_basis(model="annulus")
    assert two.count(0) == 2 * one.count(0)
    comps = two.degrees[0].comp
    assert set(comps[comps >= 0]) == {0, 1}


@pytest.mark.parametrize("name", ["disk", "annulus", "solid_torus"])
def test_gram_is_identity(name):
    m = build_model(name)
    basis = spectral_basis(m.boundary(), 30.0, compute_k_split(m))
    for q in range(m.boundary().n + 1):
        g = basis.gram(q, max_lines=120, samples=32)
        assert np.max(np.abs(g - np.eye(len(g)))) < 1e-12


def test_k_split_examples():
    disk = compute_k_split(build_model("disk"))
    assert disk.K[0].shape == (1, 1) and disk.K[1].shape[1] == 0
    assert disk.starK[1].shape == (1, 1) and disk.dim_K == 1
    ann = compute_k_split(build_model("annulus"))
    assert ann.dim_K == 2
    assert np.allclose(np.abs(ann.K[0][:, 0]), [1 / math.sqrt(2)] * 2)
    assert np.allclose(np.abs(ann.K[1][:, 0]), [1 / math.sqrt(2)] * 2)
    torus = compute_k_split(build_model("solid_torus"))
    assert torus.dim_K == 2 and torus.K[0].shape[1] == 1 and torus.K[1].shape[1] == 1


def test_b_star_examples():
    bd = build_model("disk").boundary()
    refl = bd.isometry("refl")
    assert np.allclose(b_star_matrix(bd, refl, 0, np.eye(1)), [[1.0]])
    assert np.allclose(b_star_matrix(bd, refl, 1, np.eye(1)), [[-1.0]])
    ann = build_model("annulus")
    split = compute_k_split(ann)
    swap = ann.boundary().isometry("swap+rot=0.6")
    for q, mat in split.b_on_K(swap).items():
        assert np.allclose(mat, np.eye(mat.shape[0]))


def test_b_star_rejects_non_invariant_subspace():
    bd = build_model("annulus").boundary()
    with pytest.raises(SpectralError):
        b_star_matrix(bd, bd.isometry("swap"), 0, np.array([[1.0], [0.0]]))


def test_k0_examples():
    disk = build_model("disk")
    assert compute_k0(disk, disk.boundary().isometry("rot=pi/3")) == 0
    assert compute_k0(disk, disk.boundary().isometry("refl")) == pytest.approx(1.0, abs=1e-12)
    ann = build_model("annulus")
    assert compute_k0(ann, ann.boundary().isometry("swap+rot=0.6")) == pytest.approx(2.0, abs=1e-12)


def test_heat_trace_rotation_matches_fourier_sum():
    m, basis = circle_basis()
    B = m.boundary().isometry("rot=pi/3")
    alpha, t = math.pi / 3, 0.5
    oracle = 1 + sum(2 * math.exp(-t * k * k) * math.cos(k * alpha) for k in range(1, 11))
    assert equivariant_heat_trace(basis, B, 0, "all", t) == pytest.approx(oracle, abs=1e-13)


@pytest.mark.parametrize("t", [0.05, 0.3, 1.7])
def test_heat_trace_reflection(t):
    m, basis = circle_basis(1000.0)
    B = m.boundary().isometry("refl")
    assert equivariant_heat_trace(basis, B, 0, "all", t) == pytest.approx(1.0, abs=1e-12)
    assert equivariant_heat_trace(basis, B, 1, "all", t) == pytest.approx(-1.0, abs=1e-12)


def test_tail_bound_enforced():
    m, basis = circle_basis(10.0)
    with pytest.raises(SpectralError):
        equivariant_heat_trace(basis, m.boundary().isometry("refl"), 0, "all", 0.01)
    with pytest.raises(SpectralError):
        spectral_basis(m.boundary(), 0.0, compute_k_split(m))


def _pairs():
    for s in BUILTIN_SCENARIOS.values():
        if s.model != "interval":
            yield s.model, s.B


@pytest.mark.parametrize("name,B", sorted(set(_pairs())))
def test_k_split_properties_on_catalog_pairs(name, B):
    m = build_model(name)
    split = compute_k_split(m)
    iso = m.boundary().isometry(B)
    assert split.orthogonality_residual() < 1e-12
    assert split.dim_K + split.dim_starK == sum(m.boundary().harmonic_dims())
    assert split.block_residual(iso) < 1e-12


@pytest.mark.parametrize("name", ["disk", "annulus", "solid_torus"])
def test_parity_completeness(name):
    m = build_model(name)
    basis = spectral_basis(m.boundary(), 20.0, compute_k_split(m))
    for q in range(m.boundary().n + 1):
        d = basis.degrees[q]
        assert basis.count(q, MINUS) + basis.count(q, PLUS) == basis.count(q)
        assert np.all(np.isin(d.parity, (MINUS, PLUS)))
        if q == 1 and m.boundary().n == 2:
            # minus 1-forms are exact (coefficients along k), plus ones co-exact (normal to k)
            trig = d.kind != 0
            kk, coeff, par = d.k[trig], d.coeff[trig], d.parity[trig]
            kn = kk / np.linalg.norm(kk, axis=1, keepdims=True)
            dots = np.abs(np.einsum("ij,ij->i", coeff, kn))
            assert np.allclose(dots[par == MINUS], 1.0) and np.allclose(dots[par == PLUS], 0.0)


@settings(max_examples=15, deadline=None)
@given(model=st.sampled_from(["disk", "annulus", "solid_torus"]), t=st.floats(0.05, 2.0),
       B_index=st.integers(0, 20), restriction=st.sampled_from(["all", "minus", "plus"]))
def test_fixed_sublattice_trace_equals_line_sum(model, t, B_index, restriction):
    m = build_model(model)
    options = sorted({b for name, b in _pairs() if name == model})
    B = m.boundary().isometry(options[B_index % len(options)])
    basis = spectral_basis(m.boundary(), 40.0 / t if model != "solid_torus" else 400.0,
                           compute_k_split(m))
    for q in range(m.boundary().n + 1):
        try:
            fast = equivariant_heat_trace(basis, B, q, restriction, t)
        except SpectralError:
            continue
        slow = equivariant_heat_trace_lines(basis, B, q, restriction, t)
        assert fast == pytest.approx(slow, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(alpha=st.floats(0.1, 6.2), t=st.floats(0.05, 2.0))
def test_mckean_singer_rotation_any_angle(alpha, t):
    m, basis = circle_basis(1000.0)
    assert abs(lefschetz_number_of(basis, m.boundary().isometry(f"rot={alpha}"), t)) < 1e-10


def test_harmonic_b_star_is_orthogonal():
    for name, B in _pairs():
        bd = build_model(name).boundary()
        iso = bd.isometry(B)
        for q in range(bd.n + 1):
            mat = b_star_harmonic(bd, iso, q)
            assert np.allclose(mat @ mat.T, np.eye(len(mat)), atol=1e-12)
