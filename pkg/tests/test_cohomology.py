from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lefschetz_lab.catalog import build_model
from lefschetz_lab.cohomology import (TraceError, TraceTable, build_cochain_complexes, induced_trace_analytic,
                                      induced_trace_simplicial, lefschetz_numbers, map_degree)
from lefschetz_lab.selfmap import SelfMap, make_condition_a_map, simplicial_approximation


class IdentityMap(SelfMap):
    def __init__(self, model):
        self.model = model

    def __call__(self, p):
        return np.atleast_2d(np.asarray(p, float)).copy()

    def jacobian(self, p):
        n = len(np.atleast_2d(p))
        return np.tile(np.eye(self.model.dim), (n, 1, 1))


def F(*xs):
    return [Fraction(x) for x in xs]


def test_disk_complexes():
    absolute, relative = build_cochain_complexes(build_model("disk"))
    assert absolute.betti == [1, 0, 0]
    assert relative.betti == [0, 0, 1]
    assert absolute.d_squared_zero() and relative.d_squared_zero()


def test_interval_relative_betti():
    _, relative = build_cochain_complexes(build_model("interval"))
    assert relative.betti == [0, 1]


@pytest.mark.parametrize("name", ["interval", "disk", "annulus", "solid_torus"])
def test_identity_traces_are_betti_numbers(name):
    model = build_model(name)
    table = induced_trace_simplicial(model, list(range(len(model.triangulation.vertices))))
    babs, brel = model.betti()
    assert table.absolute == [Fraction(b) for b in babs]
    assert table.relative == [Fraction(b) for b in brel]
    analytic = induced_trace_analytic(model, IdentityMap(model))
    assert np.allclose(analytic.absolute, babs, atol=1e-9)
    assert np.allclose(analytic.relative, brel, atol=1e-9)


def test_identity_on_disk_lefschetz_numbers():
    model = build_model("disk")
    L = lefschetz_numbers(induced_trace_simplicial(model, list(range(len(model.triangulation.vertices)))))
    assert L["L_abs"] == 1 and L["L_rel"] == 1


def test_disk_reflection_traces():
    model = build_model("disk", collar_width=0.2)
    f = make_condition_a_map(model, 0.5, "refl")
    table = induced_trace_simplicial(model, simplicial_approximation(f))
    assert table.exact
    assert table.relative[2] == -1
    assert table.absolute == F(1, 0, 0)
    deg, info = map_degree(model, f)
    assert deg == -1 and info["method"] == "preimage count"
    L = lefschetz_numbers(table)
    assert L["L_P0"] == -1 and L["L_P1"] == 1


def test_annulus_swap_traces():
    model = build_model("annulus", collar_width=0.3)
    f = make_condition_a_map(model, 0.5, "swap+rot=0.6")
    table = induced_trace_simplicial(model, simplicial_approximation(f))
    assert table.relative[1] == -1 and table.absolute[1] == 1
    deg, _ = map_degree(model, f)
    assert table.relative[1] * table.absolute[1] == deg == -1
    assert table.relative[2] == -1 and table.absolute[0] == 1


def test_annulus_rotation_traces():
    model = build_model("annulus")
    f = make_condition_a_map(model, 2.0, "rot=pi/4")
    analytic = induced_trace_analytic(model, f)
    assert analytic.absolute[1] == pytest.approx(1.0, abs=1e-9)
    L = lefschetz_numbers(induced_trace_simplicial(model, simplicial_approximation(f)))
    assert L["L_P0"] == 0 and L["L_P1"] == 0
    assert L["L_P0"] + L["L_P1"] == L["L_abs"] + L["L_rel"] == 0


def test_vertex_map_must_preserve_boundary():
    model = build_model("interval")
    labels = model.triangulation.labels
    vmap = list(range(len(labels)))
    vmap[labels.index(("x", 0))] = labels.index(("x", 1))
    with pytest.raises(TraceError):
        induced_trace_simplicial(model, vmap)


def test_vertex_map_must_be_simplicial():
    model = build_model("disk", 8, 0.2)
    tri = model.triangulation
    vmap = list(range(len(tri.vertices)))
    # send one ring vertex to the opposite side: its star no longer maps to simplices
    vmap[tri.labels.index(("r", 1, 0))] = tri.labels.index(("r", 1, 4))
    with pytest.raises(TraceError):
        induced_trace_simplicial(model, vmap)


def test_lefschetz_numbers_bookkeeping():
    table = TraceTable(F(1, 1, 0), F(0, 1, -1), "simplicial")
    L = lefschetz_numbers(table)
    assert L == {"L_abs": 0, "L_rel": -2, "L_P0": -2, "L_P1": 0}


@settings(max_examples=8, deadline=None)
@given(ab=st.lists(st.integers(-3, 3), min_size=3, max_size=3),
       rel=st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_mixed_numbers_sum_to_abs_plus_rel(ab, rel):
    L = lefschetz_numbers(TraceTable(F(*ab), F(*rel), "simplicial"))
    assert L["L_P0"] + L["L_P1"] == L["L_abs"] + L["L_rel"]


@settings(max_examples=6, deadline=None)
@given(angle=st.floats(0.3, 6.0), c=st.sampled_from([0.5, 2.0]),
       swap=st.booleans(), refl=st.booleans())
def test_routes_agree_on_annulus_maps(angle, c, swap, refl):
    model = build_model("annulus", collar_width=0.1)
    desc = ("swap+" if swap else "") + (f"refl={angle / 2}" if refl else f"rot={angle}")
    f = make_condition_a_map(model, c, desc)
    s = induced_trace_simplicial(model, simplicial_approximation(f))
    a = induced_trace_analytic(model, f)
    assert np.allclose([float(x) for x in s.absolute + s.relative], a.absolute + a.relative, atol=1e-6)


def test_homotopy_stability_of_analytic_traces():
    model = build_model("disk", collar_width=0.2)
    f = make_condition_a_map(model, 0.5, "refl")
    g = make_condition_a_map(model, 0.5, "refl", {"inner_slope": 0.3, "crossings": [0.3]})
    a, b = induced_trace_analytic(model, f), induced_trace_analytic(model, g)
    assert np.allclose(a.absolute + a.relative, b.absolute + b.relative, atol=1e-9)
