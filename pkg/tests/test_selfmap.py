import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from lefschetz_lab.catalog import build_model
from lefschetz_lab.selfmap import (ComposedMap, MapError, NotSimple, SelfMap, classify_boundary_point,
                                   find_fixed_points, local_index, make_condition_a_map, verify_condition_a)


def _sorted(records):
    return sorted(records, key=lambda r: (r.kind, r.location))


def test_disk_reflection_map_and_fixed_points():
    model = build_model("disk", collar_width=0.2)
    f = make_condition_a_map(model, 0.5, "refl")
    assert f.profile(1.0, 1) == pytest.approx(0.5)
    p = np.array([[0.3 * math.cos(0.7), 0.3 * math.sin(0.7)]])
    img = f(p)[0]
    assert math.atan2(img[1], img[0]) == pytest.approx(-0.7)
    recs = find_fixed_points(f)
    assert len(recs) == 5
    interior = [r for r in recs if r.kind == "interior"]
    boundary = [r for r in recs if r.kind == "boundary"]
    origin = [r for r in interior if np.linalg.norm(r.location) < 1e-9]
    assert len(origin) == 1 and origin[0].index == 1
    off = [r for r in interior if np.linalg.norm(r.location) > 1e-9]
    assert len(off) == 2 and all(r.index == -1 and abs(r.location[1]) < 1e-9 for r in off)
    assert len(boundary) == 2
    for r in boundary:
        assert r.index == 1 and r.a_value == 0.5 and r.classification == "attracting"
        assert r.det == pytest.approx(2 * (1 - 0.5))


def test_c_equal_one_rejected():
    model = build_model("disk")
    with pytest.raises(MapError, match="c must differ from 1"):
        make_condition_a_map(model, 1.0, "rot=pi/3")
    with pytest.raises(MapError):
        make_condition_a_map(model, -0.5, "rot=pi/3")


def test_bad_isometry_rejected():
    with pytest.raises(ValueError):
        make_condition_a_map(build_model("disk"), 0.5, "swap")
    with pytest.raises(ValueError):
        make_condition_a_map(build_model("disk"), 0.5, "twist=1")


def test_annulus_rotation_has_no_fixed_points():
    f = make_condition_a_map(build_model("annulus"), 2.0, "rot=pi/4")
    assert verify_condition_a(f).passed
    assert find_fixed_points(f) == []


def test_interval_fixed_points():
    f = make_condition_a_map(build_model("interval"), 0.5, "id")
    recs = sorted(find_fixed_points(f), key=lambda r: r.location)
    assert [r.kind for r in recs] == ["boundary", "interior", "boundary"]
    assert recs[0].location == (0.0,) and recs[2].location == (1.0,)
    assert [r.index for r in recs] == [1, -1, 1]
    assert all(r.classification == "attracting" for r in (recs[0], recs[2]))
    assert recs[1].jacobian[0, 0] > 1


def test_classify_boundary_point():
    model = build_model("disk", collar_width=0.15)
    f = make_condition_a_map(model, 0.5, "refl")
    assert classify_boundary_point(f, [0.0]) == (0.5, "attracting")
    g = make_condition_a_map(model, 3.0, "refl")
    assert classify_boundary_point(g, [math.pi]) == (3.0, "repelling")
    with pytest.raises(MapError, match="not a fixed point"):
        classify_boundary_point(f, [math.pi / 2])


def test_local_index_examples():
    model = build_model("disk", collar_width=0.15)
    f = make_condition_a_map(model, 0.5, "refl", {"inner_slope": 0.4})
    assert local_index(f, [0.0, 0.0]) == 1
    g = make_condition_a_map(model, 3.0, "refl")
    bd = [r for r in find_fixed_points(g) if r.kind == "boundary"]
    assert all(local_index(g, r.location) == -1 for r in bd)
    assert all(r.det == pytest.approx((1 - 3) * 2) for r in bd)


class _Identity(SelfMap):
    def __init__(self, model):
        self.model = model

    def __call__(self, p):
        return np.atleast_2d(p)

    def jacobian(self, p):
        p = np.atleast_2d(p)
        return np.broadcast_to(np.eye(self.model.dim), (len(p), self.model.dim, self.model.dim))


def test_degenerate_point_is_not_simple():
    with pytest.raises(NotSimple):
        local_index(_Identity(build_model("disk")), [0.1, 0.2])


def test_verify_condition_a_pass_and_fail():
    model = build_model("disk", collar_width=0.2)
    f = make_condition_a_map(model, 0.5, "refl")
    rep = verify_condition_a(f, 1000)
    assert rep.passed and rep.worst_residual < 1e-12  # roundoff of the polar chart
    bad = make_condition_a_map(model, 0.5, "refl", {"collar": 0.05}, validate=False)
    rep = verify_condition_a(bad, 1000)
    assert not rep.passed and len(rep.worst_sample) == 2
    swap = make_condition_a_map(build_model("annulus", collar_width=0.3), 0.5, "swap+rot=0.6")
    assert verify_condition_a(swap, 1000).passed


def test_seam_inside_collar_rejected_on_construction():
    with pytest.raises(MapError, match="Condition A fails"):
        make_condition_a_map(build_model("disk", collar_width=0.2), 0.5, "refl", {"collar": 0.05})


def test_index_stable_under_grid_refinement():
    f = make_condition_a_map(build_model("disk", collar_width=0.2), 0.5, "refl")
    a = [(r.kind, r.index) for r in _sorted(find_fixed_points(f, 32))]
    b = [(r.kind, r.index) for r in _sorted(find_fixed_points(f, 64))]
    assert a == b


def test_boundary_fixed_points_are_fixed_points_of_B():
    f = make_condition_a_map(build_model("solid_torus", collar_width=0.15), 3.0, "refl+phi-refl")
    bd = [r for r in find_fixed_points(f, 16) if r.kind == "boundary"]
    assert len(bd) == len(f.B.fixed_points()) == 4
    for r in bd:
        u, comp, y = f.model.collar_coords(np.array([r.location]))
        c2, by = f.B.apply(comp, y)
        assert u[0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(np.mod(by - y + np.pi, 2 * np.pi) - np.pi, 0, atol=1e-12)


c_values = st.one_of(st.floats(0.15, 0.85), st.floats(1.2, 3.0))


@settings(max_examples=12, deadline=None)
@given(c=c_values, B=st.sampled_from(["refl", "rot=pi/3", "rot=2"]))
def test_fixed_point_records_are_simple_and_classified(c, B):
    model = build_model("disk", collar_width=0.1)
    assume(c * model.collar_width < 1)
    f = make_condition_a_map(model, c, B)
    for r in find_fixed_points(f, 48):
        p = np.array([r.location])
        assert np.linalg.norm(f.residual(p)) < 1e-12
        assert abs(r.det) > 1e-8
        assert r.index == (1 if np.linalg.det(np.eye(2) - r.jacobian) > 0 else -1)
        if r.kind == "boundary":
            assert r.a_value == c
            assert r.classification == ("attracting" if c < 1 else "repelling")


@settings(max_examples=20, deadline=None)
@given(x=st.floats(-0.7, 0.7), y=st.floats(-0.7, 0.7), q=st.integers(0, 2))
def test_pullback_functoriality(x, y, q):
    model = build_model("disk", collar_width=0.1)
    f = make_condition_a_map(model, 0.5, "refl")
    g = make_condition_a_map(model, 2.0, "rot=0.4")
    h = ComposedMap(f, g)
    p = np.array([x, y])
    lhs = h.pullback_operator(q, p).matrix
    rhs = f.pullback_operator(q, p).matrix @ g.pullback_operator(q, f(p)[0]).matrix
    assert np.allclose(lhs, rhs, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(u=st.floats(0.0, 0.1), th=st.floats(0, 2 * math.pi), comp=st.integers(0, 1))
def test_collar_form_holds_pointwise(u, th, comp):
    model = build_model("annulus", collar_width=0.1)
    f = make_condition_a_map(model, 2.0, "swap+refl")
    p = model.from_collar(np.array([u]), np.array([comp]), np.array([[th]]))
    bc, by = f.B.apply(np.array([comp]), np.array([[th]]))
    expect = model.from_collar(np.array([2.0 * u]), bc, by)
    assert np.linalg.norm(model.chart_diff(f(p), expect)) < 1e-12
