import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import coordinate_distance, coordinate_geodesic, embed_hinge
from curvbound.model_plane import (
    Curvature,
    ModelTriangle,
    alexandrov_lemma_split,
    dist_to_opposite_side,
    foot_on_opposite_side,
    model_angle,
    model_angle_array,
    model_diameter,
    model_side,
    model_side_array,
)

kappas = st.floats(-4, 4, allow_nan=False)


def admissible_side(kappa):
    return min(1.0, model_diameter(kappa) / 2)


@st.composite
def hinges(draw):
    kappa = draw(kappas)
    top = admissible_side(kappa)
    a = draw(st.floats(1e-3, top))
    b = draw(st.floats(1e-3, top))
    gamma = draw(st.floats(1e-3, math.pi - 1e-3))
    return kappa, a, b, gamma


def test_model_diameter_values():
    assert model_diameter(0) == math.inf
    assert model_diameter(-3) == math.inf
    assert model_diameter(1) == pytest.approx(math.pi)
    assert model_diameter(4) == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        model_diameter(math.nan)
    assert Curvature(4).model_diameter == pytest.approx(math.pi / 2)


def test_model_side_examples():
    assert model_side(0, 3, 4, math.pi / 2) == pytest.approx(5)
    for k in (-2, 0, 0.5):
        assert model_side(k, 0.7, 0.0, 1.1) == pytest.approx(0.7)
    assert model_side(1, math.pi / 2, math.pi / 2, 2 * math.pi / 3) == pytest.approx(2 * math.pi / 3)


def test_model_side_rejects_overlong_sides_on_spheres():
    assert model_side(1, 3.5, 1.0, 1.0) is None
    assert model_side(0, 1.0, 1.0, 4.0) is None


def test_model_angle_examples():
    assert model_angle(0, 1, 1, 1) == pytest.approx(math.pi / 3)
    assert model_angle(1, 2.5, 2.5, 2.5) is None
    assert model_angle(0, 1, 1, 2) == pytest.approx(math.pi)
    assert model_angle(1, math.pi / 2, math.pi / 2, 2 * math.pi / 3) == pytest.approx(2 * math.pi / 3)


def test_model_angle_undefined_cases():
    assert model_angle(0, 1, 1, 2.5) is None
    assert model_angle(-1, 1, 1, 2.1) is None
    assert model_angle(1, 3.3, 0.1, 3.2) is None  # side beyond the diameter
    assert model_angle(1, 3.0, 3.0, 0.5) is None  # perimeter beyond 2*pi


def test_perimeter_boundary_counts_as_defined():
    # three points on a great circle, not in a common semicircle
    assert model_angle(1, 2.0, 2.0, 2 * math.pi - 4.0) is not None


def test_array_marks_undefined_with_nan():
    out = model_angle_array(0, [1, 1], [1, 1], [1, 3])
    assert out[0] == pytest.approx(math.pi / 3)
    assert math.isnan(out[1])
    assert math.isnan(model_side_array(1, 4.0, 1.0, 1.0))


@pytest.mark.parametrize("kappa", [-2.0, -0.5, 0.0, 0.7, 3.0])
def test_sides_match_coordinate_embedding(kappa, rng):
    # oracle: build the hinge in ambient coordinates and measure the third side there
    top = admissible_side(kappa)
    for _ in range(200):
        a, b = rng.uniform(0.05, top, 2)
        gamma = rng.uniform(0.05, math.pi - 0.05)
        w, p, q = embed_hinge(kappa, a, b, gamma)
        c = coordinate_distance(kappa, p, q)
        assert model_side(kappa, a, b, gamma) == pytest.approx(c, abs=1e-9)
        assert model_angle(kappa, a, b, c) == pytest.approx(gamma, abs=1e-7)


def test_frozen_values():
    # computed once with the ambient-coordinate oracle (bisection on the embedded angle for the last)
    assert model_side(-1, 1.0, 1.0, math.pi / 2) == pytest.approx(1.513374006596504, abs=1e-12)
    assert model_side(2, 0.5, 0.8, 1.0) == pytest.approx(0.6186446657646131, abs=1e-12)
    assert model_angle(-0.5, 1.2, 0.9, 1.4) == pytest.approx(1.3530017500888751, abs=1e-12)


@given(hinges())
def test_round_trip(h):
    kappa, a, b, gamma = h
    c = model_side(kappa, a, b, gamma)
    assert c is not None
    assert model_angle(kappa, a, b, c) == pytest.approx(gamma, abs=1e-9)


@given(hinges(), st.floats(0.0, 1.0))
def test_monotone_in_opposite_side(h, frac):
    kappa, a, b, gamma = h
    c1 = model_side(kappa, a, b, gamma)
    c2 = model_side(kappa, a, b, gamma + frac * (math.pi - gamma))
    assert c2 >= c1 - 1e-12
    assert model_angle(kappa, a, b, c2) >= model_angle(kappa, a, b, c1) - 1e-9


@given(hinges(), st.floats(0.0, 2.0))
def test_monotone_in_curvature(h, dk):
    kappa, a, b, gamma = h
    c = model_side(kappa, a, b, gamma)
    k2 = kappa + dk
    lo, hi = model_angle(kappa, a, b, c), model_angle(k2, a, b, c)
    assume(hi is not None)
    assert hi >= lo - 1e-9


@given(hinges())
def test_symmetric_in_hinge_sides(h):
    kappa, a, b, gamma = h
    assert model_side(kappa, a, b, gamma) == pytest.approx(model_side(kappa, b, a, gamma), abs=1e-13)


@given(st.floats(-1e-6, 1e-6), st.floats(0, 1), st.floats(0, 1), st.floats(0, math.pi))
def test_small_curvature_limit(kappa, a, b, gamma):
    assert abs(model_side(kappa, a, b, gamma) - model_side(0, a, b, gamma)) <= 1e-4


@given(hinges())
def test_triangle_angles_in_range(h):
    kappa, a, b, gamma = h
    tri = ModelTriangle.from_hinge(kappa, a, b, gamma)
    assert tri.status == "defined"
    angles = tri.angles()
    assert all(0 <= x <= math.pi for x in angles)
    assert angles[0] == pytest.approx(gamma, abs=1e-9)


def test_from_hinge_rejects_inadmissible():
    with pytest.raises(ValueError):
        ModelTriangle.from_hinge(1, 4.0, 1.0, 1.0)
    assert ModelTriangle(1, 2.5, 2.5, 2.5).status == "undefined"
    with pytest.raises(ValueError):
        dist_to_opposite_side(ModelTriangle(1, 2.5, 2.5, 2.5))


def test_distance_to_side_examples():
    assert dist_to_opposite_side(ModelTriangle.from_hinge(0, 1, 1, math.pi)) == pytest.approx(0, abs=1e-12)
    assert dist_to_opposite_side(ModelTriangle.from_hinge(0, 1, 1, math.pi / 2)) == pytest.approx(math.sqrt(2) / 2)
    tri = ModelTriangle.from_hinge(1, math.pi / 2, math.pi / 2, math.pi / 2)
    assert dist_to_opposite_side(tri) == pytest.approx(math.pi / 2)


def _sampled_distance(kappa, a, b, gamma, step=1e-4):
    w, p, q = embed_hinge(kappa, a, b, gamma)
    n = int(math.ceil(1 / step)) + 1
    pts = coordinate_geodesic(kappa, p, q, np.linspace(0, 1, n))
    return min(coordinate_distance(kappa, w, x) for x in pts)


@pytest.mark.parametrize("kappa", [-1.5, 0.0, 1.0, 2.5])
def test_distance_to_side_matches_dense_sampling(kappa, rng):
    top = admissible_side(kappa)
    for _ in range(6):
        a, b = rng.uniform(0.1, top, 2)
        gamma = rng.uniform(0.2, math.pi - 0.2)
        tri = ModelTriangle.from_hinge(kappa, a, b, gamma)
        assert dist_to_opposite_side(tri) == pytest.approx(_sampled_distance(kappa, a, b, gamma), abs=1e-6)


def test_foot_position_is_on_the_side():
    tri = ModelTriangle.from_hinge(0, 1.0, 2.0, 2.0)
    foot = foot_on_opposite_side(tri)
    assert 0 <= foot.position <= foot.side
    assert foot.side == pytest.approx(tri.c)


def test_split_symmetric_data_gives_midpoint():
    s = alexandrov_lemma_split(0, (1.0, 1.0), (1.0, 1.0), 0.8)
    assert s.t == pytest.approx(0.5, abs=1e-9)
    assert s.angle_p == pytest.approx(s.angle_q, abs=1e-9)


def test_split_degenerate_opposite():
    s = alexandrov_lemma_split(0, (1.0, 1.3), (0.4, 0.5), 0.0)
    assert (s.angle_p, s.angle_q, s.feasible) == (0.0, 0.0, True)


def _targets(kappa, wp, wq, gamma, scale):
    """Angles at the apex seen from the foot on a scaled-up copy of the hinge."""
    tri = ModelTriangle.from_hinge(kappa, scale * wp, scale * wq, gamma)
    foot = foot_on_opposite_side(tri)
    return (model_angle(kappa, tri.a, foot.distance, foot.position),
            model_angle(kappa, tri.b, foot.distance, tri.c - foot.position))


@pytest.mark.parametrize("seed", range(5))
def test_split_matches_grid_search(seed):
    rng = np.random.default_rng(seed)
    wp, wq = rng.uniform(0.2, 1.0, 2)
    gamma = rng.uniform(0.5, 2.5)
    targets = tuple(x + 1e-3 for x in _targets(0, wp, wq, gamma, 1.0))
    opposite = model_side(0, wp, wq, gamma)
    split = alexandrov_lemma_split(0, (wp, wq), targets, opposite)
    # brute force: the set of feasible t on a 1e-4 grid
    at_p = model_angle(0, wp, opposite, wq)
    ts = np.linspace(0, 1, 10001)
    wa = model_side_array(0, wp, ts * opposite, at_p)
    ap = model_angle_array(0, wp, wa, ts * opposite)
    aq = model_angle_array(0, wq, wa, (1 - ts) * opposite)
    ok = (np.nan_to_num(ap) <= targets[0] + 1e-9) & (np.nan_to_num(aq) <= targets[1] + 1e-9)
    assert split.feasible == bool(ok.any())
    assert split.feasible
    feasible_t = ts[ok]
    assert feasible_t.min() - 1e-4 <= split.t <= feasible_t.max() + 1e-4


def test_split_reports_infeasible_targets():
    split = alexandrov_lemma_split(0, (1.0, 1.0), (0.1, 0.1), 1.0)
    assert not split.feasible
