import math

import numpy as np
import pytest

from curvbound.globalization import (
    ChainError,
    domain_merge_check,
    geodesic_containment_scan,
    globalization_experiment,
    recompute_verdict,
    reformulation_check,
    reformulation_sweep,
    segment_chain,
)
from curvbound.metric_space import Ball, InvalidSpace, generate_space, geodesic


def _meridian_point(theta):
    return np.array([math.sin(theta), 0.0, math.cos(theta)])


@pytest.fixture(scope="module")
def sphere():
    return generate_space("sphere:n=4")


@pytest.fixture(scope="module")
def plane():
    return generate_space("euclidean:n=4")


def test_chain_single_ball(plane):
    g = geodesic(plane, [0.4, 0.5], [0.6, 0.5])
    chain = segment_chain(plane, g, 0, epsilon=1.0, ball_radius=0.3)
    assert chain.n == 1
    assert chain.params == [0.0, pytest.approx(g.length)]


def test_chain_on_meridian(sphere):
    g = geodesic(sphere, _meridian_point(0), _meridian_point(math.pi / 2))
    chain = segment_chain(sphere, g, 1, epsilon=0.6, ball_radius=0.3)
    assert 3 <= chain.n <= 5
    assert chain.cover.passed
    assert all(c.passed for c in chain.cover.certificates)
    assert np.all(np.diff(chain.params) > 0)
    assert chain.params[1] < 0.6


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_chain_first_step_shrinks_with_epsilon(sphere, eps):
    g = geodesic(sphere, _meridian_point(0), _meridian_point(1.0))
    chain = segment_chain(sphere, g, 1, epsilon=eps, ball_radius=0.3)
    assert sphere.dist(chain.points[0], chain.points[1]) < eps


def test_chain_fails_at_tripod_hub():
    space = generate_space("tripod:sub=16")
    g = geodesic(space, "leaf0", "leaf2")
    with pytest.raises(ChainError) as err:
        segment_chain(space, g, 0, epsilon=0.5, ball_radius=0.3)
    # the obstruction sits next to the hub (parameter 1)
    assert 0.5 <= err.value.parameter <= 1.0


def test_chain_rejects_bad_epsilon(sphere):
    g = geodesic(sphere, _meridian_point(0), _meridian_point(1.0))
    with pytest.raises(InvalidSpace):
        segment_chain(sphere, g, 1, epsilon=0.0)


def test_cover_recheck_is_idempotent(sphere):
    g = geodesic(sphere, _meridian_point(0), _meridian_point(0.8))
    chain = segment_chain(sphere, g, 1, epsilon=0.5, ball_radius=0.3)
    assert chain.cover.recheck(sphere)
    assert chain.cover.recheck(sphere)


def test_merge_plane(plane):
    rep = domain_merge_check(plane, Ball([0.4, 0.5], 0.2), Ball([0.6, 0.5], 0.2), 0)
    assert rep.passed and rep.checks > 0


def test_merge_sphere_caps(sphere):
    a, b = _meridian_point(0.0), _meridian_point(0.5)
    rep = domain_merge_check(sphere, Ball(a, 0.4), Ball(b, 0.4), 1)
    assert rep.passed
    # oracle: the union itself passes an exhaustive scan
    pts = sphere.region_points([Ball(a, 0.4), Ball(b, 0.4)], count=30, seed=3)
    from curvbound.comparison import scan_quadruples

    assert scan_quadruples(sphere.with_points(np.array(pts)), 1).fails == 0


def test_merge_tripod_hub_fails():
    space = generate_space("tripod:sub=8")
    rep = domain_merge_check(space, Ball("hub~leaf0:1", 0.6), Ball("hub~leaf0:5", 0.6), 0)
    assert not rep.passed
    assert rep.reason == "ball-not-certified"


def test_merge_requires_overlap(plane):
    with pytest.raises(InvalidSpace):
        domain_merge_check(plane, Ball([0.2, 0.5], 0.1), Ball([0.8, 0.5], 0.1), 0)


def test_containment_collinear_plane(plane):
    out = geodesic_containment_scan(plane, Ball([0.3, 0.5], 0.25), Ball([0.7, 0.5], 0.25),
                                    [0.2, 0.5], [0.8, 0.5], 0.05, count=30, seed=1)
    assert out.passed and out.pairs > 0


def test_containment_sphere_caps(sphere):
    out = geodesic_containment_scan(sphere, Ball(_meridian_point(0), 0.4), Ball(_meridian_point(0.6), 0.4),
                                    _meridian_point(0), _meridian_point(0.6), 0.05, seed=2, kappa=1)
    assert out.passed
    assert out.certified == [True, True]


def test_containment_wide_cone_is_recorded():
    # exploratory: geodesics near the apex may escape; only the record is checked
    space = generate_space("cone:angle=5pi/2,n=4")
    out = geodesic_containment_scan(space, Ball([0.3, 0.0], 0.3), Ball([0.3, 1.0], 0.3),
                                    [0.3, 0.0], [0.3, 1.0], 0.2, count=30, seed=4)
    assert out.pairs + len(out.escapes) > 0
    for esc in out.escapes:
        assert {"v", "w", "exit"} <= set(esc)


def test_reformulation_plane(plane):
    assert reformulation_check(plane, [0.2, 0.2], [0.8, 0.3], [0.4, 0.9], 0, -0.1).passed


def test_reformulation_sphere(sphere):
    out = reformulation_check(sphere, _meridian_point(0), _meridian_point(0.6),
                              np.array([0.0, math.sin(0.6), math.cos(0.6)]), 1, 0.9)
    assert out.passed
    assert "only" in out.note


def test_reformulation_tripod_fails():
    space = generate_space("tripod")
    assert not reformulation_check(space, "hub~leaf0:1", "leaf1", "leaf2", 0, -0.1).passed


def test_reformulation_needs_smaller_curvature(plane):
    with pytest.raises(InvalidSpace):
        reformulation_check(plane, [0.2, 0.2], [0.8, 0.3], [0.4, 0.9], 0, 0.0)


def test_reformulation_sweep(sphere):
    out = reformulation_sweep(sphere, _meridian_point(0), _meridian_point(0.6),
                              np.array([0.0, math.sin(0.6), math.cos(0.6)]), 1, [0.0, 0.5, 0.99])
    assert [r.kappa1 for r in out] == [0.0, 0.5, 0.99]
    assert all(r.passed for r in out)


def test_experiment_needs_incomplete_space():
    with pytest.raises(InvalidSpace):
        globalization_experiment("sphere:n=10", 1, 0.3)


def test_small_experiments():
    ok = globalization_experiment("cone:angle=3pi/2,punctured,n=15,seed=2", 0, 0.3)
    assert ok.verdict == "pass"
    assert ok.completion["added"] == ["apex"]
    bad = globalization_experiment("cone:angle=5pi/2,punctured,n=15,seed=2", 0, 0.3)
    assert bad.verdict == "fail" and bad.failed_phase == "global"
    assert "apex" in bad.witness


def test_report_verdict_is_recomputable():
    rep = globalization_experiment("disk:punctured,n=12,seed=1", 0, 0.3).to_dict()
    assert recompute_verdict(rep) == rep["verdict"] == "pass"
    rep["global_scan"]["counts"]["fails"] = 1
    assert recompute_verdict(rep) == "fail"
    rep["global_scan"]["counts"]["fails"] = 0
    rep["local"]["passed"] = False
    assert recompute_verdict(rep) == "fail"
