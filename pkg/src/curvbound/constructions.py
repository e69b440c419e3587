"""Radial curves, the Cat's cradle iteration and the Key Lemma check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .comparison import hinge_angle, kappa_domain_check, make_hinge, tolerance_for
from .metric_space import Ball, InvalidSpace, MetricSpaceSample, NoGeodesic, geodesic
from .model_plane import (
    ModelTriangle,
    alexandrov_lemma_split,
    foot_on_opposite_side,
    model_angle,
    model_angle_array,
    model_diameter,
    model_side,
)


def _point_record(space: MetricSpaceSample, x):
    if space.analytic:
        return [float(v) for v in np.asarray(x, float)]
    return space.ids[space.index(x)]


# --------------------------------------------------------------------------
# radial curves


@dataclass
class RadialCurve:
    space: MetricSpaceSample = field(repr=False)
    basepoint: object
    start: object
    r: float
    R: float
    vertices: list
    params: np.ndarray
    step: float
    halted: str  # "reached" or "trapped"

    @property
    def end(self):
        return self.vertices[-1]

    def to_dict(self) -> dict:
        return {
            "basepoint": _point_record(self.space, self.basepoint),
            "start": _point_record(self.space, self.start),
            "r": self.r, "R": self.R, "step": self.step, "halted": self.halted,
            "params": [float(t) for t in self.params],
            "vertices": [_point_record(self.space, v) for v in self.vertices],
        }


def radial_curve(space: MetricSpaceSample, w, a, R: float, step: float, kappa: float | None = None,
                 verify_domain: bool = False, seed: int = 0) -> RadialCurve:
    """Curve from ``a`` escaping ``w``, parametrized by the distance to ``w``.

    On analytic backends the geodesic [wa] is extended past ``a``; discrete
    backends take greedy steps that maximize the gain in distance from ``w``.
    """
    w, a = space.resolve(w), space.resolve(a)
    r = space.dist(w, a)
    if not 0.0 < r <= R:
        raise InvalidSpace(f"radial curve needs 0 < |wa| <= R (|wa|={r}, R={R})")
    if step <= 0:
        raise InvalidSpace("step must be positive")
    if kappa is not None:
        if not R < model_diameter(kappa) / 2:
            raise InvalidSpace("radial curves need R < half the model diameter")
        if verify_domain and not kappa_domain_check(space, Ball(w, R), kappa, seed=seed).passed:
            raise InvalidSpace("closed ball B[w,R] is not a certified kappa-domain")

    if space.analytic:
        grid = np.append(np.arange(r, R, step), R)
        try:
            pts = space.geometry.along(w, a, grid)
        except NoGeodesic as exc:
            raise InvalidSpace(str(exc)) from None
        dists = space.geometry.pairwise(w[None, :], pts)[0]
        verts, params, halted = [a], [r], "reached"
        for x, d in zip(pts[1:], dists[1:]):
            if d <= params[-1] or not space.geometry.contains(x):
                halted = "trapped"
                break
            verts.append(x)
            params.append(float(d))
        return RadialCurve(space, w, a, r, R, verts, np.array(params), step, halted)

    D = space.distances
    adj = space.adjacency
    cur, verts, params, halted = a, [a], [r], "reached"
    while D[w, cur] < R:
        row = adj.getrow(cur)
        gains = [((D[w, v] - D[w, cur]) / D[cur, v], space.ids[v], v) for v in row.indices]
        gains = [g for g in gains if g[0] > 0]
        if not gains:
            halted = "trapped"
            break
        best = max(g[0] for g in gains)
        cur = min((g for g in gains if g[0] == best), key=lambda g: g[1])[2]
        verts.append(cur)
        params.append(float(D[w, cur]))
    return RadialCurve(space, w, a, r, R, verts, np.array(params), step, halted)


@dataclass
class RadialMonotonicity:
    max_increase: float
    params: list
    angles: list
    undefined_at: list


def radial_monotonicity_check(space: MetricSpaceSample, curve: RadialCurve, p, kappa: float) -> RadialMonotonicity:
    """Largest increase of t -> model angle at w~ with sides |wp|, t, |p alpha(t)|."""
    p = space.resolve(p)
    d_wp = space.dist(curve.basepoint, p)
    d_pa = space.dists([p], curve.vertices)[0]
    t = np.asarray(curve.params, float)
    ang = model_angle_array(kappa, d_wp, t, d_pa)
    undefined = [float(x) for x in t[np.isnan(ang)]]
    valid = ang[~np.isnan(ang)]
    increase = 0.0
    if len(valid) > 1:
        increase = float(np.max(valid - np.minimum.accumulate(valid)))
    return RadialMonotonicity(increase, t.tolist(), ang.tolist(), undefined)


# --------------------------------------------------------------------------
# Cat's cradle


@dataclass
class CradleTrace:
    space: MetricSpaceSample = field(repr=False)
    p: object
    q: object
    w: object
    epsilon: float
    vertices: list
    steps: list  # epsilon used for each step
    lengths: list  # l_n = |p w_2n| + |w_2n q|
    sums: list  # s_n = sum_{i<=n} |w_2(i-1) w_2i|
    halt_reason: str

    def recompute(self) -> tuple[np.ndarray, np.ndarray]:
        space, even = self.space, self.vertices[::2]
        ell = space.dists([self.p], even)[0] + space.dists(even, [self.q])[:, 0]
        hops = [space.dist(a, b) for a, b in zip(even, even[1:])]
        return ell, np.concatenate([[0.0], np.cumsum(hops)])

    def to_dict(self) -> dict:
        rec = lambda x: _point_record(self.space, x)  # noqa: E731
        return {
            "p": rec(self.p), "q": rec(self.q), "w": rec(self.w), "epsilon": self.epsilon,
            "halt_reason": self.halt_reason, "steps": self.steps,
            "vertices": [rec(v) for v in self.vertices],
            "lengths": self.lengths, "sums": self.sums,
        }


def cats_cradle(space: MetricSpaceSample, p, q, w, epsilon, max_steps: int = 100,
                domain_radius: float | None = None) -> CradleTrace:
    """Alternate epsilon-steps from w toward p, q, p, ... recording every vertex.

    ``epsilon`` may be a callable ``k -> epsilon_k`` to vary the step size.
    """
    p, q, w = space.resolve(p), space.resolve(q), space.resolve(w)
    schedule = epsilon if callable(epsilon) else (lambda k: epsilon)
    base = schedule(0)
    verts, steps, reason = [w], [], "max-steps"
    for k in range(max_steps):
        eps = float(schedule(k))
        if eps <= 0:
            raise InvalidSpace("epsilon must be positive")
        cur, target = verts[-1], (p if k % 2 == 0 else q)
        if space.dist(cur, target) < eps:
            reason = "converged"
            break
        try:
            g = geodesic(space, cur, target, resolution=eps / 10)
        except (NoGeodesic, InvalidSpace):
            reason = "no-geodesic"
            break
        nxt = g.point_at(eps)
        verts.append(nxt)
        steps.append(eps)
        if domain_radius is not None and space.dist(w, nxt) >= domain_radius:
            reason = "left-domain"
            break
    trace = CradleTrace(space, p, q, w, float(base), verts, steps, [], [], reason)
    ell, sums = trace.recompute()
    trace.lengths, trace.sums = ell.tolist(), sums.tolist()
    return trace


@dataclass
class CradleContainment:
    passed: bool
    checked_up_to: int  # largest vertex index k inspected
    offending: tuple | None  # (k, |w w_k|)


def cradle_domain_containment(trace: CradleTrace, w, R: float) -> CradleContainment:
    """Check |w w_k| < R for every k <= 2n, n the largest index with s_n < R - epsilon."""
    space = trace.space
    eps = max(trace.steps, default=trace.epsilon)
    n_max = max((n for n, s in enumerate(trace.sums) if s < R - eps), default=-1)
    last = min(2 * n_max, len(trace.vertices) - 1)
    if last < 0:
        return CradleContainment(True, -1, None)
    d = space.dists([w], trace.vertices[: last + 1])[0]
    bad = np.flatnonzero(d >= R)
    if len(bad):
        k = int(bad[0])
        return CradleContainment(False, last, (k, float(d[k])))
    return CradleContainment(True, last, None)


# --------------------------------------------------------------------------
# Key Lemma


VERIFIED, UNMET, VIOLATED = "verified", "hypotheses-unmet", "violated"


@dataclass
class KeyLemmaResult:
    verdict: str
    R: float | None
    d_pq: float
    model_pq: float | None
    hinge_angle: float | None
    budget: float
    detail: str = ""
    replay: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bisector_length(tri: ModelTriangle) -> float:
    """Length of the apex angle bisector up to the opposite side."""
    apex, at_a, _ = tri.angles()
    return model_side(tri.kappa, tri.a, _bisector_foot(tri, apex, at_a), at_a)


def _bisector_foot(tri, apex, at_a):
    lo, hi = 0.0, tri.c
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d = model_side(tri.kappa, tri.a, mid, at_a)
        if model_angle(tri.kappa, tri.a, d, mid) < apex / 2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def key_lemma_check(space: MetricSpaceSample, p, q, w, kappa: float, delta: float | None = None,
                    check_domain: bool = True, replay: bool = True, mode: str = "radius",
                    seed: int = 0) -> KeyLemmaResult:
    """Compare |pq| with the model side opposite the hinge angle at w.

    ``mode="bisector"`` certifies the ball whose radius is the model angle
    bisector at w~ instead of the distance R to the side [p~q~].
    """
    p, q, w = space.resolve(p), space.resolve(q), space.resolve(w)
    d_pq = space.dist(p, q)
    try:
        hinge = make_hinge(space, w, p, q)
    except (NoGeodesic, InvalidSpace) as exc:
        return KeyLemmaResult(UNMET, None, d_pq, None, None, 0.0, f"no hinge at w: {exc}")
    est = hinge_angle(space, hinge, kappa)
    wp, wq = hinge.first.length, hinge.second.length
    if est.angle is None:
        return KeyLemmaResult(UNMET, None, d_pq, None, None, 0.0, "hinge angle undefined at this curvature")
    model_pq = model_side(kappa, wp, wq, est.angle)
    if model_pq is None:
        return KeyLemmaResult(UNMET, None, d_pq, None, est.angle, 0.0, "model triangle undefined")
    tri = ModelTriangle(kappa, wp, wq, model_pq)
    foot = foot_on_opposite_side(tri)
    R = foot.distance
    budget = tolerance_for(max(hinge.first.error_bound, hinge.second.error_bound)) + min(wp, wq) * est.budget
    result = KeyLemmaResult(VERIFIED, R, d_pq, model_pq, est.angle, budget)
    if R <= 1e-12:
        result.detail = "R = 0: triangle inequality"
        if d_pq > wp + wq + budget:
            result.verdict = VIOLATED
        return result
    if not R < model_diameter(kappa) / 2:
        result.verdict, result.detail = UNMET, "R >= half the model diameter"
        return result
    radius = bisector_length(tri) if mode == "bisector" else R
    if check_domain:
        cert = kappa_domain_check(space, Ball(w, radius), kappa, seed=seed)
        if not cert.passed:
            result.verdict, result.detail = UNMET, f"ball B[w,{radius:.6g}] not certified ({cert.reason})"
            return result
    if d_pq > model_pq + budget:
        result.verdict = VIOLATED
    if replay:
        result.replay = _replay(space, hinge, kappa, foot, tri, delta, budget, est.budget)
    return result


def _replay(space, hinge, kappa, foot, tri, delta, budget, angle_slack) -> dict:
    """Follow the delta-point construction: split [p_d q_d], then run the radial curve to R."""
    gp, gq = hinge.first, hinge.second
    wp, wq, R = tri.a, tri.b, foot.distance
    bound = 0.1 * min(1.0, R / wp, R / wq)
    delta = 0.99 * bound if delta is None else delta
    if not 0 < delta < bound:
        return {"status": "skipped", "reason": f"delta must lie in (0, {bound})"}
    w = hinge.vertex
    p_d, q_d = gp.point_at(delta * wp), gq.point_at(delta * wq)
    if not space.analytic and (p_d == w or q_d == w or p_d == q_d):
        return {"status": "skipped", "reason": "sample too coarse for the delta points"}
    try:
        side = geodesic(space, p_d, q_d)
    except (NoGeodesic, InvalidSpace) as exc:
        return {"status": "skipped", "reason": str(exc)}
    targets = (model_angle(kappa, wp, R, foot.position), model_angle(kappa, wq, R, tri.c - foot.position))
    split = alexandrov_lemma_split(
        kappa, (space.dist(w, p_d), space.dist(w, q_d)), targets, side.length,
        dist_w_at=lambda t: space.dist(w, side.point_at(t * side.length)),
        slack=angle_slack,
    )
    a_d = side.point_at(split.t * side.length)
    out = {"status": "ok", "delta": delta, "t": split.t, "split_feasible": split.feasible,
           "angles": [split.angle_p, split.angle_q], "targets": list(targets)}
    r_d = space.dist(w, a_d)
    if not 0 < r_d < R:
        out.update(status="skipped", reason="a_delta not strictly inside B(w,R)")
        return out
    curve = radial_curve(space, w, a_d, R, step=(R - r_d) / 32)
    a = curve.end
    d_pa, d_qa = space.dist(gp.end, a), space.dist(gq.end, a)
    out.update(
        radial_halted=curve.halted, r_delta=r_d, reached=float(curve.params[-1]),
        d_pa=d_pa, model_pa=foot.position, d_qa=d_qa, model_qa=tri.c - foot.position,
        holds=bool(d_pa <= foot.position + budget and d_qa <= tri.c - foot.position + budget),
    )
    mono = radial_monotonicity_check(space, curve, gp.end, kappa)
    out["radial"] = {"params": mono.params, "angles": [None if math.isnan(x) else x for x in mono.angles],
                     "max_increase": mono.max_increase}
    return out
