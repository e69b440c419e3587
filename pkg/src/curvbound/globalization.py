"""Local-to-global experiments: certified covers, segment chains and the completion scan."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .comparison import (
    EXHAUSTIVE_LIMIT,
    ComparisonReport,
    DomainCertificate,
    Strategy,
    hinge_angle,
    kappa_domain_check,
    make_hinge,
    scan_quadruples,
)
from .constructions import VIOLATED, key_lemma_check
from .metric_space import (
    Ball,
    DiscreteGeodesic,
    InvalidSpace,
    MetricSpaceSample,
    NoGeodesic,
    completion,
    generate_space,
    geodesic,
    parse_space_spec,
)
from .model_plane import model_angle, model_angle_array

FIXED_KAPPA_NOTE = "comparison checked at the stated curvature values only; the limit over all smaller values is not sampled"


class ChainError(RuntimeError):
    """No certified ball covers the segment starting at ``parameter``."""

    def __init__(self, parameter: float, radius: float, reason: str):
        super().__init__(f"no certified ball at parameter {parameter:.6g}: {reason} (finest radius tried {radius:.3g})")
        self.parameter = parameter
        self.radius = radius
        self.reason = reason


@dataclass
class KappaDomainCover:
    balls: list  # Ball instances
    certificates: list  # DomainCertificate per ball
    kappa: float
    target: str
    check_kw: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def recheck(self, space: MetricSpaceSample) -> bool:
        """Re-run every certificate; True iff each reproduces its stored verdict."""
        again = [kappa_domain_check(space, b, self.kappa, **self.check_kw) for b in self.balls]
        return all(a.passed == c.passed and a.reason == c.reason for a, c in zip(again, self.certificates))

    def to_dict(self, space: MetricSpaceSample | None = None) -> dict:
        def center(b):
            return space.name_of(b.center) if space is not None else b.center

        return {
            "target": self.target,
            "kappa": self.kappa,
            "passed": self.passed,
            "balls": [
                {"center": center(b), "radius": float(b.radius), "passed": c.passed, "reason": c.reason,
                 "worst_margin": c.worst_margin}
                for b, c in zip(self.balls, self.certificates)
            ],
        }


# --------------------------------------------------------------------------
# segment chains


@dataclass
class SegmentChain:
    params: list[float]  # distances from p along the geodesic, p_0 = 0 ... p_n = |pq|
    points: list
    cover: KappaDomainCover

    @property
    def n(self) -> int:
        return len(self.params) - 1


def _segment_inside(space: MetricSpaceSample, geod: DiscreteGeodesic, u0: float, u1: float, ball: Ball) -> bool:
    if geod.exact:
        pts = geod.points_at(np.linspace(u0, u1, 9))
    else:
        pts = [v for v, s in zip(geod.vertices, geod.params) if u0 - 1e-12 <= s <= u1 + 1e-12]
    return bool(np.all(space.dists([ball.center], pts)[0] <= ball.radius + space.tolerance))


def _next_param(geod: DiscreteGeodesic, u: float, step: float) -> float:
    target = u + step
    if geod.exact:
        return min(target, geod.length)
    later = [float(s) for s in geod.params if s > u + 1e-12]
    below = [s for s in later if s <= target + 1e-12]
    return below[-1] if below else later[0]


def segment_chain(space: MetricSpaceSample, geod: DiscreteGeodesic, kappa: float, epsilon: float,
                  ball_radius: float | None = None, halvings: int = 4, **check_kw) -> SegmentChain:
    """Split ``geod`` greedily into segments, each inside a certified ball.

    Every step is as long as the current ball allows (1.8 radii, leaving a
    margin for the discrete center); the first step is kept below ``epsilon``.
    A failed certificate halves the radius up to ``halvings`` times.
    """
    if epsilon <= 0:
        raise InvalidSpace("epsilon must be positive")
    L = geod.length
    rho0 = L if ball_radius is None else float(ball_radius)
    params, balls, certs = [0.0], [], []
    u = 0.0
    while u < L - 1e-12:
        rho, cert, reason = rho0, None, "not attempted"
        for _ in range(halvings + 1):
            step = L - u if rho >= L else min(L - u, 1.8 * rho)
            if u == 0.0 and step >= epsilon:
                step = epsilon / 2
            v = _next_param(geod, u, step)
            if u == 0.0 and v >= epsilon:
                raise ChainError(u, rho, "first vertex lies beyond epsilon")
            ball = Ball(geod.point_at(0.5 * (u + v)), rho)
            if _segment_inside(space, geod, u, v, ball):
                cert = kappa_domain_check(space, ball, kappa, **check_kw)
                if cert.passed:
                    break
                if reason in ("not attempted", "segment leaves the ball"):
                    reason = cert.reason
            elif reason == "not attempted":
                reason = "segment leaves the ball"
            rho /= 2
        else:
            raise ChainError(u, 2 * rho, reason)
        balls.append(ball)
        certs.append(cert)
        params.append(v)
        u = v
    points = [geod.point_at(s) for s in params]
    cover = KappaDomainCover(balls, certs, float(kappa), f"geodesic {space.name_of(geod.start)}->{space.name_of(geod.end)}",
                             dict(check_kw))
    return SegmentChain(params, points, cover)


# --------------------------------------------------------------------------
# merging two domains


@dataclass
class MergeReport:
    passed: bool
    reason: str
    configurations: int
    checks: int
    witnesses: list
    certificates: list  # for ball_p, ball_q, and the merged region

    def to_dict(self) -> dict:
        out = asdict(self)
        out["certificates"] = [c.to_dict() for c in self.certificates]
        return out


def _in_ball(space, x, ball) -> bool:
    return space.dist(ball.center, x) <= ball.radius + space.tolerance


def _common_point(space, g: DiscreteGeodesic, ball_p: Ball, ball_q: Ball):
    """Vertex of ``g`` in both balls closest to the middle of their common run."""
    both = [k for k, v in enumerate(g.vertices) if _in_ball(space, v, ball_p) and _in_ball(space, v, ball_q)]
    inner = [k for k in both if 0 < k < len(g.vertices) - 1]
    if not inner:
        return None
    return g.vertices[inner[len(inner) // 2]]


def domain_merge_check(space: MetricSpaceSample, ball_p: Ball, ball_q: Ball, kappa: float,
                       configurations: int = 6, levels: int = 3, seed: int = 0, **check_kw) -> MergeReport:
    """Check the hinge condition for p in one ball and q in the other.

    For sampled p, q, s with [pq] inside the union and w a common point of
    [pq], and s_bar on [qs] at small scales, verifies in turn
    model(w; s_bar, q) <= angle[w s_bar q], angle[w s_bar p] <= pi - model(w; s_bar, q),
    the Key Lemma on (p, s_bar; w) and finally model(q; s_bar, p) <= angle[q s_bar p]
    directly. The union of the two balls is then certified as a whole.
    """
    cert_p = kappa_domain_check(space, ball_p, kappa, seed=seed, **check_kw)
    cert_q = kappa_domain_check(space, ball_q, kappa, seed=seed, **check_kw)
    if space.dist(ball_p.center, ball_q.center) >= ball_p.radius + ball_q.radius:
        raise InvalidSpace("the two balls do not overlap")
    if not (cert_p.passed and cert_q.passed):
        return MergeReport(False, "ball-not-certified", 0, 0, [], [cert_p, cert_q])
    ps = space.region_points(ball_p, configurations + 1, seed + 11, include_centers=False)
    qs = space.region_points(ball_q, 2 * configurations + 2, seed + 13, include_centers=False)
    witnesses, checks, used = [], 0, 0
    for k, p in enumerate(ps):
        if used >= configurations or 2 * k + 1 >= len(qs):
            break
        q, s = qs[2 * k], qs[2 * k + 1]
        try:
            g = geodesic(space, p, q)
        except (NoGeodesic, InvalidSpace):
            continue
        if not all(_in_ball(space, v, ball_p) or _in_ball(space, v, ball_q) for v in g.vertices):
            continue
        w = _common_point(space, g, ball_p, ball_q)
        if w is None:
            continue
        try:
            hinge_q = make_hinge(space, q, s, p)
        except (NoGeodesic, InvalidSpace):
            continue
        used += 1
        for sbar in hinge_q.first.points_at(hinge_q.s_scales[-levels:]):
            if space.dist(sbar, w) == 0.0 or space.dist(sbar, q) == 0.0:
                continue
            checks += 1
            names = {"p": space.name_of(p), "q": space.name_of(q), "s_bar": space.name_of(sbar), "w": space.name_of(w)}
            try:
                at_sq = hinge_angle(space, make_hinge(space, w, sbar, q), kappa)
                at_sp = hinge_angle(space, make_hinge(space, w, sbar, p), kappa)
            except (NoGeodesic, InvalidSpace):
                checks -= 1
                continue
            m = model_angle(kappa, space.dist(w, sbar), space.dist(w, q), space.dist(sbar, q))
            if m is not None and at_sq.angle is not None and m > at_sq.angle + at_sq.budget:
                witnesses.append({**names, "step": "model-vs-hinge", "model": m, "hinge": at_sq.angle})
                continue
            if m is not None and at_sp.angle is not None and at_sp.angle > math.pi - m + at_sp.budget:
                witnesses.append({**names, "step": "adjacent-bound", "hinge": at_sp.angle, "bound": math.pi - m})
                continue
            lemma = key_lemma_check(space, p, sbar, w, kappa, replay=False, seed=seed)
            if lemma.verdict == VIOLATED:
                witnesses.append({**names, "step": "key-lemma", "d": lemma.d_pq, "model": lemma.model_pq})
                continue
            direct = hinge_angle(space, make_hinge(space, q, sbar, p), kappa)
            md = model_angle(kappa, space.dist(q, sbar), space.dist(q, p), space.dist(sbar, p))
            if md is not None and direct.angle is not None and md > direct.angle + direct.budget:
                witnesses.append({**names, "step": "direct", "model": md, "hinge": direct.angle})
    merged = kappa_domain_check(space, [ball_p, ball_q], kappa, seed=seed, **check_kw)
    passed = not witnesses and merged.passed
    reason = "pass" if passed else ("configuration-violation" if witnesses else f"union-{merged.reason}")
    return MergeReport(passed, reason, used, checks, witnesses, [cert_p, cert_q, merged])


# --------------------------------------------------------------------------
# geodesics between neighbouring domains


@dataclass
class ContainmentScan:
    passed: bool
    pairs: int
    escapes: list
    certified: list

    def to_dict(self) -> dict:
        return asdict(self)


def geodesic_containment_scan(space: MetricSpaceSample, ball1: Ball, ball2: Ball, x, z, width: float,
                              count: int = 40, seed: int = 0, kappa: float | None = None) -> ContainmentScan:
    """Sample pairs near [xz] and report geodesics leaving the union of the balls.

    With ``kappa`` given, each ball's certificate is recorded in ``certified``.
    """
    g = geodesic(space, x, z)
    union = (ball1, ball2)
    if space.analytic:
        rng = np.random.default_rng(seed)
        bases = g.points_at(np.sort(rng.uniform(0.0, g.length, 2 * count)))
        near = []
        for b in bases:
            cand = [c for c in space.geometry.sample_ball(b, width, 1, rng) if space.contains(c)]
            near.append(cand[0] if cand else b)
        pairs = list(zip(near[0::2], near[1::2]))
    else:
        D = space.dists(list(g.vertices), range(len(space)))
        near = sorted(int(i) for i in np.flatnonzero(D.min(axis=0) <= width))
        rng = np.random.default_rng(seed)
        allp = [(a, b) for i, a in enumerate(near) for b in near[i + 1:]]
        if len(allp) > count:
            allp = [allp[i] for i in sorted(rng.choice(len(allp), count, replace=False))]
        pairs = allp
    escapes, checked = [], 0
    for v, w in pairs:
        if space.dist(v, w) == 0.0:
            continue
        try:
            h = geodesic(space, v, w, resolution=min(ball1.radius, ball2.radius) / 20 if space.analytic else None)
        except NoGeodesic as exc:
            escapes.append({"v": space.name_of(v), "w": space.name_of(w), "exit": None, "detail": str(exc)})
            continue
        checked += 1
        for vert in h.vertices:
            if not any(_in_ball(space, vert, b) for b in union):
                escapes.append({"v": space.name_of(v), "w": space.name_of(w), "exit": space.name_of(vert)})
                break
    certified = []
    if kappa is not None:
        certified = [kappa_domain_check(space, b, kappa, seed=seed).passed for b in union]
    return ContainmentScan(not escapes, checked, escapes, certified)


# --------------------------------------------------------------------------
# fixed-curvature reformulation


@dataclass
class ReformulationResult:
    passed: bool
    kappa: float
    kappa1: float
    hinge_angle: float | None
    budget: float
    rows: list  # (|q s_bar|, model angle at kappa1)
    note: str = FIXED_KAPPA_NOTE

    def to_dict(self) -> dict:
        return asdict(self)


def reformulation_check(space: MetricSpaceSample, q, s, p, kappa: float, kappa1: float,
                        levels: int = 9) -> ReformulationResult:
    """model_angle at kappa1 of (q; s_bar, p) <= angle[q s_bar p] for small |q s_bar|.

    The scales are |qs|/2 halved ``levels - 1`` times; on discrete backends
    the path vertices within that range are used instead.
    """
    if not kappa1 < kappa:
        raise InvalidSpace("kappa1 must be smaller than kappa")
    g_s = geodesic(space, q, s)
    g_p = geodesic(space, q, p)
    hinge = make_hinge(space, q, s, p, r0=min(g_s.length, g_p.length) / 2, levels=levels, first=g_s, second=g_p)
    est = hinge_angle(space, hinge, kappa)
    sbars = hinge.first.points_at(hinge.s_scales)
    d_qs = space.dists([q], sbars)[0]
    d_sp = space.dists(sbars, [p])[:, 0]
    model = model_angle_array(kappa1, d_qs, space.dist(q, p), d_sp)
    rows = [[float(a), None if math.isnan(b) else float(b)] for a, b in zip(d_qs, model)]
    if est.angle is None:
        return ReformulationResult(False, kappa, kappa1, None, est.budget, rows)
    ok = all(m is None or m <= est.angle + est.budget for _, m in rows)
    return ReformulationResult(ok, float(kappa), float(kappa1), est.angle, est.budget, rows)


def reformulation_sweep(space: MetricSpaceSample, q, s, p, kappa: float, kappa1_values) -> list[ReformulationResult]:
    return [reformulation_check(space, q, s, p, kappa, k1) for k1 in kappa1_values]


# --------------------------------------------------------------------------
# the three-phase experiment


@dataclass
class GlobalizationReport:
    spec: dict
    kappa: float
    local: dict
    completion: dict
    global_scan: dict | None
    verdict: str
    failed_phase: str | None
    witness: list | None
    note: str = FIXED_KAPPA_NOTE

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return asdict(self)


def recompute_verdict(report: dict) -> str:
    """Overall verdict from the three phase records of a serialized report."""
    ok = (report["local"]["passed"] and report["completion"]["built"]
          and report["global_scan"] is not None and report["global_scan"]["counts"]["fails"] == 0)
    return "pass" if ok else "fail"


def _certify_point(space, i, kappa, radius, halvings, seed, check_kw):
    rho = radius
    for attempt in range(halvings + 1):
        cert = kappa_domain_check(space, Ball(space.ids[i], rho), kappa, seed=seed + i, **check_kw)
        if cert.passed:
            return Ball(space.ids[i], rho), cert, attempt
        rho /= 2
    return Ball(space.ids[i], 2 * rho), cert, halvings


def globalization_experiment(spec, kappa: float, local_radius: float, strategy=None, workers: int = 1,
                             halvings: int = 4, seed: int = 0, random_count: int = 200_000,
                             **check_kw) -> GlobalizationReport:
    """Certify local kappa-domains, complete the sample, then scan it globally."""
    spec = parse_space_spec(spec)
    space = generate_space(spec)
    if not space.analytic or space.geometry.complete:
        raise InvalidSpace("globalization needs an incomplete analytic space with known completion")
    if local_radius <= 0:
        raise InvalidSpace("local_radius must be positive")

    def job(i):
        return _certify_point(space, i, kappa, local_radius, halvings, seed, check_kw)

    idx = range(len(space))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, idx))
    else:
        results = [job(i) for i in idx]
    cover = KappaDomainCover([r[0] for r in results], [r[1] for r in results], float(kappa), "sample", dict(check_kw))
    local = cover.to_dict()
    local["halvings"] = [r[2] for r in results]
    failed = [b for b in local["balls"] if not b["passed"]]

    full = completion(space)
    added = [full.ids[i] for i, f in enumerate(full.completion_flags) if f]
    comp = {"built": True, "added": added, "n_before": len(space), "n_after": len(full)}

    if strategy is None:
        strategy = "exhaustive" if len(full) <= EXHAUSTIVE_LIMIT else Strategy("random", random_count, spec.seed)
    scan: ComparisonReport = scan_quadruples(full, kappa, strategy, workers)
    gdict = scan.to_dict()

    report = GlobalizationReport(spec.to_dict(), float(kappa), local, comp, gdict, "fail", None, None)
    if failed:
        report.failed_phase, report.witness = "local", [failed[0]["center"]]
    elif scan.fails:
        report.failed_phase, report.witness = "global", scan.witness
    report.verdict = recompute_verdict(report.to_dict())
    return report
