"""Quadruple comparison, hinge angles and kappa-domain certificates."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .metric_space import Ball, DiscreteGeodesic, InvalidSpace, MetricSpaceSample, NoGeodesic, geodesic
from .model_plane import model_angle, model_angle_array

TWO_PI = 2.0 * math.pi
ABS_TOL = 1e-8
BUDGET_FACTOR = 4.0
EXHAUSTIVE_LIMIT = 40
HIST_EDGES = np.linspace(0.0, 3.0 * math.pi, 31)

HOLDS, HOLDS_UNDEFINED, FAILS = "holds", "holds-undefined", "fails"


def tolerance_for(error_bound: float = 0.0) -> float:
    return ABS_TOL + BUDGET_FACTOR * error_bound


def angle_budget(error_bound: float, min_scale: float) -> float:
    """Slack for model angles measured at scale ``min_scale`` on perturbed points."""
    if error_bound == 0.0:
        return ABS_TOL
    return ABS_TOL + BUDGET_FACTOR * error_bound / max(min_scale, 1e-300)


# --------------------------------------------------------------------------
# (1+3)-point comparison


@dataclass(frozen=True)
class QuadrupleVerdict:
    angles: tuple[float | None, float | None, float | None]
    angle_sum: float | None
    verdict: str
    excess: float
    quadruple: tuple | None = None


def _check_metric4(d: dict, tol: float) -> None:
    for a, b, c in itertools.permutations(range(4), 3):
        lhs = d[frozenset((a, c))]
        rhs = d[frozenset((a, b))] + d[frozenset((b, c))]
        if lhs > rhs + tol:
            raise InvalidSpace(f"distances violate the triangle inequality on points {(a, b, c)}")


def quadruple_check(kappa, d_px1, d_px2, d_px3, d_x1x2, d_x2x3, d_x3x1, tolerance=ABS_TOL, quadruple=None):
    """(1+3)-point comparison at p for the quadruple (p; x1, x2, x3)."""
    ds = (d_px1, d_px2, d_px3, d_x1x2, d_x2x3, d_x3x1)
    if any(v < 0 or not math.isfinite(v) for v in ds):
        raise InvalidSpace("distances must be finite and nonnegative")
    pairs = {frozenset((0, 1)): d_px1, frozenset((0, 2)): d_px2, frozenset((0, 3)): d_px3,
             frozenset((1, 2)): d_x1x2, frozenset((2, 3)): d_x2x3, frozenset((1, 3)): d_x3x1}
    _check_metric4(pairs, 1e-9 * max(1.0, max(ds)))
    angles = (
        model_angle(kappa, d_px1, d_px2, d_x1x2),
        model_angle(kappa, d_px2, d_px3, d_x2x3),
        model_angle(kappa, d_px3, d_px1, d_x3x1),
    )
    if any(a is None for a in angles):
        return QuadrupleVerdict(angles, None, HOLDS_UNDEFINED, 0.0, quadruple)
    total = sum(angles)
    if total <= TWO_PI + tolerance:
        return QuadrupleVerdict(angles, total, HOLDS, 0.0, quadruple)
    return QuadrupleVerdict(angles, total, FAILS, total - TWO_PI, quadruple)


@dataclass(frozen=True)
class Strategy:
    kind: str = "exhaustive"
    count: int = 0
    seed: int | None = None

    @classmethod
    def parse(cls, text) -> "Strategy":
        if isinstance(text, Strategy):
            return text
        if isinstance(text, dict):
            return cls(text.get("kind", "exhaustive"), int(text.get("count", 0)), text.get("seed"))
        if text in (None, "", "exhaustive"):
            return cls()
        kind, _, rest = str(text).partition(":")
        if kind != "random":
            raise InvalidSpace(f"unknown strategy {text!r}")
        opts = dict(item.split("=", 1) for item in rest.split(",") if item)
        if "seed" not in opts:
            raise InvalidSpace("random strategy requires a seed")
        return cls("random", int(opts.get("count", 10000)), int(opts["seed"]))

    def to_dict(self) -> dict:
        if self.kind == "exhaustive":
            return {"kind": "exhaustive"}
        return {"kind": "random", "count": self.count, "seed": self.seed}


@dataclass
class ComparisonReport:
    space: str
    kappa: float
    strategy: dict
    counts: dict
    worst_excess: float | None
    witness: list | None
    tolerance: float
    histogram: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def fails(self) -> int:
        return self.counts[FAILS]

    @property
    def passed(self) -> bool:
        return self.fails == 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["total"] = self.total
        out["histogram"] = {"edges": [float(e) for e in HIST_EDGES], "counts": list(self.histogram)}
        return out


@dataclass
class _Partial:
    holds: int = 0
    undefined: int = 0
    fails: int = 0
    best: tuple | None = None  # (excess, quadruple indices)
    hist: np.ndarray = field(default_factory=lambda: np.zeros(len(HIST_EDGES) - 1, dtype=np.int64))

    def merge(self, other: "_Partial") -> "_Partial":
        best = self.best
        if other.best is not None and (best is None or (-other.best[0], other.best[1]) < (-best[0], best[1])):
            best = other.best
        return _Partial(self.holds + other.holds, self.undefined + other.undefined,
                        self.fails + other.fails, best, self.hist + other.hist)


def _evaluate(D, kappa, tau, P, I, J, K) -> _Partial:
    a1 = model_angle_array(kappa, D[P, I], D[P, J], D[I, J])
    a2 = model_angle_array(kappa, D[P, J], D[P, K], D[J, K])
    a3 = model_angle_array(kappa, D[P, K], D[P, I], D[K, I])
    total = a1 + a2 + a3
    undefined = np.isnan(total)
    failing = ~undefined & (total > TWO_PI + tau)
    part = _Partial(
        holds=int(np.count_nonzero(~undefined & ~failing)),
        undefined=int(np.count_nonzero(undefined)),
        fails=int(np.count_nonzero(failing)),
        hist=np.histogram(np.clip(total[~undefined], 0, HIST_EDGES[-1]), HIST_EDGES)[0],
    )
    if part.fails:
        idx = np.flatnonzero(failing)
        excess = total[idx] - TWO_PI
        top = idx[excess == excess.max()]
        quads = sorted((int(P[t]), *sorted((int(I[t]), int(J[t]), int(K[t])))) for t in top)
        part.best = (float(excess.max()), quads[0])
    return part


def _chunks(n: int, strategy: Strategy):
    if strategy.kind == "exhaustive":
        combos = np.array(list(itertools.combinations(range(n - 1), 3)), dtype=np.int64).reshape(-1, 3)
        for p in range(n):
            others = np.delete(np.arange(n), p)
            trip = others[combos]
            yield np.full(len(trip), p), trip[:, 0], trip[:, 1], trip[:, 2]
        return
    rng = np.random.default_rng(strategy.seed)
    block = 4096
    for start in range(0, strategy.count, block):
        size = min(block, strategy.count - start)
        quad = np.argsort(rng.random((size, n)), axis=1)[:, :4]
        yield quad[:, 0], quad[:, 1], quad[:, 2], quad[:, 3]


def scan_quadruples(space: MetricSpaceSample, kappa: float, strategy="exhaustive", workers: int = 1,
                    tolerance: float | None = None) -> ComparisonReport:
    """Apply the quadruple comparison to the sample per ``strategy``.

    Chunks are fixed by the strategy alone and merged with a commutative
    reduction, so the report does not depend on ``workers``.
    """
    strategy = Strategy.parse(strategy)
    n = len(space)
    if n < 4:
        raise InvalidSpace("need at least 4 points for quadruple scans")
    if strategy.kind == "exhaustive" and n > EXHAUSTIVE_LIMIT:
        raise InvalidSpace(f"exhaustive scans are limited to n <= {EXHAUSTIVE_LIMIT} (got {n})")
    if strategy.kind == "random" and strategy.count <= 0:
        raise InvalidSpace("random strategy needs a positive count")
    tau = tolerance_for(space.error_bound) if tolerance is None else tolerance
    D = np.asarray(space.distances)

    def run(chunk):
        return _evaluate(D, kappa, tau, *chunk)

    total = _Partial()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, _chunks(n, strategy)))
    else:
        parts = map(run, _chunks(n, strategy))
    for part in parts:
        total = total.merge(part)
    witness = None
    if total.best is not None:
        witness = [space.ids[i] for i in total.best[1]]
    return ComparisonReport(
        space=space.label,
        kappa=float(kappa),
        strategy=strategy.to_dict(),
        counts={HOLDS: total.holds, HOLDS_UNDEFINED: total.undefined, FAILS: total.fails},
        worst_excess=None if total.best is None else total.best[0],
        witness=witness,
        tolerance=tau,
        histogram=[int(c) for c in total.hist],
    )


def max_lower_bound(space: MetricSpaceSample, kappa_lo: float, kappa_hi: float, tol: float = 1e-3,
                    strategy="exhaustive", workers: int = 1) -> float:
    """Largest kappa (within ``tol``) at which the scan still passes.

    Relies on model angles being nondecreasing in kappa, which makes the
    pass/fail predicate monotone.
    """
    if tol <= 0 or kappa_lo >= kappa_hi:
        raise InvalidSpace("need tol > 0 and kappa_lo < kappa_hi")

    def passes(k):
        return scan_quadruples(space, k, strategy, workers).passed

    if not passes(kappa_lo):
        raise InvalidSpace(f"bracket invalid: scan fails at kappa_lo={kappa_lo}")
    if passes(kappa_hi):
        raise InvalidSpace(f"bracket invalid: scan passes at kappa_hi={kappa_hi}")
    lo, hi = kappa_lo, kappa_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# hinges


@dataclass(frozen=True, eq=False)
class Hinge:
    """Geodesics [px] and [py] from a common vertex, with decreasing scales on each."""

    vertex: object
    first: DiscreteGeodesic
    second: DiscreteGeodesic
    s_scales: tuple[float, ...]
    t_scales: tuple[float, ...]

    def __post_init__(self):
        for scales in (self.s_scales, self.t_scales):
            if not scales or min(scales) <= 0 or any(a <= b for a, b in zip(scales, scales[1:])):
                raise InvalidSpace("hinge scales must be positive and strictly decreasing")


def _scales(g: DiscreteGeodesic, r0: float, levels: int) -> tuple[float, ...]:
    floor = 2.0 * g.error_bound
    if g.exact:
        top = min(r0, g.length)
        return tuple(top / 2**k for k in range(levels))
    params = [float(s) for s in g.params[1:] if s >= floor]
    if not params:
        raise InvalidSpace("geodesic too coarse for the hinge scales")
    small = [s for s in params if s <= r0] or params[:1]
    return tuple(sorted(set(small), reverse=True))


def make_hinge(space: MetricSpaceSample, p, x, y, r0: float | None = None, levels: int = 9,
               first: DiscreteGeodesic | None = None, second: DiscreteGeodesic | None = None) -> Hinge:
    first = first or geodesic(space, p, x)
    second = second or geodesic(space, p, y)
    if r0 is None:
        r0 = min(first.length, second.length) / 8
    return Hinge(first.start, first, second, _scales(first, r0, levels), _scales(second, r0, levels))


@dataclass
class HingeAngle:
    angle: float | None
    extrapolated: float | None
    monotonicity_excess: float
    budget: float
    flagged: bool
    grid: list = field(repr=False, default_factory=list)


def hinge_angle(space: MetricSpaceSample, hinge: Hinge, kappa: float) -> HingeAngle:
    """Model angles on the scale grid; the smallest-scale value is the estimate."""
    xs = hinge.first.points_at(hinge.s_scales)
    ys = hinge.second.points_at(hinge.t_scales)
    p = hinge.vertex
    s = space.dists([p], xs)[0]
    t = space.dists([p], ys)[0]
    G = model_angle_array(kappa, s[:, None], t[None, :], space.dists(xs, ys))
    with np.errstate(invalid="ignore"):
        diffs = [G[:-1, :] - G[1:, :], G[:, :-1] - G[:, 1:]]
    worst = max([float(np.nanmax(d)) for d in diffs if d.size and not np.all(np.isnan(d))], default=0.0)
    error = max(hinge.first.error_bound, hinge.second.error_bound)
    budget = angle_budget(error, min(s[-1], t[-1]))
    angle = None if np.isnan(G[-1, -1]) else float(G[-1, -1])
    extrapolated = angle
    if angle is not None and min(G.shape) > 1 and not np.isnan(G[-2, -2]):
        ratio = s[-2] / s[-1] if s[-1] > 0 else 2.0
        extrapolated = float(np.clip(angle + (angle - G[-2, -2]) / (ratio**2 - 1), 0, math.pi))
    excess = max(0.0, worst)
    return HingeAngle(angle, extrapolated, excess, budget, excess > budget, G.tolist())


@dataclass
class AdjacentAngles:
    angle_to_y: float
    angle_to_x: float
    deviation: float
    budget: float


def adjacent_angle_check(space: MetricSpaceSample, geod: DiscreteGeodesic, p, z, kappa: float,
                         levels: int = 9) -> AdjacentAngles:
    """|angle[p y z] + angle[p z x] - pi| for p interior to the geodesic [xy].

    ``p`` is a parameter along ``geod`` (float) or an interior vertex.
    """
    if isinstance(p, float) and geod.exact:
        s_p = p
    elif geod.exact:
        s_p = space.dist(geod.start, p)
    else:
        target = space.index(p) if not isinstance(p, float) else geod.point_at(p)
        if target not in geod.interior():
            raise InvalidSpace("p must be an interior vertex of the geodesic")
        s_p = float(geod.params[list(geod.vertices).index(target)])
    if not 0.0 < s_p < geod.length:
        raise InvalidSpace("p must lie strictly inside the geodesic")
    to_y = geod.restrict(s_p, geod.length)
    to_x = geod.restrict(0.0, s_p).reverse()
    to_z = geodesic(space, to_y.start, z)
    r0 = min(to_x.length, to_y.length, to_z.length) / 8
    a = hinge_angle(space, make_hinge(space, None, None, None, r0, levels, first=to_y, second=to_z), kappa)
    b = hinge_angle(space, make_hinge(space, None, None, None, r0, levels, first=to_z, second=to_x), kappa)
    if a.angle is None or b.angle is None:
        raise InvalidSpace("hinge angles undefined at this curvature")
    return AdjacentAngles(a.angle, b.angle, abs(a.angle + b.angle - math.pi), a.budget + b.budget)


# --------------------------------------------------------------------------
# kappa-domains


@dataclass
class DomainCertificate:
    region: list
    kappa: float
    passed: bool
    reason: str
    n_points: int
    hinge_checks: int
    hinge_skipped: int
    worst_margin: float | None
    witnesses: list
    quadruples: ComparisonReport | None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["quadruples"] = None if self.quadruples is None else self.quadruples.to_dict()
        return out


def _balls(region) -> list[Ball]:
    if isinstance(region, Ball):
        return [region]
    if isinstance(region, tuple) and len(region) == 2 and isinstance(region[1], (int, float)):
        return [Ball(*region)]
    return [b if isinstance(b, Ball) else Ball(*b) for b in region]


def _region_sample(space: MetricSpaceSample, balls, count, seed):
    pts = space.region_points(balls, count, seed)
    if space.analytic:
        return space.with_points(np.array(pts).reshape(len(pts), -1)) if pts else None, pts
    return (space.subset(pts) if pts else None), pts


def kappa_domain_check(space: MetricSpaceSample, region, kappa: float, points: int = 12, hinges: int = 24,
                       seed: int = 0, levels: int = 9) -> DomainCertificate:
    """Certify that a ball (or a union of balls) behaves as a kappa-domain.

    Checks the hinge inequality model_angle(q; s_bar, p) <= angle[q s_bar p]
    over the scales r0/2^k (r0 = radius/8) for sampled triples, then the
    quadruple comparison on the half-radius sub-region.
    """
    balls = _balls(region)
    desc = [[space.name_of(b.center), float(b.radius)] for b in balls]
    _, pts = _region_sample(space, balls, points, seed)
    n = len(pts)
    half = [Ball(b.center, b.radius / 2) for b in balls]
    sub, _ = _region_sample(space, half, points, seed + 1)
    if n < 4 or sub is None or len(sub) < 4:
        return DomainCertificate(desc, kappa, False, "insufficient-points", n, 0, 0, None, [], None)

    rng = np.random.default_rng(seed)
    triples = list(itertools.permutations(range(n), 3))
    if len(triples) > hinges:
        pick = rng.choice(len(triples), size=hinges, replace=False)
        triples = [triples[i] for i in sorted(pick)]
    r0 = max(b.radius for b in balls) / 8
    witnesses, worst, checked, skipped = [], None, 0, 0
    for qi, si, pi in triples:
        q, s, p = pts[qi], pts[si], pts[pi]
        try:
            hinge = make_hinge(space, q, s, p, r0, levels)
        except (NoGeodesic, InvalidSpace):
            skipped += 1
            continue
        est = hinge_angle(space, hinge, kappa)
        if est.angle is None:
            skipped += 1
            continue
        checked += 1
        d_qp = space.dist(q, p)
        sbars = hinge.first.points_at(hinge.s_scales)
        d_sp = space.dists(sbars, [p])[:, 0]
        d_qs = space.dists([q], sbars)[0]
        model = model_angle_array(kappa, d_qs, d_qp, d_sp)
        margins = model - est.angle
        if np.all(np.isnan(margins)):
            continue
        k = int(np.nanargmax(margins))
        margin = float(margins[k])
        worst = margin if worst is None else max(worst, margin)
        if margin > est.budget:
            witnesses.append({
                "q": space.name_of(q), "s": space.name_of(s), "p": space.name_of(p),
                "scale": float(d_qs[k]), "model_angle": float(model[k]), "hinge_angle": est.angle,
            })
    report = scan_quadruples(sub, kappa, "exhaustive" if len(sub) <= EXHAUSTIVE_LIMIT else Strategy("random", 20000, seed))
    passed = not witnesses and report.passed
    reason = "pass" if passed else ("hinge-violation" if witnesses else "quadruple-violation")
    return DomainCertificate(desc, kappa, passed, reason, n, checked, skipped, worst, witnesses, report)
