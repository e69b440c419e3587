"""Trigonometry of the constant-curvature model planes M^kappa.

All formulas are written in half-angle / haversine form so that thin and
degenerate triangles keep full relative precision. Scalar functions return
``None`` for an undefined angle or side; the ``*_array`` variants broadcast
over numpy inputs and use NaN instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Admissible slack before a triangle-inequality or diameter violation makes a
# model triangle undefined rather than being clamped to the degenerate limit.
CLAMP_GUARD = 1e-9
ROUNDING_GAP = 8 * np.finfo(float).eps
# below this |kappa| the curvature correction is far under float resolution for
# any representable side, while sqrt(|kappa|) * side would underflow
FLAT_KAPPA = 1e-100


def model_diameter(kappa: float) -> float:
    """Diameter of M^kappa: infinite for kappa <= 0, pi/sqrt(kappa) otherwise."""
    if not math.isfinite(kappa):
        raise ValueError(f"curvature must be finite, got {kappa!r}")
    if kappa <= 0:
        return math.inf
    return math.pi / math.sqrt(kappa)


@dataclass(frozen=True)
class Curvature:
    kappa: float

    def __post_init__(self):
        model_diameter(self.kappa)

    @property
    def model_diameter(self) -> float:
        return model_diameter(self.kappa)


@dataclass(frozen=True)
class ModelTriangle:
    """Comparison triangle with sides ``a``, ``b`` (meeting at the apex) and ``c``.

    For the Key Lemma configuration the apex is w~, ``a = |w~p~|``,
    ``b = |w~q~|`` and ``c = |p~q~|``.
    """

    kappa: float
    a: float
    b: float
    c: float

    @classmethod
    def from_hinge(cls, kappa: float, a: float, b: float, gamma: float) -> "ModelTriangle":
        c = model_side(kappa, a, b, gamma)
        if c is None:
            raise ValueError("hinge data is not admissible in M^kappa")
        return cls(kappa, a, b, c)

    @property
    def defined(self) -> bool:
        return self.apex_angle is not None

    @property
    def status(self) -> str:
        return "defined" if self.defined else "undefined"

    @property
    def apex_angle(self) -> float | None:
        return model_angle(self.kappa, self.a, self.b, self.c)

    def angles(self) -> tuple[float, float, float] | None:
        """Angles at the apex, at the end of ``a`` and at the end of ``b``."""
        apex = self.apex_angle
        if apex is None:
            return None
        at_a = model_angle(self.kappa, self.a, self.c, self.b)
        at_b = model_angle(self.kappa, self.b, self.c, self.a)
        return apex, at_a, at_b


def _effective(kappa: float) -> float:
    return 0.0 if abs(kappa) < FLAT_KAPPA else float(kappa)


def _kappa_array(kappa) -> np.ndarray:
    k = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(k)):
        raise ValueError(f"curvature must be finite, got {kappa!r}")
    return np.where(np.abs(k) < FLAT_KAPPA, 0.0, k)


def _sn(kappa: np.ndarray, rk: np.ndarray, x):
    """Generalized sine, up to the positive factor 1/sqrt(|kappa|)."""
    return np.where(kappa > 0, np.sin(rk * x), np.where(kappa < 0, np.sinh(rk * x), x))


def _gap(v, u, w):
    """(u + w - v) / 2 evaluated in Kahan's order, so near-degenerate gaps stay accurate."""
    hi, lo = np.maximum(u, w), np.minimum(u, w)
    return 0.5 * np.where(v >= hi, lo - (v - hi), lo + (hi - v))


def model_angle_array(kappa, a, b, c) -> np.ndarray:
    """Angle opposite ``c`` in the M^kappa triangle with sides a, b, c.

    Uses tan(gamma/2) = sqrt(sn(s-a) sn(s-b) / (sn(s) sn(s-c))) with s the
    half-perimeter. NaN marks configurations with no model triangle. All
    arguments, ``kappa`` included, broadcast against each other.
    """
    kappa, a, b, c = np.broadcast_arrays(_kappa_array(kappa), *(np.asarray(v, dtype=float) for v in (a, b, c)))
    pos = kappa > 0
    rk = np.sqrt(np.abs(kappa))
    s = 0.5 * (a + b + c)
    guard = CLAMP_GUARD * np.maximum(1.0, s)
    sa, sb, sc = _gap(a, b, c), _gap(b, a, c), _gap(c, a, b)
    bad = (a < 0) | (b < 0) | (c < 0) | (sa < -guard) | (sb < -guard) | (sc < -guard)
    bad |= ~(np.isfinite(a) & np.isfinite(b) & np.isfinite(c))
    with np.errstate(divide="ignore"):
        diam = np.where(pos, math.pi / np.where(pos, rk, 1.0), np.inf)
    bad |= pos & ((a > diam + guard) | (b > diam + guard) | (c > diam + guard) | (s > diam + guard))
    s = np.minimum(s, diam)
    # gaps below the rounding level of the inputs are exact degeneracies; left
    # alone they would turn into spurious angles of order sqrt(machine epsilon)
    snap = ROUNDING_GAP * s
    sa, sb, sc = (np.minimum(np.where(v <= snap, 0.0, v), s) for v in (sa, sb, sc))
    with np.errstate(invalid="ignore", over="ignore"):
        num = np.clip(_sn(kappa, rk, sa) * _sn(kappa, rk, sb), 0.0, None)
        den = np.clip(_sn(kappa, rk, s) * _sn(kappa, rk, sc), 0.0, None)
        gamma = 2.0 * np.arctan2(np.sqrt(num), np.sqrt(den))
    return np.where(bad, np.nan, gamma)


def model_side_array(kappa, a, b, gamma) -> np.ndarray:
    """Side opposite the angle ``gamma`` between sides ``a`` and ``b`` in M^kappa."""
    kappa, a, b, gamma = np.broadcast_arrays(_kappa_array(kappa), *(np.asarray(v, dtype=float) for v in (a, b, gamma)))
    pos, neg = kappa > 0, kappa < 0
    rk = np.sqrt(np.abs(kappa))
    unit = np.where(pos | neg, rk, 1.0)
    bad = (a < 0) | (b < 0) | (gamma < -CLAMP_GUARD) | (gamma > math.pi + CLAMP_GUARD)
    bad |= pos & ((rk * a > math.pi * (1 + CLAMP_GUARD)) | (rk * b > math.pi * (1 + CLAMP_GUARD)))
    gamma = np.clip(gamma, 0.0, math.pi)
    half_sin2 = np.sin(0.5 * gamma) ** 2
    x, y = rk * a, rk * b
    with np.errstate(invalid="ignore", over="ignore"):
        # sphere: haversine form
        xs, ys = np.minimum(x, math.pi), np.minimum(y, math.pi)
        cross = np.sin(xs) * np.sin(ys)
        h = np.sin(0.5 * (xs - ys)) ** 2 + cross * half_sin2
        g = np.cos(0.5 * (xs + ys)) ** 2 + cross * np.cos(0.5 * gamma) ** 2
        c_pos = 2.0 * np.arctan2(np.sqrt(np.clip(h, 0, None)), np.sqrt(np.clip(g, 0, None))) / unit
        # hyperbolic plane: sinh form of the half-chord
        h = np.sinh(0.5 * (x - y)) ** 2 + np.sinh(x) * np.sinh(y) * half_sin2
        c_neg = 2.0 * np.arcsinh(np.sqrt(np.clip(h, 0, None))) / unit
        c_flat = np.sqrt((a - b) ** 2 + 4.0 * a * b * half_sin2)
    c = np.where(pos, c_pos, np.where(neg, c_neg, c_flat))
    return np.where(bad, np.nan, c)


def _scalar(value) -> float | None:
    value = float(value)
    return None if math.isnan(value) else value


def model_angle(kappa: float, a: float, b: float, c: float) -> float | None:
    """Model angle opposite ``c``; ``None`` when no M^kappa triangle exists."""
    return _scalar(model_angle_array(kappa, a, b, c))


def model_side(kappa: float, a: float, b: float, gamma: float) -> float | None:
    """Law of cosines in M^kappa; ``None`` when the hinge does not fit (kappa > 0)."""
    return _scalar(model_side_array(kappa, a, b, gamma))


@dataclass(frozen=True)
class SideFoot:
    distance: float  # R, the distance from the apex to the opposite side
    position: float  # distance from the end of side ``a`` to the foot point
    side: float  # length of the opposite side


def foot_on_opposite_side(tri: ModelTriangle) -> SideFoot:
    """Nearest point of the opposite side to the apex of ``tri``."""
    if not tri.defined:
        raise ValueError("cannot measure distances in an undefined model triangle")
    kappa, a, b, side = _effective(tri.kappa), tri.a, tri.b, tri.c
    if side == 0.0:
        return SideFoot(min(a, b), 0.0, 0.0)
    alpha = model_angle(kappa, a, side, b)
    if alpha is None:
        raise ValueError("model triangle angles are not computable")
    # perpendicular foot on the geodesic line through the end of ``a``
    if kappa > 0:
        k = math.sqrt(kappa)
        t = math.atan2(math.sin(k * a) * math.cos(alpha), math.cos(k * a)) / k
    elif kappa < 0:
        k = math.sqrt(-kappa)
        t = math.atanh(math.tanh(k * a) * math.cos(alpha)) / k
    else:
        t = a * math.cos(alpha)
    best = min((a, 0.0), (b, side))
    if 0.0 < t < side:
        d = model_side(kappa, a, t, alpha)
        if d is not None and d < best[0]:
            best = (d, t)
    return SideFoot(best[0], best[1], side)


def dist_to_opposite_side(tri: ModelTriangle) -> float:
    return foot_on_opposite_side(tri).distance


@dataclass(frozen=True)
class Split:
    t: float
    angle_p: float
    angle_q: float
    feasible: bool


def alexandrov_lemma_split(
    kappa: float,
    hinge_sides: tuple[float, float],
    target_angles: tuple[float, float],
    opposite: float,
    dist_w_at=None,
    tol: float = 1e-10,
    slack: float = 1e-9,
) -> Split:
    """Locate a_delta on [p_delta q_delta] with both comparison angles under target.

    ``t`` parametrizes the side proportionally, t=0 at p_delta. By default
    ``|w a(t)|`` is measured in the model triangle on the three given sides;
    pass ``dist_w_at(t)`` to use distances from an actual space instead.
    The split balances the slacks ``target - angle`` on both sides, found by
    bisection on the (monotone) slack difference.
    """
    wp, wq = hinge_sides
    theta_p, theta_q = target_angles
    if opposite <= 0.0:
        return Split(0.0, 0.0, 0.0, True)
    if dist_w_at is None:
        at_p = model_angle(kappa, wp, opposite, wq)
        if at_p is None:
            raise ValueError("hinge sides and opposite side do not form a model triangle")

        def dist_w_at(t):
            return model_side(kappa, wp, t * opposite, at_p)

    def angles(t):
        wa = dist_w_at(t)
        ap = model_angle(kappa, wp, wa, t * opposite) if wa is not None else None
        aq = model_angle(kappa, wq, wa, (1.0 - t) * opposite) if wa is not None else None
        return (math.pi if ap is None else ap), (math.pi if aq is None else aq)

    def gap(t):
        ap, aq = angles(t)
        return (theta_p - ap) - (theta_q - aq)

    lo, hi = 0.0, 1.0
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo <= 0.0:
        t = 0.0
    elif g_hi >= 0.0:
        t = 1.0
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if gap(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
    ap, aq = angles(t)
    return Split(t, ap, aq, ap <= theta_p + slack and aq <= theta_q + slack)
