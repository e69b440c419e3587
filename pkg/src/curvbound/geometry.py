"""Closed-form geodesic spaces used as sample generators.

Every geometry works on coordinate arrays (one point per row) and provides
exact distances, exact points along geodesics (including their extension
past the far endpoint), and seeded sampling of metric balls.
"""
from __future__ import annotations

import math

import numpy as np


class NoGeodesic(RuntimeError):
    """No minimizing geodesic exists, or the choice is ambiguous."""


def _orthonormal_tangent(c: np.ndarray, inner) -> list[np.ndarray]:
    """Gram-Schmidt on coordinate axes projected to the tangent space at ``c``."""
    basis: list[np.ndarray] = []
    norm_c = inner(c, c)
    for axis in np.eye(len(c)):
        v = axis - inner(axis, c) / norm_c * c
        for e in basis:
            v = v - inner(v, e) * e
        n2 = inner(v, v)
        if n2 > 1e-12:
            basis.append(v / math.sqrt(n2))
        if len(basis) == len(c) - 1:
            break
    return basis


class Geometry:
    name = "geometry"
    dim = 2
    complete = True
    sectional_curvature = 0.0

    def contains(self, x: np.ndarray) -> bool:
        return True

    def distance(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(self.pairwise(np.atleast_2d(u), np.atleast_2d(v))[0, 0])

    def pairwise(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def along(self, u: np.ndarray, v: np.ndarray, s) -> np.ndarray:
        """Point(s) at arclength ``s`` from ``u`` on the chosen geodesic toward ``v``."""
        raise NotImplementedError

    def sample_ball(self, center: np.ndarray, radius: float, count: int, rng) -> np.ndarray:
        raise NotImplementedError

    def sample_domain(self, count: int, rng) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        return {}


class Euclidean(Geometry):
    name = "euclidean"

    def __init__(self, size: float = 1.0):
        self.size = size

    def params(self):
        return {"size": self.size}

    def pairwise(self, A, B):
        diff = np.asarray(A, float)[:, None, :] - np.asarray(B, float)[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def along(self, u, v, s):
        u, v = np.asarray(u, float), np.asarray(v, float)
        d = float(np.linalg.norm(v - u))
        if d == 0.0:
            return np.broadcast_to(u, np.shape(s) + u.shape).copy()
        s = np.asarray(s, float)
        return u + s[..., None] * ((v - u) / d)

    def sample_ball(self, center, radius, count, rng):
        r = radius * np.sqrt(rng.random(count))
        phi = rng.uniform(0, 2 * math.pi, count)
        return np.asarray(center, float) + np.c_[r * np.cos(phi), r * np.sin(phi)]

    def sample_domain(self, count, rng):
        return rng.random((count, 2)) * self.size


class PuncturedDisk(Euclidean):
    """Unit-radius disk, optionally without its center."""

    name = "disk"

    def __init__(self, radius: float = 1.0, punctured: bool = True):
        self.radius = radius
        self.complete = not punctured

    def params(self):
        return {"radius": self.radius, "punctured": not self.complete}

    def contains(self, x):
        r = float(np.hypot(*x))
        return r <= self.radius + 1e-12 and (self.complete or r > 0.0)

    def sample_domain(self, count, rng):
        r = self.radius * np.sqrt(rng.uniform(1e-4, 1.0, count))
        phi = rng.uniform(0, 2 * math.pi, count)
        return np.c_[r * np.cos(phi), r * np.sin(phi)]


class Sphere(Geometry):
    """Round sphere of the given radius; points are stored on the sphere in R^3."""

    name = "sphere"
    dim = 3

    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        self.radius = radius
        self.sectional_curvature = 1.0 / radius**2

    def params(self):
        return {"radius": self.radius}

    def _unit(self, x):
        return np.asarray(x, float) / self.radius

    def pairwise(self, A, B):
        a, b = self._unit(A), self._unit(B)
        minus = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
        plus = np.linalg.norm(a[:, None, :] + b[None, :, :], axis=-1)
        # chord-based arcs: accurate for both near and near-antipodal pairs
        ang = np.where(
            minus <= plus,
            2.0 * np.arcsin(np.clip(minus / 2, 0, 1)),
            math.pi - 2.0 * np.arcsin(np.clip(plus / 2, 0, 1)),
        )
        return self.radius * ang

    def along(self, u, v, s):
        a, b = self._unit(u), self._unit(v)
        theta = self.distance(u, v) / self.radius
        s = np.asarray(s, float)
        if theta == 0.0:
            return np.broadcast_to(np.asarray(u, float), s.shape + a.shape).copy()
        if math.pi - theta < 1e-9:
            raise NoGeodesic("antipodal points: minimizing geodesic is not unique")
        t = b - np.dot(a, b) * a
        t /= np.linalg.norm(t)
        ang = s[..., None] / self.radius
        return self.radius * (np.cos(ang) * a + np.sin(ang) * t)

    def sample_ball(self, center, radius, count, rng):
        c = self._unit(center)
        e1, e2 = _orthonormal_tangent(c, np.dot)
        lo = math.cos(min(radius / self.radius, math.pi))
        ang = np.arccos(rng.uniform(lo, 1.0, count))
        phi = rng.uniform(0, 2 * math.pi, count)
        dirs = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
        return self.radius * (np.cos(ang)[:, None] * c + np.sin(ang)[:, None] * dirs)

    def sample_domain(self, count, rng):
        x = rng.normal(size=(count, 3))
        return self.radius * x / np.linalg.norm(x, axis=1, keepdims=True)


class Hemisphere(Sphere):
    """Upper hemisphere z > 0 (open) or z >= 0 (closed) with the sphere's metric."""

    name = "hemisphere"

    def __init__(self, radius: float = 1.0, open_: bool = True):
        super().__init__(radius)
        self.complete = not open_

    def params(self):
        return {"radius": self.radius, "open": not self.complete}

    def contains(self, x):
        z = float(x[2]) / self.radius
        return z > 0.0 if not self.complete else z >= -1e-12

    def sample_domain(self, count, rng):
        x = super().sample_domain(count, rng)
        x[:, 2] = np.abs(x[:, 2])
        return x

    def rim(self, count: int, offset: float = 0.0) -> np.ndarray:
        phi = offset + 2 * math.pi * np.arange(count) / count
        return self.radius * np.c_[np.cos(phi), np.sin(phi), np.zeros(count)]


def _mink(x, y):
    return -x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] + x[..., 2] * y[..., 2]


class Hyperbolic(Geometry):
    """Hyperbolic plane of curvature -1/radius^2 in the hyperboloid model."""

    name = "hyperbolic"
    dim = 3

    def __init__(self, radius: float = 1.0, spread: float = 2.5):
        self.radius = radius
        self.spread = spread
        self.sectional_curvature = -1.0 / radius**2

    def params(self):
        return {"radius": self.radius, "spread": self.spread}

    @staticmethod
    def lift(rho, phi) -> np.ndarray:
        rho, phi = np.asarray(rho, float), np.asarray(phi, float)
        return np.stack([np.cosh(rho), np.sinh(rho) * np.cos(phi), np.sinh(rho) * np.sin(phi)], -1)

    def pairwise(self, A, B):
        diff = np.asarray(A, float)[:, None, :] - np.asarray(B, float)[None, :, :]
        sq = np.clip(_mink(diff, diff), 0.0, None)
        return self.radius * 2.0 * np.arcsinh(np.sqrt(sq) / 2.0)

    def along(self, u, v, s):
        u, v = np.asarray(u, float), np.asarray(v, float)
        d = self.distance(u, v) / self.radius
        s = np.asarray(s, float) / self.radius
        if d == 0.0:
            return np.broadcast_to(u, s.shape + u.shape).copy()
        t = v + _mink(u, v) * u  # tangent component of v at u
        t /= math.sqrt(_mink(t, t))
        return np.cosh(s)[..., None] * u + np.sinh(s)[..., None] * t

    def sample_ball(self, center, radius, count, rng):
        c = np.asarray(center, float)
        e1, e2 = _orthonormal_tangent(c, _mink)
        r = radius / self.radius
        ang = np.arccosh(rng.uniform(1.0, math.cosh(r), count))
        phi = rng.uniform(0, 2 * math.pi, count)
        dirs = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
        return np.cosh(ang)[:, None] * c + np.sinh(ang)[:, None] * dirs

    def sample_domain(self, count, rng):
        rho = np.arccosh(rng.uniform(1.0, math.cosh(self.spread), count))
        phi = rng.uniform(0, 2 * math.pi, count)
        return self.lift(rho, phi)


class Cone(Geometry):
    """Euclidean cone over a circle of length ``total_angle``; points are (rho, phi).

    Geodesics between points at angular separation below pi are straight
    segments in the unrolled sector; otherwise they pass through the apex.
    """

    name = "cone"

    def __init__(self, total_angle: float, punctured: bool = False, inner: float = 0.05, outer: float = 1.0):
        if total_angle <= 0:
            raise ValueError("cone total angle must be positive")
        self.total_angle = float(total_angle)
        self.complete = not punctured
        self.inner = inner
        self.outer = outer

    def params(self):
        return {"total_angle": self.total_angle, "punctured": not self.complete}

    def contains(self, x):
        return self.complete or float(x[0]) > 0.0

    def _separation(self, phi1, phi2):
        """Unsigned angular separation and the direction (+1/-1) realizing it."""
        theta = self.total_angle
        delta = np.mod(np.asarray(phi2, float) - np.asarray(phi1, float), theta)
        forward = delta <= theta / 2
        return np.where(forward, delta, theta - delta), np.where(forward, 1.0, -1.0)

    def pairwise(self, A, B):
        A, B = np.asarray(A, float), np.asarray(B, float)
        r1, r2 = A[:, None, 0], B[None, :, 0]
        sep, _ = self._separation(A[:, None, 1], B[None, :, 1])
        chord = np.sqrt((r1 - r2) ** 2 + 4 * r1 * r2 * np.sin(np.minimum(sep, math.pi) / 2) ** 2)
        return np.where(sep < math.pi, chord, r1 + r2)

    def along(self, u, v, s):
        (r1, p1), (r2, p2) = np.asarray(u, float), np.asarray(v, float)
        s = np.asarray(s, float)
        theta = self.total_angle
        if r1 == 0.0:
            return np.stack([s, np.full_like(s, p2)], -1)
        sep, sign = (float(x) for x in self._separation(p1, p2))
        if r2 == 0.0 or sep >= math.pi:
            # through the apex; past it continue toward v (or opposite u)
            out = p2 if r2 > 0.0 else (p1 + theta / 2) % theta
            inward = s <= r1
            return np.stack([np.where(inward, r1 - s, s - r1), np.where(inward, p1, out)], -1)
        U = np.array([r1, 0.0])
        V = np.array([r2 * math.cos(sep), sign * r2 * math.sin(sep)])
        d = float(np.linalg.norm(V - U))
        if d == 0.0:
            return np.broadcast_to(np.asarray(u, float), s.shape + (2,)).copy()
        P = U + s[..., None] * ((V - U) / d)
        rho = np.hypot(P[..., 0], P[..., 1])
        phi = np.mod(p1 + np.arctan2(P[..., 1], P[..., 0]), theta)
        return np.stack([rho, np.where(rho > 0, phi, 0.0)], -1)

    def _sample_annulus(self, lo, hi, phi_lo, phi_hi, count, rng):
        rho = np.sqrt(rng.uniform(lo**2, hi**2, count))
        phi = np.mod(rng.uniform(phi_lo, phi_hi, count), self.total_angle)
        return np.c_[rho, phi]

    def sample_ball(self, center, radius, count, rng):
        rho_c, phi_c = (float(x) for x in center)
        lo, hi = max(0.0, rho_c - radius), rho_c + radius
        if radius < rho_c:
            half = math.asin(radius / rho_c)
            window = (phi_c - half, phi_c + half)
        else:
            window = (0.0, self.total_angle)
        out = np.empty((0, 2))
        c = np.asarray(center, float)[None, :]
        for _ in range(200):
            cand = self._sample_annulus(lo, hi, *window, max(4 * count, 64), rng)
            keep = cand[self.pairwise(c, cand)[0] <= radius]
            out = np.vstack([out, keep])
            if len(out) >= count:
                break
        return out[:count]

    def sample_domain(self, count, rng):
        return self._sample_annulus(self.inner, self.outer, 0.0, self.total_angle, count, rng)
