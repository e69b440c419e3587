import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def _embed_sphere(kappa, a, b, gamma):
    """Apex and the two hinge ends on the sphere of curvature kappa (radius 1/sqrt(kappa))."""
    R = 1 / math.sqrt(kappa)
    apex = np.array([0.0, 0.0, R])

    def at(t, phi):
        u = t / R
        return R * np.array([math.sin(u) * math.cos(phi), math.sin(u) * math.sin(phi), math.cos(u)])

    return apex, at(a, 0.0), at(b, gamma)


def _embed_hyperboloid(kappa, a, b, gamma):
    R = 1 / math.sqrt(-kappa)
    apex = np.array([0.0, 0.0, R])

    def at(t, phi):
        u = t / R
        return R * np.array([math.sinh(u) * math.cos(phi), math.sinh(u) * math.sin(phi), math.cosh(u)])

    return apex, at(a, 0.0), at(b, gamma)


def coordinate_distance(kappa, x, y):
    """Distance between embedded points, computed from ambient coordinates."""
    if kappa > 0:
        R = 1 / math.sqrt(kappa)
        return R * math.atan2(np.linalg.norm(np.cross(x, y)), float(np.dot(x, y)))
    if kappa < 0:
        R = 1 / math.sqrt(-kappa)
        diff = x - y
        chord2 = diff[0] ** 2 + diff[1] ** 2 - diff[2] ** 2  # Minkowski squared chord
        return 2 * R * math.asinh(math.sqrt(max(chord2, 0.0)) / (2 * R))
    return float(np.linalg.norm(x - y))


def embed_hinge(kappa, a, b, gamma):
    if kappa > 0:
        return _embed_sphere(kappa, a, b, gamma)
    if kappa < 0:
        return _embed_hyperboloid(kappa, a, b, gamma)
    return np.zeros(2), np.array([a, 0.0]), b * np.array([math.cos(gamma), math.sin(gamma)])


def coordinate_geodesic(kappa, x, y, s):
    """Points along the model geodesic from x to y at fractions ``s`` of its length."""
    s = np.asarray(s, float)[:, None]
    if kappa == 0:
        return x + s * (y - x)
    d = coordinate_distance(kappa, x, y)
    if kappa > 0:
        R = 1 / math.sqrt(kappa)
        u = d / R
        return (np.sin((1 - s) * u) * x + np.sin(s * u) * y) / math.sin(u)
    R = 1 / math.sqrt(-kappa)
    u = d / R
    return (np.sinh((1 - s) * u) * x + np.sinh(s * u) * y) / math.sinh(u)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(module.summary_line(n))
