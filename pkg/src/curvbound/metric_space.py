"""Finite samples of geodesic spaces and their discrete geodesics."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .geometry import Cone, Euclidean, Geometry, Hemisphere, Hyperbolic, NoGeodesic, PuncturedDisk, Sphere

__all__ = [
    "Ball",
    "DiscreteGeodesic",
    "InvalidSpace",
    "MatrixValidationError",
    "MetricSpaceSample",
    "NoGeodesic",
    "SpaceSpec",
    "completion",
    "generate_space",
    "geodesic",
    "load_distance_matrix",
    "parse_space_spec",
    "validate_distances",
]

ANALYTIC_TOL = 1e-9


class InvalidSpace(ValueError):
    pass


class MatrixValidationError(InvalidSpace):
    def __init__(self, failures: list[tuple[str, str]], witness: tuple | None = None):
        self.failures = failures
        self.witness = witness
        super().__init__("; ".join(f"{name}: {detail}" for name, detail in failures))


# --------------------------------------------------------------------------
# space specifications


def parse_number(text) -> float:
    """Float, or a multiple of pi written like ``3pi/2``, ``pi``, ``0.5pi``."""
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip().lower().replace("π", "pi")
    m = re.fullmatch(r"([0-9.eE+-]*)\*?pi(?:/([0-9.eE+-]+))?", text)
    if m:
        coef = float(m.group(1)) if m.group(1) not in ("", "+") else (-1.0 if m.group(1) == "-" else 1.0)
        return coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(text)


_ALIASES = {
    "r": "radius",
    "angle": "total_angle",
    "sub": "subdivisions",
    "edges": "edge_list",
}
_FLAGS = {
    "open": ("variant", "incomplete"),
    "incomplete": ("variant", "incomplete"),
    "punctured": ("variant", "incomplete"),
    "closed": ("variant", "complete"),
    "complete": ("variant", "complete"),
}
_TYPES = {"plane": "euclidean", "euclidean": "euclidean", "sphere": "sphere", "hemisphere": "hemisphere",
          "hyperbolic": "hyperbolic", "cone": "cone", "disk": "disk", "tripod": "tripod", "graph": "graph"}


@dataclass(frozen=True)
class SpaceSpec:
    type: str
    n: int = 20
    seed: int = 0
    variant: str = "complete"
    radius: float = 1.0
    total_angle: float | None = None
    edge_list: tuple = ()
    subdivisions: int = 4
    spread: float = 2.5
    forced: str | None = None

    def to_dict(self) -> dict:
        out = {"type": self.type, "n": self.n, "seed": self.seed, "variant": self.variant}
        if self.type in ("sphere", "hemisphere", "hyperbolic", "disk"):
            out["radius"] = self.radius
        if self.type == "hyperbolic":
            out["spread"] = self.spread
        if self.type == "cone":
            out["total_angle"] = self.total_angle
        if self.type in ("tripod", "graph"):
            out["subdivisions"] = self.subdivisions
            out.pop("n"), out.pop("seed")
        if self.type == "graph":
            out["edge_list"] = [list(e) for e in self.edge_list]
        if self.forced:
            out["forced"] = self.forced
        return out

    def label(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def parse_space_spec(spec) -> SpaceSpec:
    """Build a SpaceSpec from a SpaceSpec, a mapping, a JSON path or a string.

    String form: ``type:key=value,flag,...``, for example
    ``sphere:r=1,n=20,seed=7`` or ``hemisphere:open,r=1,n=40,seed=3``.
    """
    if isinstance(spec, SpaceSpec):
        return spec
    if isinstance(spec, (str, Path)) and Path(str(spec)).suffix == ".json" and Path(str(spec)).exists():
        spec = json.loads(Path(spec).read_text(encoding="utf-8"))
    if isinstance(spec, str):
        kind, _, rest = spec.partition(":")
        fields: dict = {"type": kind.strip()}
        for item in filter(None, (x.strip() for x in rest.split(","))):
            if "=" in item:
                key, value = (x.strip() for x in item.split("=", 1))
                fields[_ALIASES.get(key, key)] = value
            elif item in _FLAGS:
                key, value = _FLAGS[item]
                fields[key] = value
            else:
                raise InvalidSpace(f"unknown space flag {item!r}")
        spec = fields
    if not isinstance(spec, dict):
        raise InvalidSpace(f"cannot interpret space spec {spec!r}")
    fields = {_ALIASES.get(k, k): v for k, v in spec.items()}
    kind = _TYPES.get(str(fields.pop("type", "")).lower())
    if kind is None:
        raise InvalidSpace(f"unknown space type in {spec!r}")
    unknown = set(fields) - set(SpaceSpec.__dataclass_fields__)
    if unknown:
        raise InvalidSpace(f"unknown space fields {sorted(unknown)}")
    try:
        for key in ("n", "seed", "subdivisions"):
            if key in fields:
                fields[key] = int(fields[key])
        for key in ("radius", "total_angle", "spread"):
            if key in fields and fields[key] is not None:
                fields[key] = parse_number(fields[key])
    except ValueError as exc:
        raise InvalidSpace(str(exc)) from None
    if "edge_list" in fields:
        fields["edge_list"] = tuple((str(u), str(v), float(w)) for u, v, w in fields["edge_list"])
    out = SpaceSpec(type=kind, **fields)
    if out.variant not in ("complete", "incomplete"):
        raise InvalidSpace(f"variant must be complete or incomplete, got {out.variant!r}")
    return out


# --------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class Ball:
    center: object  # point id, index or coordinates
    radius: float


@dataclass(frozen=True, eq=False)
class MetricSpaceSample:
    ids: tuple[str, ...]
    distances: np.ndarray
    backend: str
    coords: np.ndarray | None = None
    geometry: Geometry | None = None
    completion_flags: tuple[bool, ...] = ()
    spec: SpaceSpec | None = None
    tolerance: float = ANALYTIC_TOL
    adjacency: csr_matrix | None = None
    epsilon: float | None = None
    error_bound: float = 0.0
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.distances.setflags(write=False)
        if self.coords is not None:
            self.coords.setflags(write=False)
        if not self.completion_flags:
            object.__setattr__(self, "completion_flags", (False,) * len(self.ids))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.ids)})

    def __len__(self):
        return len(self.ids)

    @property
    def analytic(self) -> bool:
        return self.geometry is not None

    @property
    def label(self) -> str:
        return self.spec.label() if self.spec is not None else f"{self.backend}:{len(self)}"

    # points are sample indices (discrete backends) or coordinate rows (analytic)
    def index(self, x) -> int:
        if isinstance(x, (int, np.integer)):
            return int(x)
        if isinstance(x, str):
            try:
                return self._index[x]
            except KeyError:
                raise InvalidSpace(f"unknown point id {x!r}") from None
        raise InvalidSpace(f"point {x!r} is not a sample point")

    def resolve(self, x):
        if self.analytic:
            if isinstance(x, (str, int, np.integer)):
                return np.array(self.coords[self.index(x)])
            return np.asarray(x, float)
        return self.index(x)

    def name_of(self, x) -> str:
        if isinstance(x, (str, int, np.integer)):
            return self.ids[self.index(x)]
        return "@" + ",".join(f"{v:.12g}" for v in np.asarray(x, float))

    def dist(self, x, y) -> float:
        if self.analytic:
            return self.geometry.distance(self.resolve(x), self.resolve(y))
        return float(self.distances[self.index(x), self.index(y)])

    def dists(self, xs, ys) -> np.ndarray:
        if self.analytic:
            A = np.array([self.resolve(x) for x in xs])
            B = np.array([self.resolve(y) for y in ys])
            return self.geometry.pairwise(A, B)
        return self.distances[np.ix_([self.index(x) for x in xs], [self.index(y) for y in ys])]

    def contains(self, x) -> bool:
        if self.analytic:
            return self.geometry.contains(self.resolve(x))
        return True

    def _graph_distances(self) -> np.ndarray:
        cache = self.__dict__.setdefault("_graph_cache", {})
        if "D" not in cache:
            cache["D"] = self.distances if self.backend == "graph" else shortest_path(self.adjacency, directed=False)
        return cache["D"]

    def with_points(self, coords: np.ndarray, prefix: str = "r") -> "MetricSpaceSample":
        """Analytic sample on the same geometry with the given coordinates."""
        coords = np.asarray(coords, float)
        return MetricSpaceSample(
            ids=tuple(f"{prefix}{i}" for i in range(len(coords))),
            distances=self.geometry.pairwise(coords, coords),
            backend=self.backend,
            coords=coords,
            geometry=self.geometry,
            spec=self.spec,
        )

    def subset(self, points) -> "MetricSpaceSample":
        idx = [self.index(p) for p in points]
        return MetricSpaceSample(
            ids=tuple(self.ids[i] for i in idx),
            distances=np.array(self.distances[np.ix_(idx, idx)]),
            backend=self.backend,
            coords=None if self.coords is None else np.array(self.coords[idx]),
            geometry=self.geometry,
            completion_flags=tuple(self.completion_flags[i] for i in idx),
            spec=self.spec,
            tolerance=self.tolerance,
        )

    def region_points(self, balls, count: int = 12, seed: int = 0, include_centers: bool = True):
        """Points of the union of ``balls``: fresh seeded samples for analytic
        backends, member sample points otherwise."""
        balls = [balls] if isinstance(balls, Ball) else list(balls)
        if not self.analytic:
            centers = [self.index(b.center) for b in balls]
            inside = np.zeros(len(self), bool)
            for c, b in zip(centers, balls):
                inside |= self.distances[c] <= b.radius + self.tolerance
            return [int(i) for i in np.flatnonzero(inside)]
        rng = np.random.default_rng(_stable_seed(seed, [self.resolve(b.center) for b in balls], [b.radius for b in balls]))
        share = [count // len(balls) + (i < count % len(balls)) for i in range(len(balls))]
        pts = []
        for b, k in zip(balls, share):
            c = self.resolve(b.center)
            if include_centers and self.geometry.contains(c):
                pts.append(c)
            cand = self.geometry.sample_ball(c, b.radius, 3 * k + 8, rng)
            cand = [x for x in cand if self.geometry.contains(x)]
            pts.extend(cand[: max(k - include_centers, 0)])
        return pts


def _stable_seed(seed, arrays, extra) -> list[int]:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.round(np.asarray(a, float), 12).tobytes())
    h.update(np.asarray(extra, float).tobytes())
    return [int(seed), int.from_bytes(h.digest()[:8], "little")]


def validate_distances(D: np.ndarray, tol: float = ANALYTIC_TOL, ids=None) -> list[tuple[str, str]]:
    """List of (constraint, detail) failures; empty when D is a valid metric."""
    failures = []
    D = np.asarray(D, float)
    names = ids or [str(i) for i in range(len(D))]
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        return [("square", f"matrix shape {D.shape} is not square")]
    if not np.all(np.isfinite(D)):
        failures.append(("finite", "matrix has non-finite entries"))
        return failures
    if np.any(D < -tol):
        i, j = np.argwhere(D < -tol)[0]
        failures.append(("nonnegative", f"d({names[i]},{names[j]}) = {D[i, j]}"))
    asym = np.abs(D - D.T)
    if np.any(asym > tol):
        i, j = np.argwhere(asym > tol)[0]
        failures.append(("symmetric", f"d({names[i]},{names[j]}) != d({names[j]},{names[i]})"))
    if np.any(np.abs(np.diag(D)) > tol):
        i = int(np.flatnonzero(np.abs(np.diag(D)) > tol)[0])
        failures.append(("zero-diagonal", f"d({names[i]},{names[i]}) = {D[i, i]}"))
    off = D + np.eye(len(D))
    if np.any(off <= 0):
        i, j = np.argwhere(off <= 0)[0]
        failures.append(("positive", f"distinct points {names[i]}, {names[j]} at distance 0"))
    witness = triangle_witness(D, tol)
    if witness is not None:
        i, j, k = witness
        failures.append(("triangle", f"d({names[i]},{names[k]}) > d({names[i]},{names[j]}) + d({names[j]},{names[k]})"))
    return failures


def triangle_witness(D: np.ndarray, tol: float) -> tuple[int, int, int] | None:
    """First (x, y, z) in lexicographic order with d(x,z) > d(x,y) + d(y,z) + tol."""
    best = None
    for j in range(len(D)):
        viol = D > D[:, j][:, None] + D[j, :][None, :] + tol
        if viol.any():
            i, k = np.argwhere(viol)[0]
            cand = (int(i), j, int(k))
            if best is None or cand < best:
                best = cand
    return best


def _named(witness, ids):
    return None if witness is None else tuple(ids[i] for i in witness)


def _check(sample: MetricSpaceSample) -> MetricSpaceSample:
    failures = validate_distances(sample.distances, sample.tolerance, list(sample.ids))
    if failures:
        raise MatrixValidationError(failures, _named(triangle_witness(sample.distances, sample.tolerance), sample.ids))
    return sample


def load_distance_matrix(source, tolerance: float = ANALYTIC_TOL, epsilon: float | None = None) -> MetricSpaceSample:
    """Read a CSV distance matrix (header row of point ids, then the body)."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise MatrixValidationError([("parse", "need a header row and at least one data row")])
    ids = [c.strip() for c in rows[0]]
    try:
        D = np.array([[float(c) for c in r] for r in rows[1:]], float)
    except ValueError as exc:
        raise MatrixValidationError([("parse", str(exc))]) from None
    if D.ndim != 2 or D.shape != (len(ids), len(ids)):
        raise MatrixValidationError([("square", f"{len(ids)} ids but body shape {D.shape}")])
    if len(set(ids)) != len(ids):
        raise MatrixValidationError([("ids", "point identifiers are not unique")])
    failures = validate_distances(D, tolerance, ids)
    if failures:
        raise MatrixValidationError(failures, _named(triangle_witness(D, tolerance), ids))
    return _matrix_sample(tuple(ids), D, tolerance, epsilon)


def _matrix_sample(ids, D, tolerance, epsilon=None) -> MetricSpaceSample:
    D = np.asarray(D, float)
    if epsilon is None:
        nn = np.where(np.eye(len(D), dtype=bool), np.inf, D).min(axis=1)
        epsilon = 2.0 * float(np.median(nn))
    W = np.where((D <= epsilon * (1 + 1e-12)) & ~np.eye(len(D), dtype=bool), D, 0.0)
    return MetricSpaceSample(
        ids=ids, distances=D, backend="matrix-only", tolerance=tolerance,
        adjacency=csr_matrix(W), epsilon=epsilon,
    )


def to_csv(sample: MetricSpaceSample) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(sample.ids)
    for row in sample.distances:
        w.writerow([repr(float(v)) for v in row])
    return out.getvalue()


# --------------------------------------------------------------------------
# generators


def _analytic(geom: Geometry, coords, spec, prefix="x", flags=None) -> MetricSpaceSample:
    coords = np.asarray(coords, float)
    ids = tuple(f"{prefix}{i}" for i in range(len(coords)))
    return _check(MetricSpaceSample(
        ids=ids, distances=geom.pairwise(coords, coords), backend=geom.name, coords=coords,
        geometry=geom, spec=spec, completion_flags=flags or (),
    ))


def _forced_points(spec: SpaceSpec, dim: int) -> np.ndarray:
    if spec.forced in (None, ""):
        return np.empty((0, dim))
    if spec.forced == "poles" and spec.type == "sphere":
        pts = [(0, 0, 1), (0, 0, -1), (1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)]
        return spec.radius * np.array(pts, float)
    if spec.forced == "collinear" and spec.type == "euclidean":
        return np.array([[0.1, 0.1], [0.5, 0.1], [0.9, 0.1], [0.5, 0.8]])
    raise InvalidSpace(f"forced configuration {spec.forced!r} not available for {spec.type}")


def _graph_sample(edges, subdivisions: int, spec) -> MetricSpaceSample:
    if subdivisions < 1:
        raise InvalidSpace("subdivisions must be >= 1")
    names: dict[str, int] = {}
    links = []

    def node(name):
        return names.setdefault(name, len(names))

    for u, v, w in edges:
        if w <= 0:
            raise InvalidSpace(f"edge {u}-{v} has non-positive length")
        chain = [u] + [f"{u}~{v}:{k}" for k in range(1, subdivisions)] + [v]
        for a, b in zip(chain, chain[1:]):
            links.append((node(a), node(b), w / subdivisions))
    n = len(names)
    W = np.zeros((n, n))
    for i, j, w in links:
        W[i, j] = W[j, i] = w if W[i, j] == 0 else min(W[i, j], w)
    adjacency = csr_matrix(W)
    D = shortest_path(adjacency, directed=False)
    if not np.all(np.isfinite(D)):
        raise InvalidSpace("graph is disconnected")
    ids = tuple(sorted(names, key=names.get))
    return _check(MetricSpaceSample(ids=ids, distances=D, backend="graph", adjacency=adjacency, spec=spec))


def tripod_edges(leg: float = 1.0):
    return [("hub", f"leaf{i}", leg) for i in range(3)]


def generate_space(spec) -> MetricSpaceSample:
    """Seeded sample of an analytic or graph space described by ``spec``."""
    spec = parse_space_spec(spec)
    if spec.type in ("tripod", "graph"):
        edges = tripod_edges() if spec.type == "tripod" else list(spec.edge_list)
        if not edges:
            raise InvalidSpace("graph spaces need an edge list")
        return _graph_sample(edges, spec.subdivisions, spec)
    if spec.n < 4:
        raise InvalidSpace("need at least 4 points")
    if spec.radius <= 0:
        raise InvalidSpace("radius must be positive")
    incomplete = spec.variant == "incomplete"
    if spec.type == "euclidean":
        geom = Euclidean(spec.radius)
    elif spec.type == "sphere":
        if incomplete:
            raise InvalidSpace("the sphere has no incomplete variant; use hemisphere:open")
        geom = Sphere(spec.radius)
    elif spec.type == "hemisphere":
        geom = Hemisphere(spec.radius, open_=incomplete)
    elif spec.type == "hyperbolic":
        geom = Hyperbolic(spec.radius, spec.spread)
    elif spec.type == "disk":
        geom = PuncturedDisk(spec.radius, punctured=incomplete)
    elif spec.type == "cone":
        if spec.total_angle is None or spec.total_angle <= 0:
            raise InvalidSpace("cone needs total_angle > 0")
        geom = Cone(spec.total_angle, punctured=incomplete)
    else:  # pragma: no cover - guarded by parse_space_spec
        raise InvalidSpace(spec.type)
    rng = np.random.default_rng(spec.seed)
    forced = _forced_points(spec, geom.dim)
    coords = np.vstack([forced, geom.sample_domain(max(spec.n - len(forced), 0), rng)])[: spec.n]
    if spec.type == "hemisphere" and incomplete:
        coords[:, 2] = np.where(coords[:, 2] <= 1e-9 * spec.radius, 1e-6 * spec.radius, coords[:, 2])
        coords = spec.radius * coords / np.linalg.norm(coords, axis=1, keepdims=True)
    return _analytic(geom, coords, spec)


def completion(space: MetricSpaceSample) -> MetricSpaceSample:
    """Add the analytically known limit points missing from an incomplete sample."""
    if not space.analytic:
        raise InvalidSpace("completion is only computable for analytic backends")
    geom = space.geometry
    if geom.complete:
        return space
    extra_ids: list[str] = []
    if isinstance(geom, Hemisphere):
        new_geom = Hemisphere(geom.radius, open_=False)
        spacing = geom.radius * math.sqrt(2 * math.pi / max(len(space), 1))
        count = max(8, int(round(2 * math.pi * geom.radius / spacing)))
        count += 1 - count % 2  # odd, so no two rim points are antipodal
        offset = float(np.random.default_rng(space.spec.seed if space.spec else 0).uniform(0, 2 * math.pi / count))
        extra = geom.rim(count, offset)
        extra_ids = [f"rim{i}" for i in range(count)]
    elif isinstance(geom, Cone):
        new_geom = Cone(geom.total_angle, punctured=False, inner=geom.inner, outer=geom.outer)
        extra = np.array([[0.0, 0.0]])
        extra_ids = ["apex"]
    elif isinstance(geom, PuncturedDisk):
        new_geom = PuncturedDisk(geom.radius, punctured=False)
        extra = np.array([[0.0, 0.0]])
        extra_ids = ["center"]
    else:  # pragma: no cover
        raise InvalidSpace(f"no completion known for {geom.name}")
    coords = np.vstack([space.coords, extra])
    spec = replace(space.spec, variant="complete") if space.spec is not None else None
    return _check(MetricSpaceSample(
        ids=space.ids + tuple(extra_ids),
        distances=new_geom.pairwise(coords, coords),
        backend=new_geom.name,
        coords=coords,
        geometry=new_geom,
        completion_flags=tuple(space.completion_flags) + (True,) * len(extra_ids),
        spec=spec,
    ))


# --------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True, eq=False)
class DiscreteGeodesic:
    """Sampled minimizing geodesic [xy].

    Analytic backends evaluate ``point_at`` exactly on the continuous geodesic;
    discrete backends snap to the nearest vertex of the path.
    """

    space: MetricSpaceSample
    start: object
    end: object
    vertices: tuple
    params: np.ndarray
    error_bound: float
    length: float
    offset: float = 0.0  # parameter of ``start`` on the parent geodesic, for restrictions

    @property
    def exact(self) -> bool:
        return self.space.analytic

    def point_at(self, s: float):
        s = min(max(float(s), 0.0), self.length)
        if self.exact:
            return self.space.geometry.along(self.start, self.end, s)
        k = int(np.argmin(np.abs(self.params - s)))
        return self.vertices[k]

    def points_at(self, ss) -> list:
        if self.exact:
            return list(self.space.geometry.along(self.start, self.end, np.clip(np.asarray(ss, float), 0, self.length)))
        return [self.point_at(s) for s in ss]

    def restrict(self, s0: float, s1: float) -> "DiscreteGeodesic":
        """Sub-geodesic between parameters s0 < s1 (measured from ``start``)."""
        if self.exact:
            a, b = self.point_at(s0), self.point_at(s1)
            return geodesic(self.space, a, b, resolution=self._resolution())
        i = int(np.argmin(np.abs(self.params - s0)))
        j = int(np.argmin(np.abs(self.params - s1)))
        if j <= i:
            raise InvalidSpace("restriction needs s0 < s1 at distinct vertices")
        verts = self.vertices[i:j + 1]
        params = self.params[i:j + 1] - self.params[i]
        return DiscreteGeodesic(self.space, verts[0], verts[-1], verts, params, self.error_bound,
                                self.space.dist(verts[0], verts[-1]), self.offset + self.params[i])

    def reverse(self) -> "DiscreteGeodesic":
        if self.exact:
            return geodesic(self.space, self.end, self.start, resolution=self._resolution())
        params = self.params[-1] - self.params[::-1]
        return DiscreteGeodesic(self.space, self.end, self.start, self.vertices[::-1], params,
                                self.error_bound, self.length)

    def interior(self) -> list:
        return list(self.vertices[1:-1])

    def _resolution(self) -> float:
        return float(np.max(np.diff(self.params))) if len(self.params) > 1 else self.length or 1.0


def _graph_path(space: MetricSpaceSample, x: int, y: int) -> list[int]:
    """Shortest path with lexicographic tie-breaking, canonical in orientation."""
    flip = space.ids[x] > space.ids[y]
    if flip:
        x, y = y, x
    G = space.adjacency
    D = space._graph_distances()
    if not math.isfinite(D[x, y]):
        raise NoGeodesic(f"{space.ids[x]} and {space.ids[y]} are disconnected in the neighborhood graph")
    path = [x]
    tol = 1e-9 * max(1.0, D[x, y])
    while path[-1] != y:
        u = path[-1]
        row = G.getrow(u)
        options = sorted(
            (space.ids[v], v) for v, w in zip(row.indices, row.data)
            if abs(w + D[v, y] - D[u, y]) <= tol and D[v, y] < D[u, y]
        )
        path.append(options[0][1])
    return path[::-1] if flip else path


def geodesic(space: MetricSpaceSample, x, y, resolution: float | None = None) -> DiscreteGeodesic:
    """Deterministic minimizing geodesic from x to y."""
    if space.analytic:
        u, v = space.resolve(x), space.resolve(y)
        length = space.geometry.distance(u, v)
        if length == 0.0:
            raise InvalidSpace("geodesic endpoints coincide")
        if resolution is None:
            resolution = length / 64
        if resolution <= 0:
            raise InvalidSpace("resolution must be positive")
        k = max(1, int(math.ceil(length / resolution)))
        params = np.linspace(0.0, length, k + 1)
        verts = space.geometry.along(u, v, params)  # raises NoGeodesic when ambiguous
        verts[0], verts[-1] = u, v
        return DiscreteGeodesic(space, u, v, tuple(verts), params, 0.0, length)
    i, j = space.index(x), space.index(y)
    if i == j:
        raise InvalidSpace("geodesic endpoints coincide")
    if space.adjacency is None:
        raise InvalidSpace("sample has no neighborhood graph")
    path = _graph_path(space, i, j)
    steps = [space.distances[a, b] for a, b in zip(path, path[1:])]
    params = np.concatenate([[0.0], np.cumsum(steps)])
    length = float(space.distances[i, j])
    return DiscreteGeodesic(space, i, j, tuple(path), params, max(0.0, float(params[-1]) - length), length)
