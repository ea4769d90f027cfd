"""Problem-instance data model: road network, RSU catalog, application
profiles, max-users table, file I/O, traffic-pattern perturbation, and a
synthetic instance generator.

A scenario is a single self-contained JSON document (see ``save_scenario``)
with top-level keys ``points``, ``segments``, ``rsu_types``, ``application``,
``mu_table`` and ``meta``. Units are fixed: meters, meters/second, USD,
vehicles per period. The traffic period itself is an abstract unit; QoS is
reported in vehicle-seconds per period.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .validation import SchemaError, ValidationError, check_choice, check_int

EARTH_RADIUS_M = 6_371_000.0

TRAFFIC_PATTERNS = ("normal", "low", "high")
APPLICATION_IDS = ("data", "voice", "video")

# Per-pattern multiplicative ranges applied to each segment's vehicle count.
_PATTERN_RANGES = {"low": (0.80, 1.00), "high": (1.00, 1.20)}


@dataclass(frozen=True)
class Point:
    id: int
    lat: float
    lon: float


@dataclass(frozen=True)
class Segment:
    id: int
    endpoint_a: int
    endpoint_b: int
    length_m: float
    vehicles_per_period: float
    avg_speed_mps: float
    # Real roads curve; set this to skip the straight-line length check.
    length_override: bool = False


@dataclass(frozen=True)
class RoadNetwork:
    points: tuple[Point, ...]
    segments: tuple[Segment, ...]

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    def point_by_id(self) -> dict[int, Point]:
        return {p.id: p for p in self.points}


@dataclass(frozen=True)
class RsuType:
    id: int
    label: str
    gain_dbi: float
    cost_usd: float
    err_m: float


@dataclass(frozen=True)
class ApplicationProfile:
    id: str
    packet_bytes: int
    flow_kbps: float
    e2ed_ms_max: float
    pdr_min_pct: float


@dataclass(frozen=True)
class MaxUsersTable:
    """Max simultaneous vehicles per (RSU type id, application id)."""

    entries: Mapping[tuple[int, str], int]

    def lookup(self, rsu_type: int, application: str) -> int:
        try:
            return self.entries[(rsu_type, application)]
        except KeyError:
            raise ValidationError(
                f"MU table incomplete: missing entry for (t{rsu_type}, {application})"
            ) from None


@dataclass(frozen=True)
class Scenario:
    network: RoadNetwork
    catalog: tuple[RsuType, ...]
    application: ApplicationProfile
    mu: MaxUsersTable
    traffic_pattern: str = "normal"
    seed: int = 0
    meta: Mapping[str, object] = field(default_factory=dict)

    @property
    def n_segments(self) -> int:
        return self.network.n_segments

    @property
    def n_types(self) -> int:
        return len(self.catalog)


# ---------------------------------------------------------------------------
# Bundled catalog data
# ---------------------------------------------------------------------------


def default_catalog() -> tuple[RsuType, ...]:
    """The three omnidirectional RSU models used throughout: unit cost in USD
    and measured effective radio range in meters."""
    return (
        RsuType(1, "omni-6dbi", 6.0, 121.70, 243.12),
        RsuType(2, "omni-9dbi", 9.0, 139.20, 338.70),
        RsuType(3, "omni-12dbi", 12.0, 227.50, 503.93),
    )


def default_applications() -> dict[str, ApplicationProfile]:
    """QoS profiles for the three reference VANET applications."""
    return {
        "data": ApplicationProfile("data", 238, 19.0, 100.0, 100.0),
        "voice": ApplicationProfile("voice", 238, 25.0, 400.0, 16.0),
        "video": ApplicationProfile("video", 791, 384.0, 400.0, 8.33),
    }


def default_mu_table() -> MaxUsersTable:
    """Vehicles each RSU type can serve while meeting each application's
    PDR/E2ED requirements."""
    return MaxUsersTable(
        {
            (1, "data"): 45, (1, "voice"): 34, (1, "video"): 31,
            (2, "data"): 45, (2, "voice"): 44, (2, "video"): 34,
            (3, "data"): 46, (3, "voice"): 52, (3, "video"): 37,
        }
    )


def build_scenario(
    network: RoadNetwork,
    application: str = "video",
    traffic_pattern: str = "normal",
    seed: int = 0,
    meta: Mapping[str, object] | None = None,
) -> Scenario:
    """Assemble a Scenario around `network` using the bundled catalog and MU
    table."""
    check_choice("application", application, APPLICATION_IDS)
    scenario = Scenario(
        network=network,
        catalog=default_catalog(),
        application=default_applications()[application],
        mu=default_mu_table(),
        traffic_pattern=traffic_pattern,
        seed=seed,
        meta=dict(meta or {}),
    )
    validate_scenario(scenario)
    return scenario


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def validate_network(network: RoadNetwork) -> None:
    seen_pts: set[int] = set()
    for p in network.points:
        if p.id in seen_pts:
            raise ValidationError(f"points: duplicate point id {p.id}")
        seen_pts.add(p.id)
        if not -90.0 <= p.lat <= 90.0:
            raise ValidationError(f"points[{p.id}].lat out of range: {p.lat}")
        if not -180.0 <= p.lon <= 180.0:
            raise ValidationError(f"points[{p.id}].lon out of range: {p.lon}")

    by_id = network.point_by_id()
    seen_segs: set[int] = set()
    seen_pairs: set[tuple[int, int]] = set()
    for s in network.segments:
        if s.id in seen_segs:
            raise ValidationError(f"segments: duplicate segment id {s.id}")
        seen_segs.add(s.id)
        for end in (s.endpoint_a, s.endpoint_b):
            if end not in by_id:
                raise ValidationError(
                    f"segments[{s.id}]: endpoint {end} references a missing point"
                )
        if s.endpoint_a == s.endpoint_b:
            raise ValidationError(f"segments[{s.id}]: endpoints must differ")
        pair = (min(s.endpoint_a, s.endpoint_b), max(s.endpoint_a, s.endpoint_b))
        if pair in seen_pairs:
            raise ValidationError(f"segments[{s.id}]: duplicate endpoint pair {pair}")
        seen_pairs.add(pair)
        if not s.length_m > 0:
            raise ValidationError(f"segments[{s.id}].length_m must be > 0")
        if s.vehicles_per_period < 0:
            raise ValidationError(f"segments[{s.id}].vehicles_per_period must be >= 0")
        if not s.avg_speed_mps > 0:
            raise ValidationError(f"segments[{s.id}].avg_speed_mps must be > 0")
        if not s.length_override:
            a, b = by_id[s.endpoint_a], by_id[s.endpoint_b]
            geo = haversine_m(a.lat, a.lon, b.lat, b.lon)
            if geo <= 0 or abs(s.length_m - geo) > 0.01 * geo:
                raise ValidationError(
                    f"segments[{s.id}].length_m={s.length_m:.2f} deviates more than"
                    f" 1% from endpoint distance {geo:.2f} m (set length_override"
                    " for curved roads)"
                )


def validate_scenario(scenario: Scenario) -> None:
    validate_network(scenario.network)
    if not scenario.catalog:
        raise ValidationError("catalog must be non-empty")
    for i, t in enumerate(scenario.catalog, start=1):
        if t.id != i:
            raise ValidationError(f"rsu_types: ids must be contiguous from 1, got {t.id} at position {i}")
        if not t.cost_usd > 0:
            raise ValidationError(f"rsu_types[{t.id}].cost_usd must be > 0")
        if not t.err_m > 0:
            raise ValidationError(f"rsu_types[{t.id}].err_m must be > 0")
    app = scenario.application
    if app.id not in APPLICATION_IDS:
        raise ValidationError(f"application.id must be one of {APPLICATION_IDS}, got {app.id!r}")
    for name in ("packet_bytes", "flow_kbps", "e2ed_ms_max"):
        if not getattr(app, name) > 0:
            raise ValidationError(f"application.{name} must be positive")
    if not 0.0 < app.pdr_min_pct <= 100.0:
        raise ValidationError("application.pdr_min_pct must be in (0, 100]")
    for t in scenario.catalog:
        mu = scenario.mu.lookup(t.id, app.id)  # raises on missing entry
        if mu < 0 or mu != int(mu):
            raise ValidationError(f"mu_table[t{t.id}, {app.id}] must be an integer >= 0")
    check_choice("traffic_pattern", scenario.traffic_pattern, TRAFFIC_PATTERNS)


# ---------------------------------------------------------------------------
# Traffic patterns
# ---------------------------------------------------------------------------


def apply_traffic_pattern(network: RoadNetwork, pattern: str, seed: int) -> RoadNetwork:
    """Scale each segment's vehicle count by an independent uniform factor.

    normal keeps the network untouched; low draws factors in [0.80, 1.00],
    high in [1.00, 1.20]. Deterministic per seed.
    """
    check_choice("pattern", pattern, TRAFFIC_PATTERNS)
    if pattern == "normal":
        return network
    lo, hi = _PATTERN_RANGES[pattern]
    rng = np.random.default_rng(check_int("seed", seed, minimum=0))
    factors = rng.uniform(lo, hi, size=len(network.segments))
    segments = tuple(
        replace(s, vehicles_per_period=s.vehicles_per_period * float(f))
        for s, f in zip(network.segments, factors)
    )
    return RoadNetwork(points=network.points, segments=segments)


# ---------------------------------------------------------------------------
# Synthetic instance generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometryParams:
    """Defaults mimic the road-length statistics of a mid-sized city map."""

    center_lat: float = 36.7
    center_lon: float = -4.4
    min_length_m: float = 55.5
    max_length_m: float = 1248.2
    mean_length_m: float = 483.9
    jitter: float = 0.22  # grid jitter as a fraction of the grid spacing


@dataclass(frozen=True)
class TrafficParams:
    vehicles_min: float = 20.0
    vehicles_max: float = 400.0
    speed_min_mps: float = 8.0
    speed_max_mps: float = 17.0


def generate_instance(
    n_segments: int,
    geometry_params: GeometryParams | None = None,
    traffic_params: TrafficParams | None = None,
    seed: int = 0,
) -> RoadNetwork:
    """Synthesize a planar-ish road network with n_segments segments.

    Points are laid on a jittered grid, candidate edges connect near
    neighbors, and a spanning-tree-first selection keeps the result mostly
    connected. Segment lengths stay inside [min_length_m, max_length_m] and
    the set is rescaled toward mean_length_m. Deterministic per seed.
    """
    geo = geometry_params or GeometryParams()
    tra = traffic_params or TrafficParams()
    check_int("n_segments", n_segments, minimum=1)
    if geo.min_length_m > geo.max_length_m:
        raise ValueError("geometry_params: min_length_m > max_length_m")
    if not geo.min_length_m <= geo.mean_length_m <= geo.max_length_m:
        raise ValueError("geometry_params: mean_length_m outside [min, max]")
    if tra.vehicles_min > tra.vehicles_max or tra.speed_min_mps > tra.speed_max_mps:
        raise ValueError("traffic_params: min > max")
    rng = np.random.default_rng(check_int("seed", seed, minimum=0))

    n = n_segments
    # Point count mirrors the reference map's segment/point ratio, with a
    # floor guaranteeing both the N/2+1 invariant and enough distinct pairs.
    m = max(2, math.ceil(n / 2) + 1, round(0.83 * n))
    while m * (m - 1) // 2 < n:
        m += 1

    cols = math.ceil(math.sqrt(m))
    spacing = geo.mean_length_m
    rows_idx, cols_idx = np.divmod(np.arange(m), cols)
    xy = np.stack([cols_idx * spacing, rows_idx * spacing], axis=1).astype(float)
    xy += rng.uniform(-geo.jitter * spacing, geo.jitter * spacing, size=(m, 2))

    # Candidate edges: k nearest neighbors, growing k until n edges exist.
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    k = min(6, m - 1)
    while True:
        neigh = np.argsort(d2, axis=1, kind="stable")[:, :k]
        pairs = {(min(i, int(j)), max(i, int(j))) for i in range(m) for j in neigh[i]}
        if len(pairs) >= n or k >= m - 1:
            break
        k = min(m - 1, k + 2)
    if len(pairs) < n:
        pairs = {(i, j) for i in range(m) for j in range(i + 1, m)}
    candidates = sorted(pairs)

    # Spanning tree first (union-find over shuffled candidates), then fill.
    order = rng.permutation(len(candidates))
    parent = list(range(m))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree: list[tuple[int, int]] = []
    rest: list[tuple[int, int]] = []
    for idx in order:
        a, b = candidates[int(idx)]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.append((a, b))
        else:
            rest.append((a, b))
    chosen = (tree + rest)[:n]

    # Rescale around the centroid so lengths respect the configured bounds
    # and land near the target mean.
    xy -= xy.mean(axis=0)
    lengths = np.array([math.dist(xy[a], xy[b]) for a, b in chosen])
    margin = 1e-3
    c_lo = geo.min_length_m / lengths.min() * (1.0 + margin)
    c_hi = geo.max_length_m / lengths.max() * (1.0 - margin)
    if c_lo > c_hi:
        raise ValueError("geometry_params: length bounds too tight for the grid geometry")
    scale = min(max(geo.mean_length_m / lengths.mean(), c_lo), c_hi)
    xy *= scale

    lat0, lon0 = geo.center_lat, geo.center_lon
    lats = lat0 + np.degrees(xy[:, 1] / EARTH_RADIUS_M)
    lons = lon0 + np.degrees(xy[:, 0] / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))

    points = tuple(Point(i + 1, float(lats[i]), float(lons[i])) for i in range(m))
    nv = rng.uniform(tra.vehicles_min, tra.vehicles_max, size=n)
    sp = rng.uniform(tra.speed_min_mps, tra.speed_max_mps, size=n)
    segments = []
    for i, (a, b) in enumerate(chosen):
        length = haversine_m(float(lats[a]), float(lons[a]), float(lats[b]), float(lons[b]))
        segments.append(
            Segment(
                id=i + 1,
                endpoint_a=a + 1,
                endpoint_b=b + 1,
                length_m=length,
                vehicles_per_period=float(nv[i]),
                avg_speed_mps=float(sp[i]),
            )
        )
    network = RoadNetwork(points=points, segments=tuple(segments))
    validate_network(network)
    return network


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------


def _require(mapping, key: str, path: str):
    if not isinstance(mapping, dict):
        raise SchemaError(f"{path}: expected an object")
    if key not in mapping:
        raise SchemaError(f"{path}: missing required key '{key}'")
    return mapping[key]


def _num(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _intval(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}: expected an integer, got {value!r}")
    return value


def scenario_to_dict(scenario: Scenario) -> dict:
    meta = dict(scenario.meta)
    meta["traffic_pattern"] = scenario.traffic_pattern
    meta["seed"] = scenario.seed
    return {
        "meta": meta,
        "points": [
            {"id": p.id, "lat": p.lat, "lon": p.lon} for p in scenario.network.points
        ],
        "segments": [
            {
                "id": s.id,
                "endpoint_a": s.endpoint_a,
                "endpoint_b": s.endpoint_b,
                "length_m": s.length_m,
                "vehicles_per_period": s.vehicles_per_period,
                "avg_speed_mps": s.avg_speed_mps,
                **({"length_override": True} if s.length_override else {}),
            }
            for s in scenario.network.segments
        ],
        "rsu_types": [
            {
                "id": t.id,
                "label": t.label,
                "gain_dbi": t.gain_dbi,
                "cost_usd": t.cost_usd,
                "err_m": t.err_m,
            }
            for t in scenario.catalog
        ],
        "application": {
            "id": scenario.application.id,
            "packet_bytes": scenario.application.packet_bytes,
            "flow_kbps": scenario.application.flow_kbps,
            "e2ed_ms_max": scenario.application.e2ed_ms_max,
            "pdr_min_pct": scenario.application.pdr_min_pct,
        },
        "mu_table": {
            str(t.id): {
                app: scenario.mu.entries[(t.id, app)]
                for app in APPLICATION_IDS
                if (t.id, app) in scenario.mu.entries
            }
            for t in scenario.catalog
        },
    }


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("document root: expected an object")
    points = []
    for i, p in enumerate(_require(doc, "points", "document root")):
        path = f"points[{i}]"
        points.append(
            Point(
                id=_intval(_require(p, "id", path), f"{path}.id"),
                lat=_num(_require(p, "lat", path), f"{path}.lat"),
                lon=_num(_require(p, "lon", path), f"{path}.lon"),
            )
        )
    segments = []
    for i, s in enumerate(_require(doc, "segments", "document root")):
        path = f"segments[{i}]"
        segments.append(
            Segment(
                id=_intval(_require(s, "id", path), f"{path}.id"),
                endpoint_a=_intval(_require(s, "endpoint_a", path), f"{path}.endpoint_a"),
                endpoint_b=_intval(_require(s, "endpoint_b", path), f"{path}.endpoint_b"),
                length_m=_num(_require(s, "length_m", path), f"{path}.length_m"),
                vehicles_per_period=_num(
                    _require(s, "vehicles_per_period", path), f"{path}.vehicles_per_period"
                ),
                avg_speed_mps=_num(_require(s, "avg_speed_mps", path), f"{path}.avg_speed_mps"),
                length_override=bool(s.get("length_override", False)),
            )
        )
    catalog = []
    for i, t in enumerate(_require(doc, "rsu_types", "document root")):
        path = f"rsu_types[{i}]"
        catalog.append(
            RsuType(
                id=_intval(_require(t, "id", path), f"{path}.id"),
                label=str(_require(t, "label", path)),
                gain_dbi=_num(_require(t, "gain_dbi", path), f"{path}.gain_dbi"),
                cost_usd=_num(_require(t, "cost_usd", path), f"{path}.cost_usd"),
                err_m=_num(_require(t, "err_m", path), f"{path}.err_m"),
            )
        )
    a = _require(doc, "application", "document root")
    application = ApplicationProfile(
        id=str(_require(a, "id", "application")),
        packet_bytes=_intval(_require(a, "packet_bytes", "application"), "application.packet_bytes"),
        flow_kbps=_num(_require(a, "flow_kbps", "application"), "application.flow_kbps"),
        e2ed_ms_max=_num(_require(a, "e2ed_ms_max", "application"), "application.e2ed_ms_max"),
        pdr_min_pct=_num(_require(a, "pdr_min_pct", "application"), "application.pdr_min_pct"),
    )
    mu_raw = _require(doc, "mu_table", "document root")
    if not isinstance(mu_raw, dict):
        raise SchemaError("mu_table: expected an object keyed by RSU type id")
    entries: dict[tuple[int, str], int] = {}
    for type_key, row in mu_raw.items():
        try:
            type_id = int(type_key)
        except (TypeError, ValueError):
            raise SchemaError(f"mu_table: key {type_key!r} is not an RSU type id") from None
        if not isinstance(row, dict):
            raise SchemaError(f"mu_table[{type_key}]: expected an object keyed by application id")
        for app_id, count in row.items():
            entries[(type_id, str(app_id))] = _intval(count, f"mu_table[{type_key}][{app_id}]")
    meta_raw = _require(doc, "meta", "document root")
    if not isinstance(meta_raw, dict):
        raise SchemaError("meta: expected an object")
    meta = dict(meta_raw)
    pattern = meta.pop("traffic_pattern", "normal")
    seed = meta.pop("seed", 0)
    if pattern not in TRAFFIC_PATTERNS:
        raise SchemaError(f"meta.traffic_pattern: unknown pattern {pattern!r}")
    scenario = Scenario(
        network=RoadNetwork(points=tuple(points), segments=tuple(segments)),
        catalog=tuple(catalog),
        application=application,
        mu=MaxUsersTable(entries),
        traffic_pattern=pattern,
        seed=_intval(seed, "meta.seed"),
        meta=meta,
    )
    validate_scenario(scenario)
    return scenario


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(doc)
