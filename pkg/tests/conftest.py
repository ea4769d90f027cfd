"""Shared builders and independent reference implementations for the tests.

The reference (oracle) functions here deliberately reimplement the math from
first principles — plain loops, no reuse of the library's vectorized paths —
so agreement between the two is meaningful.
"""

import math

import numpy as np

from rsudeploy import (
    MaxUsersTable,
    Point,
    RoadNetwork,
    RsuType,
    Scenario,
    Segment,
    apply_traffic_pattern,
    build_scenario,
    default_applications,
    generate_instance,
    haversine_m,
)

EARTH_R = 6_371_000.0
BASE_LAT, BASE_LON = 36.7, -4.4


def small_scenario(n=8, seed=0, application="video", pattern="normal"):
    net = generate_instance(n, seed=seed)
    if pattern != "normal":
        net = apply_traffic_pattern(net, pattern, seed)
    return build_scenario(net, application=application, traffic_pattern=pattern, seed=seed)


def offset_point(pid, east_m=0.0, north_m=0.0, lat0=BASE_LAT, lon0=BASE_LON):
    lat = lat0 + math.degrees(north_m / EARTH_R)
    lon = lon0 + math.degrees(east_m / (EARTH_R * math.cos(math.radians(lat0))))
    return Point(pid, lat, lon)


def line_scenario(err=250.0, cost=100.0, mu=40, nv=100.0, sp=10.0, length=1000.0):
    """One straight east-west segment of exactly `length` meters with a
    single-type catalog. Everything about it is hand-computable."""
    p1 = offset_point(1)
    p2 = offset_point(2, east_m=length)
    seg = Segment(1, 1, 2, float(length), nv, sp, length_override=True)
    return Scenario(
        network=RoadNetwork(points=(p1, p2), segments=(seg,)),
        catalog=(RsuType(1, "test-omni", 6.0, cost, err),),
        application=default_applications()["video"],
        mu=MaxUsersTable({(1, "video"): mu}),
    )


def chain_scenario(nv=100.0, sp=10.0, seg_len=1000.0):
    """Two collinear 1 km segments sharing a midpoint, default catalog."""
    pts = (
        offset_point(1),
        offset_point(2, east_m=seg_len),
        offset_point(3, east_m=2 * seg_len),
    )
    segs = (
        Segment(1, 1, 2, seg_len, nv, sp, length_override=True),
        Segment(2, 2, 3, seg_len, nv, sp, length_override=True),
    )
    return build_scenario(RoadNetwork(points=pts, segments=segs), application="video")


def cluster_scenario(nv=300.0, sp=10.0):
    """Three short segments bunched within ~100 m, so any single RSU covers
    every one of them from anywhere."""
    pts = (
        offset_point(1),
        offset_point(2, east_m=80.0),
        offset_point(3, north_m=70.0),
    )
    coords = {p.id: p for p in pts}

    def glen(a, b):
        return haversine_m(coords[a].lat, coords[a].lon, coords[b].lat, coords[b].lon)

    segs = (
        Segment(1, 1, 2, glen(1, 2), nv, sp),
        Segment(2, 1, 3, glen(1, 3), nv, sp),
        Segment(3, 2, 3, glen(2, 3), nv, sp),
    )
    return build_scenario(RoadNetwork(points=pts, segments=segs), application="video")


# ---------------------------------------------------------------------------
# Independent reference implementations
# ---------------------------------------------------------------------------


def project_points(network):
    lat0 = sum(p.lat for p in network.points) / len(network.points)
    lon0 = sum(p.lon for p in network.points) / len(network.points)
    k = math.cos(math.radians(lat0))
    return {
        p.id: (
            EARTH_R * math.radians(p.lon - lon0) * k,
            EARTH_R * math.radians(p.lat - lat0),
        )
        for p in network.points
    }


def discretized_qos(scenario, genome, cells=10_000):
    """Cell-counting reference for both objectives' QoS readings.

    Chops every segment into `cells` equal pieces, assigns each piece to the
    covering RSU of highest priority (larger range, then lower segment row,
    then lower position), and aggregates. Returns (literal, capped).
    """
    network = scenario.network
    xy = project_points(network)
    segs = network.segments
    app = scenario.application.id
    err = {t.id: t.err_m for t in scenario.catalog}
    mu = {t.id: float(scenario.mu.lookup(t.id, app)) for t in scenario.catalog}

    rsus = []
    for row, gene in enumerate(genome):
        t = int(math.floor(gene))
        if t > 0:
            rsus.append((row, t, gene - t))
    if not rsus:
        return 0.0, 0.0

    priority = sorted(
        range(len(rsus)), key=lambda i: (-err[rsus[i][1]], rsus[i][0], rsus[i][2])
    )
    centers = []
    for row, t, frac in rsus:
        s = segs[row]
        ax, ay = xy[s.endpoint_a]
        bx, by = xy[s.endpoint_b]
        centers.append((ax + frac * (bx - ax), ay + frac * (by - ay)))

    raw = [0.0] * len(rsus)
    credited_segments = [set() for _ in rsus]
    ts = (np.arange(cells) + 0.5) / cells
    for j, s in enumerate(segs):
        ax, ay = xy[s.endpoint_a]
        bx, by = xy[s.endpoint_b]
        px = ax + ts * (bx - ax)
        py = ay + ts * (by - ay)
        owner = np.full(cells, -1, dtype=np.int64)
        for i in reversed(priority):  # highest priority written last
            cx, cy = centers[i]
            r = err[rsus[i][1]]
            inside = (px - cx) ** 2 + (py - cy) ** 2 < r * r
            owner[inside] = i
        cell_value = s.vehicles_per_period * s.length_m / s.avg_speed_mps / cells
        for i in range(len(rsus)):
            cnt = int((owner == i).sum())
            if cnt:
                raw[i] += cnt * cell_value
                credited_segments[i].add(j)

    literal = 0.0
    capped = 0.0
    for i, (row, t, frac) in enumerate(rsus):
        literal += max(mu[t], raw[i])
        competing = sum(segs[j].vehicles_per_period for j in credited_segments[i])
        factor = min(1.0, mu[t] / competing) if competing > 0 else 1.0
        capped += raw[i] * factor
    return literal, capped


def brute_force_fronts(objectives):
    """Repeated peeling with a plain double loop. objectives: list of
    (qos, cost)."""
    remaining = list(range(len(objectives)))
    fronts = []
    while remaining:
        front = []
        for i in remaining:
            qi, ci = objectives[i]
            dominated = False
            for j in remaining:
                if i == j:
                    continue
                qj, cj = objectives[j]
                if qj >= qi and cj <= ci and (qj > qi or cj < ci):
                    dominated = True
                    break
            if not dominated:
                front.append(i)
        fronts.append(front)
        remaining = [i for i in remaining if i not in front]
    return fronts


def brute_force_merge(points):
    """Pairwise non-dominance filter with duplicate collapse; points are
    FrontPoint-like with .qos/.cost."""
    kept = []
    seen = set()
    for p in points:
        dominated = any(
            (q.qos >= p.qos and q.cost <= p.cost and (q.qos > p.qos or q.cost < p.cost))
            for q in points
        )
        if not dominated and (p.qos, p.cost) not in seen:
            seen.add((p.qos, p.cost))
            kept.append(p)
    return kept


def mc_hypervolume(points, box, grid=512):
    """Grid-sampling estimate of the normalized dominated area."""
    q = (np.array([p.qos for p in points]) - box.qos_min) / (box.qos_max - box.qos_min)
    c = (np.array([p.cost for p in points]) - box.cost_min) / (box.cost_max - box.cost_min)
    centers = (np.arange(grid) + 0.5) / grid
    gq = centers[:, None]
    gc = centers[None, :]
    covered = np.zeros((grid, grid), dtype=bool)
    for qi, ci in zip(q, c):
        covered |= (gq <= qi) & (gc >= ci)
    return covered.mean()
