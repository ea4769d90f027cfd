"""Planar projection of the road network and circle/segment coverage.

Latitude/longitude coordinates are projected once onto a local tangent plane
(equirectangular about the point centroid), after which every coverage query
is straight 2-D geometry: an RSU of range r covers the part of a segment that
lies inside the circle of radius r around it. Covered parts are expressed as
relative intervals [lo, hi] in [0, 1] along the segment from endpoint_a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import EARTH_RADIUS_M, RoadNetwork

# Tangency tolerance: discriminants below this count as a miss.
DISC_EPS = 1e-12


@dataclass(frozen=True)
class PlacedRsu:
    """An RSU of catalog type `type_id` at fraction `relative_pos` along the
    segment with id `segment_id` (0 = endpoint_a, 1 = endpoint_b)."""

    segment_id: int
    relative_pos: float
    type_id: int


@dataclass(frozen=True)
class CoverageInterval:
    segment_id: int
    lo: float
    hi: float
    rsu_index: int


class ProjectedNetwork:
    """Array view of a road network in local planar coordinates (meters)."""

    def __init__(self, network: RoadNetwork):
        pts = network.points
        lat0 = sum(p.lat for p in pts) / len(pts)
        lon0 = sum(p.lon for p in pts) / len(pts)
        coslat = math.cos(math.radians(lat0))
        xy = {
            p.id: (
                EARTH_RADIUS_M * math.radians(p.lon - lon0) * coslat,
                EARTH_RADIUS_M * math.radians(p.lat - lat0),
            )
            for p in pts
        }
        segs = network.segments
        ns = len(segs)
        self.network = network
        self.n_segments = ns
        self.segment_ids = np.array([s.id for s in segs], dtype=np.int64)
        self.ax = np.array([xy[s.endpoint_a][0] for s in segs])
        self.ay = np.array([xy[s.endpoint_a][1] for s in segs])
        self.bx = np.array([xy[s.endpoint_b][0] for s in segs])
        self.by = np.array([xy[s.endpoint_b][1] for s in segs])
        self.dx = self.bx - self.ax
        self.dy = self.by - self.ay
        self.lengths = np.array([s.length_m for s in segs])
        self.vehicles = np.array([s.vehicles_per_period for s in segs])
        self.speeds = np.array([s.avg_speed_mps for s in segs])
        # Vehicle-seconds of service per fully covered segment.
        self.service_full = self.vehicles * self.lengths / self.speeds
        self._row_of = {int(sid): i for i, sid in enumerate(self.segment_ids)}

    def row_of(self, segment_id: int) -> int:
        try:
            return self._row_of[segment_id]
        except KeyError:
            raise KeyError(f"unknown segment id {segment_id}") from None

    def rsu_xy(self, seg_rows: np.ndarray, fracs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Planar coordinates of RSUs at `fracs` along segment rows."""
        return (
            self.ax[seg_rows] + fracs * self.dx[seg_rows],
            self.ay[seg_rows] + fracs * self.dy[seg_rows],
        )


def project_network(network: RoadNetwork) -> ProjectedNetwork:
    return ProjectedNetwork(network)


def coverage_arrays(
    proj: ProjectedNetwork,
    seg_rows: np.ndarray,
    fracs: np.ndarray,
    errs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Circle/segment intersections for a batch of RSUs against all segments.

    Returns (lo, hi, valid), each (n_rsus, n_segments). Row i describes which
    part of every segment lies within errs[i] of RSU i; exact tangency counts
    as a miss.
    """
    cx, cy = proj.rsu_xy(seg_rows, fracs)
    dx, dy = proj.dx[None, :], proj.dy[None, :]
    ex = proj.ax[None, :] - cx[:, None]
    ey = proj.ay[None, :] - cy[:, None]
    a = dx * dx + dy * dy
    b = 2.0 * (dx * ex + dy * ey)
    c = ex * ex + ey * ey - (errs * errs)[:, None]
    disc = b * b - 4.0 * a * c
    valid = disc >= DISC_EPS
    sq = np.sqrt(np.where(valid, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = (-b - sq) / (2.0 * a)
        hi = (-b + sq) / (2.0 * a)
    # Degenerate zero-length segment rows: inside the circle iff c < 0.
    degen = a[0] <= 0.0
    if degen.any():
        inside = degen[None, :] & (c < 0.0)
        lo = np.where(degen[None, :], 0.0, lo)
        hi = np.where(degen[None, :], 1.0, hi)
        valid = np.where(degen[None, :], inside, valid)
    lo = np.clip(lo, 0.0, 1.0)
    hi = np.clip(hi, 0.0, 1.0)
    valid &= hi > lo
    return lo, hi, valid


def covered_intervals(
    rsu: PlacedRsu, proj: ProjectedNetwork, err_m: float
) -> list[CoverageInterval]:
    """Intervals of every segment covered by a single placed RSU."""
    row = proj.row_of(rsu.segment_id)
    lo, hi, valid = coverage_arrays(
        proj,
        np.array([row]),
        np.array([float(rsu.relative_pos)]),
        np.array([float(err_m)]),
    )
    out = []
    for j in np.flatnonzero(valid[0]):
        out.append(
            CoverageInterval(
                segment_id=int(proj.segment_ids[j]),
                lo=float(lo[0, j]),
                hi=float(hi[0, j]),
                rsu_index=0,
            )
        )
    return out
