"""Pareto-front bookkeeping: non-dominated merging, hypervolume, CSV I/O.

Fronts live in (qos, cost) space with qos maximized and cost minimized.
Hypervolume is computed on a normalized unit square against the reference
corner (worst qos, worst cost), so values land in [0, 1] and fronts from
different algorithms compare directly when scored inside one shared box.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FRONT_HEADER = ["qos", "cost", "genome"]
RUN_LOG_HEADER = ["gen", "hv", "front_size", "evals", "wall_ms"]
METRICS_HEADER = ["instance", "algorithm", "run", "hv", "rhv", "front_size"]


class MetricError(ValueError):
    """Inconsistent metric input: bad box, malformed front file, empty reference."""


@dataclass(frozen=True)
class FrontPoint:
    qos: float
    cost: float
    genome: tuple[float, ...] = ()
    source: str = ""


@dataclass(frozen=True)
class ParetoFront:
    points: tuple[FrontPoint, ...]
    label: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def qos_values(self) -> np.ndarray:
        return np.array([p.qos for p in self.points])

    def cost_values(self) -> np.ndarray:
        return np.array([p.cost for p in self.points])


def dominates_point(p: FrontPoint, q: FrontPoint) -> bool:
    return p.qos >= q.qos and p.cost <= q.cost and (p.qos > q.qos or p.cost < q.cost)


def merge_nondominated(points: Iterable[FrontPoint]) -> list[FrontPoint]:
    """Strictly non-dominated subset, qos descending; duplicates collapse."""
    pts = list(points)
    if not pts:
        return []
    pts.sort(key=lambda p: (-p.qos, p.cost))
    kept = [pts[0]]
    best_cost = pts[0].cost
    for p in pts[1:]:
        if p.cost < best_cost:
            kept.append(p)
            best_cost = p.cost
    return kept


@dataclass(frozen=True)
class NormalizationBox:
    qos_min: float
    qos_max: float
    cost_min: float
    cost_max: float

    def __post_init__(self):
        if not self.qos_max > self.qos_min:
            raise MetricError(f"box qos range empty: [{self.qos_min}, {self.qos_max}]")
        if not self.cost_max > self.cost_min:
            raise MetricError(f"box cost range empty: [{self.cost_min}, {self.cost_max}]")

    def normalize(self, points: Sequence[FrontPoint]) -> tuple[np.ndarray, np.ndarray]:
        q = np.array([p.qos for p in points])
        c = np.array([p.cost for p in points])
        qn = (q - self.qos_min) / (self.qos_max - self.qos_min)
        cn = (c - self.cost_min) / (self.cost_max - self.cost_min)
        tol = 1e-9
        if (qn < -tol).any() or (qn > 1 + tol).any() or (cn < -tol).any() or (cn > 1 + tol).any():
            raise MetricError("point outside normalization box")
        return np.clip(qn, 0.0, 1.0), np.clip(cn, 0.0, 1.0)


def default_box(points: Iterable[FrontPoint]) -> NormalizationBox:
    """Bounding box of the points, padded 1% per side so every point is
    strictly interior. Degenerate spans fall back to an absolute pad."""
    pts = list(points)
    if not pts:
        raise MetricError("cannot build a box from zero points")
    q = np.array([p.qos for p in pts])
    c = np.array([p.cost for p in pts])

    def pad(lo: float, hi: float) -> tuple[float, float]:
        span = hi - lo
        eps = 0.01 * span if span > 0 else max(1.0, 0.01 * max(abs(lo), abs(hi)))
        return lo - eps, hi + eps

    qlo, qhi = pad(float(q.min()), float(q.max()))
    clo, chi = pad(float(c.min()), float(c.max()))
    return NormalizationBox(qlo, qhi, clo, chi)


def hypervolume(points: Sequence[FrontPoint], box: NormalizationBox) -> float:
    """Normalized area dominated by the points w.r.t. the corner
    (qos_min, cost_max). Dominated or duplicated input points are harmless."""
    if not points:
        return 0.0
    qn, cn = box.normalize(points)
    order = np.argsort(-qn, kind="stable")
    qs, cs = qn[order], cn[order]
    minc = np.minimum.accumulate(cs)
    qnext = np.append(qs[1:], 0.0)
    return float(((qs - qnext) * (1.0 - minc)).sum())


def relative_hypervolume(
    points: Sequence[FrontPoint],
    reference: Sequence[FrontPoint],
    box: NormalizationBox | None = None,
) -> float:
    """Hypervolume ratio against a reference front inside a shared box."""
    if not reference:
        raise MetricError("reference front is empty")
    if box is None:
        box = default_box(list(points) + list(reference))
    ref_hv = hypervolume(reference, box)
    if ref_hv <= 0.0:
        raise MetricError("reference front has zero hypervolume")
    return hypervolume(points, box) / ref_hv


# ---------------------------------------------------------------------------
# CSV artifacts
# ---------------------------------------------------------------------------


def write_front_csv(path, points: Sequence[FrontPoint]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FRONT_HEADER)
        for p in points:
            w.writerow([repr(p.qos), repr(p.cost), ";".join(repr(g) for g in p.genome)])


def read_front_csv(path, source: str = "") -> list[FrontPoint]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != FRONT_HEADER:
        raise MetricError(f"{path}: expected header {','.join(FRONT_HEADER)}")
    points = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise MetricError(f"{path}:{i}: expected 3 columns, got {len(row)}")
        try:
            qos, cost = float(row[0]), float(row[1])
            genome = tuple(float(x) for x in row[2].split(";")) if row[2] else ()
        except ValueError as exc:
            raise MetricError(f"{path}:{i}: {exc}") from None
        points.append(FrontPoint(qos=qos, cost=cost, genome=genome, source=source))
    return points


def write_run_log_csv(path, history) -> None:
    """History rows need gen/hv/front_size/evals/wall_ms attributes."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_LOG_HEADER)
        for h in history:
            w.writerow([h.gen, repr(h.hv), h.front_size, h.evals, repr(h.wall_ms)])


def write_metrics_csv(path, rows: Iterable[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_HEADER)
        for instance, algorithm, run, hv, rhv, front_size in rows:
            w.writerow([instance, algorithm, run, repr(float(hv)), repr(float(rhv)), front_size])
