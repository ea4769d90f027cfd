"""Baseline planners: a constructive heuristic driven by weighted PageRank
over the road graph, and a budgeted randomized knapsack.

Both emit deployments in the same genome encoding the evolutionary engine
uses, so their point sets drop straight into front CSVs and metric runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .geometry import PlacedRsu, coverage_arrays
from .metrics import FrontPoint, ParetoFront, merge_nondominated
from .objectives import Deployment, Evaluator
from .scenario import RoadNetwork, Scenario, Segment
from .validation import check_int, check_positive


# ---------------------------------------------------------------------------
# Weighted PageRank over the road graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PrGraph:
    """Directed arc view of the network: every segment becomes two opposite
    arcs, each weighted by the segment's service time NV * len / speed."""

    point_ids: tuple[int, ...]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_network(cls, network: RoadNetwork) -> "PrGraph":
        ids = tuple(p.id for p in network.points)
        index = {pid: i for i, pid in enumerate(ids)}
        src, dst, weight = [], [], []
        for s in network.segments:
            w = s.vehicles_per_period * s.length_m / s.avg_speed_mps
            a, b = index[s.endpoint_a], index[s.endpoint_b]
            src.extend((a, b))
            dst.extend((b, a))
            weight.extend((w, w))
        return cls(
            point_ids=ids,
            src=np.array(src, dtype=np.int64),
            dst=np.array(dst, dtype=np.int64),
            weight=np.array(weight, dtype=float),
        )


def weighted_pagerank(
    graph: PrGraph,
    d: float = 0.85,
    epsilon: float = 1e-8,
    max_iters: int = 1000,
) -> dict[int, float]:
    """Iterate PR(v) = (1-d) + d * sum over in-arcs of w * PR(u) / out(u)
    from PR = d, until the largest change drops below epsilon. A vertex with
    zero outgoing weight simply contributes nothing."""
    if not 0.0 <= d < 1.0:
        raise ValueError(f"d must be in [0, 1), got {d}")
    check_positive("epsilon", epsilon)
    check_int("max_iters", max_iters, minimum=1)
    nv = len(graph.point_ids)
    out_sum = np.bincount(graph.src, weights=graph.weight, minlength=nv)
    denom = out_sum[graph.src]
    norm_w = np.divide(graph.weight, denom, out=np.zeros_like(graph.weight), where=denom > 0)
    pr = np.full(nv, d, dtype=float)
    for _ in range(max_iters):
        flow = np.bincount(graph.dst, weights=norm_w * pr[graph.src], minlength=nv)
        new = (1.0 - d) + d * flow
        delta = float(np.abs(new - pr).max()) if nv else 0.0
        pr = new
        if delta < epsilon:
            break
    return {pid: float(pr[i]) for i, pid in enumerate(graph.point_ids)}


def rank_segments(network: RoadNetwork, pr: dict[int, float]) -> list[Segment]:
    """Segments by descending endpoint PageRank sum; ties by id."""
    return sorted(
        network.segments,
        key=lambda s: (-(pr[s.endpoint_a] + pr[s.endpoint_b]), s.id),
    )


def pagerank_constructive(
    scenario: Scenario,
    qos_mode: str = "literal",
    d: float = 0.85,
    epsilon: float = 1e-8,
    max_iters: int = 1000,
) -> tuple[Deployment, list[FrontPoint]]:
    """Greedy construction along the PageRank segment ranking.

    Per segment, try every catalog type at the ten positions 0.0, 0.1, ...,
    0.9 and tentatively take the best-scoring one; keep it only if it lifts
    total QoS by at least 1% over the state before this segment. Scans all
    segments, is fully deterministic, and returns the deployment plus the
    (cost, qos) trace recorded after each accepted placement.
    """
    evaluator = Evaluator(scenario, qos_mode)
    pr = weighted_pagerank(PrGraph.from_network(scenario.network), d, epsilon, max_iters)
    ranked = rank_segments(scenario.network, pr)
    genome = np.zeros(evaluator.n_segments)
    total = 0.0
    trace: list[FrontPoint] = []
    for seg in ranked:
        row = evaluator.proj.row_of(seg.id)
        best_q, best_gene = -np.inf, 0.0
        for t in range(1, evaluator.n_types + 1):
            for tenth in range(10):
                gene = t + tenth / 10.0
                genome[row] = gene
                q = evaluator.eval_qos(genome)
                if q > best_q:
                    best_q, best_gene = q, gene
        if best_q > total and (best_q - total) >= 0.01 * total:
            genome[row] = best_gene
            total = best_q
            trace.append(
                FrontPoint(
                    qos=total,
                    cost=evaluator.eval_cost(genome),
                    genome=tuple(float(x) for x in genome),
                    source="pagerank",
                )
            )
        else:
            genome[row] = 0.0
    return evaluator.decode(genome), trace


# ---------------------------------------------------------------------------
# Randomized knapsack
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnapsackItem:
    segment_id: int
    rsu_type: int


def knapsack_items(network: RoadNetwork, n_types: int) -> list[KnapsackItem]:
    """All (segment, RSU type) pairs the knapsack may pick from."""
    return [
        KnapsackItem(segment_id=s.id, rsu_type=t)
        for s in network.segments
        for t in range(1, n_types + 1)
    ]


class _Residual:
    """Optimistic value of the segments still ahead: best total single-RSU
    coverage reachable with the remaining budget, scored against an empty map
    with pre-drawn candidate positions. Tabulated bottom-up over a
    whole-currency budget grid; queries round the remaining budget onto it."""

    def __init__(self, m0: np.ndarray, costs: np.ndarray, proc_rows: np.ndarray, budget: float):
        n = proc_rows.size
        b_int = int(budget + 0.5)
        cost_int = np.maximum(1, (costs + 0.5).astype(np.int64))
        table = np.zeros((n + 1, b_int + 1))
        for i in range(n - 1, -1, -1):
            row = proc_rows[i]
            level = table[i + 1].copy()
            for t in range(costs.size):
                c = int(cost_int[t])
                if c <= b_int:
                    np.maximum(
                        level[c:], m0[row, t] + table[i + 1, : b_int + 1 - c], out=level[c:]
                    )
            table[i] = level
        self.table = table
        self.b_int = b_int

    def value(self, i: int, budget: float) -> float:
        if i >= self.table.shape[0] - 1:
            return 0.0
        return float(self.table[i, min(int(budget + 0.5), self.b_int)])


def _marginal_coverage(
    evaluator: Evaluator,
    row: int,
    type_id: int,
    loc: float,
    covered: list[list[tuple[float, float]]],
) -> tuple[float, list[tuple[int, float, float]]]:
    """Service time a candidate adds on top of already-covered road, plus its
    raw intervals for committing."""
    proj = evaluator.proj
    lo, hi, valid = coverage_arrays(
        proj,
        np.array([row]),
        np.array([loc]),
        np.array([evaluator.err_by_type[type_id - 1]]),
    )
    gain = 0.0
    intervals: list[tuple[int, float, float]] = []
    for j in np.flatnonzero(valid[0]):
        l, h = float(lo[0, j]), float(hi[0, j])
        intervals.append((int(j), l, h))
        taken = 0.0
        for ul, uh in covered[j]:
            o = min(h, uh) - max(l, ul)
            if o > 0.0:
                taken += o
        gain += ((h - l) - taken) * proj.service_full[j]
    return gain, intervals


def _merge_into(union: list[tuple[float, float]], lo: float, hi: float) -> None:
    union.append((lo, hi))
    union.sort()
    merged = [union[0]]
    for ul, uh in union[1:]:
        if ul <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], uh))
        else:
            merged.append((ul, uh))
    union[:] = merged


def randomized_knapsack(
    scenario: Scenario,
    budget: float,
    seed: int,
    return_partials: bool = False,
):
    """Budgeted placement, one pass over segments from the last row to the
    first. Per segment each affordable type draws a fresh position and is
    scored as its marginal coverage given everything placed so far plus the
    memoized optimistic value of the remaining segments at the reduced
    budget; the best strictly-improving option is committed. Deterministic
    per seed; total cost never exceeds the budget by construction.

    Returns the final Deployment, or (Deployment, partials) where partials
    are the after-each-commit snapshots (useful as population seeds).
    """
    check_positive("budget", budget, allow_zero=True)
    check_int("seed", seed, minimum=0)
    evaluator = Evaluator(scenario)
    n, k = evaluator.n_segments, evaluator.n_types
    costs = evaluator.cost_by_type
    rng = np.random.default_rng(seed)

    # Static table: every (segment, type) candidate scored alone on an empty
    # map, at positions drawn up front.
    loc0 = rng.random((n, k))
    rows_rep = np.repeat(np.arange(n), k)
    lo, hi, valid = coverage_arrays(
        evaluator.proj, rows_rep, loc0.ravel(), np.tile(evaluator.err_by_type, n)
    )
    widths = np.where(valid, hi - lo, 0.0)
    m0 = (widths * evaluator.proj.service_full[None, :]).sum(axis=1).reshape(n, k)

    proc_rows = np.arange(n - 1, -1, -1)
    residual = _Residual(m0, costs, proc_rows, budget)

    covered: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    placements: list[PlacedRsu] = []
    partials: list[Deployment] = []
    remaining = float(budget)
    spent = 0.0
    for i, row in enumerate(proc_rows):
        best_score = residual.value(i + 1, remaining)
        best_t, best_loc, best_iv = 0, 0.0, []
        for t in range(1, k + 1):
            cost = costs[t - 1]
            if remaining < cost:
                continue
            loc = float(rng.random())
            gain, intervals = _marginal_coverage(evaluator, int(row), t, loc, covered)
            score = gain + residual.value(i + 1, remaining - cost)
            if score > best_score:
                best_score, best_t, best_loc, best_iv = score, t, loc, intervals
        if best_t > 0:
            placements.append(
                PlacedRsu(
                    segment_id=int(evaluator.proj.segment_ids[row]),
                    relative_pos=best_loc,
                    type_id=best_t,
                )
            )
            for j, l, h in best_iv:
                _merge_into(covered[j], l, h)
            remaining -= costs[best_t - 1]
            spent += float(costs[best_t - 1])
            if return_partials:
                partials.append(Deployment(placements=tuple(placements), cost_usd=spent))
    deployment = Deployment(placements=tuple(placements), cost_usd=spent)
    if return_partials:
        return deployment, partials
    return deployment


def knapsack_front(
    scenario: Scenario,
    budget_grid: Sequence[float],
    seeds: Sequence[int],
    qos_mode: str = "literal",
) -> list[FrontPoint]:
    """Non-dominated union over one knapsack run per (budget, seed)."""
    if not budget_grid:
        raise ValueError("budget_grid must be non-empty")
    if not seeds:
        raise ValueError("seeds must be non-empty")
    evaluator = Evaluator(scenario, qos_mode)
    points: list[FrontPoint] = []
    for budget in budget_grid:
        for seed in seeds:
            dep = randomized_knapsack(scenario, budget, seed)
            genome = evaluator.encode(dep.placements)
            obj = evaluator.evaluate(genome)
            points.append(
                FrontPoint(
                    qos=obj.qos,
                    cost=obj.cost,
                    genome=tuple(float(x) for x in genome),
                    source="knapsack",
                )
            )
    return merge_nondominated(points)


# ---------------------------------------------------------------------------
# Estimator wrappers
# ---------------------------------------------------------------------------


class PageRankPlanner(BaseEstimator):
    def __init__(
        self,
        qos_mode: str = "literal",
        damping: float = 0.85,
        epsilon: float = 1e-8,
        max_iters: int = 1000,
    ):
        self.qos_mode = qos_mode
        self.damping = damping
        self.epsilon = epsilon
        self.max_iters = max_iters

    def fit(self, scenario: Scenario, y=None) -> "PageRankPlanner":
        self.deployment_, self.trace_ = pagerank_constructive(
            scenario, self.qos_mode, self.damping, self.epsilon, self.max_iters
        )
        self.front_ = ParetoFront(
            points=tuple(merge_nondominated(self.trace_)), label="pagerank"
        )
        return self


class KnapsackPlanner(BaseEstimator):
    def __init__(
        self,
        budget_grid: Iterable[float] = (),
        seeds: Iterable[int] = (0,),
        qos_mode: str = "literal",
    ):
        self.budget_grid = budget_grid
        self.seeds = seeds
        self.qos_mode = qos_mode

    def fit(self, scenario: Scenario, y=None) -> "KnapsackPlanner":
        points = knapsack_front(
            scenario, tuple(self.budget_grid), tuple(self.seeds), self.qos_mode
        )
        self.front_ = ParetoFront(points=tuple(points), label="knapsack")
        return self
