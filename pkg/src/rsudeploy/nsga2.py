"""Elitist bi-objective genetic engine (NSGA-II) over deployment genomes.

The loop keeps the classic structure: binary tournament on (rank, crowding),
two-point crossover, three-branch mutation (drop RSU / retype / nudge
position), then elitist replacement from the merged parent+offspring pool.
Initial populations are seeded from randomized-knapsack partial solutions,
largest deployments first, topped up with uniform random genomes.

Besides the population, run() maintains an unbounded archive of every
non-dominated objective vector seen so far. The reported front and the
per-generation hypervolume log come from the archive: crowding-based
truncation may drop population boundary points, and the archive is what
makes the logged hypervolume provably non-decreasing.
"""

from __future__ import annotations

import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .heuristics import randomized_knapsack
from .metrics import FrontPoint, NormalizationBox, ParetoFront, hypervolume, merge_nondominated
from .objectives import Evaluator, ObjectiveVector
from .scenario import Scenario
from .validation import check_choice, check_int, check_probability

QOS_MODES = ("literal", "capped")


@dataclass(frozen=True)
class EaConfig:
    population_size: int = 72
    generations: int = 200
    p_crossover: float = 0.7
    p_mutation_per_gene: float = 0.1
    pi_a: float = 1.0 / 3.0
    pi_b: float = 1.0 / 3.0
    sigma: float = 0.1
    qos_mode: str = "literal"
    seed: int = 0
    workers: int = 1
    # Fraction of the population filled from knapsack partial solutions
    # before uniform random fill takes over.
    seed_fraction: float = 1.0

    def validate(self) -> None:
        check_int("population_size", self.population_size, minimum=4)
        if self.population_size % 2 != 0:
            raise ValueError("population_size must be even")
        check_int("generations", self.generations, minimum=0)
        check_probability("p_crossover", self.p_crossover)
        check_probability("p_mutation_per_gene", self.p_mutation_per_gene)
        check_probability("pi_a", self.pi_a)
        check_probability("pi_b", self.pi_b)
        if self.pi_a + self.pi_b > 1.0:
            raise ValueError(f"pi_a + pi_b must be <= 1, got {self.pi_a + self.pi_b}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        check_choice("qos_mode", self.qos_mode, QOS_MODES)
        check_int("seed", self.seed, minimum=0)
        check_int("workers", self.workers, minimum=1)
        check_probability("seed_fraction", self.seed_fraction)


@dataclass(eq=False)
class RankedIndividual:
    genome: np.ndarray
    objectives: ObjectiveVector
    rank: int
    crowding: float


@dataclass(frozen=True)
class GenerationStats:
    gen: int
    hv: float
    front_size: int
    evals: int
    wall_ms: float


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """Maximize qos, minimize cost; equal vectors never dominate."""
    return a[0] >= b[0] and a[1] <= b[1] and (a[0] > b[0] or a[1] < b[1])


def _objective_array(population) -> np.ndarray:
    rows = []
    for item in population:
        if isinstance(item, ObjectiveVector):
            rows.append((item.qos, item.cost))
            continue
        first = item[0]
        if np.ndim(first) == 0:
            rows.append((float(item[0]), float(item[1])))
        else:
            rows.append((float(item[1][0]), float(item[1][1])))
    return np.array(rows, dtype=float)


def non_dominated_sort(population) -> list[list[int]]:
    """Partition into fronts of indices: front f+1 is what becomes
    non-dominated once fronts 1..f are removed.

    Accepts (genome, objectives) pairs, ObjectiveVectors, or bare
    (qos, cost) pairs.
    """
    objs = _objective_array(population)
    n = objs.shape[0]
    if n == 0:
        raise ValueError("population must be non-empty")
    q, c = objs[:, 0], objs[:, 1]
    qi, qj = q[:, None], q[None, :]
    ci, cj = c[:, None], c[None, :]
    dom = (qi >= qj) & (ci <= cj) & ((qi > qj) | (ci < cj))
    counts = dom.sum(axis=0).astype(np.int64)
    fronts: list[list[int]] = []
    assigned = 0
    while assigned < n:
        members = np.flatnonzero(counts == 0)
        fronts.append([int(i) for i in members])
        assigned += members.size
        counts -= dom[members].sum(axis=0)
        counts[members] = -(n + 1)
    return fronts


def crowding_distance(front) -> np.ndarray:
    """Per-individual crowding over the two objectives; extremes get +inf,
    fronts of one or two individuals are all +inf."""
    objs = _objective_array(front)
    m = objs.shape[0]
    if m == 0:
        raise ValueError("front must be non-empty")
    if m <= 2:
        return np.full(m, np.inf)
    dist = np.zeros(m)
    for k in range(objs.shape[1]):
        v = objs[:, k]
        order = np.argsort(v, kind="stable")
        span = float(v[order[-1]] - v[order[0]])
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0.0:
            dist[order[1:-1]] += (v[order[2:]] - v[order[:-2]]) / span
    return dist


def tournament_select(pool: Sequence[RankedIndividual], rng: np.random.Generator) -> np.ndarray:
    """Binary tournament: lower rank wins, then larger crowding, then a coin
    flip. Returns the winning genome (not a copy)."""
    idx = rng.integers(0, len(pool), size=2)
    a, b = pool[int(idx[0])], pool[int(idx[1])]
    if a.rank != b.rank:
        return a.genome if a.rank < b.rank else b.genome
    if a.crowding != b.crowding:
        return a.genome if a.crowding > b.crowding else b.genome
    return a.genome if rng.random() < 0.5 else b.genome


def two_point_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    rng: np.random.Generator,
    p_crossover: float = 1.0,
    cuts: tuple[int, int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Swap the gene block [c1, c2) between copies of the parents.

    Cut points are uniform over 0..n inclusive. With probability
    1 - p_crossover the parents are copied unchanged. `cuts` bypasses the
    RNG entirely (test hook).
    """
    if p1.shape != p2.shape:
        raise ValueError(f"parent shapes differ: {p1.shape} vs {p2.shape}")
    c1, c2 = p1.copy(), p2.copy()
    if cuts is None:
        if rng.random() >= p_crossover:
            return c1, c2
        lo, hi = np.sort(rng.integers(0, p1.size + 1, size=2))
    else:
        lo, hi = cuts
        if not 0 <= lo <= hi <= p1.size:
            raise ValueError(f"cuts {cuts} out of order for length {p1.size}")
    c1[lo:hi], c2[lo:hi] = p2[lo:hi], p1[lo:hi]
    return c1, c2


def mutate(
    genome: np.ndarray,
    config: EaConfig,
    rng: np.random.Generator,
    n_types: int = 3,
) -> np.ndarray:
    """Per-gene mutation: with p_mutation_per_gene pick one branch —
    pi_a: remove the RSU (integer part to 0, position kept);
    pi_b: retype uniformly over 1..n_types (position kept);
    else: Gaussian(0, sigma) nudge of the position, reflected into [0, 1).
    """
    g = np.asarray(genome, dtype=float).copy()
    mask = rng.random(g.size) < config.p_mutation_per_gene
    nm = int(mask.sum())
    if nm == 0:
        return g
    u = rng.random(nm)
    ints = np.floor(g[mask])
    fracs = g[mask] - ints
    in_a = u < config.pi_a
    in_b = ~in_a & (u < config.pi_a + config.pi_b)
    in_c = ~(in_a | in_b)
    ints[in_a] = 0.0
    nb = int(in_b.sum())
    if nb:
        ints[in_b] = rng.integers(1, n_types + 1, size=nb).astype(float)
    nc = int(in_c.sum())
    if nc:
        moved = fracs[in_c] + rng.normal(0.0, config.sigma, size=nc)
        r = np.mod(moved, 2.0)
        r = np.where(r > 1.0, 2.0 - r, r)
        r = np.where(r >= 1.0, np.nextafter(1.0, 0.0), r)
        fracs[in_c] = r
    g[mask] = ints + fracs
    return g


# ---------------------------------------------------------------------------
# Initial population
# ---------------------------------------------------------------------------


def seed_population(
    scenario: Scenario, config: EaConfig, rng: np.random.Generator
) -> list[np.ndarray]:
    """Knapsack-seeded initial population.

    One randomized-knapsack run at a budget generous enough to fill the map;
    its partial solutions enter largest-first (most RSUs), deduplicated, up
    to seed_fraction of the population. The rest is uniform random.
    """
    evaluator = Evaluator(scenario, config.qos_mode)
    n, k = evaluator.n_segments, evaluator.n_types
    ks_seed = int(rng.integers(0, 2**63 - 1))
    budget = float(n * evaluator.cost_by_type.max())
    _, partials = randomized_knapsack(scenario, budget, ks_seed, return_partials=True)

    target = int(round(config.seed_fraction * config.population_size))
    genomes: list[np.ndarray] = []
    seen: set[bytes] = set()
    for dep in sorted(partials, key=lambda d: -len(d.placements)):
        if len(genomes) >= target:
            break
        g = evaluator.encode(dep.placements)
        key = g.tobytes()
        if key not in seen:
            seen.add(key)
            genomes.append(g)
    while len(genomes) < config.population_size:
        genomes.append(rng.uniform(0.0, k + 1, size=n))
    return genomes[: config.population_size]


# ---------------------------------------------------------------------------
# Parallel evaluation (master-slave): variation stays single-threaded, the
# offspring batch fans out to worker processes and returns in index order.
# ---------------------------------------------------------------------------

_worker_evaluator: Evaluator | None = None


def _init_worker(scenario: Scenario, qos_mode: str) -> None:
    global _worker_evaluator
    _worker_evaluator = Evaluator(scenario, qos_mode)


def _eval_in_worker(genome: np.ndarray) -> ObjectiveVector:
    return _worker_evaluator.evaluate(genome)


class _EvalPool:
    def __init__(self, scenario: Scenario, qos_mode: str, workers: int):
        self.evaluator = Evaluator(scenario, qos_mode)
        self._pool = None
        if workers > 1:
            ctx = multiprocessing.get_context("fork")
            self._pool = ctx.Pool(
                workers, initializer=_init_worker, initargs=(scenario, qos_mode)
            )

    def evaluate(self, genomes: list[np.ndarray], gen: int) -> list[ObjectiveVector]:
        try:
            if self._pool is not None:
                return self._pool.map(_eval_in_worker, genomes)
            return [self.evaluator.evaluate(g) for g in genomes]
        except Exception:
            # Re-run locally to attribute the failure to an individual.
            for i, g in enumerate(genomes):
                try:
                    self.evaluator.evaluate(g)
                except Exception as exc:
                    raise RuntimeError(
                        f"evaluation failed at generation {gen}, individual {i}: {exc}"
                    ) from exc
            raise

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------


def _rank_population(genomes: list[np.ndarray], objs: list[ObjectiveVector]) -> list[RankedIndividual]:
    fronts = non_dominated_sort(objs)
    ranked: list[RankedIndividual] = [None] * len(genomes)  # type: ignore[list-item]
    for f, members in enumerate(fronts, start=1):
        crowd = crowding_distance([objs[i] for i in members])
        for pos, i in enumerate(members):
            ranked[i] = RankedIndividual(genomes[i], objs[i], f, float(crowd[pos]))
    return ranked


def _to_front_points(genomes: list[np.ndarray], objs: list[ObjectiveVector]) -> list[FrontPoint]:
    return [
        FrontPoint(qos=o.qos, cost=o.cost, genome=tuple(float(x) for x in g), source="nsga2")
        for g, o in zip(genomes, objs)
    ]


def run(scenario: Scenario, config: EaConfig) -> tuple[ParetoFront, list[GenerationStats]]:
    """Full evolutionary run. Returns the archive front and one stats row per
    generation (row 0 describes the seeded initial population)."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    evaluator = Evaluator(scenario, config.qos_mode)
    n_types = evaluator.n_types
    box = NormalizationBox(
        0.0,
        max(evaluator.qos_upper_bound(), 1.0),
        0.0,
        max(evaluator.cost_upper_bound(), 1.0),
    )
    pool = _EvalPool(scenario, config.qos_mode, config.workers)
    t0 = time.perf_counter()
    history: list[GenerationStats] = []
    try:
        genomes = seed_population(scenario, config, rng)
        objs = pool.evaluate(genomes, gen=0)
        evals = len(genomes)
        archive = merge_nondominated(_to_front_points(genomes, objs))

        def log(gen: int) -> None:
            history.append(
                GenerationStats(
                    gen=gen,
                    hv=hypervolume(archive, box),
                    front_size=len(archive),
                    evals=evals,
                    wall_ms=(time.perf_counter() - t0) * 1000.0,
                )
            )

        log(0)
        for gen in range(1, config.generations + 1):
            ranked = _rank_population(genomes, objs)
            offspring: list[np.ndarray] = []
            for _ in range(config.population_size // 2):
                pa = tournament_select(ranked, rng)
                pb = tournament_select(ranked, rng)
                ca, cb = two_point_crossover(pa, pb, rng, p_crossover=config.p_crossover)
                offspring.append(mutate(ca, config, rng, n_types))
                offspring.append(mutate(cb, config, rng, n_types))
            off_objs = pool.evaluate(offspring, gen=gen)
            evals += len(offspring)

            merged_g = genomes + offspring
            merged_o = objs + off_objs
            fronts = non_dominated_sort(merged_o)
            archive = merge_nondominated(
                archive + _to_front_points([merged_g[i] for i in fronts[0]], [merged_o[i] for i in fronts[0]])
            )

            next_g: list[np.ndarray] = []
            next_o: list[ObjectiveVector] = []
            for members in fronts:
                room = config.population_size - len(next_g)
                if room == 0:
                    break
                if len(members) > room:
                    crowd = crowding_distance([merged_o[i] for i in members])
                    keep = np.argsort(-crowd, kind="stable")[:room]
                    members = [members[int(i)] for i in keep]
                next_g.extend(merged_g[i] for i in members)
                next_o.extend(merged_o[i] for i in members)
            genomes, objs = next_g, next_o
            log(gen)
    finally:
        pool.close()
    front = ParetoFront(points=tuple(archive), label=f"nsga2/seed={config.seed}")
    return front, history


class Nsga2Solver(BaseEstimator):
    """Estimator-style wrapper around run(); fit(scenario) exposes front_,
    history_, and config_."""

    def __init__(
        self,
        population_size: int = 72,
        generations: int = 200,
        p_crossover: float = 0.7,
        p_mutation_per_gene: float = 0.1,
        pi_a: float = 1.0 / 3.0,
        pi_b: float = 1.0 / 3.0,
        sigma: float = 0.1,
        qos_mode: str = "literal",
        seed: int = 0,
        workers: int = 1,
        seed_fraction: float = 1.0,
    ):
        self.population_size = population_size
        self.generations = generations
        self.p_crossover = p_crossover
        self.p_mutation_per_gene = p_mutation_per_gene
        self.pi_a = pi_a
        self.pi_b = pi_b
        self.sigma = sigma
        self.qos_mode = qos_mode
        self.seed = seed
        self.workers = workers
        self.seed_fraction = seed_fraction

    def _build_config(self) -> EaConfig:
        return EaConfig(
            population_size=self.population_size,
            generations=self.generations,
            p_crossover=self.p_crossover,
            p_mutation_per_gene=self.p_mutation_per_gene,
            pi_a=self.pi_a,
            pi_b=self.pi_b,
            sigma=self.sigma,
            qos_mode=self.qos_mode,
            seed=self.seed,
            workers=self.workers,
            seed_fraction=self.seed_fraction,
        )

    def fit(self, scenario: Scenario, y=None) -> "Nsga2Solver":
        self.config_ = self._build_config()
        self.front_, self.history_ = run(scenario, self.config_)
        return self
