"""Genome decoding and the two deployment objectives.

A candidate deployment is a float vector with one gene per segment. The
integer part of gene i selects the RSU type on segment i (0 = no RSU,
1..k = catalog type) and the fractional part is the position along the
segment from endpoint_a. Objectives: service time delivered per traffic
period (maximize, vehicle-seconds) and total hardware cost (minimize, USD).

Where circles overlap, covered road is credited to exactly one RSU: ties are
broken toward the larger radio range, then the lower own-segment row, then
the lower relative position. QoS modes differ in how an RSU's max-user limit
enters: "literal" floors each RSU's contribution at its MU value, "capped"
scales the contribution down by MU over the vehicles competing for it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .geometry import PlacedRsu, ProjectedNetwork, coverage_arrays
from .scenario import Scenario
from .validation import check_choice

QOS_MODES = ("literal", "capped")


class GenomeError(ValueError):
    """Genome vector malformed for the scenario at hand."""


class ObjectiveVector(NamedTuple):
    qos: float
    cost: float


@dataclass(frozen=True)
class Deployment:
    placements: tuple[PlacedRsu, ...]
    cost_usd: float


class Evaluator:
    """Decodes genomes against one scenario and scores both objectives.

    Builds the planar projection once; evaluate() is the hot path and stays
    allocation-light. Instances are safe to share across calls but not across
    processes (pickle the scenario instead and rebuild per worker).
    """

    def __init__(self, scenario: Scenario, qos_mode: str = "literal"):
        check_choice("qos_mode", qos_mode, QOS_MODES)
        self.scenario = scenario
        self.qos_mode = qos_mode
        self.proj = ProjectedNetwork(scenario.network)
        self.n_segments = self.proj.n_segments
        self.n_types = len(scenario.catalog)
        app = scenario.application.id
        self.err_by_type = np.array([t.err_m for t in scenario.catalog])
        self.cost_by_type = np.array([t.cost_usd for t in scenario.catalog])
        self.mu_by_type = np.array(
            [float(scenario.mu.lookup(t.id, app)) for t in scenario.catalog]
        )

    # -- genome handling ----------------------------------------------------

    def check_genome(self, genome: np.ndarray) -> np.ndarray:
        g = np.asarray(genome, dtype=float)
        if g.ndim != 1 or g.shape[0] != self.n_segments:
            raise GenomeError(
                f"genome length {g.shape}, expected ({self.n_segments},)"
            )
        if not np.all(np.isfinite(g)):
            raise GenomeError("genome contains non-finite values")
        if (g < 0.0).any() or (g >= self.n_types + 1).any():
            raise GenomeError(f"genes must lie in [0, {self.n_types + 1})")
        return g

    def decode(self, genome: np.ndarray) -> Deployment:
        g = self.check_genome(genome)
        ints = np.floor(g).astype(np.int64)
        fracs = g - ints
        rows = np.flatnonzero(ints > 0)
        placements = tuple(
            PlacedRsu(
                segment_id=int(self.proj.segment_ids[r]),
                relative_pos=float(fracs[r]),
                type_id=int(ints[r]),
            )
            for r in rows
        )
        cost = float(self.cost_by_type[ints[rows] - 1].sum()) if rows.size else 0.0
        return Deployment(placements=placements, cost_usd=cost)

    def encode(self, placements: Iterable[PlacedRsu]) -> np.ndarray:
        genome = np.zeros(self.n_segments)
        top = np.nextafter(1.0, 0.0)
        for p in placements:
            row = self.proj.row_of(p.segment_id)
            if genome[row] != 0.0:
                raise GenomeError(f"segment {p.segment_id} placed twice")
            if not 1 <= p.type_id <= self.n_types:
                raise GenomeError(f"unknown RSU type {p.type_id}")
            if not 0.0 <= p.relative_pos <= 1.0:
                raise GenomeError(f"relative_pos {p.relative_pos} outside [0, 1]")
            # the sum may round up to the next integer, which would change
            # the encoded type; clamp to just below it
            val = p.type_id + min(p.relative_pos, top)
            genome[row] = min(val, np.nextafter(p.type_id + 1.0, 0.0))
        return genome

    # -- objective evaluation -------------------------------------------------

    def _credit(self, genome: np.ndarray):
        """Raw credited service time and competing-vehicle totals per RSU.

        Returns (rows, type_ids, raw, vehicles_competing), where raw[i] is the
        de-duplicated vehicle-seconds RSU i serves and vehicles_competing[i]
        sums vehicle counts of the segments it got credit on.
        """
        ints = np.floor(genome).astype(np.int64)
        rows = np.flatnonzero(ints > 0)
        if rows.size == 0:
            return rows, ints[rows], np.empty(0), np.empty(0)
        type_ids = ints[rows]
        fracs = genome[rows] - type_ids
        errs = self.err_by_type[type_ids - 1]
        lo, hi, valid = coverage_arrays(self.proj, rows, fracs, errs)

        nr = rows.size
        raw = np.zeros(nr)
        competing = np.zeros(nr)
        service = self.proj.service_full
        vehicles = self.proj.vehicles
        counts = valid.sum(axis=0)

        single = np.flatnonzero(counts == 1)
        if single.size:
            owner = valid[:, single].argmax(axis=0)
            width = hi[owner, single] - lo[owner, single]
            np.add.at(raw, owner, width * service[single])
            np.add.at(competing, owner, vehicles[single])

        multi = np.flatnonzero(counts >= 2)
        if multi.size:
            # Credit priority: larger range, then lower own-segment row,
            # then lower relative position.
            order = np.lexsort((fracs, rows, -errs))
            rank = np.empty(nr, dtype=float)
            rank[order] = np.arange(nr, dtype=float)

            # Per contested segment, gather its covering RSUs in priority
            # order into a padded (M, mmax) block, then split the segment at
            # every interval boundary: each elementary piece belongs to the
            # highest-priority interval containing its midpoint.
            m = multi.size
            mmax = int(counts[multi].max())
            rank_col = np.where(valid[:, multi], rank[:, None], np.inf)
            padded = np.argsort(rank_col, axis=0, kind="stable")[:mmax].T  # (M, mmax)
            pad_ok = np.arange(mmax)[None, :] < counts[multi][:, None]
            col = multi[:, None]
            los = np.where(pad_ok, lo[padded, col], 2.0)
            his = np.where(pad_ok, hi[padded, col], 2.0)
            edges = np.sort(np.concatenate([los, his], axis=1), axis=1)
            widths = np.diff(edges, axis=1)  # (M, 2*mmax - 1)
            mids = 0.5 * (edges[:, :-1] + edges[:, 1:])
            contain = (
                (mids[:, :, None] >= los[:, None, :])
                & (mids[:, :, None] < his[:, None, :])
                & pad_ok[:, None, :]
            )
            owner_slot = contain.argmax(axis=2)  # first True = top priority
            sel = contain.any(axis=2) & (widths > 0.0)
            seg_grid = np.broadcast_to(np.arange(m)[:, None], sel.shape)
            owner_rsu = padded[seg_grid[sel], owner_slot[sel]]
            np.add.at(raw, owner_rsu, widths[sel] * service[multi][seg_grid[sel]])
            slot_credit = np.zeros((m, mmax))
            np.add.at(slot_credit, (seg_grid[sel], owner_slot[sel]), widths[sel])
            got = slot_credit > 0.0
            np.add.at(
                competing,
                padded[got],
                np.broadcast_to(vehicles[multi][:, None], got.shape)[got],
            )
        return rows, type_ids, raw, competing

    def eval_qos(self, genome: np.ndarray) -> float:
        g = self.check_genome(genome)
        rows, type_ids, raw, competing = self._credit(g)
        if rows.size == 0:
            return 0.0
        mu = self.mu_by_type[type_ids - 1]
        if self.qos_mode == "literal":
            return float(np.maximum(mu, raw).sum())
        factor = np.where(competing > 0.0, np.minimum(1.0, mu / np.maximum(competing, 1e-300)), 1.0)
        return float((raw * factor).sum())

    def eval_cost(self, genome: np.ndarray) -> float:
        g = self.check_genome(genome)
        ints = np.floor(g).astype(np.int64)
        placed = ints > 0
        if not placed.any():
            return 0.0
        return float(self.cost_by_type[ints[placed] - 1].sum())

    def evaluate(self, genome: np.ndarray) -> ObjectiveVector:
        g = self.check_genome(genome)
        rows, type_ids, raw, competing = self._credit(g)
        if rows.size == 0:
            return ObjectiveVector(0.0, 0.0)
        cost = float(self.cost_by_type[type_ids - 1].sum())
        mu = self.mu_by_type[type_ids - 1]
        if self.qos_mode == "literal":
            qos = float(np.maximum(mu, raw).sum())
        else:
            factor = np.where(
                competing > 0.0, np.minimum(1.0, mu / np.maximum(competing, 1e-300)), 1.0
            )
            qos = float((raw * factor).sum())
        return ObjectiveVector(qos, cost)

    # -- bounds (used for hypervolume reference boxes) ------------------------

    def qos_upper_bound(self) -> float:
        return float(self.proj.service_full.sum() + self.n_segments * self.mu_by_type.max())

    def cost_upper_bound(self) -> float:
        return float(self.n_segments * self.cost_by_type.max())


# Convenience one-shot wrappers; build an Evaluator for repeated use.


def decode(scenario: Scenario, genome: np.ndarray) -> Deployment:
    return Evaluator(scenario).decode(genome)


def evaluate(scenario: Scenario, genome: np.ndarray, qos_mode: str = "literal") -> ObjectiveVector:
    return Evaluator(scenario, qos_mode).evaluate(genome)


def eval_qos(scenario: Scenario, genome: np.ndarray, qos_mode: str = "literal") -> float:
    return Evaluator(scenario, qos_mode).eval_qos(genome)


def eval_cost(scenario: Scenario, genome: np.ndarray) -> float:
    return Evaluator(scenario).eval_cost(genome)
