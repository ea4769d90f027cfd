import numpy as np
import pytest

from conftest import brute_force_merge, mc_hypervolume
from rsudeploy import (
    FrontPoint,
    MetricError,
    NormalizationBox,
    default_box,
    hypervolume,
    merge_nondominated,
    read_front_csv,
    relative_hypervolume,
    write_front_csv,
    write_metrics_csv,
    write_run_log_csv,
)
from rsudeploy.metrics import FRONT_HEADER, dominates_point
from rsudeploy.nsga2 import GenerationStats


def fp(q, c, genome=()):
    return FrontPoint(qos=q, cost=c, genome=genome)


def test_dominates_point_cases():
    assert dominates_point(fp(10, 100), fp(5, 200))
    assert dominates_point(fp(10, 100), fp(10, 200))
    assert dominates_point(fp(12, 100), fp(10, 100))
    assert not dominates_point(fp(10, 100), fp(10, 100))
    assert not dominates_point(fp(10, 100), fp(12, 50))
    assert not dominates_point(fp(5, 200), fp(10, 100))


def test_merge_drops_dominated_and_duplicates():
    pts = [fp(10, 100), fp(5, 200), fp(10, 100), fp(8, 100), fp(12, 300)]
    merged = merge_nondominated(pts)
    assert {(p.qos, p.cost) for p in merged} == {(10, 100), (12, 300)}
    assert len(merged) == 2


def test_merge_orders_by_falling_qos():
    pts = [fp(10, 100), fp(12, 300), fp(11, 200)]
    merged = merge_nondominated(pts)
    qoses = [p.qos for p in merged]
    assert qoses == sorted(qoses, reverse=True)
    costs = [p.cost for p in merged]
    assert costs == sorted(costs, reverse=True)


def test_merge_matches_pairwise_filter():
    rng = np.random.default_rng(31)
    for trial in range(10):
        pts = [fp(float(q), float(c)) for q, c in rng.uniform(0, 100, size=(200, 2))]
        got = {(p.qos, p.cost) for p in merge_nondominated(pts)}
        want = {(p.qos, p.cost) for p in brute_force_merge(pts)}
        assert got == want


def test_merge_idempotent():
    rng = np.random.default_rng(8)
    pts = [fp(float(q), float(c)) for q, c in rng.uniform(0, 10, size=(50, 2))]
    once = merge_nondominated(pts)
    twice = merge_nondominated(once)
    assert [(p.qos, p.cost) for p in once] == [(p.qos, p.cost) for p in twice]


def test_merge_empty_is_empty():
    assert merge_nondominated([]) == []


# -- normalization box -------------------------------------------------------


def test_default_box_contains_points_strictly():
    pts = [fp(0, 0), fp(100, 50)]
    box = default_box(pts)
    assert box.qos_min < 0 < 100 < box.qos_max
    assert box.cost_min < 0 < 50 < box.cost_max


def test_default_box_degenerate_span():
    box = default_box([fp(5, 5)])
    assert box.qos_max > box.qos_min
    assert box.cost_max > box.cost_min
    box.normalize([fp(5, 5)])


def test_default_box_empty_raises():
    with pytest.raises(MetricError):
        default_box([])


def test_box_rejects_empty_range():
    with pytest.raises(MetricError):
        NormalizationBox(0, 0, 0, 1)
    with pytest.raises(MetricError):
        NormalizationBox(0, 1, 2, 2)


def test_normalize_rejects_outside_point():
    box = NormalizationBox(0, 1, 0, 1)
    with pytest.raises(MetricError, match="outside"):
        box.normalize([fp(2.0, 0.5)])


# -- hypervolume -------------------------------------------------------------

UNIT = NormalizationBox(0, 1, 0, 1)


def test_hypervolume_empty_front():
    assert hypervolume([], UNIT) == 0.0


def test_hypervolume_corner_cases():
    assert hypervolume([fp(1.0, 0.0)], UNIT) == pytest.approx(1.0)
    assert hypervolume([fp(0.0, 1.0)], UNIT) == pytest.approx(0.0)
    assert hypervolume([fp(0.5, 0.5)], UNIT) == pytest.approx(0.25)


def test_hypervolume_two_point_staircase():
    pts = [fp(1.0, 1.0), fp(0.5, 0.25)]
    # 0.5 * (1 - 0.25) + (1.0 - 0.5) * (1 - 1) = 0.375... second point adds
    # the strip qos in (0.5, 1.0] at cost floor 1.0 -> zero width there
    assert hypervolume(pts, UNIT) == pytest.approx(0.375)


def test_hypervolume_permutation_invariant():
    rng = np.random.default_rng(12)
    pts = [fp(float(q), float(c)) for q, c in rng.random((20, 2))]
    base = hypervolume(pts, UNIT)
    for _ in range(5):
        perm = list(pts)
        rng.shuffle(perm)
        assert hypervolume(perm, UNIT) == pytest.approx(base, rel=1e-12)


def test_hypervolume_ignores_dominated_points():
    pts = [fp(0.8, 0.4), fp(0.5, 0.5), fp(0.1, 0.9)]
    assert hypervolume(pts, UNIT) == pytest.approx(hypervolume([fp(0.8, 0.4)], UNIT))


def test_hypervolume_grows_with_nondominated_addition():
    rng = np.random.default_rng(3)
    for _ in range(20):
        pts = [fp(float(q), float(c)) for q, c in rng.random((6, 2))]
        before = hypervolume(pts, UNIT)
        extra = fp(float(rng.random()), float(rng.random()))
        after = hypervolume(pts + [extra], UNIT)
        assert after >= before - 1e-12


def test_hypervolume_matches_grid_estimate():
    rng = np.random.default_rng(44)
    for _ in range(10):
        k = int(rng.integers(2, 15))
        pts = [fp(float(q), float(c)) for q, c in rng.random((k, 2))]
        exact = hypervolume(pts, UNIT)
        approx = mc_hypervolume(pts, UNIT, grid=512)
        assert exact == pytest.approx(approx, abs=0.01)


def test_hypervolume_point_outside_box_raises():
    with pytest.raises(MetricError):
        hypervolume([fp(1.5, 0.5)], UNIT)


# -- relative hypervolume ----------------------------------------------------


def test_relative_hypervolume_self_is_one():
    pts = [fp(10, 5), fp(20, 9), fp(25, 14)]
    assert relative_hypervolume(pts, pts) == pytest.approx(1.0)


def test_relative_hypervolume_subset_at_most_one():
    rng = np.random.default_rng(7)
    ref = [fp(float(q), float(c)) for q, c in rng.uniform(0, 50, size=(30, 2))]
    sub = ref[::3]
    r = relative_hypervolume(sub, ref)
    assert 0.0 <= r <= 1.0 + 1e-12


def test_relative_hypervolume_empty_reference_raises():
    with pytest.raises(MetricError):
        relative_hypervolume([fp(1, 1)], [])


def test_relative_hypervolume_zero_reference_raises():
    box = NormalizationBox(0, 1, 0, 1)
    with pytest.raises(MetricError, match="zero"):
        relative_hypervolume([fp(0.5, 0.5)], [fp(0.0, 1.0)], box=box)


# -- CSV artifacts -----------------------------------------------------------


def test_front_csv_round_trip(tmp_path):
    pts = [
        fp(2500.0, 100.0, genome=(1.25, 0.0, 3.9)),
        fp(0.0, 0.0, genome=(0.0, 0.0, 0.0)),
        fp(123.456789012345, 77.7),
    ]
    path = tmp_path / "front.csv"
    write_front_csv(path, pts)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(FRONT_HEADER) == "qos,cost,genome"
    back = read_front_csv(path)
    assert len(back) == 3
    for a, b in zip(pts, back):
        assert b.qos == a.qos and b.cost == a.cost  # repr round-trip is exact
        assert b.genome == a.genome


def test_front_csv_empty_front(tmp_path):
    path = tmp_path / "empty.csv"
    write_front_csv(path, [])
    assert path.read_text() == "qos,cost,genome\n"
    assert read_front_csv(path) == []


def test_read_front_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("cost,qos,genome\n1,2,\n")
    with pytest.raises(MetricError, match="header"):
        read_front_csv(path)


def test_read_front_csv_reports_bad_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("qos,cost,genome\n1.0,2.0,0.5\nnot-a-number,2.0,\n")
    with pytest.raises(MetricError, match=r":3:"):
        read_front_csv(path)


def test_read_front_csv_sets_source(tmp_path):
    path = tmp_path / "s.csv"
    write_front_csv(path, [fp(1.0, 2.0)])
    back = read_front_csv(path, source="alg-x")
    assert back[0].source == "alg-x"


def test_run_log_csv(tmp_path):
    hist = [
        GenerationStats(gen=0, hv=0.1, front_size=3, evals=72, wall_ms=5.0),
        GenerationStats(gen=1, hv=0.2, front_size=4, evals=144, wall_ms=9.5),
    ]
    path = tmp_path / "run_log.csv"
    write_run_log_csv(path, hist)
    lines = path.read_text().splitlines()
    assert lines[0] == "gen,hv,front_size,evals,wall_ms"
    assert lines[1].startswith("0,0.1,3,72,")
    assert len(lines) == 3


def test_metrics_csv(tmp_path):
    path = tmp_path / "metrics.csv"
    write_metrics_csv(path, [("inst", "nsga2", 0, 0.5, 1.0, 12)])
    lines = path.read_text().splitlines()
    assert lines[0] == "instance,algorithm,run,hv,rhv,front_size"
    assert lines[1] == "inst,nsga2,0,0.5,1.0,12"
