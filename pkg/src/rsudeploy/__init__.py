"""Bi-objective roadside-unit deployment planning toolkit."""

from .geometry import CoverageInterval, PlacedRsu, ProjectedNetwork, covered_intervals, project_network
from .heuristics import (
    KnapsackItem,
    KnapsackPlanner,
    PageRankPlanner,
    PrGraph,
    knapsack_front,
    pagerank_constructive,
    randomized_knapsack,
    rank_segments,
    weighted_pagerank,
)
from .metrics import (
    FrontPoint,
    MetricError,
    NormalizationBox,
    ParetoFront,
    default_box,
    hypervolume,
    merge_nondominated,
    read_front_csv,
    relative_hypervolume,
    write_front_csv,
    write_metrics_csv,
    write_run_log_csv,
)
from .nsga2 import (
    EaConfig,
    GenerationStats,
    Nsga2Solver,
    RankedIndividual,
    crowding_distance,
    dominates,
    mutate,
    non_dominated_sort,
    run,
    seed_population,
    tournament_select,
    two_point_crossover,
)
from .objectives import Deployment, Evaluator, GenomeError, ObjectiveVector, decode, evaluate
from .scenario import (
    ApplicationProfile,
    GeometryParams,
    MaxUsersTable,
    Point,
    RoadNetwork,
    RsuType,
    Scenario,
    Segment,
    TrafficParams,
    apply_traffic_pattern,
    build_scenario,
    default_applications,
    default_catalog,
    default_mu_table,
    generate_instance,
    haversine_m,
    load_scenario,
    save_scenario,
)
from .validation import SchemaError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "ApplicationProfile",
    "CoverageInterval",
    "Deployment",
    "EaConfig",
    "Evaluator",
    "FrontPoint",
    "GenerationStats",
    "GenomeError",
    "GeometryParams",
    "KnapsackItem",
    "KnapsackPlanner",
    "MaxUsersTable",
    "MetricError",
    "NormalizationBox",
    "Nsga2Solver",
    "ObjectiveVector",
    "PageRankPlanner",
    "ParetoFront",
    "PlacedRsu",
    "Point",
    "PrGraph",
    "ProjectedNetwork",
    "RankedIndividual",
    "RoadNetwork",
    "RsuType",
    "Scenario",
    "SchemaError",
    "Segment",
    "TrafficParams",
    "ValidationError",
    "apply_traffic_pattern",
    "build_scenario",
    "covered_intervals",
    "crowding_distance",
    "decode",
    "default_applications",
    "default_box",
    "default_catalog",
    "default_mu_table",
    "dominates",
    "evaluate",
    "generate_instance",
    "haversine_m",
    "hypervolume",
    "knapsack_front",
    "load_scenario",
    "merge_nondominated",
    "mutate",
    "non_dominated_sort",
    "pagerank_constructive",
    "project_network",
    "randomized_knapsack",
    "rank_segments",
    "read_front_csv",
    "relative_hypervolume",
    "run",
    "save_scenario",
    "seed_population",
    "tournament_select",
    "two_point_crossover",
    "weighted_pagerank",
    "write_front_csv",
    "write_metrics_csv",
    "write_run_log_csv",
]
