"""Traversability mapping from static structure, human trails and occlusion ordering."""

from ._core import (
    CellState,
    PoseGraph,
    SceneConfig,
    TraversabilityMap,
    builtin_config,
    estimate_depth,
    evaluate_map,
    fuse,
    ground_truth_map,
    parse_scenario,
    plan_path,
    run_ablation,
    sample_queries,
    simulate_frame_count,
)

__all__ = [
    "CellState",
    "PoseGraph",
    "SceneConfig",
    "TraversabilityMap",
    "builtin_config",
    "estimate_depth",
    "evaluate_map",
    "fuse",
    "ground_truth_map",
    "parse_scenario",
    "plan_path",
    "run_ablation",
    "sample_queries",
    "simulate_frame_count",
]
