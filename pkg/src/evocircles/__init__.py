"""Circle detection on edge maps via discrete differential evolution."""

__version__ = "0.1.0"

from .dde import DdeConfig, EvolutionResult, evolve
from .detector import (
    Detection,
    DetectorConfig,
    approximate_shape,
    detect_circle,
    detect_multiple,
    edge_hit,
    mask_detected,
    objective_j,
)
from .edges import (
    CannyParams,
    EdgeMap,
    GrayImage,
    canny_edges,
    load_edge_map,
    load_gray_image,
    save_edge_map,
    save_gray_image,
)
from .evaluation import (
    BenchReport,
    GroundTruth,
    ScoreWeights,
    error_score,
    generate_synthetic,
    is_success,
    random_circles,
    run_benchmark,
)
from .geometry import Circle, TestPointSet, candidate_to_circle, circle_from_points, rasterize_circle

__all__ = [
    "__version__",
    "BenchReport", "CannyParams", "Circle", "DdeConfig", "Detection",
    "DetectorConfig", "EdgeMap", "EvolutionResult", "GrayImage", "GroundTruth",
    "ScoreWeights", "TestPointSet",
    "approximate_shape", "candidate_to_circle", "canny_edges", "circle_from_points",
    "detect_circle", "detect_multiple", "edge_hit", "error_score", "evolve",
    "generate_synthetic", "is_success", "load_edge_map", "load_gray_image",
    "mask_detected", "objective_j", "random_circles", "rasterize_circle",
    "run_benchmark", "save_edge_map", "save_gray_image",
]
