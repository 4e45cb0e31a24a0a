"""Boundary metrics, covers and capacity-dimension witnesses for CAT(0)
model spaces: trees, the line, the plane, the hyperbolic plane and
products of two of them."""

from .boundary import (
    MetricParams,
    SandwichConstants,
    comparison_bounds,
    estimate_R,
    gromov_product,
    gromov_product_boundary,
    moran_metric,
    rho_eps,
    sandwich_constants,
    visual_metric,
)
from .buildings import Building, build_building, preimage_components, pullback_cover
from .covers import Cover, CoverElement, CoverStats, cdim_profile, cover_stats, greedy_colored_cover
from .errors import CatboundError
from .experiments import ExperimentConfig, run_verification_suite
from .spaces import (
    AngleEnd,
    LineEnd,
    ProductEnd,
    SpaceSpec,
    TreeEnd,
    boundary_net,
    build_space,
    distance,
    parse_end,
    product_spec,
    ray_eval,
    tree_spec,
)

__version__ = "0.1.0"

__all__ = [
    "AngleEnd", "Building", "CatboundError", "Cover", "CoverElement", "CoverStats",
    "ExperimentConfig", "LineEnd", "MetricParams", "ProductEnd", "SandwichConstants", "SpaceSpec",
    "TreeEnd", "boundary_net", "build_building", "build_space", "cdim_profile", "comparison_bounds",
    "cover_stats", "distance", "estimate_R", "greedy_colored_cover", "gromov_product",
    "gromov_product_boundary", "moran_metric", "parse_end", "preimage_components", "product_spec",
    "pullback_cover", "ray_eval", "rho_eps", "run_verification_suite", "sandwich_constants",
    "tree_spec", "visual_metric",
]
