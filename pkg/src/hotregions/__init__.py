"""Kernel-density hot-region maps of weighted geographic points."""

__version__ = "0.1.0"

from .colors import ColorRamp, anchor_from_raster, colorize, colorize_raster
from .density import (
    KernelSpec,
    PointSet,
    WeightedPoint,
    density_brute_force,
    density_fast,
    kernel_eval,
    truncation_bound,
)
from .geo import EARTH_RADIUS_KM, BoundingBox, GeoPoint, great_circle_distance, haversine_km
from .raster import Raster, RasterSpec, cell_area, cell_center

__all__ = [
    "EARTH_RADIUS_KM",
    "BoundingBox",
    "ColorRamp",
    "GeoPoint",
    "KernelSpec",
    "PointSet",
    "Raster",
    "RasterSpec",
    "WeightedPoint",
    "anchor_from_raster",
    "cell_area",
    "cell_center",
    "colorize",
    "colorize_raster",
    "density_brute_force",
    "density_fast",
    "great_circle_distance",
    "haversine_km",
    "kernel_eval",
    "truncation_bound",
]
