"""Density raster geometry.

Cells are addressed 1-based as ``(i, j)``: row 1 is the southernmost row and
column 1 the westernmost column. ``Raster.values`` stores them 0-based, so
cell ``(i, j)`` lives at ``values[i - 1, j - 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geo import EARTH_RADIUS_KM, BoundingBox, GeoPoint

# Europe; the grid size and bandwidth elsewhere follow the published maps
DEFAULT_BOUNDS = BoundingBox(35.0, 72.0, -25.0, 45.0)
DEFAULT_ROWS = 500
DEFAULT_COLS = 1000


@dataclass(frozen=True)
class RasterSpec:
    bounds: BoundingBox
    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise ValueError("rows and cols must be integers")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"rows and cols must be >= 1, got {self.rows}x{self.cols}")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))

    @property
    def dlat(self) -> float:
        return (self.bounds.north - self.bounds.south) / self.rows

    @property
    def dlon(self) -> float:
        return (self.bounds.east - self.bounds.west) / self.cols

    @property
    def shape(self):
        return (self.rows, self.cols)

    def row_lats(self) -> np.ndarray:
        """Cell-centre latitudes for rows 1..rows (south to north)."""
        i = np.arange(1, self.rows + 1, dtype=float)
        b = self.bounds
        return b.south + (i - 0.5) * ((b.north - b.south) / self.rows)

    def col_lons(self) -> np.ndarray:
        """Cell-centre longitudes for columns 1..cols (west to east)."""
        j = np.arange(1, self.cols + 1, dtype=float)
        b = self.bounds
        return b.west + (j - 0.5) * ((b.east - b.west) / self.cols)

    def row_areas(self, radius: float = EARTH_RADIUS_KM) -> np.ndarray:
        return np.array([cell_area(self, i, radius) for i in range(1, self.rows + 1)])


def _check_row(spec: RasterSpec, i: int):
    if not 1 <= i <= spec.rows:
        raise IndexError(f"row {i} outside 1..{spec.rows}")


def cell_center(spec: RasterSpec, i: int, j: int) -> GeoPoint:
    _check_row(spec, i)
    if not 1 <= j <= spec.cols:
        raise IndexError(f"column {j} outside 1..{spec.cols}")
    b = spec.bounds
    lat = b.south + (i - 0.5) * ((b.north - b.south) / spec.rows)
    lon = b.west + (j - 0.5) * ((b.east - b.west) / spec.cols)
    return GeoPoint(lat, lon)


def _row_edges(spec: RasterSpec, i: int):
    b = spec.bounds
    step = (b.north - b.south) / spec.rows
    bottom = b.south + (i - 1) * step
    top = b.north if i == spec.rows else b.south + i * step
    return bottom, top


def cell_area(spec: RasterSpec, i: int, radius: float = EARTH_RADIUS_KM) -> float:
    """Spherical area in km² of any cell in row ``i`` (the area does not depend on the column)."""
    _check_row(spec, i)
    bottom, top = _row_edges(spec, i)
    dlam = math.radians(spec.bounds.east - spec.bounds.west) / spec.cols
    return radius * radius * dlam * (math.sin(math.radians(top)) - math.sin(math.radians(bottom)))


@dataclass
class Raster:
    spec: RasterSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise ValueError(f"values shape {values.shape} != {self.spec.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("raster values must be finite and non-negative")
        self.values = values

    @classmethod
    def zeros(cls, spec: RasterSpec) -> "Raster":
        return cls(spec, np.zeros(spec.shape))

    def at(self, i: int, j: int) -> float:
        """Density of cell ``(i, j)`` using 1-based indices."""
        _check_row(self.spec, i)
        if not 1 <= j <= self.spec.cols:
            raise IndexError(f"column {j} outside 1..{self.spec.cols}")
        return float(self.values[i - 1, j - 1])

    def total_mass(self, radius: float = EARTH_RADIUS_KM) -> float:
        """Sum of density times cell area over the raster."""
        return float(np.sum(self.values * self.spec.row_areas(radius)[:, None]))
