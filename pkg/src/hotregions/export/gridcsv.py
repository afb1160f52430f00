"""Grid CSV: ``i,j,lat,lon,density``, one row per cell, row-major, 17 significant digits."""

from __future__ import annotations

import io
import os

import numpy as np

from ..geo import BoundingBox
from ..raster import Raster, RasterSpec

HEADER = "i,j,lat,lon,density"


def grid_csv_text(raster: Raster) -> str:
    spec = raster.spec
    lats = spec.row_lats()
    lons = spec.col_lons()
    lon_txt = ["%.17g" % v for v in lons]
    out = [HEADER]
    values = raster.values
    for i in range(spec.rows):
        lat_txt = "%.17g" % lats[i]
        row = values[i]
        prefix = f"{i + 1},"
        out.extend(
            f"{prefix}{j + 1},{lat_txt},{lon_txt[j]},{'%.17g' % row[j]}" for j in range(spec.cols)
        )
    out.append("")
    return "\n".join(out)


def write_grid_csv(raster: Raster, dest=None):
    """Write the grid to a path or text stream; with no destination return the text."""
    text = grid_csv_text(raster)
    if dest is None:
        return text
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)
    return None


def _infer_bounds(lats: np.ndarray, lons: np.ndarray) -> BoundingBox:
    if lats.size < 2 or lons.size < 2:
        raise ValueError("cannot infer bounds from a grid with a single row or column; pass bounds")
    dlat = (lats[-1] - lats[0]) / (lats.size - 1)
    dlon = (lons[-1] - lons[0]) / (lons.size - 1)
    raw = (lats[0] - dlat / 2, lats[-1] + dlat / 2, lons[0] - dlon / 2, lons[-1] + dlon / 2)
    # bounds are normally short decimals; snap away the reconstruction noise
    return BoundingBox(*(round(float(v), 9) for v in raw))


def read_grid_csv(source, bounds: BoundingBox | None = None) -> Raster:
    """Parse a grid CSV back into a :class:`Raster`.

    Bounds are taken from ``bounds`` or, failing that, reconstructed from the
    cell centres. Either way the centres in the file must match the grid.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    head, _, body = text.partition("\n")
    if head.strip() != HEADER:
        raise ValueError(f"grid CSV header must be {HEADER!r}, got {head.strip()!r}")
    data = np.loadtxt(io.StringIO(body), delimiter=",", dtype=float, ndmin=2)
    if data.size == 0:
        raise ValueError("grid CSV has no cells")
    i = data[:, 0].astype(np.int64)
    j = data[:, 1].astype(np.int64)
    rows, cols = int(i.max()), int(j.max())
    if data.shape[0] != rows * cols:
        raise ValueError(f"expected {rows * cols} cells for a {rows}x{cols} grid, found {data.shape[0]}")
    expect_i = np.repeat(np.arange(1, rows + 1), cols)
    expect_j = np.tile(np.arange(1, cols + 1), rows)
    if not (np.array_equal(i, expect_i) and np.array_equal(j, expect_j)):
        raise ValueError("grid CSV rows are not in row-major (i, then j) order")
    lats = data[::cols, 2]
    lons = data[:cols, 3]
    if bounds is None:
        bounds = _infer_bounds(lats, lons)
    spec = RasterSpec(bounds, rows, cols)
    tol_lat = 1e-9 * max(1.0, bounds.north - bounds.south)
    tol_lon = 1e-9 * max(1.0, bounds.east - bounds.west)
    if np.max(np.abs(spec.row_lats() - lats)) > tol_lat or np.max(np.abs(spec.col_lons() - lons)) > tol_lon:
        raise ValueError(f"cell centres in the grid CSV do not match bounds {bounds.as_tuple()}")
    return Raster(spec, data[:, 4].reshape(rows, cols))
