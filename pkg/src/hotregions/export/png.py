"""Standalone PNG rendering: one raster cell per pixel, north up."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from ..colors import KMZ_ALPHA, ColorRamp, colorize_raster
from ..density import PointSet
from ..raster import Raster, RasterSpec
from .borders import load_borders

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderOptions:
    draw_points: bool = False
    point_radius_px: int = 2
    point_color: tuple[int, int, int, int] = (0, 0, 0, 255)
    borders: str | None = None
    border_color: tuple[int, int, int, int] = (90, 90, 90, 255)
    overlay_alpha: int = KMZ_ALPHA

    def __post_init__(self):
        if self.draw_points and self.point_radius_px < 1:
            raise ValueError("point_radius_px must be >= 1 when drawing points")
        if not 0 <= self.overlay_alpha <= 255:
            raise ValueError("overlay_alpha must be in 0..255")


def pixel_xy(spec: RasterSpec, lat, lon):
    """Continuous pixel coordinates; integer values fall on pixel centres."""
    b = spec.bounds
    x = (np.asarray(lon, dtype=float) - b.west) / spec.dlon - 0.5
    y = (b.north - np.asarray(lat, dtype=float)) / spec.dlat - 0.5
    return x, y


def pixel_to_latlon(spec: RasterSpec, x, y):
    b = spec.bounds
    lon = b.west + (np.asarray(x, dtype=float) + 0.5) * spec.dlon
    lat = b.north - (np.asarray(y, dtype=float) + 0.5) * spec.dlat
    return lat, lon


def raster_image(raster: Raster, ramp: ColorRamp, transparent_zero: bool = False) -> np.ndarray:
    """Colourised raster flipped so that image row 0 is the northernmost raster row."""
    return np.ascontiguousarray(colorize_raster(raster, ramp, transparent_zero)[::-1])


def _draw_borders(draw: ImageDraw.ImageDraw, spec: RasterSpec, path, color):
    for line in load_borders(path):
        arr = np.asarray(line, dtype=float)
        x, y = pixel_xy(spec, arr[:, 1], arr[:, 0])
        # break lines where they jump across the antimeridian
        breaks = np.nonzero(np.abs(np.diff(arr[:, 0])) > 180.0)[0] + 1
        for seg in np.split(np.arange(arr.shape[0]), breaks):
            if seg.size >= 2:
                draw.line(list(zip(x[seg].tolist(), y[seg].tolist())), fill=tuple(color), width=1)


def _draw_points(draw, spec: RasterSpec, points: PointSet, opts: RenderOptions) -> int:
    b = spec.bounds
    inside = (points.lat >= b.south) & (points.lat <= b.north) & (points.lon >= b.west) & (points.lon <= b.east)
    skipped = int(np.count_nonzero(~inside))
    if skipped:
        log.warning("%d point(s) outside the map bounds were not drawn", skipped)
    x, y = pixel_xy(spec, points.lat[inside], points.lon[inside])
    r = opts.point_radius_px
    for px, py in zip(x.tolist(), y.tolist()):
        draw.ellipse((px - r, py - r, px + r, py + r), fill=tuple(opts.point_color))
    return skipped


def encode_png(rgba: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgba, "RGBA").save(buf, format="PNG")
    return buf.getvalue()


def render_png(raster: Raster, ramp: ColorRamp, points=(), opts: RenderOptions = RenderOptions()) -> bytes:
    """8-bit RGBA PNG of the coloured raster with optional borders and point markers.

    Image size is ``cols x rows``; pixel ``(x, y)`` shows cell
    ``(rows - y, x + 1)``. Borders are stroked first, points on top.
    """
    img = Image.fromarray(raster_image(raster, ramp), "RGBA")
    if opts.borders or opts.draw_points:
        draw = ImageDraw.Draw(img)
        if opts.borders:
            _draw_borders(draw, raster.spec, opts.borders, opts.border_color)
        if opts.draw_points:
            _draw_points(draw, raster.spec, PointSet.from_points(points), opts)
    return encode_png(np.asarray(img))
