"""White / green / yellow / red density colouring with an absolute anchor.

The anchor ``g`` is the density painted pure green; yellow sits at ``2g`` and
red at ``5g`` and above. Because ``g`` is absolute rather than relative to
each raster's maximum, two maps coloured with the same ramp are comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .raster import Raster

RGB = tuple[int, int, int]

DEFAULT_STOPS: dict[str, RGB] = {
    "white": (255, 255, 255),
    "green": (0, 170, 0),
    "yellow": (255, 255, 0),
    "red": (255, 0, 0),
}

# multiples of the anchor at which each stop is reached
STOP_RATIOS = (0.0, 1.0, 2.0, 5.0)

PNG_ALPHA = 255
KMZ_ALPHA = 160


@dataclass(frozen=True)
class ColorRamp:
    anchor_green: float
    stops: tuple[RGB, RGB, RGB, RGB] = field(
        default=tuple(DEFAULT_STOPS[c] for c in ("white", "green", "yellow", "red"))
    )
    alpha: int = PNG_ALPHA
    discrete: bool = False

    def __post_init__(self):
        g = float(self.anchor_green)
        if not (math.isfinite(g) and g > 0):
            raise ValueError(f"anchor density must be positive, got {self.anchor_green}")
        object.__setattr__(self, "anchor_green", g)
        stops = tuple(tuple(int(v) for v in s) for s in self.stops)
        if len(stops) != 4 or any(len(s) != 3 or not all(0 <= v <= 255 for v in s) for s in stops):
            raise ValueError("stops must be four RGB triples with channels in 0..255")
        object.__setattr__(self, "stops", stops)
        if not 0 <= int(self.alpha) <= 255:
            raise ValueError(f"alpha must be in 0..255, got {self.alpha}")
        object.__setattr__(self, "alpha", int(self.alpha))

    @classmethod
    def from_config(cls, anchor_green: float, config: dict | None = None, **overrides) -> "ColorRamp":
        """Build a ramp from a config mapping with optional ``stops`` (by colour name), ``alpha``, ``discrete``."""
        config = dict(config or {})
        names = ("white", "green", "yellow", "red")
        stops = dict(DEFAULT_STOPS)
        stops.update({k: tuple(v) for k, v in (config.get("stops") or {}).items() if k in names})
        kwargs = {"stops": tuple(stops[n] for n in names)}
        for key in ("alpha", "discrete"):
            if key in config:
                kwargs[key] = config[key]
        kwargs.update(overrides)
        return cls(anchor_green, **kwargs)

    def with_alpha(self, alpha: int) -> "ColorRamp":
        return replace(self, alpha=alpha)

    def legend(self) -> str:
        g = self.anchor_green
        names = ("white", "green", "yellow", "red")
        mode = "classes" if self.discrete else "linear interpolation between stops"
        lines = [f"colour ramp ({mode}), anchor g = {g:.6g} publications/km^2"]
        for name, ratio, rgb in zip(names, STOP_RATIOS, self.stops):
            lines.append(f"  {name:<6} {ratio:g} x g = {ratio * g:.6g}  rgb{rgb}")
        lines.append("  densities >= 5 x g are drawn red")
        return "\n".join(lines)


def _segments(d: np.ndarray, g: float, discrete: bool):
    """Segment index (0..3) and position within the segment for densities ``d``."""
    # compare against the rounded thresholds themselves so d == 5*g is exactly red
    t1, t2, t5 = g, 2.0 * g, 5.0 * g
    if discrete:
        seg = np.where(d < t1, 0, np.where(d < t2, 1, np.where(d < t5, 2, 3)))
        return seg, np.zeros(np.shape(d))
    seg = np.where(d <= t1, 0, np.where(d <= t2, 1, np.where(d < t5, 2, 3)))
    lo = np.take(np.array([0.0, t1, t2, t5]), seg)
    width = np.take(np.array([t1, t1, t5 - t2, 1.0]), seg)
    frac = np.where(seg == 3, 0.0, (d - lo) / width)
    return seg, np.clip(frac, 0.0, 1.0)


def _rgb(d: np.ndarray, ramp: ColorRamp) -> np.ndarray:
    stops = np.array(ramp.stops + (ramp.stops[3],), dtype=float)
    seg, frac = _segments(d, ramp.anchor_green, ramp.discrete)
    if ramp.discrete:
        return stops[seg].astype(np.uint8)
    c0 = stops[seg]
    c1 = stops[seg + 1]
    # round half up, so the green-yellow midpoint (127.5, 212.5) becomes (128, 213);
    # the 1e-9 guard keeps float noise in frac from flipping exact halves down
    return np.floor(c0 + (c1 - c0) * frac[..., None] + (0.5 + 1e-9)).astype(np.uint8)


def colorize(d: float, ramp: ColorRamp) -> tuple[int, int, int, int]:
    """RGBA colour for a single density value."""
    d = float(d)
    if not (math.isfinite(d) and d >= 0):
        raise ValueError(f"density must be finite and >= 0, got {d}")
    r, g, b = (int(v) for v in _rgb(np.array([d]), ramp)[0])
    return (r, g, b, ramp.alpha)


def segment_index(d, ramp: ColorRamp):
    """Which ramp segment a density falls in: 0 white-green, 1 green-yellow, 2 yellow-red, 3 saturated."""
    seg, _ = _segments(np.asarray(d, dtype=float), ramp.anchor_green, ramp.discrete)
    return seg


def colorize_raster(raster: Raster, ramp: ColorRamp, transparent_zero: bool = False) -> np.ndarray:
    """``rows x cols x 4`` uint8 image, row 0 = raster row 1 (south).

    With ``transparent_zero`` cells of zero density get alpha 0 instead of
    the ramp's alpha.
    """
    d = raster.values
    img = np.empty(d.shape + (4,), dtype=np.uint8)
    img[..., :3] = _rgb(d, ramp)
    img[..., 3] = ramp.alpha
    if transparent_zero:
        img[..., 3][d == 0] = 0
    return img


def anchor_from_raster(raster: Raster, percentile: float = 90.0) -> float:
    """Anchor density taken from a reference raster: a percentile of its nonzero cells."""
    nz = raster.values[raster.values > 0]
    if nz.size == 0:
        raise ValueError("reference raster has no nonzero cells")
    return float(np.percentile(nz, percentile))
