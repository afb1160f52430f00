"""End-to-end orchestration behind the command line: pubs -> points -> grid -> maps."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone

import numpy as np
import yaml

from .colors import KMZ_ALPHA, ColorRamp, anchor_from_raster
from .density import DEFAULT_UMAX, DEFAULT_WIDTH_KM, KERNELS, KernelSpec, PointSet, density_fast
from .export import RenderOptions, read_grid_csv, render_png, write_grid_csv, write_kmz
from .geo import BoundingBox
from .ingest import (
    COUNTING_MODES,
    CachedGeocoder,
    Gazetteer,
    NominatimClient,
    count_city_occurrences,
    read_gazetteer,
    read_points,
    read_publications,
    resolve_cities,
    select_top_percentile,
    write_points,
    write_rejects,
)
from .ingest.formats import file_digest
from .raster import DEFAULT_BOUNDS, DEFAULT_COLS, DEFAULT_ROWS, Raster, RasterSpec

log = logging.getLogger(__name__)

DEFAULT_MAX_UNRESOLVED = 0.05


class ConfigError(ValueError):
    """Invalid combination of run parameters."""


class UnresolvedError(RuntimeError):
    """Too much weight could not be placed on the map."""


@dataclass
class RunConfig:
    points: str | None = None
    pubs: str | None = None
    gazetteer: str | None = None
    bounds: BoundingBox = DEFAULT_BOUNDS
    rows: int = DEFAULT_ROWS
    cols: int = DEFAULT_COLS
    kernel: str = "exp"
    width_km: float = DEFAULT_WIDTH_KM
    umax: float = DEFAULT_UMAX
    counting: str = "full"
    percentile: float = 1.0
    anchor_density: float | None = None
    anchor_from: str | None = None
    png: str | None = None
    kmz: str | None = None
    grid: str | None = None
    points_out: str | None = None
    rejects: str | None = None
    manifest: str | None = None
    points_overlay: bool = False
    point_radius: int = 2
    overlay_alpha: int = KMZ_ALPHA
    borders: str | None = None
    discrete: bool = False
    ramp: dict = field(default_factory=dict)
    threads: int = 1
    strict: bool = False
    max_unresolved: float = DEFAULT_MAX_UNRESOLVED
    geocoder_cache: str | None = None
    geocoder_url: str | None = None
    geocoder_delay: float = 1.0

    def validate(self, need_input: bool = True):
        if need_input and (self.points is None) == (self.pubs is None):
            raise ConfigError("give exactly one of --points or --pubs")
        if self.pubs is not None and self.gazetteer is None and self.geocoder_cache is None:
            raise ConfigError("--pubs needs --gazetteer (or an online geocoder cache)")
        if self.kernel not in KERNELS:
            raise ConfigError(f"--kernel must be one of {', '.join(KERNELS)}")
        if self.counting not in COUNTING_MODES:
            raise ConfigError(f"--counting must be one of {', '.join(COUNTING_MODES)}")
        if not 0 < self.percentile <= 100:
            raise ConfigError("--percentile must be in (0, 100]")
        if not (self.width_km > 0 and math.isfinite(self.width_km)):
            raise ConfigError("--width-km must be positive")
        if not self.umax > 0:
            raise ConfigError("--umax must be positive")
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("--rows and --cols must be >= 1")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if not 0 <= self.max_unresolved <= 1:
            raise ConfigError("--max-unresolved must be a fraction in [0, 1]")
        if self.points_overlay and self.point_radius < 1:
            raise ConfigError("--point-radius must be >= 1")
        if not 0 <= self.overlay_alpha <= 255:
            raise ConfigError("--overlay-alpha must be in 0..255")
        if self.colored_output:
            if (self.anchor_density is None) == (self.anchor_from is None):
                raise ConfigError("PNG/KMZ output needs exactly one of --anchor-density or --anchor-from")
            if self.anchor_density is not None and not self.anchor_density > 0:
                raise ConfigError("--anchor-density must be positive")
        return self

    @property
    def colored_output(self) -> bool:
        return bool(self.png or self.kmz)

    @property
    def raster_spec(self) -> RasterSpec:
        return RasterSpec(self.bounds, self.rows, self.cols)

    @property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, self.width_km)

    def render_options(self) -> RenderOptions:
        return RenderOptions(
            draw_points=self.points_overlay,
            point_radius_px=self.point_radius,
            borders=self.borders,
            overlay_alpha=self.overlay_alpha,
        )

    def parameters(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, BoundingBox):
                v = ",".join(repr(x) for x in v.as_tuple())
            elif isinstance(v, dict):
                v = json.dumps(v, sort_keys=True) if v else None
            out[f.name] = v
        return out


def load_config_file(path) -> dict:
    """YAML mapping of option names (dashes or underscores) to values."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for key, value in data.items():
        name = str(key).replace("-", "_")
        if name not in known:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        out[name] = value
    if isinstance(out.get("bounds"), str):
        out["bounds"] = BoundingBox.parse(out["bounds"])
    elif isinstance(out.get("bounds"), (list, tuple)):
        out["bounds"] = BoundingBox(*out["bounds"])
    return out


def build_config(file_values: dict | None = None, **flags) -> RunConfig:
    """Defaults, overridden by the config file, overridden by explicit flags (non-None)."""
    values = dict(file_values or {})
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# -- stages ---------------------------------------------------------------


def geocode_stage(cfg: RunConfig):
    """Publications -> (PointSet, rejects, stats)."""
    records = read_publications(cfg.pubs)
    selected = select_top_percentile(records, cfg.percentile)
    rejects = []
    occurrences = []
    for rec in selected:
        occurrences.extend(count_city_occurrences(rec, cfg.counting, rejects))
    gazetteer = read_gazetteer(cfg.gazetteer) if cfg.gazetteer else Gazetteer()
    fallback = None
    if cfg.geocoder_cache:
        client = NominatimClient(cfg.geocoder_url) if cfg.geocoder_url else NominatimClient()
        fallback = CachedGeocoder(client, cfg.geocoder_cache, min_interval=cfg.geocoder_delay)
    points, unresolved = resolve_cities(occurrences, gazetteer, fallback)
    rejects.extend(unresolved)
    pts = PointSet.from_points(points)
    lost = sum(r.weight for r in unresolved)
    total = pts.total_weight + lost
    ratio = lost / total if total > 0 else 0.0
    stats = {
        "records": len(records),
        "selected": len(selected),
        "citation_threshold": selected[-1].citations if selected else None,
        "unresolved_cities": len(unresolved),
        "unresolved_weight": lost,
        "unresolved_ratio": ratio,
        "geocoder_queries": fallback.queries if fallback is not None else 0,
    }
    if ratio > cfg.max_unresolved:
        msg = f"{ratio:.1%} of the weight ({len(unresolved)} cities) could not be resolved"
        if cfg.strict:
            raise UnresolvedError(msg)
        log.warning("%s", msg)
    return pts, rejects, stats


def load_points(cfg: RunConfig):
    if cfg.points is not None:
        return read_points(cfg.points), [], {}
    return geocode_stage(cfg)


def density_stage(cfg: RunConfig, points: PointSet) -> Raster:
    b = cfg.bounds
    outside = ~((points.lat >= b.south) & (points.lat <= b.north) & (points.lon >= b.west) & (points.lon <= b.east))
    if np.any(outside):
        log.warning("%d point(s) lie outside the map bounds; they still contribute density", int(outside.sum()))
    return density_fast(points, cfg.raster_spec, cfg.kernel_spec, cfg.umax, cfg.threads)


def resolve_anchor(cfg: RunConfig) -> float:
    if cfg.anchor_density is not None:
        return float(cfg.anchor_density)
    return anchor_from_raster(read_grid_csv(cfg.anchor_from))


def make_ramp(cfg: RunConfig, anchor: float) -> ColorRamp:
    return ColorRamp.from_config(anchor, cfg.ramp, discrete=cfg.discrete)


def render_stage(cfg: RunConfig, raster: Raster, points, anchor: float) -> ColorRamp:
    ramp = make_ramp(cfg, anchor)
    opts = cfg.render_options()
    if cfg.png:
        _write_bytes(cfg.png, render_png(raster, ramp, points, opts))
    if cfg.kmz:
        _write_bytes(cfg.kmz, write_kmz(raster, ramp, points, opts))
    return ramp


def _write_bytes(path, payload: bytes):
    with open(path, "wb") as fh:
        fh.write(payload)


def input_digests(cfg: RunConfig) -> dict:
    out = {}
    for name in ("points", "pubs", "gazetteer", "anchor_from", "borders"):
        path = getattr(cfg, name)
        if path:
            out[f"sha256_{name}"] = file_digest(path)
    return out


def build_manifest(cfg: RunConfig, points: PointSet | None, raster: Raster | None, anchor=None, extra=None) -> dict:
    """Flat mapping of everything needed to repeat the run."""
    from . import __version__

    manifest = {"tool": "hotregions", "version": __version__}
    manifest.update(cfg.parameters())
    manifest.update(input_digests(cfg))
    if points is not None:
        manifest["m"] = len(points)
        manifest["total_weight"] = points.total_weight
    if raster is not None:
        manifest["min_density"] = float(raster.values.min())
        manifest["max_density"] = float(raster.values.max())
    manifest["anchor_g"] = anchor
    manifest.update(extra or {})
    manifest["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return manifest


def write_manifest(path, manifest: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(cfg: RunConfig) -> dict:
    """All stages. Returns the manifest (also written when ``cfg.manifest`` is set)."""
    cfg.validate()
    points, rejects, stats = load_points(cfg)
    if cfg.points_out:
        write_points(cfg.points_out, points)
    if cfg.rejects:
        write_rejects(cfg.rejects, rejects)
    raster = density_stage(cfg, points)
    if cfg.grid:
        write_grid_csv(raster, cfg.grid)
    anchor = None
    if cfg.colored_output:
        anchor = resolve_anchor(cfg)
        render_stage(cfg, raster, points, anchor)
    manifest = build_manifest(cfg, points, raster, anchor, stats)
    if cfg.manifest:
        write_manifest(cfg.manifest, manifest)
    return manifest


__all__ = [
    "ConfigError",
    "RunConfig",
    "UnresolvedError",
    "build_config",
    "build_manifest",
    "density_stage",
    "geocode_stage",
    "load_config_file",
    "render_stage",
    "resolve_anchor",
    "run",
    "write_manifest",
]
