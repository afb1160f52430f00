"""Command line: ``hotregions geocode | density | render | run``."""

from __future__ import annotations

import logging
import sys

import click

from . import pipeline
from .density import KERNELS
from .export import BordersError, read_grid_csv, write_grid_csv
from .geo import BoundingBox
from .ingest import COUNTING_MODES, InputFormatError, read_points, write_points, write_rejects
from .ingest.geocoder import GeocoderError

log = logging.getLogger("hotregions")


class BoundsType(click.ParamType):
    name = "S,N,W,E"

    def convert(self, value, param, ctx):
        if isinstance(value, BoundingBox):
            return value
        try:
            return BoundingBox.parse(value)
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


BOUNDS = BoundsType()
FILE = click.Path(exists=True, dir_okay=False)
OUT = click.Path(dir_okay=False, writable=True)


def _options(*decorators):
    def apply(f):
        for d in reversed(decorators):
            f = d(f)
        return f

    return apply


common_options = _options(
    click.option("--config", "config_file", type=FILE, help="YAML file of option values; flags override it."),
    click.option("--manifest", type=OUT, help="Write a JSON run manifest here."),
    click.option("-v", "--verbose", count=True, help="More logging (-vv for debug)."),
)

ingest_options = _options(
    click.option("--pubs", type=FILE, help="Publications table: pub_id,citations,city[,country][,raw_address]."),
    click.option("--gazetteer", type=FILE, help="Gazetteer table: city,country,lat,lon,primary."),
    click.option("--counting", type=click.Choice(COUNTING_MODES), help="City occurrence counting. [default: full]"),
    click.option("--percentile", type=float, help="Top percent of publications by citations. [default: 1.0]"),
    click.option("--points-out", type=OUT, help="Write the resolved lat,lon,weight points here."),
    click.option("--rejects", type=OUT, help="Write unusable addresses and unresolved cities here."),
    click.option("--max-unresolved", type=float, help="Tolerated unresolved weight fraction. [default: 0.05]"),
    click.option("--strict", is_flag=True, default=None, help="Fail instead of warn above --max-unresolved."),
    click.option("--geocoder-cache", type=OUT, help="Enable online fallback geocoding with this cache file."),
    click.option("--geocoder-url", help="Nominatim-compatible search endpoint."),
    click.option("--geocoder-delay", type=float, help="Minimum seconds between geocoder requests. [default: 1]"),
)

grid_options = _options(
    click.option("--bounds", type=BOUNDS, help="Map extent in degrees. [default: 35,72,-25,45]"),
    click.option("--rows", type=click.IntRange(min=1), help="Raster rows. [default: 500]"),
    click.option("--cols", type=click.IntRange(min=1), help="Raster columns. [default: 1000]"),
    click.option("--kernel", type=click.Choice(KERNELS), help="Kernel shape. [default: exp]"),
    click.option("--width-km", type=float, help="Kernel width h in km. [default: 100]"),
    click.option("--umax", type=float, help="Kernel cutoff in units of h. [default: 30]"),
    click.option("--threads", type=click.IntRange(min=1), help="Worker threads for the density stage. [default: 1]"),
)

render_options = _options(
    click.option("--anchor-density", type=float, help="Density g drawn pure green (publications per km^2)."),
    click.option("--anchor-from", type=FILE, help="Reference grid CSV; g is the 90th percentile of its nonzero cells."),
    click.option("--png", type=OUT, help="Write the standalone PNG map here."),
    click.option("--kmz", type=OUT, help="Write the Google Earth KMZ overlay here."),
    click.option("--points-overlay", is_flag=True, default=None, help="Draw point locations on the maps."),
    click.option("--point-radius", type=int, help="Point marker radius in pixels. [default: 2]"),
    click.option("--overlay-alpha", type=click.IntRange(0, 255), help="KMZ overlay opacity. [default: 160]"),
    click.option("--borders", type=FILE, help="GeoJSON file of boundary lines to draw on the PNG."),
    click.option("--discrete", is_flag=True, default=None, help="Four colour classes instead of interpolation."),
)


def _setup_logging(verbose: int):
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)


def _config(config_file, kwargs, need_input=True) -> pipeline.RunConfig:
    try:
        file_values = pipeline.load_config_file(config_file) if config_file else {}
        cfg = pipeline.build_config(file_values, **kwargs)
        return cfg.validate(need_input=need_input)
    except (pipeline.ConfigError, ValueError) as exc:
        raise click.UsageError(str(exc)) from None


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


_RUNTIME_ERRORS = (
    InputFormatError,
    BordersError,
    GeocoderError,
    pipeline.UnresolvedError,
    OSError,
    ValueError,
)


def _finish(cfg, manifest):
    if cfg.manifest:
        pipeline.write_manifest(cfg.manifest, manifest)


def _echo_legend(ramp):
    click.echo(ramp.legend(), err=True)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact", prog_name="hotregions")
def cli():
    """Density maps of where highly cited publications come from."""


@cli.command()
@ingest_options
@common_options
def geocode(config_file, verbose, **kwargs):
    """Publications -> weighted city points (+ rejects)."""
    _setup_logging(verbose)
    cfg = _config(config_file, kwargs, need_input=False)
    if cfg.pubs is None or cfg.points_out is None:
        raise click.UsageError("geocode needs --pubs and --points-out")
    try:
        points, rejects, stats = pipeline.geocode_stage(cfg)
        write_points(cfg.points_out, points)
        if cfg.rejects:
            write_rejects(cfg.rejects, rejects)
        _finish(cfg, pipeline.build_manifest(cfg, points, None, None, stats))
    except _RUNTIME_ERRORS as exc:
        _fail(exc)
    click.echo(
        f"{stats['selected']} of {stats['records']} publications selected; "
        f"{len(points)} points, total weight {points.total_weight:g}; "
        f"{stats['unresolved_cities']} unresolved cities",
        err=True,
    )


@cli.command()
@click.option("--points", type=FILE, help="Points table: lat,lon[,weight].")
@click.option("--grid", type=OUT, help="Write the density grid CSV here.")
@grid_options
@common_options
def density(config_file, verbose, **kwargs):
    """Weighted points -> density grid CSV."""
    _setup_logging(verbose)
    cfg = _config(config_file, kwargs, need_input=False)
    if cfg.points is None or cfg.grid is None:
        raise click.UsageError("density needs --points and --grid")
    try:
        points = read_points(cfg.points)
        raster = pipeline.density_stage(cfg, points)
        write_grid_csv(raster, cfg.grid)
        _finish(cfg, pipeline.build_manifest(cfg, points, raster))
    except _RUNTIME_ERRORS as exc:
        _fail(exc)


@cli.command()
@click.option("--grid", type=FILE, help="Density grid CSV to colour.")
@click.option("--bounds", type=BOUNDS, help="Grid extent; inferred from the cell centres when omitted.")
@click.option("--points", type=FILE, help="Points to overlay (with --points-overlay).")
@render_options
@common_options
def render(config_file, verbose, **kwargs):
    """Density grid CSV -> PNG and/or KMZ."""
    _setup_logging(verbose)
    bounds = kwargs.pop("bounds")
    cfg = _config(config_file, kwargs, need_input=False)
    if cfg.grid is None:
        raise click.UsageError("render needs --grid")
    if not cfg.colored_output:
        raise click.UsageError("render needs --png and/or --kmz")
    if cfg.points_overlay and cfg.points is None:
        raise click.UsageError("--points-overlay needs --points")
    try:
        raster = read_grid_csv(cfg.grid, bounds)
        cfg.bounds, cfg.rows, cfg.cols = raster.spec.bounds, raster.spec.rows, raster.spec.cols
        points = read_points(cfg.points) if cfg.points else ()
        anchor = pipeline.resolve_anchor(cfg)
        ramp = pipeline.render_stage(cfg, raster, points, anchor)
        _finish(cfg, pipeline.build_manifest(cfg, None, raster, anchor))
    except _RUNTIME_ERRORS as exc:
        _fail(exc)
    _echo_legend(ramp)


@cli.command()
@click.option("--points", type=FILE, help="Points table: lat,lon[,weight] (instead of --pubs).")
@click.option("--grid", type=OUT, help="Write the density grid CSV here.")
@ingest_options
@grid_options
@render_options
@common_options
def run(config_file, verbose, **kwargs):
    """All stages: publications or points -> grid, PNG, KMZ."""
    _setup_logging(verbose)
    cfg = _config(config_file, kwargs)
    try:
        manifest = pipeline.run(cfg)
    except _RUNTIME_ERRORS as exc:
        _fail(exc)
    click.echo(
        f"{manifest['m']} points, total weight {manifest['total_weight']:g}, "
        f"max density {manifest['max_density']:.6g} per km^2",
        err=True,
    )
    if manifest["anchor_g"] is not None:
        _echo_legend(pipeline.make_ramp(cfg, manifest["anchor_g"]))


def main(argv=None):
    cli.main(args=argv, prog_name="hotregions")


if __name__ == "__main__":
    main()
