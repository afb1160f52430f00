from .borders import BordersError, load_borders
from .gridcsv import read_grid_csv, write_grid_csv
from .kmz import build_kml, write_kmz
from .png import RenderOptions, pixel_to_latlon, pixel_xy, render_png

__all__ = [
    "BordersError",
    "RenderOptions",
    "build_kml",
    "load_borders",
    "pixel_to_latlon",
    "pixel_xy",
    "read_grid_csv",
    "render_png",
    "write_grid_csv",
    "write_kmz",
]
