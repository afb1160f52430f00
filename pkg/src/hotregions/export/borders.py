"""Boundary polylines from a GeoJSON file.

Only LineString and MultiLineString geometries are read, wherever they appear
(bare, inside Features, FeatureCollections or GeometryCollections).
Everything else is ignored.
"""

from __future__ import annotations

import json


class BordersError(OSError):
    pass


def _walk(obj, out):
    if isinstance(obj, list):
        for item in obj:
            _walk(item, out)
        return
    if not isinstance(obj, dict):
        return
    kind = obj.get("type")
    if kind == "LineString":
        out.append([(float(x[0]), float(x[1])) for x in obj.get("coordinates", [])])
    elif kind == "MultiLineString":
        for line in obj.get("coordinates", []):
            out.append([(float(x[0]), float(x[1])) for x in line])
    elif kind == "Feature":
        _walk(obj.get("geometry"), out)
    elif kind == "FeatureCollection":
        _walk(obj.get("features", []), out)
    elif kind == "GeometryCollection":
        _walk(obj.get("geometries", []), out)


def load_borders(path) -> list[list[tuple[float, float]]]:
    """Polylines as lists of ``(lon, lat)`` pairs."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise BordersError(f"cannot read borders file {path}: {exc}") from exc
    lines: list[list[tuple[float, float]]] = []
    _walk(doc, lines)
    return [ln for ln in lines if len(ln) >= 2]
