"""Geographic primitives: points, bounding boxes and great-circle distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: IUGG mean Earth radius in kilometres.
EARTH_RADIUS_KM = 6371.0088


def normalize_lon(lon: float) -> float:
    """Map a longitude in degrees into the half-open interval [-180, 180)."""
    if -180.0 <= lon < 180.0:
        return float(lon)
    out = math.fmod(lon + 180.0, 360.0)
    if out < 0.0:
        out += 360.0
    out -= 180.0
    # fmod can land exactly on +180 after the shift back for tiny negatives
    if out >= 180.0:
        out -= 360.0
    return out


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        lat = float(self.lat)
        lon = float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValueError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", normalize_lon(lon))


@dataclass(frozen=True)
class BoundingBox:
    """Latitude/longitude rectangle in degrees. Antimeridian-spanning boxes are rejected."""

    south: float
    north: float
    west: float
    east: float

    def __post_init__(self):
        for name in ("south", "north", "west", "east"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)
        if not -90.0 <= self.south < self.north <= 90.0:
            raise ValueError(f"need -90 <= south < north <= 90, got {self.south}, {self.north}")
        if not -180.0 <= self.west < self.east <= 180.0:
            raise ValueError(f"need -180 <= west < east <= 180, got {self.west}, {self.east}")

    @classmethod
    def parse(cls, text: str) -> "BoundingBox":
        """Parse ``"S,N,W,E"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected S,N,W,E but got {text!r}")
        return cls(*(float(p) for p in parts))

    def contains(self, lat: float, lon: float) -> bool:
        return self.south <= lat <= self.north and self.west <= lon <= self.east

    def area_km2(self, radius: float = EARTH_RADIUS_KM) -> float:
        dlon = math.radians(self.east - self.west)
        return radius**2 * dlon * (math.sin(math.radians(self.north)) - math.sin(math.radians(self.south)))

    def as_tuple(self):
        return (self.south, self.north, self.west, self.east)


def _wrap_dlon(dlon):
    # inputs lie in (-360, 360); a single conditional shift keeps wrap(-x) == -wrap(x)
    if dlon > 180.0:
        return dlon - 360.0
    if dlon < -180.0:
        return dlon + 360.0
    return dlon


def great_circle_distance(a: GeoPoint, b: GeoPoint, radius: float = EARTH_RADIUS_KM) -> float:
    """Haversine distance in kilometres between two points on a sphere."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(_wrap_dlon(b.lon - a.lon))
    s1 = math.sin(0.5 * dphi)
    s2 = math.sin(0.5 * dlam)
    # cos terms multiplied in a fixed order so swapping a and b gives identical bits
    c = math.cos(min(phi1, phi2)) * math.cos(max(phi1, phi2))
    h = s1 * s1 + c * s2 * s2
    return 2.0 * radius * math.asin(math.sqrt(min(h, 1.0)))


def haversine_km(lat1, lon1, lat2, lon2, radius: float = EARTH_RADIUS_KM):
    """Vectorised haversine distance for arrays of degrees."""
    lat1 = np.radians(lat1)
    lat2 = np.radians(lat2)
    dphi = lat2 - lat1
    dlon = np.asarray(lon2, dtype=float) - np.asarray(lon1, dtype=float)
    dlon = np.where(dlon > 180.0, dlon - 360.0, np.where(dlon < -180.0, dlon + 360.0, dlon))
    dlam = np.radians(dlon)
    h = np.sin(0.5 * dphi) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(0.5 * dlam) ** 2
    return 2.0 * radius * np.arcsin(np.sqrt(np.minimum(h, 1.0)))
