"""Offline city lookup and the occurrence -> weighted point resolution step."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..density import WeightedPoint
from ..geo import GeoPoint
from .records import CityOccurrence, Reject, normalize_city_key

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GazetteerEntry:
    city_key: str
    location: GeoPoint
    country: str = ""
    primary: bool = False

    @property
    def qualified(self) -> str:
        return f"{self.city_key}|{self.country}" if self.country else self.city_key


class Gazetteer:
    """City name -> coordinates.

    Keys are either bare (``"cambridge"``) or country-qualified
    (``"cambridge|gb"``). A bare key matching several entries resolves to the
    one marked primary, with a warning.
    """

    def __init__(self, entries=()):
        self._qualified: dict[str, GazetteerEntry] = {}
        self._by_city: dict[str, list[GazetteerEntry]] = {}
        for e in entries:
            self.add(e)

    def add(self, entry: GazetteerEntry):
        key = entry.qualified
        if key in self._qualified:
            raise ValueError(f"duplicate gazetteer key {key!r}")
        self._qualified[key] = entry
        self._by_city.setdefault(entry.city_key, []).append(entry)

    def __len__(self):
        return len(self._qualified)

    def __contains__(self, key):
        return self.lookup(key) is not None

    def lookup(self, key: str) -> GeoPoint | None:
        if "|" in key:
            hit = self._qualified.get(key)
            if hit is not None:
                return hit.location
            city = key.split("|", 1)[0]
            plain = [e for e in self._by_city.get(city, []) if not e.country]
            return plain[0].location if len(plain) == 1 else None
        entries = self._by_city.get(key, [])
        if len(entries) == 1:
            return entries[0].location
        if len(entries) > 1:
            primary = [e for e in entries if e.primary]
            if len(primary) == 1:
                log.warning("ambiguous city %r: using primary entry %s", key, primary[0].qualified)
                return primary[0].location
            log.warning("ambiguous city %r: %d entries and no single primary", key, len(entries))
        return None


def merge_occurrences(occurrences) -> dict[str, float]:
    merged: dict[str, float] = {}
    for occ in occurrences:
        merged[occ.city_key] = merged.get(occ.city_key, 0.0) + occ.weight
    return merged


def resolve_cities(occurrences: list[CityOccurrence], gazetteer: Gazetteer, fallback=None):
    """Merge occurrences by city and look each city up.

    Returns ``(points, unresolved)``. Cities are tried in the gazetteer first
    and then, if given, in ``fallback`` (anything with a ``lookup(key)``
    method returning a :class:`GeoPoint` or ``None``, such as
    :class:`~hotregions.ingest.geocoder.CachedGeocoder`). Unresolved cities
    come back as :class:`Reject` entries carrying their weight. Cities that
    land on identical coordinates are merged into one point.
    """
    from .geocoder import GeocoderError

    by_location: dict[tuple[float, float], float] = {}
    unresolved: list[Reject] = []
    for key, weight in merge_occurrences(occurrences).items():
        loc = gazetteer.lookup(key)
        reason = "not in gazetteer"
        if loc is None and fallback is not None:
            try:
                loc = fallback.lookup(key)
                reason = "not found by geocoder"
            except GeocoderError as exc:
                reason = f"geocoder error: {exc}"
        if loc is None:
            unresolved.append(Reject("resolve", reason, city_key=key, weight=weight))
            continue
        xy = (loc.lat, loc.lon)
        by_location[xy] = by_location.get(xy, 0.0) + weight
    points = [WeightedPoint(GeoPoint(lat, lon), w) for (lat, lon), w in by_location.items()]
    return points, unresolved


def entry(city: str, lat: float, lon: float, country: str = "", primary: bool = False) -> GazetteerEntry:
    """Convenience constructor normalising the names."""
    return GazetteerEntry(
        normalize_city_key(city),
        GeoPoint(lat, lon),
        normalize_city_key(country) if country and country.strip() else "",
        primary,
    )
