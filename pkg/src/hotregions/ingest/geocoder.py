"""Fallback geocoding with a persistent, append-only response cache."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from datetime import datetime, timezone

from ..geo import GeoPoint

log = logging.getLogger(__name__)

CACHE_FIELDS = ("city_key", "lat", "lon", "source", "timestamp")


class GeocoderError(RuntimeError):
    """The geocoding service could not be reached or answered badly."""


class NominatimClient:
    """Minimal client for an OpenStreetMap Nominatim search endpoint."""

    source = "nominatim"

    def __init__(self, url="https://nominatim.openstreetmap.org/search", user_agent="hotregions/0.1", timeout=20.0):
        self.url = url
        self.user_agent = user_agent
        self.timeout = timeout

    def geocode(self, query: str) -> GeoPoint | None:
        params = urllib.parse.urlencode({"q": query, "format": "json", "limit": 1})
        req = urllib.request.Request(f"{self.url}?{params}", headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError, ValueError) as exc:
            raise GeocoderError(str(exc)) from exc
        if not payload:
            return None
        return GeoPoint(float(payload[0]["lat"]), float(payload[0]["lon"]))


def key_to_query(key: str) -> str:
    return ", ".join(part for part in key.split("|") if part)


class CachedGeocoder:
    """Wraps a client so each city key is queried at most once, ever.

    Answers, including "not found", are appended to ``cache_path`` and
    reloaded on the next run. Requests are serialised and spaced by at least
    ``min_interval`` seconds. Transport failures are not cached.
    """

    def __init__(self, client, cache_path, min_interval: float = 1.0, clock=time.monotonic, sleep=time.sleep):
        self.client = client
        self.cache_path = os.fspath(cache_path)
        self.min_interval = float(min_interval)
        self._clock = clock
        self._sleep = sleep
        self._last = None
        self.queries = 0
        self._cache: dict[str, GeoPoint | None] = {}
        self._load()

    def _load(self):
        if not os.path.exists(self.cache_path):
            return
        with open(self.cache_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                lat, lon = row.get("lat", ""), row.get("lon", "")
                self._cache[row["city_key"]] = GeoPoint(float(lat), float(lon)) if lat and lon else None

    def _append(self, key, point, source):
        new = not os.path.exists(self.cache_path) or os.path.getsize(self.cache_path) == 0
        with open(self.cache_path, "a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if new:
                writer.writerow(CACHE_FIELDS)
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            if point is None:
                writer.writerow([key, "", "", source, stamp])
            else:
                writer.writerow([key, repr(point.lat), repr(point.lon), source, stamp])

    def __contains__(self, key):
        return key in self._cache

    def lookup(self, key: str) -> GeoPoint | None:
        if key in self._cache:
            return self._cache[key]
        if self._last is not None:
            wait = self.min_interval - (self._clock() - self._last)
            if wait > 0:
                self._sleep(wait)
        self.queries += 1
        try:
            point = self.client.geocode(key_to_query(key))
        finally:
            self._last = self._clock()
        self._cache[key] = point
        self._append(key, point, getattr(self.client, "source", type(self.client).__name__))
        log.info("geocoded %r -> %s", key, point)
        return point
