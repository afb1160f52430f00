"""From publication records to weighted points."""

from .formats import (
    InputFormatError,
    read_gazetteer,
    read_points,
    read_publications,
    write_points,
    write_rejects,
)
from .gazetteer import Gazetteer, GazetteerEntry, resolve_cities
from .geocoder import CachedGeocoder, GeocoderError, NominatimClient
from .records import (
    COUNTING_MODES,
    FRACTIONAL,
    FULL,
    Address,
    CityOccurrence,
    PublicationRecord,
    Reject,
    count_city_occurrences,
    normalize_city_key,
    qualified_key,
    select_top_percentile,
)

__all__ = [
    "COUNTING_MODES",
    "FRACTIONAL",
    "FULL",
    "Address",
    "CachedGeocoder",
    "CityOccurrence",
    "Gazetteer",
    "GazetteerEntry",
    "GeocoderError",
    "InputFormatError",
    "NominatimClient",
    "PublicationRecord",
    "Reject",
    "count_city_occurrences",
    "normalize_city_key",
    "qualified_key",
    "read_gazetteer",
    "read_points",
    "read_publications",
    "resolve_cities",
    "select_top_percentile",
    "write_points",
    "write_rejects",
]
