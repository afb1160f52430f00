"""Publication records, top-percentile selection and city-occurrence counting."""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field

FULL = "full"
FRACTIONAL = "fractional"
COUNTING_MODES = (FULL, FRACTIONAL)


def normalize_city_key(raw: str) -> str:
    """Trim, case-fold, collapse whitespace and strip diacritics.

    >>> normalize_city_key("  München ")
    'munchen'
    """
    if raw is None or not str(raw).strip():
        raise ValueError("empty city name")
    text = unicodedata.normalize("NFKD", str(raw))
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    text = re.sub(r"\s+", " ", text.casefold()).strip()
    if not text:
        raise ValueError(f"city name {raw!r} is empty after normalisation")
    return text


def qualified_key(city: str, country: str | None = None) -> str:
    """City key, qualified as ``city|country`` when a country is known."""
    key = normalize_city_key(city)
    if country and str(country).strip():
        return f"{key}|{normalize_city_key(country)}"
    return key


@dataclass(frozen=True)
class Address:
    """One author affiliation of a publication.

    ``city`` is the designated city token; ``raw`` is the full affiliation
    string when the input provides one. Identical addresses are detected on
    :attr:`text`, i.e. the raw string exactly as given.
    """

    city: str
    country: str = ""
    raw: str = ""

    @classmethod
    def from_raw(cls, raw: str, country: str = "") -> "Address":
        """Address whose city is the last comma-separated token of ``raw``."""
        return cls(city=raw.rsplit(",", 1)[-1].strip(), country=country, raw=raw)

    @property
    def text(self) -> str:
        return self.raw if self.raw else f"{self.city}|{self.country}"


@dataclass
class PublicationRecord:
    id: str
    citations: int
    addresses: list[Address] = field(default_factory=list)

    def __post_init__(self):
        if int(self.citations) != self.citations or self.citations < 0:
            raise ValueError(f"citations must be a non-negative integer, got {self.citations!r}")
        self.citations = int(self.citations)
        self.addresses = [Address.from_raw(a) if isinstance(a, str) else a for a in self.addresses]


@dataclass(frozen=True)
class CityOccurrence:
    city_key: str
    weight: float

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"occurrence weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class Reject:
    """An input row or occurrence that could not be used, with the reason."""

    stage: str
    reason: str
    pub_id: str = ""
    city_key: str = ""
    weight: float = 0.0
    detail: str = ""


def select_top_percentile(records: list[PublicationRecord], p: float = 1.0) -> list[PublicationRecord]:
    """The top ``p`` percent of records by citations, including every tie at the threshold.

    The threshold is the citation count of the record at rank
    ``ceil(p * N / 100)``; all records with at least that many citations are
    returned, most cited first.
    """
    if not 0 < p <= 100:
        raise ValueError(f"percentile must be in (0, 100], got {p}")
    if not records:
        return []
    ranked = sorted(records, key=lambda r: r.citations, reverse=True)
    # round first so that e.g. 1.0 * 300 / 100 is not pushed to 4 by float noise
    rank = max(1, math.ceil(round(p * len(ranked) / 100.0, 9)))
    threshold = ranked[rank - 1].citations
    return [r for r in ranked if r.citations >= threshold]


def count_city_occurrences(
    record: PublicationRecord, mode: str = FULL, rejects: list[Reject] | None = None
) -> list[CityOccurrence]:
    """City occurrences of one publication.

    ``full``: each distinct address string counts once for its city, so two
    departments in one city give that city weight 2. ``fractional``: the
    publication's unit weight is split evenly over its distinct cities.

    Addresses without a usable city go to ``rejects``; without a rejects
    list they raise ``ValueError``.
    """
    if mode not in COUNTING_MODES:
        raise ValueError(f"unknown counting mode {mode!r}")
    seen: set[str] = set()
    counts: dict[str, float] = {}
    for addr in record.addresses:
        if addr.text in seen:
            continue
        seen.add(addr.text)
        try:
            key = qualified_key(addr.city, addr.country)
        except ValueError:
            reject = Reject("count", "no city in address", pub_id=record.id, detail=addr.text)
            if rejects is None:
                raise ValueError(f"publication {record.id}: no city in address {addr.text!r}") from None
            rejects.append(reject)
            continue
        counts[key] = counts.get(key, 0.0) + 1.0
    if not counts:
        return []
    if mode == FULL:
        return [CityOccurrence(k, w) for k, w in counts.items()]
    share = 1.0 / len(counts)
    return [CityOccurrence(k, share) for k in counts]
