"""Delimited text readers and writers for the ingest stage.

Publications: ``pub_id,citations,city[,country][,raw_address]``, one row per
(publication, address). Gazetteer: ``city,country,lat,lon,primary``. Points:
``lat,lon,weight``. Comma or tab delimited, header row required.
"""

from __future__ import annotations

import csv
import hashlib

import numpy as np

from ..density import PointSet
from ..geo import GeoPoint
from .gazetteer import Gazetteer, GazetteerEntry
from .records import Address, PublicationRecord, Reject, normalize_city_key


class InputFormatError(ValueError):
    pass


def _open_table(path, required):
    fh = open(path, newline="", encoding="utf-8-sig")
    first = fh.readline()
    fh.seek(0)
    delimiter = "\t" if "\t" in first and "," not in first else ","
    reader = csv.DictReader(fh, delimiter=delimiter)
    if reader.fieldnames is None:
        fh.close()
        raise InputFormatError(f"{path}: empty file, a header row is required")
    reader.fieldnames = [f.strip().lower() for f in reader.fieldnames]
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        fh.close()
        raise InputFormatError(f"{path}: missing column(s) {', '.join(missing)}")
    return fh, reader


def read_publications(path) -> list[PublicationRecord]:
    fh, reader = _open_table(path, ("pub_id", "citations", "city"))
    records: dict[str, PublicationRecord] = {}
    with fh:
        for lineno, row in enumerate(reader, start=2):
            pub = (row.get("pub_id") or "").strip()
            if not pub:
                raise InputFormatError(f"{path}:{lineno}: empty pub_id")
            try:
                cites = int((row.get("citations") or "").strip())
            except ValueError:
                raise InputFormatError(f"{path}:{lineno}: bad citation count {row.get('citations')!r}") from None
            if cites < 0:
                raise InputFormatError(f"{path}:{lineno}: negative citation count")
            addr = Address(
                city=(row.get("city") or "").strip(),
                country=(row.get("country") or "").strip(),
                raw=(row.get("raw_address") or "").strip(),
            )
            rec = records.get(pub)
            if rec is None:
                records[pub] = PublicationRecord(pub, cites, [addr])
            elif rec.citations != cites:
                raise InputFormatError(f"{path}:{lineno}: publication {pub} has conflicting citation counts")
            else:
                rec.addresses.append(addr)
    return list(records.values())


def read_gazetteer(path) -> Gazetteer:
    fh, reader = _open_table(path, ("city", "lat", "lon"))
    gaz = Gazetteer()
    with fh:
        for lineno, row in enumerate(reader, start=2):
            try:
                country = (row.get("country") or "").strip()
                gaz.add(
                    GazetteerEntry(
                        normalize_city_key(row["city"]),
                        GeoPoint(float(row["lat"]), float(row["lon"])),
                        normalize_city_key(country) if country else "",
                        (row.get("primary") or "0").strip() in ("1", "true", "yes"),
                    )
                )
            except (ValueError, TypeError) as exc:
                raise InputFormatError(f"{path}:{lineno}: {exc}") from None
    return gaz


def read_points(path) -> PointSet:
    fh, reader = _open_table(path, ("lat", "lon"))
    lat, lon, w = [], [], []
    with fh:
        for lineno, row in enumerate(reader, start=2):
            try:
                lat.append(float(row["lat"]))
                lon.append(float(row["lon"]))
                w.append(float(row["weight"]) if row.get("weight") not in (None, "") else 1.0)
            except ValueError as exc:
                raise InputFormatError(f"{path}:{lineno}: {exc}") from None
    try:
        return PointSet(np.array(lat), np.array(lon), np.array(w))
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from None


def write_points(path, points: PointSet):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("lat", "lon", "weight"))
        for a, b, c in zip(points.lat, points.lon, points.weight):
            writer.writerow((repr(float(a)), repr(float(b)), repr(float(c))))


REJECT_FIELDS = ("stage", "pub_id", "city_key", "weight", "reason", "detail")


def write_rejects(path, rejects: list[Reject]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REJECT_FIELDS)
        for r in rejects:
            writer.writerow((r.stage, r.pub_id, r.city_key, repr(r.weight), r.reason, r.detail))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()

