"""KMZ packaging: a GroundOverlay of the density raster plus point placemarks."""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET
import zipfile

from ..colors import ColorRamp
from ..density import PointSet
from ..raster import Raster
from .png import RenderOptions, encode_png, raster_image

KML_NS = "http://www.opengis.net/kml/2.2"
OVERLAY_HREF = "files/overlay.png"
# fixed timestamp so identical inputs give identical archives
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


def _el(parent, tag, text=None):
    e = ET.SubElement(parent, f"{{{KML_NS}}}{tag}")
    if text is not None:
        e.text = text
    return e


def build_kml(raster: Raster, points=(), opts: RenderOptions = RenderOptions(), name: str = "density map") -> bytes:
    ET.register_namespace("", KML_NS)
    root = ET.Element(f"{{{KML_NS}}}kml")
    doc = _el(root, "Document")
    _el(doc, "name", name)
    overlay = _el(doc, "GroundOverlay")
    _el(overlay, "name", "density")
    icon = _el(overlay, "Icon")
    _el(icon, "href", OVERLAY_HREF)
    box = _el(overlay, "LatLonBox")
    b = raster.spec.bounds
    for tag, value in (("north", b.north), ("south", b.south), ("east", b.east), ("west", b.west)):
        _el(box, tag, repr(value))
    if opts.draw_points:
        pts = PointSet.from_points(points)
        folder = _el(doc, "Folder")
        _el(folder, "name", "publication locations")
        for n, (lat, lon, w) in enumerate(zip(pts.lat, pts.lon, pts.weight), start=1):
            pm = _el(folder, "Placemark")
            _el(pm, "name", f"location {n}")
            _el(pm, "description", f"weight: {float(w)!r}")
            pt = _el(pm, "Point")
            _el(pt, "coordinates", f"{float(lon)!r},{float(lat)!r},0")
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


def overlay_png(raster: Raster, ramp: ColorRamp, opts: RenderOptions) -> bytes:
    """Overlay image: ramp colours at ``overlay_alpha``, zero-density cells transparent."""
    return encode_png(raster_image(raster, ramp.with_alpha(opts.overlay_alpha), transparent_zero=True))


def write_kmz(raster: Raster, ramp: ColorRamp, points=(), opts: RenderOptions = RenderOptions()) -> bytes:
    """ZIP archive with ``doc.kml`` and ``files/overlay.png``."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for arcname, payload in (
            ("doc.kml", build_kml(raster, points, opts)),
            (OVERLAY_HREF, overlay_png(raster, ramp, opts)),
        ):
            info = zipfile.ZipInfo(arcname, date_time=_ZIP_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, payload)
    return buf.getvalue()
