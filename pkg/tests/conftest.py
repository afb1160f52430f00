import math

import numpy as np
import pytest

from hotregions.density import PointSet

R = 6371.0088


def random_points(rng, m, bounds=(35.0, 72.0, -25.0, 45.0), wmax=3.0):
    s, n, w, e = bounds
    return PointSet(rng.uniform(s, n, m), rng.uniform(w, e, m), rng.uniform(0.0, wmax, m))


def vector_distance_km(lat1, lon1, lat2, lon2, radius=R):
    """Great-circle distance through 3-d unit vectors and atan2, independent of the haversine code."""

    def unit(lat, lon):
        la, lo = math.radians(lat), math.radians(lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))

    a, b = unit(lat1, lon1), unit(lat2, lon2)
    cross = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
    dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    return radius * math.atan2(math.sqrt(sum(c * c for c in cross)), dot)


def one_line_density(lat, lon, pts, kind, h):
    """D(i,j) = (1/h^2) sum w_k K(d_k / h), written out with the math module."""
    f, l = math.radians(lat), math.radians(lon)
    K = (lambda u: 0.5 * math.exp(-u)) if kind == "exp" else (lambda u: math.exp(-u * u / 2) / (2 * math.pi))
    return sum(
        w * K(2 * R * math.asin(math.sqrt(min(1.0, math.sin((f - math.radians(a)) / 2) ** 2 + math.cos(f) * math.cos(math.radians(a)) * math.sin((l - math.radians(b)) / 2) ** 2))) / h)
        for a, b, w in zip(pts.lat.tolist(), pts.lon.tolist(), pts.weight.tolist())
    ) / h**2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_europe_points(path, m=500, seed=2024):
    """Synthetic weighted 'cities': clustered around a few hubs inside the default map."""
    rng = np.random.default_rng(seed)
    hubs = np.array([[51.5, -0.1], [48.9, 2.35], [52.5, 13.4], [41.9, 12.5], [40.4, -3.7], [59.3, 18.1], [50.1, 14.4], [47.4, 8.5]])
    k = rng.integers(0, len(hubs), m)
    lat = np.clip(hubs[k, 0] + rng.normal(0, 2.0, m), 35.5, 71.5)
    lon = np.clip(hubs[k, 1] + rng.normal(0, 3.0, m), -24.5, 44.5)
    w = rng.integers(1, 30, m).astype(float)
    with open(path, "w") as fh:
        fh.write("lat,lon,weight\n")
        for a, b, c in zip(lat, lon, w):
            fh.write(f"{float(a)!r},{float(b)!r},{float(c)!r}\n")
    return path


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE: dict[int, list] = {}
ACCEPTANCE_TITLES: dict[int, str] = {}


def record(n: int, title: str, ok: bool, detail: str = ""):
    """Log one acceptance check; the summary prints one line per criterion."""
    ACCEPTANCE_TITLES[n] = title
    ACCEPTANCE.setdefault(n, []).append((bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        detail = "; ".join(d for _, d in checks if d)
        terminalreporter.write_line(f"[{status}] criterion {n:>2}: {ACCEPTANCE_TITLES[n]} ({detail})")
