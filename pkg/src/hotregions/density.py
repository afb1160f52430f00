"""Kernel density of weighted points over a lat/lon raster.

Two evaluators are provided. :func:`density_brute_force` is the reference: it
visits every (cell, point) pair and accumulates points in input order.
:func:`density_fast` drops pairs beyond a kernel cutoff and caches the
separable parts of the haversine formula, but evaluates every retained term
with exactly the same floating-point operations as the reference, so with an
infinite cutoff the two agree bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._fastpath import accumulate_runs, gather_roots
from .geo import EARTH_RADIUS_KM, GeoPoint
from .raster import Raster, RasterSpec

KERNELS = ("exp", "gauss")
DEFAULT_WIDTH_KM = 100.0
DEFAULT_UMAX = 30.0

_GAUSS_NORM = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "exp"
    width_km: float = DEFAULT_WIDTH_KM

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        w = float(self.width_km)
        if not (math.isfinite(w) and w > 0):
            raise ValueError(f"kernel width must be positive, got {self.width_km}")
        object.__setattr__(self, "width_km", w)


@dataclass(frozen=True)
class WeightedPoint:
    location: GeoPoint
    weight: float = 1.0

    def __post_init__(self):
        w = float(self.weight)
        if not (math.isfinite(w) and w >= 0):
            raise ValueError(f"weight must be finite and >= 0, got {self.weight}")
        object.__setattr__(self, "weight", w)

    @classmethod
    def at(cls, lat: float, lon: float, weight: float = 1.0) -> "WeightedPoint":
        return cls(GeoPoint(lat, lon), weight)


def kernel_eval(spec: KernelSpec, u: float) -> float:
    """Kernel value at scaled distance ``u = d / h``.

    Exponential: ``0.5 * exp(-u)``. Gaussian: ``exp(-u**2 / 2) / (2*pi)``.
    """
    if not u >= 0:
        raise ValueError(f"kernel argument must be >= 0, got {u}")
    if spec.kind == "exp":
        return 0.5 * math.exp(-u)
    return _GAUSS_NORM * math.exp(-0.5 * u * u)


@dataclass(frozen=True)
class PointSet:
    """Column-oriented weighted points, the bulk form used by the evaluators."""

    lat: np.ndarray
    lon: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        lat = np.ascontiguousarray(self.lat, dtype=float)
        lon = np.ascontiguousarray(self.lon, dtype=float)
        w = np.ascontiguousarray(self.weight, dtype=float)
        if not (lat.ndim == lon.ndim == w.ndim == 1 and lat.size == lon.size == w.size):
            raise ValueError("lat, lon and weight must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(lat)) and np.all(np.isfinite(lon))):
            raise ValueError("coordinates must be finite")
        if np.any(np.abs(lat) > 90.0):
            raise ValueError("latitude outside [-90, 90]")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and >= 0")
        out = (lon < -180.0) | (lon >= 180.0)
        if np.any(out):
            # only wrap what needs it; in-range values must come back untouched
            lon = lon.copy()
            lon[out] = np.mod(lon[out] + 180.0, 360.0) - 180.0
            lon[lon >= 180.0] -= 360.0
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)
        object.__setattr__(self, "weight", w)

    def __len__(self):
        return int(self.lat.size)

    @classmethod
    def from_points(cls, points: Iterable[WeightedPoint]) -> "PointSet":
        if isinstance(points, PointSet):
            return points
        pts = list(points)
        return cls(
            np.array([p.location.lat for p in pts], dtype=float),
            np.array([p.location.lon for p in pts], dtype=float),
            np.array([p.weight for p in pts], dtype=float),
        )

    def to_points(self) -> list[WeightedPoint]:
        return [WeightedPoint.at(a, b, c) for a, b, c in zip(self.lat, self.lon, self.weight)]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weight))


_KERNEL_CONST = {"exp": 0.5, "gauss": _GAUSS_NORM}


def _kernel_from_roots(x: np.ndarray, kind: str, scale: float) -> np.ndarray:
    """Turn haversine roots ``sqrt(a)`` into unnormalised kernel values, in place.

    The kernel constant is folded into the point weights by the callers. Both
    evaluators go through here, so their per-term arithmetic cannot drift
    apart. NaN entries (pairs cut by the fast path) stay NaN.
    """
    np.arcsin(x, out=x)
    if kind == "exp":
        x *= -scale
    else:
        x *= scale
        x *= x
        x *= -0.5
    np.exp(x, out=x)
    return x


def _prepare(points):
    ps = PointSet.from_points(points)
    return ps.lat, ps.lon, ps.weight


def density_brute_force(points: Sequence[WeightedPoint], spec: RasterSpec, kernel: KernelSpec) -> Raster:
    """Exact density: every point contributes to every cell, summed in input order."""
    lat, lon, w = _prepare(points)
    h = kernel.width_km
    scale = 2.0 * EARTH_RADIUS_KM / h
    rlat = np.radians(spec.row_lats())
    rlon = np.radians(spec.col_lons())
    clat = np.repeat(rlat, spec.cols)
    clon = np.tile(rlon, spec.rows)
    ccos = np.repeat(np.cos(rlat), spec.cols)
    plat = np.radians(lat)
    plon = np.radians(lon)
    pcos = np.cos(plat)
    wc = _KERNEL_CONST[kernel.kind] * w

    out = np.zeros(spec.rows * spec.cols)
    for k in range(lat.size):
        a = np.sin((clat - plat[k]) * 0.5)
        a *= a
        b = np.sin((clon - plon[k]) * 0.5)
        b *= b
        b *= ccos * pcos[k]
        a += b
        np.minimum(a, 1.0, out=a)
        np.sqrt(a, out=a)
        _kernel_from_roots(a, kernel.kind, scale)
        a *= wc[k]
        out += a
    out /= h * h
    return Raster(spec, out.reshape(spec.shape))


class _FastGrid:
    """Per-call state for the truncated evaluator."""

    # bound on buffered terms per block, keeps the working set cache-sized
    BLOCK = 1 << 17

    def __init__(self, lat, lon, w, spec: RasterSpec, kernel: KernelSpec, u_max: float):
        self.spec = spec
        self.kind = kernel.kind
        self.h = kernel.width_km
        self.u_max = u_max
        self.scale = 2.0 * EARTH_RADIUS_KM / self.h
        self.w = w
        self.wc = _KERNEL_CONST[kernel.kind] * w
        self.lon = lon
        self.plat = np.radians(lat)
        self.pcos = np.cos(self.plat)
        self.row_lat = spec.row_lats()
        self.rlat = np.radians(self.row_lat)
        self.rcos = np.cos(self.rlat)
        rlon = np.radians(spec.col_lons())
        plon = np.radians(lon)
        self.B = np.sin((rlon[None, :] - plon[:, None]) * 0.5)
        self.B *= self.B

        r_cut = u_max * self.h
        half_angle = r_cut / (2.0 * EARTH_RADIUS_KM)
        # pruning only: loose by a relative 1e-9, the exact test is on u itself
        self.everything = not math.isfinite(u_max) or half_angle >= 0.5 * math.pi
        # exact cutoff on the haversine root, which is monotone in distance
        self.root_cut = 2.0 if self.everything else math.sin(half_angle)
        if not self.everything:
            self.a_cut = min(1.0, math.sin(half_angle) ** 2 * (1.0 + 1e-9))
            self.dlat_deg = math.degrees(r_cut / EARTH_RADIUS_KM) * (1.0 + 1e-9) + 1e-9
            self.lat_order = np.argsort(lat, kind="stable")
            self.lat_sorted = lat[self.lat_order]

    def _candidates(self, i):
        if self.everything:
            return np.arange(self.w.size)
        lat0 = self.row_lat[i]
        lo = np.searchsorted(self.lat_sorted, lat0 - self.dlat_deg, side="left")
        hi = np.searchsorted(self.lat_sorted, lat0 + self.dlat_deg, side="right")
        return np.sort(self.lat_order[lo:hi])

    def _runs(self, A, C, cand):
        """Column runs ``(t, lo, hi)`` per candidate, 0-based inclusive, ordered by candidate."""
        cols = self.spec.cols
        n = cand.size
        if self.everything:
            t = np.arange(n)
            return t, np.zeros(n, dtype=np.int64), np.full(n, cols - 1, dtype=np.int64)

        keep = A <= self.a_cut
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (self.a_cut - A) / C
        full = keep & ((C <= 1e-300) | (q >= 1.0))
        q = np.clip(np.where(np.isfinite(q), q, 1.0), 0.0, 1.0)
        half = np.degrees(2.0 * np.arcsin(np.sqrt(q)))
        dlon = self.spec.dlon
        full |= keep & (half + 2.0 * dlon >= 180.0)
        partial = keep & ~full

        west = self.spec.bounds.west
        lon = self.lon[cand]
        los, his = [], []
        for shift in (-360.0, 0.0, 360.0):
            lo = np.ceil((lon + shift - half - west) / dlon - 0.5) - 1
            hi = np.floor((lon + shift + half - west) / dlon - 0.5) + 1
            lo = np.clip(lo, 0, cols).astype(np.int64)
            hi = np.clip(hi, -1, cols - 1).astype(np.int64)
            empty = ~partial | (lo > hi)
            lo[empty] = 1
            hi[empty] = 0
            lo[full] = 0
            hi[full] = cols - 1
            if shift != 0.0:
                # a full-range candidate gets a single run, from the unshifted pass
                lo[full] = 1
                hi[full] = 0
            los.append(lo)
            his.append(hi)
        lo = np.stack(los, axis=1).ravel()
        hi = np.stack(his, axis=1).ravel()
        t = np.repeat(np.arange(n), 3)
        nonempty = lo <= hi
        return t[nonempty], lo[nonempty], hi[nonempty]

    def row(self, i: int, buf: np.ndarray) -> np.ndarray:
        s = np.zeros(self.spec.cols)
        cand = self._candidates(i)
        if cand.size == 0:
            return s
        A = np.sin((self.rlat[i] - self.plat[cand]) * 0.5)
        A *= A
        C = self.rcos[i] * self.pcos[cand]
        t, lo, hi = self._runs(A, C, cand)
        if t.size == 0:
            return s
        k = cand[t]
        wk = self.wc[k]
        lengths = hi - lo + 1
        ends = np.cumsum(lengths)
        start = 0
        while start < t.size:
            base = ends[start] - lengths[start]
            stop = int(np.searchsorted(ends, base + self.BLOCK, side="right"))
            stop = max(stop, start + 1)
            sl = slice(start, stop)
            n = gather_roots(k[sl], A[t[sl]], C[t[sl]], self.B, lo[sl], hi[sl], self.root_cut, buf)
            x = buf[:n]
            _kernel_from_roots(x, self.kind, self.scale)
            accumulate_runs(s, x, wk[sl], lo[sl], hi[sl])
            start = stop
        s /= self.h * self.h
        return s

    def buffer(self) -> np.ndarray:
        return np.empty(max(self.BLOCK, self.spec.cols))

    def rows(self, rows: range) -> list[np.ndarray]:
        buf = self.buffer()
        return [self.row(i, buf) for i in rows]


def density_fast(
    points: Sequence[WeightedPoint],
    spec: RasterSpec,
    kernel: KernelSpec,
    u_max: float = DEFAULT_UMAX,
    threads: int = 1,
) -> Raster:
    """Density with the kernel truncated at ``u = u_max``.

    Per-cell error against :func:`density_brute_force` is at most
    ``sum(w) * kernel_eval(u_max) / h**2``. Retained points are summed in
    ascending input order, and rows are independent, so the result does not
    depend on ``threads``.
    """
    if not u_max > 0:
        raise ValueError(f"u_max must be > 0, got {u_max}")
    lat, lon, w = _prepare(points)
    if lat.size == 0:
        return Raster.zeros(spec)
    grid = _FastGrid(lat, lon, w, spec, kernel, float(u_max))
    threads = max(1, int(threads))
    if threads == 1 or spec.rows == 1:
        rows = grid.rows(range(spec.rows))
    else:
        bounds = np.linspace(0, spec.rows, min(threads, spec.rows) + 1).astype(int)
        chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(grid.rows, chunks))
        rows = [r for part in parts for r in part]
    return Raster(spec, np.vstack(rows))


def truncation_bound(total_weight: float, kernel: KernelSpec, u_max: float) -> float:
    """Worst-case per-cell gap between the truncated and exact densities."""
    if not math.isfinite(u_max):
        return 0.0
    return total_weight * kernel_eval(kernel, u_max) / kernel.width_km**2
