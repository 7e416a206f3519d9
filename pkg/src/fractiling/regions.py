"""Region representations: rasters on a global lattice, exact 1-D interval unions,
polygons, and lazily evaluated set expressions built from them.

Every region answers ``contains(points)`` and ``bounds()``.  Rasters with the same
``res`` share the lattice of cells ``[i/res, (i+1)/res)`` so set algebra between
them is index arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy import ndimage

from .errors import BudgetExceeded, DimMismatch
from .maps import MapSpec

DEFAULT_RES = 256.0
DEFAULT_BUDGET = 2**28


def check_budget(cells: int, budget: int | None = None):
    budget = DEFAULT_BUDGET if budget is None else budget
    if cells > budget:
        raise BudgetExceeded(f"{cells} cells exceeds the budget of {budget}")


class Region:
    dim: int

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


# -- rasters ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Raster(Region):
    res: float
    origin: tuple  # integer lattice index of occupancy[0, 0, ...]
    occupancy: np.ndarray

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        if self.res <= 0:
            raise ValueError("res must be positive")
        if len(self.origin) != occ.ndim:
            raise DimMismatch("origin and occupancy dims differ")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "origin", tuple(int(v) for v in self.origin))

    @property
    def dim(self) -> int:
        return self.occupancy.ndim

    @property
    def shape(self) -> tuple:
        return self.occupancy.shape

    @property
    def count(self) -> int:
        return int(self.occupancy.sum())

    @property
    def area(self) -> float:
        return self.count / self.res**self.dim

    @property
    def cell_size(self) -> float:
        return 1.0 / self.res

    @property
    def cell_diagonal(self) -> float:
        return math.sqrt(self.dim) / self.res

    def bounds(self):
        lo = np.asarray(self.origin, float) / self.res
        return lo, lo + np.asarray(self.shape, float) / self.res

    def is_empty(self) -> bool:
        return not self.occupancy.any()

    @classmethod
    def empty(cls, dim: int, res: float) -> "Raster":
        return cls(res, (0,) * dim, np.zeros((0,) * dim, dtype=bool))

    @classmethod
    def box(cls, lo, hi, res: float) -> "Raster":
        """Cells whose centers lie in the closed box [lo, hi]."""
        grid = lattice(lo, hi, res)
        return cls(res, grid.origin, np.ones(grid.shape, dtype=bool)).trim()

    @classmethod
    def from_points(cls, points, res: float, budget=None) -> "Raster":
        pts = np.atleast_2d(np.asarray(points, float))
        if len(pts) == 0:
            return cls.empty(pts.shape[1], res)
        idx = np.floor(pts * res).astype(np.int64)
        lo = idx.min(axis=0)
        shape = idx.max(axis=0) - lo + 1
        check_budget(int(np.prod(shape)), budget)
        occ = np.zeros(tuple(shape), dtype=bool)
        occ[tuple((idx - lo).T)] = True
        return cls(res, tuple(lo), occ)

    def centers(self) -> np.ndarray:
        idx = np.argwhere(self.occupancy) + np.asarray(self.origin)
        return (idx + 0.5) / self.res

    def subsamples(self, per_axis: int = 2) -> np.ndarray:
        """``per_axis**dim`` evenly spread sample points inside every occupied cell."""
        offs = (np.arange(per_axis) + 0.5) / per_axis
        grids = np.meshgrid(*([offs] * self.dim), indexing="ij")
        sub = np.stack([g.ravel() for g in grids], axis=1)
        idx = np.argwhere(self.occupancy) + np.asarray(self.origin)
        return ((idx[:, None, :] + sub[None]) / self.res).reshape(-1, self.dim)

    def corners(self) -> np.ndarray:
        """Cell centers plus the corners of every occupied cell (deduplicated)."""
        idx = np.argwhere(self.occupancy) + np.asarray(self.origin)
        grids = np.meshgrid(*([np.array([0, 1])] * self.dim), indexing="ij")
        sub = np.stack([g.ravel() for g in grids], axis=1)
        pts = np.unique((idx[:, None, :] + sub[None]).reshape(-1, self.dim), axis=0)
        return np.concatenate([pts / self.res, self.centers()])

    def _lookup(self, occ: np.ndarray, origin, points) -> np.ndarray:
        pts = np.asarray(points, float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dim:
            raise DimMismatch(f"point dim {pts.shape[1]} vs raster dim {self.dim}")
        idx = np.floor(pts * self.res).astype(np.int64) - np.asarray(origin)
        ok = np.all((idx >= 0) & (idx < np.asarray(occ.shape)), axis=1)
        out = np.zeros(len(pts), dtype=bool)
        if ok.any():
            out[ok] = occ[tuple(idx[ok].T)]
        return out[0] if single else out

    def contains(self, points, dilate: int = 0) -> np.ndarray:
        if dilate:
            d = self.dilate(dilate)
            return d._lookup(d.occupancy, d.origin, points)
        return self._lookup(self.occupancy, self.origin, points)

    # -- morphology ----------------------------------------------------------
    def _structure(self):
        return np.ones((3,) * self.dim, dtype=bool)

    def erode(self, cells: int = 1) -> "Raster":
        if cells <= 0 or self.is_empty():
            return self
        occ = ndimage.binary_erosion(self.occupancy, self._structure(), iterations=cells, border_value=0)
        return Raster(self.res, self.origin, occ).trim()

    def dilate(self, cells: int = 1) -> "Raster":
        if cells <= 0 or self.is_empty():
            return self
        return self._dilated(cells)

    def _dilated(self, cells):
        cache = self.__dict__.setdefault("_dilate_cache", {})
        if cells not in cache:
            occ = np.pad(self.occupancy, cells)
            occ = ndimage.binary_dilation(occ, self._structure(), iterations=cells)
            cache[cells] = Raster(self.res, tuple(o - cells for o in self.origin), occ)
        return cache[cells]

    def trim(self) -> "Raster":
        if not self.occupancy.any():
            return Raster.empty(self.dim, self.res)
        nz = np.argwhere(self.occupancy)
        lo, hi = nz.min(axis=0), nz.max(axis=0) + 1
        sl = tuple(slice(a, b) for a, b in zip(lo, hi))
        return Raster(self.res, tuple(np.asarray(self.origin) + lo), self.occupancy[sl])

    # -- set algebra on a shared lattice ----------------------------------------
    def on_grid(self, origin, shape) -> np.ndarray:
        """Occupancy restricted/padded to the lattice block starting at ``origin``."""
        out = np.zeros(tuple(shape), dtype=bool)
        if self.is_empty():
            return out
        src_lo = np.maximum(np.asarray(origin) - np.asarray(self.origin), 0)
        dst_lo = np.maximum(np.asarray(self.origin) - np.asarray(origin), 0)
        n = np.minimum(np.asarray(self.shape) - src_lo, np.asarray(shape) - dst_lo)
        if np.any(n <= 0):
            return out
        src = tuple(slice(a, a + k) for a, k in zip(src_lo, n))
        dst = tuple(slice(a, a + k) for a, k in zip(dst_lo, n))
        out[dst] = self.occupancy[src]
        return out

    def _pair(self, other: "Raster"):
        if other.res != self.res or other.dim != self.dim:
            raise DimMismatch("rasters must share res and dim")
        parts = [r for r in (self, other) if not r.is_empty()] or [self]
        lo = np.min([r.origin for r in parts], axis=0)
        hi = np.max([np.asarray(r.origin) + r.shape for r in parts], axis=0)
        return tuple(lo), tuple(hi - lo)

    def union(self, other: "Raster") -> "Raster":
        o, s = self._pair(other)
        return Raster(self.res, o, self.on_grid(o, s) | other.on_grid(o, s)).trim()

    def intersection(self, other: "Raster") -> "Raster":
        o, s = self._pair(other)
        return Raster(self.res, o, self.on_grid(o, s) & other.on_grid(o, s)).trim()

    def difference(self, other: "Raster") -> "Raster":
        o, s = self._pair(other)
        return Raster(self.res, o, self.on_grid(o, s) & ~other.on_grid(o, s)).trim()

    def same_cells(self, other: "Raster") -> bool:
        o, s = self._pair(other)
        return bool(np.array_equal(self.on_grid(o, s), other.on_grid(o, s)))


@dataclass(frozen=True)
class Lattice:
    res: float
    origin: tuple
    shape: tuple

    def centers(self) -> np.ndarray:
        axes = [(np.arange(n) + o + 0.5) / self.res for o, n in zip(self.origin, self.shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


def lattice(lo, hi, res: float, budget=None) -> Lattice:
    """Lattice block of cells whose centers lie in the closed box [lo, hi]."""
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    a = np.ceil(lo * res - 0.5 - 1e-9).astype(np.int64)
    b = np.floor(hi * res - 0.5 + 1e-9).astype(np.int64)
    shape = np.maximum(b - a + 1, 0)
    check_budget(int(np.prod(shape)), budget)
    return Lattice(res, tuple(a), tuple(shape))


def rasterize(region: Region, res: float, lo=None, hi=None, budget=None, chunk=1 << 20) -> Raster:
    """Cells whose centers lie in ``region``, searched over its bounds (or [lo, hi])."""
    if isinstance(region, Raster) and region.res == res and lo is None:
        return region
    blo, bhi = region.bounds()
    lo = blo if lo is None else np.maximum(np.asarray(lo, float), blo)
    hi = bhi if hi is None else np.minimum(np.asarray(hi, float), bhi)
    if np.any(hi < lo):
        return Raster.empty(region.dim, res)
    grid = lattice(lo, hi, res, budget)
    if grid.size == 0:
        return Raster.empty(region.dim, res)
    pts = grid.centers()
    flags = np.concatenate([region.contains(pts[i:i + chunk]) for i in range(0, len(pts), chunk)])
    return Raster(res, grid.origin, flags.reshape(grid.shape)).trim()


# -- exact 1-D intervals --------------------------------------------------------------

def exact_number(x):
    """A Fraction equal to ``x`` up to float rounding when one with a small
    denominator exists, otherwise the float itself."""
    if isinstance(x, Fraction):
        return x
    x = float(x)
    f = Fraction(x).limit_denominator(10**9)
    return f if abs(float(f) - x) <= 4e-16 * max(1.0, abs(x)) else x


@dataclass(frozen=True)
class Affine1D:
    """x -> scale * x + offset with exact (Fraction) coefficients when possible."""

    scale: object
    offset: object

    @classmethod
    def from_map(cls, m: MapSpec) -> "Affine1D":
        if m.dim != 1 or m.projective:
            raise DimMismatch("Affine1D needs a 1-D affine map")
        return cls(exact_number(m.matrix[0, 0]), exact_number(m.matrix[0, 1]))

    def __call__(self, x):
        return self.scale * x + self.offset

    def compose(self, other: "Affine1D") -> "Affine1D":
        return Affine1D(self.scale * other.scale, self.scale * other.offset + self.offset)

    __matmul__ = compose

    def inverse(self) -> "Affine1D":
        inv = 1 / self.scale if isinstance(self.scale, Fraction) else 1.0 / self.scale
        return Affine1D(inv, -self.offset * inv)

    def to_map(self) -> MapSpec:
        return MapSpec.affine([[float(self.scale)]], [float(self.offset)])


@dataclass(frozen=True)
class Intervals1D(Region):
    """Finite union of closed intervals, sorted, pairwise disjoint except at endpoints.

    ``merge=True`` (the default for set operations) also fuses touching
    intervals; tilings keep them separate.  Degenerate (zero-length) pieces are
    dropped: they have measure zero.
    """

    intervals: tuple = ()
    tol: float = 0.0

    dim = 1

    def __post_init__(self):
        ivs = sorted((min(a, b), max(a, b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def of(cls, *pairs, exact: bool = True) -> "Intervals1D":
        conv = exact_number if exact else float
        return cls(tuple((conv(a), conv(b)) for a, b in pairs)).merged()

    def merged(self) -> "Intervals1D":
        out = []
        for a, b in self.intervals:
            if b - a <= self.tol:
                continue
            if out and a <= out[-1][1] + self.tol:
                out[-1] = (out[-1][0], max(out[-1][1], b))
            else:
                out.append((a, b))
        return Intervals1D(tuple(out), self.tol)

    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self):
        return sum((b - a for a, b in self.intervals), 0)

    def bounds(self):
        if not self.intervals:
            return np.array([0.0]), np.array([-1.0])
        return np.array([float(self.intervals[0][0])]), np.array([float(self.intervals[-1][1])])

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(points, float)
        single = pts.ndim == 0
        x = pts.reshape(-1)
        out = np.zeros(len(x), dtype=bool)
        for a, b in self.intervals:
            out |= (x >= float(a) - tol) & (x <= float(b) + tol)
        return out[0] if single else out

    def contains_interior(self, lo, hi) -> bool:
        """Whether [lo, hi] lies in the open interior of this set."""
        return any(a < lo and hi < b for a, b in self.merged().intervals)

    def map(self, f) -> "Intervals1D":
        f = Affine1D.from_map(f) if isinstance(f, MapSpec) else f
        return Intervals1D(tuple((f(a), f(b)) for a, b in self.intervals), self.tol)

    def union(self, other: "Intervals1D") -> "Intervals1D":
        return Intervals1D(self.intervals + other.intervals, self.tol).merged()

    def intersection(self, other: "Intervals1D") -> "Intervals1D":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if hi - lo > self.tol:
                    out.append((lo, hi))
        return Intervals1D(tuple(out), self.tol)

    def difference(self, other: "Intervals1D") -> "Intervals1D":
        """Closure of the set difference."""
        pieces = list(self.intervals)
        for c, d in other.merged().intervals:
            nxt = []
            for a, b in pieces:
                if d <= a or c >= b:
                    nxt.append((a, b))
                    continue
                if c - a > self.tol:
                    nxt.append((a, c))
                if b - d > self.tol:
                    nxt.append((d, b))
            pieces = nxt
        return Intervals1D(tuple(pieces), self.tol)

    def same_set(self, other: "Intervals1D", tol: float = 0.0) -> bool:
        a, b = self.merged().intervals, other.merged().intervals
        return len(a) == len(b) and all(
            abs(x0 - y0) <= tol and abs(x1 - y1) <= tol for (x0, x1), (y0, y1) in zip(a, b))

    def to_lines(self) -> str:
        return "".join(f"{float(a):.12g} {float(b):.12g}\n" for a, b in self.intervals)

    @classmethod
    def from_lines(cls, text: str) -> "Intervals1D":
        pairs = []
        for line in text.splitlines():
            if line.strip() and not line.lstrip().startswith("#"):
                a, b = line.split()
                pairs.append((float(a), float(b)))
        return cls.of(*pairs)


# -- polygons --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Polygon(Region):
    """Simple polygon given by its vertices in order; a closed set."""

    vertices: np.ndarray
    tol: float = 1e-9

    dim = 2

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DimMismatch("polygon needs at least three 2-D vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        ab = np.roll(v, -1, axis=0) - v
        object.__setattr__(self, "_edges", (ab, np.einsum("kd,kd->k", ab, ab)))

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def transformed(self, m: MapSpec) -> "Polygon":
        return Polygon(m.apply(self.vertices), self.tol)

    def area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    def edge_distance(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, float))
        a = self.vertices
        ab, ab2 = self._edges
        rel = p[:, None, :] - a[None]
        t = np.clip(np.einsum("pkd,kd->pk", rel, ab) / ab2, 0, 1)
        off = rel - t[..., None] * ab[None]
        return np.sqrt(np.einsum("pkd,pkd->pk", off, off).min(axis=1))

    def _inside(self, p) -> np.ndarray:
        x, y = p[:, 0:1], p[:, 1:2]
        a = self.vertices
        ab = self._edges[0]
        cond = (a[None, :, 1] > y) != (a[None, :, 1] + ab[None, :, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = a[None, :, 0] + (y - a[None, :, 1]) * ab[None, :, 0] / ab[None, :, 1]
        return (np.sum(cond & (x < xs), axis=1) % 2) == 1

    def contains(self, points, tol: float | None = None) -> np.ndarray:
        tol = self.tol if tol is None else tol
        pts = np.asarray(points, float)
        single = pts.ndim == 1
        p = np.atleast_2d(pts)
        out = self._inside(p)
        if tol > 0 and not out.all():
            rest = ~out
            out[rest] = self.edge_distance(p[rest]) <= tol
        return out[0] if single else out

    def distance(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, float))
        d = self.edge_distance(p)
        d[self._inside(p)] = 0.0
        return d


# -- lazy set expressions --------------------------------------------------------------

def _box_image(lo, hi, m: MapSpec):
    corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(len(lo), -1).T
    img = m.apply(corners)
    return img.min(axis=0), img.max(axis=0)


@dataclass(frozen=True, eq=False)
class Image(Region):
    """``xform(base)``, evaluated by pulling points back through the inverse."""

    base: Region
    xform: MapSpec
    _inv: MapSpec = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.base, Image):
            object.__setattr__(self, "xform", self.xform @ self.base.xform)
            object.__setattr__(self, "base", self.base.base)
        object.__setattr__(self, "_inv", self.xform.inverse())

    @property
    def dim(self):
        return self.base.dim

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        single = pts.ndim == 1
        p = np.atleast_2d(pts)
        if self.xform.projective:
            out = np.zeros(len(p), dtype=bool)
            h = p @ self._inv.matrix[:, :-1].T + self._inv.matrix[:, -1]
            ok = np.abs(h[:, -1]) > 1e-12
            out[ok] = self.base.contains(h[ok, :-1] / h[ok, -1:])
        else:
            out = np.asarray(self.base.contains(self._inv.apply(p)))
        return out[0] if single else out

    @cached_property
    def _bounds(self):
        if isinstance(self.base, Polygon):
            v = self.xform.apply(self.base.vertices)
            return v.min(axis=0), v.max(axis=0)
        return _box_image(*self.base.bounds(), self.xform)

    def bounds(self):
        return self._bounds


@dataclass(frozen=True, eq=False)
class Intersection(Region):
    parts: tuple

    @property
    def dim(self):
        return self.parts[0].dim

    def contains(self, points):
        out = np.asarray(self.parts[0].contains(points))
        for r in self.parts[1:]:
            out = out & r.contains(points)
        return out

    def bounds(self):
        bs = [r.bounds() for r in self.parts]
        return np.max([b[0] for b in bs], axis=0), np.min([b[1] for b in bs], axis=0)


@dataclass(frozen=True, eq=False)
class Union(Region):
    parts: tuple

    @property
    def dim(self):
        return self.parts[0].dim

    def contains(self, points):
        out = np.asarray(self.parts[0].contains(points))
        for r in self.parts[1:]:
            out = out | r.contains(points)
        return out

    def bounds(self):
        bs = [r.bounds() for r in self.parts]
        return np.min([b[0] for b in bs], axis=0), np.max([b[1] for b in bs], axis=0)


@dataclass(frozen=True, eq=False)
class Difference(Region):
    """``keep`` minus ``remove``; at cell centers this agrees with the closure of the difference
    except on a measure-zero boundary."""

    keep: Region
    remove: Region

    @property
    def dim(self):
        return self.keep.dim

    def contains(self, points):
        return np.asarray(self.keep.contains(points)) & ~np.asarray(self.remove.contains(points))

    def bounds(self):
        return self.keep.bounds()


def image(region: Region, m: MapSpec) -> Region:
    """``m(region)`` in the region's own representation where that is exact."""
    if isinstance(region, Intervals1D):
        return region.map(m)
    if isinstance(region, Polygon) and not m.projective:
        return region.transformed(m)
    return Image(region, m)


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    seed: int | None = None
    count: int = 0

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, float))
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "count", len(pts))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)
