"""Sections, extended addresses, fast basins and extended fractal transformations.

Only mask-induced sections are provided: the digit of x is the largest i with
x in M_i, and the rest of the address is the address of f_i^{-1}(x).  With
the tops mask this is the tops section.  Point operations are vectorized over
an (P, dim) array; the single-point forms wrap them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, InvalidWord, OutsideAttractor, OutsideExpansion
from .maps import Ifs, MapSpec, check_word, estimate_contraction, invariant_ball
from .mask import Mask, tops_mask
from .regions import Intervals1D, Polygon, Raster, Region, exact_number
from .symbols import InfiniteWord

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 48


# -- addresses -------------------------------------------------------------------------------

@dataclass(frozen=True)
class OmegaAddress:
    """theta|k . omega, with the constraint theta_k != omega_1 when k >= 1."""

    prefix: tuple
    tail: tuple
    source: InfiniteWord | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(c) for c in self.prefix))
        object.__setattr__(self, "tail", tuple(int(c) for c in self.tail))
        if self.prefix and self.tail and self.prefix[-1] == self.tail[0]:
            raise InvalidWord(f"prefix ends with {self.prefix[-1]}, the tail's first letter")

    @property
    def k(self) -> int:
        return len(self.prefix)

    def __str__(self):
        sep = "" if max(self.prefix + self.tail, default=0) < 10 else ","
        return sep.join(map(str, self.prefix)) + "." + sep.join(map(str, self.tail))


def _points(x, dim: int) -> tuple[np.ndarray, bool]:
    p = np.asarray(x, dtype=float)
    single = p.ndim == 0 or (p.ndim == 1 and dim > 1 and p.shape[0] == dim) or (
        p.ndim == 1 and dim == 1 and p.shape[0] == 1)
    return p.reshape(-1, dim), single


class Membership:
    """Tolerant point-in-region test: raster dilated by ``cells``, exact sets with ``tol``."""

    def __init__(self, region: Region, cells: int = 1, tol: float = 1e-9):
        self.region = region
        self.tol = tol
        self._dilated = region.dilate(cells) if isinstance(region, Raster) else None
        self._tree = None
        self._depth = None

    def __call__(self, pts: np.ndarray, tol: float | None = None) -> np.ndarray:
        r = self.region
        if self._dilated is not None:
            return np.asarray(self._dilated.contains(pts), bool)
        if isinstance(r, (Intervals1D, Polygon)):
            tol = self.tol if tol is None else tol
            return np.asarray(r.contains(pts, tol=tol), bool).reshape(-1)
        return np.asarray(r.contains(pts), bool).reshape(-1)

    def depth(self, pts: np.ndarray) -> np.ndarray:
        """For rasters, distance from each point's cell to the nearest empty cell."""
        r = self.region
        if self._depth is None:
            from scipy import ndimage
            occ = np.pad(r.occupancy, 1)
            self._depth = ndimage.distance_transform_edt(occ) / r.res
        idx = np.floor((np.asarray(pts, float) - r.origin) * r.res).astype(np.int64) + 1
        ok = np.all((idx >= 0) & (idx < np.asarray(self._depth.shape)), axis=1)
        out = np.zeros(len(idx))
        out[ok] = self._depth[tuple(idx[ok].T)]
        return out

    def _centers(self):
        if self._tree is None:
            from scipy.spatial import cKDTree
            self._tree = cKDTree(self.region.centers())
        return self._tree

    def snap(self, pts: np.ndarray) -> np.ndarray:
        """Nearest occupied cell centers of a raster; other regions return ``pts``."""
        if not isinstance(self.region, Raster):
            return pts
        _, idx = self._centers().query(pts)
        return self._centers().data[idx]

    def distance(self, pts: np.ndarray) -> np.ndarray:
        """Distance to the region: exact for intervals and polygons, to the nearest
        occupied cell center for rasters, to the bounding box otherwise."""
        r = self.region
        if isinstance(r, Intervals1D):
            x = pts.reshape(-1)
            d = np.full(len(x), np.inf)
            for a, b in r.intervals:
                d = np.minimum(d, np.maximum(np.maximum(float(a) - x, x - float(b)), 0))
            return d
        if isinstance(r, Polygon):
            return r.distance(pts)
        if isinstance(r, Raster):
            return self._centers().query(pts)[0]
        lo, hi = r.bounds()
        return np.linalg.norm(np.maximum(np.maximum(lo - pts, pts - hi), 0), axis=1)


# -- sections --------------------------------------------------------------------------------

@dataclass
class SectionSpec:
    """A mask-induced section truncated at ``depth`` digits."""

    mask: Mask
    depth: int = DEFAULT_DEPTH
    mode: str = "tops"


def tops_section(F: Ifs, A: Region, depth: int = DEFAULT_DEPTH, order=None) -> SectionSpec:
    return SectionSpec(tops_mask(F, A, order), depth, "tops")


def section_addresses(F: Ifs, A: Region, S: SectionSpec, pts, depth: int | None = None,
                      strict: bool = True) -> np.ndarray:
    """(P, depth) array of section digits for the rows of ``pts``.

    A point that leaves every mask region, through rounding or raster slop, takes
    the digit i whose f_i^{-1}(x) lies closest to A.  On raster attractors a point
    that has left the dilated raster is moved to the nearest occupied cell center,
    which keeps the slop from compounding over the digits.
    """
    depth = S.depth if depth is None else depth
    x = np.array(pts, dtype=float).reshape(-1, F.dim)
    member = Membership(A)
    if strict:
        out = ~member(x)
        if out.any():
            raise OutsideAttractor(f"{int(out.sum())} points lie outside the attractor, "
                                   f"first {x[out][0].tolist()}")
    inv = F.inverse_maps()
    regions = S.mask.regions
    digits = np.zeros((len(x), depth), dtype=np.int64)
    for j in range(depth):
        inside = np.stack([np.asarray(r.contains(x), bool).reshape(-1) for r in regions], axis=1)
        if isinstance(A, Raster):
            # raster images overlap by up to a cell; prefer the preimage deepest in A
            amb = np.flatnonzero(inside.sum(axis=1) > 1)
            if len(amb):
                deep = np.stack([member.depth(m.apply(x[amb])) for m in inv], axis=1)
                deep[~inside[amb]] = -1
                top = deep >= deep.max(axis=1, keepdims=True)
                inside[amb] = top
        # largest index wins at shared boundaries
        d = np.where(inside.any(axis=1), F.n - np.argmax(inside[:, ::-1], axis=1), 0)
        lost = np.flatnonzero(d == 0)
        if len(lost):
            dist = np.stack([member.distance(m.apply(x[lost])) for m in inv], axis=1)
            d[lost] = np.argmin(dist, axis=1) + 1
        digits[:, j] = d
        for i in range(1, F.n + 1):
            sel = d == i
            if sel.any():
                x[sel] = inv[i - 1].apply(x[sel])
        if isinstance(A, Raster):
            off = ~member(x)
            if off.any():
                x[off] = member.snap(x[off])
    return digits


def section_address(F: Ifs, A: Region, S: SectionSpec, x, depth: int | None = None) -> tuple:
    pts, _ = _points(x, F.dim)
    return tuple(int(c) for c in section_addresses(F, A, S, pts[:1], depth)[0])


def coordinate_points(F: Ifs, words: np.ndarray) -> tuple[np.ndarray, float]:
    """pi(omega) approximated by f_{omega|depth}(c) for every row; returns points and error bound."""
    F.require_contractive()
    words = np.asarray(words, dtype=np.int64)
    c, r = invariant_ball(F)
    x = np.broadcast_to(c, (len(words), F.dim)).astype(float).copy()
    for j in range(words.shape[1] - 1, -1, -1):
        for i in range(1, F.n + 1):
            sel = words[:, j] == i
            if sel.any():
                x[sel] = F.maps[i - 1].apply(x[sel])
    return x, estimate_contraction(F) ** words.shape[1] * 2 * r


# -- extended coordinates and sections -----------------------------------------------------

def _prefix_maps(F: Ifs, theta_letters, kmax: int) -> list:
    """(f^{-1})_{theta|k} for k = 0..kmax."""
    out = [MapSpec.identity(F.dim)]
    inv = F.inverse_maps()
    for k in range(kmax):
        out.append(out[-1] @ inv[theta_letters[k] - 1])
    return out


def extended_coordinates(F: Ifs, theta: InfiniteWord, ks: np.ndarray, tails: np.ndarray) -> np.ndarray:
    """(f^{-1})_{theta|k}(pi(tail)) for every row."""
    ks = np.asarray(ks, dtype=np.int64)
    x, _ = coordinate_points(F, tails)
    top = int(ks.max(initial=0))
    pre = _prefix_maps(F, theta.prefix(top), top)
    for k in np.unique(ks):
        if k > 0:
            sel = ks == k
            x[sel] = pre[k].apply(x[sel])
    return x


def extended_coordinate(F: Ifs, addr: OmegaAddress, depth: int | None = None) -> np.ndarray:
    tail = addr.tail
    if addr.source is not None and depth is not None:
        tail = addr.source.prefix(depth)
    if depth is not None:
        tail = tail[:depth]
    if not tail:
        raise InvalidWord("address tail is empty")
    x, _ = coordinate_points(F, np.array([check_word(tail, F.n)]))
    if addr.prefix:
        x = _prefix_maps(F, addr.prefix, addr.k)[-1].apply(x)
    return x[0] if F.dim > 1 else x[0]


def extended_sections(F: Ifs, A: Region, S: SectionSpec, theta: InfiniteWord, pts, k_max: int,
                      depth: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(ks, tails) for every row; ks is -1 where no k <= k_max brings the point into A.

    k is the least integer with f_{theta_k} o ... o f_{theta_1}(x) in A.  When a
    boundary tolerance leaves the tail starting with theta_k, the address is
    rewritten one level lower, which names the same point and restores the
    constraint theta_k != tail_1.

    Exact attractors are tested with a tolerance that shrinks with the forward
    composition, so it stays ``tol`` in the coordinates of x; otherwise every
    point would pass at large k, since forward orbits converge to A.
    """
    depth = S.depth if depth is None else depth
    x = np.array(pts, dtype=float).reshape(-1, F.dim)
    member = Membership(A)
    lin = np.eye(F.dim)
    letters = theta.prefix(k_max)
    ks = np.full(len(x), -1, dtype=np.int64)
    y = np.empty_like(x)
    cur = x.copy()
    todo = np.arange(len(x))
    for k in range(k_max + 1):
        if k:
            m = F.maps[letters[k - 1] - 1]
            cur[todo] = m.apply(cur[todo])
            lin = m.linear @ lin
        scale = float(np.linalg.norm(lin, 2)) if not F.projective else 1.0
        hit = todo[member(cur[todo], member.tol * scale)]
        ks[hit] = k
        y[hit] = cur[hit]
        todo = todo[ks[todo] < 0]
        if not len(todo):
            break
    found = ks >= 0
    extra = 4
    tails = np.zeros((len(x), depth), dtype=np.int64)
    if found.any():
        full = section_addresses(F, A, S, y[found], depth + extra, strict=False)
        kf = ks[found]
        for _ in range(extra):
            clash = (kf > 0) & (full[:, 0] == np.array([letters[k - 1] if k else 0 for k in kf]))
            if not clash.any():
                break
            kf[clash] -= 1
            full[clash] = np.roll(full[clash], -1, axis=1)
        ks[found] = kf
        tails[found] = full[:, :depth]
    return ks, tails


def extended_section(F: Ifs, A: Region, S: SectionSpec, theta: InfiniteWord, x, k_max: int,
                     depth: int | None = None) -> OmegaAddress:
    pts, _ = _points(x, F.dim)
    ks, tails = extended_sections(F, A, S, theta, pts[:1], k_max, depth)
    if ks[0] < 0:
        raise OutsideExpansion(f"no k <= {k_max} brings the point into the attractor")
    return OmegaAddress(theta.prefix(int(ks[0])), tuple(int(c) for c in tails[0]))


# -- fractal transformations -----------------------------------------------------------------

@dataclass
class TransformSystem:
    """An IFS with its attractor approximation and section, one side of a transformation."""

    F: Ifs
    A: Region
    S: SectionSpec


def fractal_transform_points(src: TransformSystem, dst: TransformSystem, theta: InfiniteWord,
                             pts, k_max: int = 32, depth: int | None = None):
    """h(x) = pi_dst(tau_src(x)) extended along theta; returns (points, ok)."""
    if src.F.n != dst.F.n:
        raise InvalidWord(f"systems have {src.F.n} and {dst.F.n} maps")
    ks, tails = extended_sections(src.F, src.A, src.S, theta, pts, k_max, depth)
    ok = ks >= 0
    out = np.full((len(ks), dst.F.dim), np.nan)
    if ok.any():
        out[ok] = extended_coordinates(dst.F, theta, ks[ok], tails[ok])
    return out, ok


def fractal_transform_point(src: TransformSystem, dst: TransformSystem, theta: InfiniteWord, x,
                            k_max: int = 32, depth: int | None = None) -> np.ndarray:
    pts, _ = _points(x, src.F.dim)
    out, ok = fractal_transform_points(src, dst, theta, pts[:1], k_max, depth)
    if not ok[0]:
        raise OutsideExpansion(f"no k <= {k_max} brings the point into the attractor")
    return out[0]


def pixel_centers(window, shape) -> np.ndarray:
    """(H*W, 2) centers of a row-major image whose first row is the top edge of ``window``."""
    x0, y0, x1, y1 = (float(v) for v in window)
    h, w = shape
    xs = x0 + (np.arange(w) + 0.5) * (x1 - x0) / w
    ys = y1 - (np.arange(h) + 0.5) * (y1 - y0) / h
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def sample_nearest(img: np.ndarray, window, pts: np.ndarray, sentinel) -> np.ndarray:
    x0, y0, x1, y1 = (float(v) for v in window)
    h, w = img.shape[:2]
    fin = np.isfinite(pts).all(axis=1)
    p = np.where(fin[:, None], pts, x0 - 1)
    col = np.floor((p[:, 0] - x0) / (x1 - x0) * w).astype(np.int64)
    row = np.floor((y1 - p[:, 1]) / (y1 - y0) * h).astype(np.int64)
    ok = fin & (col >= 0) & (col < w) & (row >= 0) & (row < h)
    out = np.empty((len(pts),) + img.shape[2:], dtype=img.dtype)
    out[...] = sentinel
    out[ok] = img[row[ok], col[ok]]
    return out


def transform_image(src: TransformSystem, dst: TransformSystem, theta: InfiniteWord,
                    img: np.ndarray, in_window, out_window, out_shape=None, k_max: int = 32,
                    depth: int | None = None, sentinel=(255, 0, 255)) -> np.ndarray:
    """The transformed image c o h^{-1}: each output pixel y takes the input color at h^{-1}(y).

    h maps the source system to the destination system, so h^{-1} is the
    transformation from ``dst`` back to ``src``.  Pixels where the inverse is
    undefined within ``k_max`` levels, or lands outside the input, get ``sentinel``.
    """
    img = np.asarray(img)
    out_shape = img.shape[:2] if out_shape is None else tuple(out_shape)
    y = pixel_centers(out_window, out_shape)
    x, ok = fractal_transform_points(dst, src, theta, y, k_max, depth)
    sent = np.asarray(sentinel, dtype=img.dtype)[: img.shape[2]] if img.ndim == 3 else \
        np.asarray(sentinel, dtype=img.dtype).reshape(-1)[0]
    vals = sample_nearest(img, in_window, np.where(ok[:, None], x, np.nan), sent)
    return vals.reshape(out_shape + img.shape[2:])


# -- fast basin ------------------------------------------------------------------------------

def inverse_word_maps(F: Ifs, k: int, budget: int = 1 << 22) -> np.ndarray:
    """Distinct matrices (f^{-1})_w for all words of length <= k, identity included."""
    inv = F.inverse_matrices()
    size = F.dim + 1
    level = np.eye(size)[None]
    out = [level]
    for _ in range(k):
        level = (level[:, None] @ inv[None]).reshape(-1, size, size)
        level = np.unique(np.round(level, 12), axis=0)
        if sum(len(v) for v in out) + len(level) > budget:
            raise BudgetExceeded(f"more than {budget} inverse words")
        out.append(level)
    return np.unique(np.concatenate(out), axis=0)


def fast_basin(F: Ifs, A: Region, k: int, window, res: float = 128.0, budget=None) -> Region:
    """Union of (F*)^j(A) over j <= k, clipped to ``window`` = (lo, hi).

    Exact for interval unions; otherwise a raster of the window.
    """
    if k < 0:
        raise ValueError("depth must be >= 0")
    lo, hi = window
    if isinstance(A, Intervals1D):
        w = Intervals1D.of((float(np.ravel(lo)[0]), float(np.ravel(hi)[0])))
        inv = [m.inverse() for m in F.maps]
        level = {A.merged().intervals}
        total = Intervals1D(A.intervals).merged()
        for _ in range(k):
            nxt = set()
            for ivs in level:
                for m in inv:
                    nxt.add(Intervals1D(ivs).map(m).merged().intervals)
            if budget is not None and len(nxt) > budget:
                raise BudgetExceeded(f"{len(nxt)} distinct images exceeds {budget}")
            for ivs in nxt - level:
                total = total.union(Intervals1D(ivs))
            level = nxt
        return total.intersection(w).merged()
    from .attractor import render_images

    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    xforms = inverse_word_maps(F, k)
    return render_images(F, xforms, lo, hi, res, A, budget)


def window_occupancy(R: Raster, window, erosion_cells: int = 0) -> float:
    """Fraction of the window's cells occupied by R, after optional erosion."""
    from .regions import lattice

    lo, hi = (np.asarray(v, float) for v in window)
    grid = lattice(lo, hi, R.res)
    occ = R.erode(erosion_cells) if erosion_cells else R
    if occ.is_empty():
        return 0.0
    return float(np.count_nonzero(occ.on_grid(grid.origin, grid.shape))) / grid.size


def interval_fast_basin_oracle(F: Ifs, A, k: int, window) -> list:
    """Every inverse word of length <= k applied one by one to the interval A, in exact
    arithmetic, then merged and clipped.  Returns sorted (lo, hi) pairs."""
    from itertools import product

    scale = [exact_number(m.matrix[0, 0]) for m in F.maps]
    off = [exact_number(m.matrix[0, 1]) for m in F.maps]
    a0, a1 = (exact_number(v) for v in A)
    pieces = []
    for j in range(k + 1):
        for w in product(range(F.n), repeat=j):
            lo, hi = a0, a1
            # (f^{-1})_w = f_{w1}^{-1} o ... ; apply the innermost map first
            for i in reversed(w):
                lo, hi = sorted(((lo - off[i]) / scale[i], (hi - off[i]) / scale[i]))
            pieces.append((lo, hi))
    pieces.sort()
    merged = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    w0, w1 = (exact_number(v) for v in window)
    return [(max(lo, w0), min(hi, w1)) for lo, hi in merged if min(hi, w1) > max(lo, w0)]
