"""Attractor approximations: deterministic raster iteration, chaos game,
Hausdorff distances, interiors and windowed rendering of unions of images."""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import BudgetExceeded, DimMismatch
from .maps import Ifs, estimate_contraction, invariant_ball
from .regions import (DEFAULT_RES, Intervals1D, PointCloud, Polygon, Raster, Region,
                      check_budget, rasterize)

log = logging.getLogger(__name__)

BURN_IN = 100


def deterministic_attractor(F: Ifs, seed: Region, iters: int, res: float = DEFAULT_RES,
                            budget=None):
    """Rasterization of F^iters(seed).

    1-D interval seeds are iterated exactly.  Otherwise every iteration pushes
    2**dim sample points per occupied cell through every map and re-rasterizes;
    two samples per axis keep images of filled regions hole-free for any map
    with Lipschitz constant below 1.  The raster box follows the iterates.
    """
    F.require_contractive()
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if isinstance(seed, Intervals1D):
        cur = seed
        for _ in range(iters):
            nxt = Intervals1D()
            for m in F.maps:
                nxt = nxt.union(cur.map(m))
            cur = nxt
        return cur
    cur = rasterize(seed, res, budget=budget)
    for _ in range(iters):
        pts = cur.subsamples(2)
        check_budget(len(pts) * F.n, budget)
        imgs = np.concatenate([m.apply(pts) for m in F.maps])
        cur = Raster.from_points(imgs, res, budget)
    return cur


def default_iterations(F: Ifs, res: float, diameter: float | None = None) -> int:
    """Enough iterations that the Hausdorff error lam^k * diam drops below a cell."""
    lam = estimate_contraction(F)
    if diameter is None:
        diameter = 2 * invariant_ball(F)[1]
    if lam <= 0:
        return 1
    return max(1, math.ceil(math.log(1.0 / (res * max(diameter, 1e-12))) / math.log(lam)) + 2)


def attractor_raster(F: Ifs, res: float = DEFAULT_RES, budget=None) -> Raster:
    """Raster attractor from the invariant-ball box, iterated to sub-cell accuracy."""
    c, r = invariant_ball(F)
    seed = Raster.box(c - r, c + r, max(res / 8, 8.0))
    return deterministic_attractor(F, seed, default_iterations(F, res, 2 * r), res, budget)


def chaos_game(F: Ifs, n: int, seed: int = 0) -> PointCloud:
    """n points of one random orbit, uniform map choice, after a fixed burn-in."""
    F.require_contractive()
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    choice = rng.integers(0, F.n, size=n + BURN_IN)
    mats = F.matrices()
    if F.projective:
        x = np.append(F.maps[0].fixed_point(), 1.0)
        out = np.empty((n, F.dim))
        for step, i in enumerate(choice):
            x = mats[i] @ x
            x = x / x[-1]
            if step >= BURN_IN:
                out[step - BURN_IN] = x[:-1]
        return PointCloud(out, seed)
    lin = mats[:, :-1, :-1].tolist()
    off = mats[:, :-1, -1].tolist()
    x = F.maps[0].fixed_point().tolist()
    d = F.dim
    out = np.empty((n, d))
    for step, i in enumerate(choice.tolist()):
        a, b = lin[i], off[i]
        x = [sum(a[r][c] * x[c] for c in range(d)) + b[r] for r in range(d)]
        if step >= BURN_IN:
            out[step - BURN_IN] = x
    return PointCloud(out, seed)


# -- distances -------------------------------------------------------------------------

def _as_points(X) -> np.ndarray:
    if isinstance(X, PointCloud):
        return X.points
    if isinstance(X, Raster):
        return X.centers()
    if isinstance(X, Intervals1D):
        return np.array([[float(v)] for iv in X.intervals for v in iv])
    if isinstance(X, Polygon):
        return X.vertices
    return np.atleast_2d(np.asarray(X, float))


def _interval_directed(X: Intervals1D, Y: Intervals1D) -> float:
    ys = Y.merged().intervals
    cands = [float(v) for iv in X.intervals for v in iv]
    for (_, b), (c, _) in zip(ys, ys[1:]):
        mid = (float(b) + float(c)) / 2
        if X.contains(mid):
            cands.append(mid)
    lo = np.array([float(a) for a, _ in ys])
    hi = np.array([float(b) for _, b in ys])
    worst = 0.0
    for x in cands:
        d = np.maximum(np.maximum(lo - x, x - hi), 0.0).min()
        worst = max(worst, float(d))
    return worst


def _raster_directed(X: Raster, Y: Raster, budget=None) -> float:
    o, s = X._pair(Y)
    check_budget(int(np.prod(s)), budget)
    ygrid = Y.on_grid(o, s)
    xgrid = X.on_grid(o, s)
    if not xgrid.any():
        return 0.0
    dist = ndimage.distance_transform_edt(~ygrid, sampling=1.0 / X.res)
    return float(dist[xgrid].max())


def hausdorff_distance(X, Y, budget=None) -> float:
    """Symmetric Hausdorff distance between two regions or point clouds.

    Interval unions use an exact sweep, rasters on the same lattice a Euclidean
    distance transform, anything else nearest-neighbour queries on points.
    """
    dx = X.dim if hasattr(X, "dim") else np.atleast_2d(X).shape[1]
    dy = Y.dim if hasattr(Y, "dim") else np.atleast_2d(Y).shape[1]
    if dx != dy:
        raise DimMismatch(f"cannot compare dim {dx} with dim {dy}")
    if isinstance(X, Intervals1D) and isinstance(Y, Intervals1D):
        if X.is_empty() or Y.is_empty():
            return 0.0 if X.is_empty() and Y.is_empty() else math.inf
        return max(_interval_directed(X, Y), _interval_directed(Y, X))
    if isinstance(X, Raster) and isinstance(Y, Raster) and X.res == Y.res:
        if X.is_empty() or Y.is_empty():
            return 0.0 if X.is_empty() and Y.is_empty() else math.inf
        return max(_raster_directed(X, Y, budget), _raster_directed(Y, X, budget))
    px, py = _as_points(X), _as_points(Y)
    if len(px) == 0 or len(py) == 0:
        return 0.0 if len(px) == len(py) else math.inf
    return max(float(cKDTree(py).query(px)[0].max()), float(cKDTree(px).query(py)[0].max()))


def interior_approx(R: Raster, erosion_cells: int = 1) -> Raster:
    """Morphological erosion by a (2r+1)-cell square; cells outside count as empty."""
    if not isinstance(R, Raster):
        raise TypeError("interior_approx needs a Raster")
    if erosion_cells < 1:
        raise ValueError("erosion_cells must be >= 1")
    return R.erode(erosion_cells)


# -- windowed rendering of unions of images --------------------------------------------------

def bounding_ball(F: Ifs, A: Region | None = None) -> tuple[np.ndarray, float]:
    """A ball containing the attractor, tight when an approximation ``A`` is given."""
    if A is None:
        return invariant_ball(F)
    lo, hi = A.bounds()
    c = (np.asarray(lo) + np.asarray(hi)) / 2
    r = float(np.linalg.norm(np.asarray(hi) - np.asarray(lo))) / 2
    if isinstance(A, Raster):
        r += A.cell_diagonal
    return c, r


_HASH_MULT = np.array([0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9,
                       0xD6E8FEB86659FD93, 0xFF51AFD7ED558CCD, 0xC4CEB9FE1A85EC53,
                       0x94D049BB133111EB, 0xBF58476D1CE4E5B9, 0x2545F4914F6CDD1D],
                      dtype=np.uint64)


def _dedupe(mats: np.ndarray) -> np.ndarray:
    """Drop repeated matrices, comparing entries rounded to 1e-12.

    Rows are hashed to 64 bits instead of sorted lexicographically, which is
    much faster for large batches; a collision can only drop a piece.
    """
    flat = mats.reshape(len(mats), -1)
    if flat.shape[1] > len(_HASH_MULT) or not np.all(np.abs(flat) < 1e6):
        return np.unique(np.round(mats, 12), axis=0)
    q = np.round(flat * 1e12).astype(np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        h = (q * _HASH_MULT[:flat.shape[1]]).sum(axis=1, dtype=np.uint64)
        h ^= h >> np.uint64(31)
    _, idx = np.unique(h, return_index=True)
    return mats[np.sort(idx)]


def _spectral_norms(lin: np.ndarray) -> np.ndarray:
    if lin.shape[1:] == (2, 2):
        ss = np.einsum("nij,nij->n", lin, lin)
        det = lin[:, 0, 0] * lin[:, 1, 1] - lin[:, 0, 1] * lin[:, 1, 0]
        return np.sqrt(0.5 * (ss + np.sqrt(np.maximum(ss * ss - 4 * det * det, 0))))
    return np.linalg.norm(lin, ord=2, axis=(1, 2))


def render_images(F: Ifs, xforms: np.ndarray, lo, hi, res: float, A: Region | None = None,
                  budget=None, max_pieces: int = 1 << 24) -> Raster:
    """Cells of the window [lo, hi] met by the union of ``g(A)`` over affine ``xforms``.

    Each piece ``g(A)`` is refined into ``g o f_i(A)`` until its bounding ball is
    smaller than half a cell, discarding pieces whose ball misses the window and
    merging duplicate pieces.  Works for attractors with or without interior.
    """
    if F.projective:
        raise ValueError("windowed rendering supports affine maps only")
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    center, radius = bounding_ball(F, A)
    mats = F.matrices()
    d = F.dim
    h = 1.0 / res
    marks = []
    pieces = np.asarray(xforms, float)
    while len(pieces):
        pieces = _dedupe(pieces)
        if len(pieces) > max_pieces:
            raise BudgetExceeded(f"{len(pieces)} pieces exceeds {max_pieces}")
        cen = pieces[:, :d, :d] @ center + pieces[:, :d, d]
        rad = _spectral_norms(pieces[:, :d, :d]) * radius
        keep = np.all((cen + rad[:, None] >= lo) & (cen - rad[:, None] <= hi), axis=1)
        pieces, cen, rad = pieces[keep], cen[keep], rad[keep]
        done = rad <= h / 2
        if done.any():
            marks.append(cen[done])
        pieces = pieces[~done]
        if len(pieces):
            pieces = (pieces[:, None] @ mats[None]).reshape(-1, d + 1, d + 1)
    pts = np.concatenate(marks) if marks else np.zeros((0, d))
    pts = pts[np.all((pts >= lo) & (pts <= hi), axis=1)]
    return Raster.from_points(pts, res, budget) if len(pts) else Raster.empty(d, res)
