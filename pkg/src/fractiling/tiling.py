"""Tilings T_theta built from an invertible IFS.

A tile is identified symbolically by its canonical key ``(level, word)``; its
transform is ``inverse_compose(F, theta|level) o compose(F, word)`` and its
geometry is the image of the attractor under that transform.  Canonical means
``level == 0`` or ``word[0] != theta_level``; any other pair describes the same
tile one level lower.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, InvalidWord
from .maps import Ifs, MapSpec, compose, inverse_compose, reverse
from .regions import Intervals1D, Region, image, lattice, rasterize
from .symbols import InfiniteWord

WORD_BUDGET = 2**22


@dataclass(frozen=True)
class Tile:
    level: int
    word: tuple
    xform: MapSpec
    component: int = 0

    @property
    def key(self) -> tuple:
        return (self.level, self.word)


def canonicalize(theta: InfiniteWord, level: int, word) -> tuple[int, tuple]:
    word = tuple(word)
    if len(word) != level:
        raise InvalidWord(f"word length {len(word)} does not match level {level}")
    prefix = theta.prefix(level)
    while level >= 1 and word[0] == prefix[level - 1]:
        word = word[1:]
        level -= 1
    return level, word


class TileSet:
    """Canonical tiles stored column-wise: levels, zero-padded words, homogeneous matrices."""

    def __init__(self, levels, words, mats, projective=False, components=None):
        self.levels = np.asarray(levels, dtype=np.int64)
        self.words = np.asarray(words, dtype=np.int64)
        self.mats = np.asarray(mats, dtype=float)
        self.projective = projective
        self.components = (np.zeros(len(self.levels), dtype=np.int64)
                           if components is None else np.asarray(components, dtype=np.int64))

    def __len__(self):
        return len(self.levels)

    def word(self, i: int) -> tuple:
        return tuple(int(c) for c in self.words[i, :self.levels[i]])

    def tile(self, i: int) -> Tile:
        return Tile(int(self.levels[i]), self.word(i), MapSpec(self.mats[i], self.projective),
                    int(self.components[i]))

    def __iter__(self) -> Iterator[Tile]:
        return (self.tile(i) for i in range(len(self)))

    def keys(self) -> set:
        return {(int(self.levels[i]), self.word(i)) for i in range(len(self))}

    def index(self) -> dict:
        return {(int(self.levels[i]), self.word(i)): i for i in range(len(self))}

    def new_at(self, level: int) -> "TileSet":
        sel = self.levels == level
        return TileSet(self.levels[sel], self.words[sel], self.mats[sel], self.projective,
                       self.components[sel])


def tiles_at_level(F: Ifs, theta: InfiniteWord, k: int, budget: int = WORD_BUDGET) -> TileSet:
    """All canonical tiles of T_{theta,k}.

    Canonical keys at level k are the keys ``(j, w)`` with ``j <= k`` and
    ``w[0] != theta_j``, so they are generated directly, skipping the words that
    would canonicalize to an older level.
    """
    if k < 0:
        raise ValueError("level must be >= 0")
    n = F.n
    if n**k > budget:
        raise BudgetExceeded(f"{n}^{k} words exceeds the enumeration budget {budget}")
    thetas = theta.prefix(k)
    mats = F.matrices()
    inv = F.inverse_matrices()
    size = F.dim + 1
    levels, words, out = [np.zeros(1, np.int64)], [np.zeros((1, k), np.int64)], [np.eye(size)[None]]
    comp = np.eye(size)[None]  # compositions f_w for all w of the current length
    comp_words = np.zeros((1, 0), dtype=np.int64)
    prefix = np.eye(size)
    for j in range(1, k + 1):
        comp = (comp[:, None] @ mats[None]).reshape(-1, size, size)
        comp_words = np.concatenate(
            [np.repeat(comp_words, n, axis=0), np.tile(np.arange(1, n + 1), len(comp_words))[:, None]],
            axis=1)
        prefix = prefix @ inv[thetas[j - 1] - 1]
        sel = comp_words[:, 0] != thetas[j - 1]
        levels.append(np.full(int(sel.sum()), j, dtype=np.int64))
        padded = np.zeros((int(sel.sum()), k), dtype=np.int64)
        padded[:, :j] = comp_words[sel]
        words.append(padded)
        out.append(prefix @ comp[sel])
    return TileSet(np.concatenate(levels), np.concatenate(words), np.concatenate(out), F.projective)


def tiles_brute_force(F: Ifs, theta: InfiniteWord, k: int) -> dict:
    """Every omega in [N]^k canonicalized one by one; keys -> MapSpec. Reference for tests."""
    from .maps import all_words

    pre = inverse_compose(F, theta.prefix(k))
    out = {}
    for w in all_words(F.n, k):
        key = canonicalize(theta, k, tuple(int(c) for c in w))
        out.setdefault(key, pre @ compose(F, w))
    return out


@dataclass
class Tiling:
    F: Ifs
    A: Region
    theta: InfiniteWord
    max_level: int
    tiles: TileSet = field(repr=False)
    polygon: np.ndarray | None = field(default=None, repr=False)

    def geometry(self, i: int) -> Region:
        return image(self.A, MapSpec(self.tiles.mats[i], self.tiles.projective))

    def expansion(self, level: int | None = None) -> MapSpec:
        """(f^{-1})_{theta|level}, whose image of A is the union of the level's tiles."""
        level = self.max_level if level is None else level
        return inverse_compose(self.F, self.theta.prefix(level))


def build_tiling(F: Ifs, A: Region, theta: InfiniteWord, k: int, polygon=None,
                 budget: int = WORD_BUDGET) -> Tiling:
    return Tiling(F, A, theta, k, tiles_at_level(F, theta, k, budget), polygon)


# -- 1-D geometry ------------------------------------------------------------------------

def tile_intervals(T: Tiling) -> np.ndarray:
    """(n, 2) float array of tile endpoints for a 1-D tiling whose attractor is one interval."""
    lo, hi = (float(v[0]) for v in T.A.bounds())
    a = T.tiles.mats[:, 0, 0]
    e = T.tiles.mats[:, 0, 1]
    ends = np.stack([a * lo + e, a * hi + e], axis=1)
    return np.sort(ends, axis=1)


# -- verification ---------------------------------------------------------------------------

@dataclass
class OverlapReport:
    ok: bool
    overlap_cells: int
    worst_pair: tuple | None
    worst_overlap: float
    tiles_checked: int

    def __str__(self):
        if self.ok:
            return f"no overlap among {self.tiles_checked} tiles"
        return (f"OVERLAP: {self.overlap_cells} cells, worst pair {self.worst_pair} "
                f"({self.worst_overlap:g})")


def _overlap_1d(geoms, keys, tol=1e-9) -> OverlapReport:
    order = sorted(range(len(geoms)), key=lambda i: geoms[i][0])
    worst, pair, count = 0.0, None, 0
    active = []  # (hi, idx)
    for i in order:
        lo, hi = geoms[i]
        active = [(h, j) for h, j in active if h > lo + tol]
        for h, j in active:
            ov = min(h, hi) - lo
            if ov > tol:
                count += 1
                if ov > worst:
                    worst, pair = ov, (keys[j], keys[i])
        active.append((hi, i))
    return OverlapReport(count == 0, count, pair, worst, len(geoms))


def overlap_check(regions, keys, erosion_cells: int = 1, res: float = 64.0,
                  window=None, budget=None) -> OverlapReport:
    """Accumulate every region's eroded raster on one grid and report shared cells.

    Equivalent to intersecting eroded rasters of every pair whose boxes meet.
    ``window`` (lo, hi) clips the check to a box.
    """
    if not regions:
        return OverlapReport(True, 0, None, 0.0, 0)
    if all(isinstance(r, Intervals1D) for r in regions):
        geoms = [(float(r.intervals[0][0]), float(r.intervals[-1][1])) for r in regions]
        return _overlap_1d(geoms, keys)
    bnds = [r.bounds() for r in regions]
    if window is None:
        lo = np.min([b[0] for b in bnds], axis=0)
        hi = np.max([b[1] for b in bnds], axis=0)
    else:
        lo, hi = (np.asarray(v, float) for v in window)
    grid = lattice(lo, hi, res, budget)
    owner = np.full(grid.shape, -1, dtype=np.int64)
    shared = np.zeros(grid.shape, dtype=bool)
    pair_counts: dict = {}
    pad = erosion_cells + 1
    for idx, (r, (blo, bhi)) in enumerate(zip(regions, bnds)):
        clo = np.maximum(blo, lo - pad / res)
        chi = np.minimum(bhi, hi + pad / res)
        if np.any(chi < clo):
            continue
        ras = rasterize(r, res, clo, chi, budget)
        if erosion_cells:
            ras = ras.erode(erosion_cells)
        if ras.is_empty():
            continue
        # work on the block of the grid under this raster only
        src_lo = np.maximum(np.subtract(grid.origin, ras.origin), 0)
        dst_lo = np.maximum(np.subtract(ras.origin, grid.origin), 0)
        n = np.minimum(np.subtract(ras.shape, src_lo), np.subtract(grid.shape, dst_lo))
        if np.any(n <= 0):
            continue
        occ = ras.occupancy[tuple(slice(a, a + k) for a, k in zip(src_lo, n))]
        dst = tuple(slice(a, a + k) for a, k in zip(dst_lo, n))
        own = owner[dst]
        hit = occ & (own >= 0)
        if hit.any():
            shared[dst] |= hit
            for other, cnt in zip(*np.unique(own[hit], return_counts=True)):
                pair_counts[(int(other), idx)] = pair_counts.get((int(other), idx), 0) + int(cnt)
        own[occ] = idx
    if not pair_counts:
        return OverlapReport(True, 0, None, 0.0, len(regions))
    (i, j), worst = max(pair_counts.items(), key=lambda kv: kv[1])
    return OverlapReport(False, int(shared.sum()), (keys[i], keys[j]), float(worst), len(regions))


def verify_nonoverlap(T: Tiling, erosion_cells: int = 1, res: float = 64.0, window=None,
                      budget=None) -> OverlapReport:
    keys = [(int(T.tiles.levels[i]), T.tiles.word(i)) for i in range(len(T.tiles))]
    if isinstance(T.A, Intervals1D):
        ends = tile_intervals(T)
        return _overlap_1d([tuple(e) for e in ends], keys)
    regions = [T.geometry(i) for i in range(len(T.tiles))]
    return overlap_check(regions, keys, erosion_cells, res, window, budget)


def coverage_check(T: Tiling, window, res: float = 32.0, level: int | None = None,
                   method: str = "basin", budget=None) -> float:
    """Fraction of the window covered by the union of the tiles up to ``level``.

    ``basin`` tests each cell center x by whether f_{theta_k} o ... o f_{theta_1}(x)
    lies in A, which is the same union since the tiles at level k partition
    (f^{-1})_{theta|k}(A).  ``tiles`` ORs the tile rasters directly.  In 1-D with an
    interval attractor the answer is an exact length ratio.
    """
    level = T.max_level if level is None else level
    lo, hi = (np.atleast_1d(np.asarray(v, dtype=object if T.F.dim == 1 else float)) for v in window)
    if isinstance(T.A, Intervals1D) and method == "basin":
        w = Intervals1D.of((lo[0], hi[0]))
        basin = T.A
        for c in reversed(T.theta.prefix(level)):
            basin = basin.map(T.F.maps[c - 1].inverse())
        covered = basin.intersection(w).measure()
        return float(Fraction(covered) / Fraction(w.measure())) if not isinstance(covered, float) \
            else covered / float(w.measure())
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    grid = lattice(lo, hi, res, budget)
    pts = grid.centers()
    if method == "basin":
        g = compose(T.F, reverse(T.theta.prefix(level)))
        covered = T.A.contains(g.apply(pts))
        return float(np.mean(covered))
    if method == "tiles":
        covered = np.zeros(len(pts), dtype=bool)
        sel = T.tiles.levels <= level
        for i in np.flatnonzero(sel):
            geo = T.geometry(i)
            blo, bhi = geo.bounds()
            inside = np.all((pts >= blo - 1e-12) & (pts <= bhi + 1e-12), axis=1)
            if inside.any():
                covered[inside] |= np.asarray(geo.contains(pts[inside]))
        return float(np.mean(covered))
    raise ValueError(f"unknown coverage method {method!r}")
