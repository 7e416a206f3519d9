"""Masks and masked tilings for overlapping IFSs.

The recursion advanced by :class:`MaskedTiling` is, with g = f_{n, theta_n}::

    T_{n+1}   = { g^{-1}(f_{n,i}(t) & M_{n,i}) : i, t in T_n }
    f_{n+1,i} = g^{-1} o f_{n,i} o g
    A_{n+1}   = g^{-1}(A_n)
    M_{n+1,j} = f_{n+1,theta_{n+1}}(A_{n+1})              if j == theta_{n+1}
                g^{-1}(M_{n,j}) minus that region          otherwise

In 1-D every set is an exact interval union and every map an exact
:class:`Affine1D`.  In 2-D sets are lazy expressions; a candidate tile that
covers no cell center at the working resolution is dropped and counted.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMask, NotNonOverlapping
from .maps import Ifs, MapSpec
from .regions import (Affine1D, Difference, Intersection, Intervals1D, Region, Union,
                      image, rasterize)
from .symbols import InfiniteWord
from .tiling import OverlapReport, overlap_check

log = logging.getLogger(__name__)

MASK_RES = 64.0


# -- set and map operations shared by the exact 1-D and lazy 2-D paths ------------------------

def _exact(F: Ifs, A: Region) -> bool:
    return isinstance(A, Intervals1D)


def _maps(F: Ifs, exact: bool) -> list:
    return [Affine1D.from_map(m) for m in F.maps] if exact else list(F.maps)


def _img(region: Region, f) -> Region:
    if isinstance(region, Intervals1D):
        return region.map(f)
    return image(region, f)


def _meet(a: Region, b: Region) -> Region:
    if isinstance(a, Intervals1D):
        return a.intersection(b)
    return Intersection((a, b))


def _minus(a: Region, b: Region) -> Region:
    if isinstance(a, Intervals1D):
        return a.difference(b)
    return Difference(a, b)


def _union(parts) -> Region:
    parts = list(parts)
    if isinstance(parts[0], Intervals1D):
        out = Intervals1D()
        for p in parts:
            out = out.union(p)
        return out
    return parts[0] if len(parts) == 1 else Union(tuple(parts))


def _to_mapspec(f) -> MapSpec:
    return f.to_map() if isinstance(f, Affine1D) else f


# -- masks -------------------------------------------------------------------------------------

@dataclass
class Mask:
    regions: list
    kind: str = "custom"

    def __len__(self):
        return len(self.regions)

    def __getitem__(self, i: int) -> Region:
        """Region M_i, 1-based."""
        return self.regions[i - 1]


def default_mask(F: Ifs, A: Region, res: float = MASK_RES) -> Mask:
    """{f_i(A)}, valid only when the images do not overlap."""
    imgs = [_img(A, f) for f in _maps(F, _exact(F, A))]
    report = overlap_check(imgs, list(range(1, F.n + 1)), erosion_cells=1, res=res)
    if not report.ok:
        raise NotNonOverlapping(f"images of maps {report.worst_pair} overlap "
                                f"({report.worst_overlap:g})")
    return Mask(imgs, "default")


def tops_mask(F: Ifs, A: Region, order=None) -> Mask:
    """M_{s_1} = f_{s_1}(A), M_{s_{k+1}} = f_{s_{k+1}}(A) minus the earlier regions.

    ``order`` is a permutation of 1..N giving s; the default is 1, 2, ..., N.
    """
    order = tuple(range(1, F.n + 1)) if order is None else tuple(order)
    if sorted(order) != list(range(1, F.n + 1)):
        raise InvalidMask(f"order {order} is not a permutation of 1..{F.n}")
    maps = _maps(F, _exact(F, A))
    regions: list = [None] * F.n
    done = []
    for i in order:
        img = _img(A, maps[i - 1])
        regions[i - 1] = _minus(img, _union(done)) if done else img
        done.append(img)
    return Mask(regions, "tops")


def _raster_pair(a: Region, b: Region, res: float):
    lo = np.minimum(a.bounds()[0], b.bounds()[0])
    hi = np.maximum(a.bounds()[1], b.bounds()[1])
    return rasterize(a, res, lo, hi), rasterize(b, res, lo, hi)


def same_region(a: Region, b: Region, res: float = MASK_RES) -> bool:
    """Exact equality in 1-D; in 2-D the rasters may differ only in boundary cells."""
    if isinstance(a, Intervals1D):
        return a.same_set(b)
    ra, rb = _raster_pair(a, b, res)
    grid_o, shape = ra._pair(rb)
    xa, xb = ra.on_grid(grid_o, shape), rb.on_grid(grid_o, shape)
    diff = xa ^ xb
    if not diff.any():
        return True
    boundary = rb.dilate(1).on_grid(grid_o, shape) & ~rb.erode(1).on_grid(grid_o, shape)
    return bool(np.all(boundary[diff]))


@dataclass
class MaskReport:
    covering: bool
    non_overlap: bool
    containment: bool
    details: str = ""

    @property
    def ok(self) -> bool:
        return self.covering and self.non_overlap and self.containment


def validate_mask(F: Ifs, A: Region, M: Mask, res: float = MASK_RES) -> MaskReport:
    """Check the three mask invariants, exactly in 1-D and on rasters in 2-D."""
    if len(M) != F.n:
        return MaskReport(False, False, False, f"mask has {len(M)} regions for {F.n} maps")
    maps = _maps(F, _exact(F, A))
    if _exact(F, A):
        cover = _union(M.regions).same_set(A.merged()) if any(
            not r.is_empty() for r in M.regions) else A.is_empty()
        overlap = _interval_overlap(M.regions)
        contain = all(r.difference(_img(A, f)).is_empty() for r, f in zip(M.regions, maps))
        return MaskReport(cover, overlap == 0, contain, f"overlap measure {overlap}")
    lo, hi = A.bounds()
    ra = rasterize(A, res, lo, hi)
    rm = rasterize(_union(M.regions), res, lo, hi)
    o, s = ra._pair(rm)
    missing = ra.erode(1).on_grid(o, s) & ~rm.on_grid(o, s)
    report = overlap_check(M.regions, list(range(1, F.n + 1)), erosion_cells=1, res=res)
    contain = True
    for r, f in zip(M.regions, maps):
        inner = rasterize(r, res, *r.bounds()).erode(1)
        if inner.is_empty():
            continue
        img = _img(A, f)
        if not np.all(img.contains(inner.centers())):
            contain = False
    return MaskReport(not missing.any(), report.ok, contain,
                      f"{int(missing.sum())} uncovered cells; {report}")


def _interval_overlap(regions) -> object:
    total = 0
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            total += regions[i].intersection(regions[j]).measure()
    return total


# -- masked recursion ---------------------------------------------------------------------------

@dataclass
class MaskedTile:
    region: Region
    trail: tuple  # the map index i chosen at every step, oldest first


@dataclass
class MaskedState:
    """Snapshot after step n: F_n, A_n, M_n and T_n."""

    n: int
    maps: list = field(repr=False)
    A: Region = field(repr=False)
    mask: Mask = field(repr=False)
    tiles: list = field(repr=False)
    dropped: int = 0

    @property
    def F(self) -> Ifs:
        return Ifs(tuple(_to_mapspec(f) for f in self.maps), declared_contractive=False)


class MaskedTiling:
    """Advances the masked recursion one step at a time and keeps every snapshot."""

    def __init__(self, F: Ifs, A: Region, M: Mask, theta: InfiniteWord,
                 auto_rotate: bool = False, res: float = MASK_RES):
        self.F, self.A0, self.theta, self.res = F, A, theta, res
        exact = _exact(F, A)
        maps = _maps(F, exact)
        t1 = theta.letter(1)
        full = _img(A, maps[t1 - 1])
        if not same_region(M[t1], full, res):
            if not auto_rotate:
                raise InvalidMask(f"mask region {t1} must equal f_{t1}(A) for theta_1 = {t1}")
            # promote the theta_1 region, the same rule the recursion uses for later steps
            regions = [full if j == t1 else _minus(r, full) for j, r in enumerate(M.regions, 1)]
            M = Mask(regions, M.kind + "+rotated")
            log.info("mask rotated so that region %d is the full image", t1)
        self.states = [MaskedState(1, maps, A, M, [MaskedTile(A, ())])]

    @property
    def state(self) -> MaskedState:
        return self.states[-1]

    def _keep(self, region: Region) -> bool:
        if isinstance(region, Intervals1D):
            return not region.is_empty()
        lo, hi = region.bounds()
        if np.any(hi < lo):
            return False
        # a coarse grid settles most pieces; only misses need the full resolution
        if not rasterize(region, self.res / 8, lo, hi).is_empty():
            return True
        return not rasterize(region, self.res, lo, hi).is_empty()

    def step(self) -> MaskedState:
        s = self.state
        n = s.n
        th = self.theta.letter(n)
        g = s.maps[th - 1]
        ginv = g.inverse()
        tiles, dropped = [], 0
        for t in s.tiles:
            for i, (f, m) in enumerate(zip(s.maps, s.mask.regions), 1):
                piece = _meet(_img(t.region, f), m)
                if not self._keep(piece):
                    dropped += 1
                    continue
                tiles.append(MaskedTile(_img(piece, ginv), t.trail + (i,)))
        maps = [ginv @ f @ g for f in s.maps]
        A_next = _img(s.A, ginv)
        nxt = self.theta.letter(n + 1)
        full = _img(A_next, maps[nxt - 1])
        regions = [full if j == nxt else _minus(_img(m, ginv), full)
                   for j, m in enumerate(s.mask.regions, 1)]
        if dropped and not _exact(self.F, self.A0):
            log.info("step %d: dropped %d empty or sub-cell pieces", n, dropped)
        state = MaskedState(n + 1, maps, A_next, Mask(regions, s.mask.kind), tiles, dropped)
        self.states.append(state)
        return state

    def run(self, n_steps: int) -> MaskedState:
        while self.state.n <= n_steps:
            self.step()
        return self.state


def masked_tiling(F: Ifs, A: Region, M: Mask, theta: InfiniteWord, n_steps: int,
                  auto_rotate: bool = False, res: float = MASK_RES) -> MaskedState:
    """T_{n+1} after ``n_steps`` steps of the recursion, with its F, A and mask."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    return MaskedTiling(F, A, M, theta, auto_rotate, res).run(n_steps)


def masked_overlap(state: MaskedState, res: float = MASK_RES, window=None) -> OverlapReport:
    regions = [t.region for t in state.tiles]
    keys = [t.trail for t in state.tiles]
    return overlap_check(regions, keys, erosion_cells=1, res=res, window=window)


def interval_partition_oracle(b, theta_letters, n_steps: int) -> list:
    """Masked tiles of the two-map IFS {b x, b x + 1 - b} with the tops mask, by an
    independent route: everything is tracked in the coordinates of the original
    attractor, where the recursion reduces to

        pieces_{n+1} = { f_i(p) & N_{n,i} },  N_{n+1,s} = f_s(A),  N_{n+1,j} = N_{n,j} - f_s(A)

    with s = theta_{n+1}, and the tiles are E_{n+1}(pieces), E_{n+1} = f_{theta_1}^{-1} o ... o
    f_{theta_n}^{-1}.  Returns sorted (lo, hi) Fraction pairs.
    """
    from fractions import Fraction

    b = Fraction(b).limit_denominator(10**9) if not isinstance(b, Fraction) else b
    f = [(b, Fraction(0)), (b, 1 - b)]  # (scale, offset)

    def ap(m, iv):
        a, c = m
        return tuple(sorted((a * iv[0] + c, a * iv[1] + c)))

    def meet(xs, ys):
        out = []
        for x0, x1 in xs:
            for y0, y1 in ys:
                lo, hi = max(x0, y0), min(x1, y1)
                if hi > lo:
                    out.append((lo, hi))
        return out

    def minus(xs, y):
        out = []
        for x0, x1 in xs:
            if y[1] <= x0 or y[0] >= x1:
                out.append((x0, x1))
                continue
            if y[0] > x0:
                out.append((x0, y[0]))
            if x1 > y[1]:
                out.append((y[1], x1))
        return out

    A = (Fraction(0), Fraction(1))
    th = list(theta_letters)
    img = [ap(m, A) for m in f]
    # tops mask, then promote theta_1
    N = [[img[0]], minus([img[1]], img[0])]
    s = th[0] - 1
    N = [[img[s]] if j == s else minus(N[j], img[s]) for j in range(2)]
    pieces = [[A]]
    E = (Fraction(1), Fraction(0))
    for n in range(1, n_steps + 1):
        pieces = [meet([ap(f[i], iv) for iv in p], N[i]) for p in pieces for i in range(2)]
        pieces = [p for p in pieces if p]
        a, c = f[th[n - 1] - 1]
        E = (E[0] / a, E[1] - E[0] * c / a)  # E o f^{-1}
        s = th[n] - 1
        N = [[img[s]] if j == s else [piece for part in N[j] for piece in minus([part], img[s])]
             for j in range(2)]
    return sorted(iv for p in pieces for iv in (ap(E, x) for x in p))


def tiling_agreement(state: MaskedState, T, res: float = 16.0) -> float:
    """Largest per-tile Hausdorff distance, in cells, between masked tiles and the tiles of T.

    Tiles are paired through an interior point of each tile of T; an unpaired or
    doubly paired tile gives ``inf``.  In 1-D the comparison is exact and the
    result is 0 or ``inf``.
    """
    from .attractor import hausdorff_distance

    ref = [T.geometry(i) for i in range(len(T.tiles))]
    got = [t.region for t in state.tiles]
    if len(ref) != len(got):
        return float("inf")
    if isinstance(T.A, Intervals1D):
        a = sorted(r.merged().intervals for r in got)
        b = sorted(r.merged().intervals for r in ref)
        return 0.0 if a == b else float("inf")
    rasters = [rasterize(r, res, *r.bounds()) for r in ref]
    probes = np.array([(r.erode(1) if not r.erode(1).is_empty() else r).centers()[0]
                       for r in rasters])
    owner = np.full(len(ref), -1)
    for j, g in enumerate(got):
        lo, hi = g.bounds()
        near = np.flatnonzero(np.all((probes >= lo) & (probes <= hi), axis=1))
        if len(near):
            hit = near[np.asarray(g.contains(probes[near]), bool)]
            if np.any(owner[hit] >= 0):
                return float("inf")
            owner[hit] = j
    if np.any(owner < 0) or len(set(owner.tolist())) != len(owner):
        return float("inf")
    worst = 0.0
    for i, j in enumerate(owner):
        r = rasterize(got[j], res, *got[j].bounds())
        worst = max(worst, hausdorff_distance(rasters[i], r) * res)
    return worst
