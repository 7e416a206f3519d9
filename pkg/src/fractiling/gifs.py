"""Graph-directed IFS: vector attractors and tilings indexed by reversed-edge paths.

Edge ``e = (src, dst, f)`` maps component ``dst`` into component ``src``, so the
attractor satisfies ``A_i = U_{e: src(e) = i} f_e(A_dst(e))``.  Edges are
numbered from 1 in list order and paths are words over those numbers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull

from .attractor import hausdorff_distance
from .errors import BudgetExceeded, GraphError, InvariantViolation
from .maps import Ifs, MapSpec
from .regions import DEFAULT_RES, Raster, check_budget, rasterize
from .symbols import InfiniteWord
from .tiling import WORD_BUDGET, TileSet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    map: MapSpec
    label: str = ""


class Gifs:
    def __init__(self, n_vertices: int, edges, names=None, declared_contractive: bool = True):
        self.m = int(n_vertices)
        self.edges = tuple(edges)
        self.names = tuple(names) if names else tuple(str(i + 1) for i in range(self.m))
        self.declared_contractive = declared_contractive
        if not self.edges:
            raise GraphError("a graph IFS needs at least one edge")
        dims = {e.map.dim for e in self.edges}
        if len(dims) != 1:
            raise InvariantViolation(f"edge maps have mixed dimensions {sorted(dims)}")
        for i, e in enumerate(self.edges, 1):
            if not (0 <= e.src < self.m and 0 <= e.dst < self.m):
                raise GraphError(f"edge {i} joins a vertex outside 1..{self.m}")
            if not e.map.is_invertible():
                raise InvariantViolation(f"edge {i} map is singular")
        adj = csr_matrix(self.adjacency() > 0)
        count, _ = connected_components(adj, directed=True, connection="strong")
        if count != 1:
            raise GraphError("graph is not strongly connected")

    @classmethod
    def from_ifs(cls, F: Ifs) -> "Gifs":
        return cls(1, [Edge(0, 0, m, str(i)) for i, m in enumerate(F.maps, 1)],
                   declared_contractive=F.declared_contractive)

    @property
    def dim(self) -> int:
        return self.edges[0].map.dim

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Edge-count matrix, entry (i, j) = number of edges from i to j."""
        adj = np.zeros((self.m, self.m), dtype=np.int64)
        for e in self.edges:
            adj[e.src, e.dst] += 1
        return adj

    def matrices(self) -> np.ndarray:
        return np.stack([e.map.matrix for e in self.edges])

    def inverse_matrices(self) -> np.ndarray:
        return np.stack([e.map.inverse().matrix for e in self.edges])

    def contraction(self) -> float:
        return max(float(np.linalg.norm(e.map.linear, 2)) for e in self.edges)


def check_path(G: Gifs, path, reversed_graph: bool = True) -> tuple:
    """Validate a finite edge word; in G' consecutive edges need dst(e_{k+1}) == src(e_k)."""
    path = tuple(int(c) for c in path)
    for c in path:
        if not 1 <= c <= G.n_edges:
            raise GraphError(f"edge {c} is outside 1..{G.n_edges}")
    for k, (a, b) in enumerate(zip(path, path[1:]), 1):
        ea, eb = G.edges[a - 1], G.edges[b - 1]
        ok = eb.dst == ea.src if reversed_graph else ea.dst == eb.src
        if not ok:
            raise GraphError(f"edges {a} and {b} at positions {k}, {k + 1} do not form a path")
    return path


class EdgePath:
    """An infinite path in the reversed graph, given by an infinite word over edge numbers."""

    def __init__(self, G: Gifs, word: InfiniteWord, check_depth: int = 256):
        if word.n != G.n_edges:
            raise GraphError(f"path alphabet {word.n} does not match {G.n_edges} edges")
        self.G = G
        self.word = word
        check_path(G, word.prefix(check_depth))

    def prefix(self, k: int) -> tuple:
        return check_path(self.G, self.word.prefix(k))

    def start_vertex(self) -> int:
        return self.G.edges[self.word.letter(1) - 1].dst


# -- attractor ------------------------------------------------------------------------------

def _common_ball(G: Gifs):
    lam = G.contraction()
    if lam >= 1:
        raise InvariantViolation(f"edge contraction {lam:.4g} >= 1")
    c = G.edges[0].map.fixed_point() if G.edges[0].src == G.edges[0].dst else np.zeros(G.dim)
    r = max(float(np.linalg.norm(e.map.apply(c) - c)) for e in G.edges) / (1 - lam)
    return c, r


def _push(G: Gifs, comps, res, budget):
    out = []
    for i in range(G.m):
        pts = [e.map.apply(comps[e.dst].subsamples(2)) for e in G.edges if e.src == i]
        pts = np.concatenate(pts)
        check_budget(len(pts), budget)
        out.append(Raster.from_points(pts, res, budget))
    return out


def gifs_attractor(G: Gifs, res: float = DEFAULT_RES, iters: int | None = None, budget=None,
                   max_iters: int = 500) -> list:
    """Vector Hutchinson iteration from a common ball, until no component moves more than a cell."""
    c, r = _common_ball(G)
    seed = Raster.box(c - r, c + r, max(res / 8, 8.0))
    comps = [rasterize(seed, res, budget=budget)] * G.m
    n = 0
    while True:
        nxt = _push(G, comps, res, budget)
        n += 1
        if iters is not None:
            comps = nxt
            if n >= iters:
                return comps
            continue
        moved = max(hausdorff_distance(a, b, budget) for a, b in zip(comps, nxt))
        comps = nxt
        if moved <= 1.0 / res:
            return comps
        if n >= max_iters:
            log.warning("graph attractor did not settle after %d iterations", n)
            return comps


def fixed_point_error(G: Gifs, comps, budget=None) -> list:
    """Hausdorff distance between each A_i and the union of its edge images."""
    res = comps[0].res
    return [hausdorff_distance(a, b, budget) for a, b in zip(comps, _push(G, comps, res, budget))]


def hull_polygons(G: Gifs, iters: int = 80) -> list:
    """Convex hulls of the components, by iterating the graph operator on vertex sets.

    Exact for convex attractors (triangles, squares); otherwise the hull only.
    """
    if G.dim != 2:
        raise ValueError("hull polygons are 2-D only")
    c, r = _common_ball(G)
    ang = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    start = c + r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    polys = [start] * G.m
    for _ in range(iters):
        new = []
        for i in range(G.m):
            pts = np.concatenate([e.map.apply(polys[e.dst]) for e in G.edges if e.src == i])
            hull = ConvexHull(pts)
            new.append(pts[hull.vertices])
        polys = new
    return [_simplify(p) for p in polys]


def _simplify(poly: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Drop duplicate and collinear vertices of a counter-clockwise polygon."""
    keep = []
    n = len(poly)
    for i in range(n):
        a, b, c = poly[i - 1], poly[i], poly[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if np.linalg.norm(b - a) > tol and abs(cross) > tol:
            keep.append(b)
    return np.array(keep)


# -- tiles -----------------------------------------------------------------------------------

def count_paths(G: Gifs, start: int, k: int) -> int:
    return int(np.linalg.matrix_power(G.adjacency(), k)[start].sum())


def _paths_from(G: Gifs, start: int, k: int):
    """Per length j <= k: (words, composed matrices, end vertices) of paths in G from ``start``."""
    mats = G.matrices()
    src = np.array([e.src for e in G.edges])
    dst = np.array([e.dst for e in G.edges])
    size = G.dim + 1
    words = np.zeros((1, 0), dtype=np.int64)
    comp = np.eye(size)[None]
    ends = np.array([start])
    out = [(words, comp, ends)]
    for _ in range(k):
        # pair every path with every edge leaving its end vertex
        pi, ei = np.nonzero(ends[:, None] == src[None, :])
        words = np.concatenate([words[pi], (ei + 1)[:, None]], axis=1)
        comp = comp[pi] @ mats[ei]
        ends = dst[ei]
        out.append((words, comp, ends))
    return out


def gifs_tiles(G: Gifs, theta: EdgePath, k: int, budget: int = WORD_BUDGET) -> TileSet:
    """Canonical tiles of level <= k.

    Level j contributes the paths w of length j in G that start at src(theta_j)
    with w_1 != theta_j; the tile is ``(f^{-1})_{theta|j} o f_w (A_{end(w)})``.  The
    level-0 tile is the component where the path theta starts.
    """
    if k < 0:
        raise ValueError("level must be >= 0")
    thetas = theta.prefix(max(k, 1))
    starts = sorted({G.edges[t - 1].src for t in thetas[:k]})
    total = sum(count_paths(G, s, k) for s in starts)
    if total > budget:
        raise BudgetExceeded(f"{total} paths exceeds the enumeration budget {budget}")
    paths = {s: _paths_from(G, s, k) for s in starts}
    inv = G.inverse_matrices()
    size = G.dim + 1
    levels = [np.zeros(1, np.int64)]
    words = [np.zeros((1, k), np.int64)]
    mats = [np.eye(size)[None]]
    comps = [np.array([theta.start_vertex()])]
    prefix = np.eye(size)
    for j in range(1, k + 1):
        t = thetas[j - 1]
        prefix = prefix @ inv[t - 1]
        w, comp, ends = paths[G.edges[t - 1].src][j]
        sel = w[:, 0] != t
        cnt = int(sel.sum())
        levels.append(np.full(cnt, j, dtype=np.int64))
        padded = np.zeros((cnt, k), dtype=np.int64)
        padded[:, :j] = w[sel]
        words.append(padded)
        mats.append(prefix @ comp[sel])
        comps.append(ends[sel])
    return TileSet(np.concatenate(levels), np.concatenate(words), np.concatenate(mats),
                   False, np.concatenate(comps))


def canonicalize_path(theta: EdgePath, level: int, word) -> tuple:
    word = tuple(word)
    if len(word) != level:
        raise GraphError(f"path length {len(word)} does not match level {level}")
    prefix = theta.prefix(level)
    while level >= 1 and word and word[0] == prefix[level - 1]:
        word = word[1:]
        level -= 1
    return level, word
