"""Named example systems, each with a default word and, where the attractor is a
polygon or interval, its exact geometry."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .attractor import attractor_raster
from .errors import ConfigError, InvariantViolation
from .gifs import Edge, EdgePath, Gifs, gifs_attractor
from .maps import Ifs, MapSpec, affine_from_points, estimate_contraction
from .regions import DEFAULT_RES, Intervals1D, Polygon, Region
from .symbols import parse_word

TAU = (1 + math.sqrt(5)) / 2


@dataclass
class Preset:
    name: str
    system: Ifs | Gifs
    theta: str
    zero_based: bool = False
    polygons: list | None = field(default=None, repr=False)
    exact: Region | None = field(default=None, repr=False)
    reconstruction: bool = False

    @property
    def is_graph(self) -> bool:
        return isinstance(self.system, Gifs)

    def word(self, text: str | None = None):
        n = self.system.n_edges if self.is_graph else self.system.n
        w = parse_word(text or self.theta, n, self.zero_based if text is None else False)
        return EdgePath(self.system, w) if self.is_graph else w

    def attractor(self, res: float = DEFAULT_RES) -> Region:
        """Exact geometry when known, else a raster approximation."""
        if self.is_graph:
            raise TypeError("use components() for graph presets")
        if self.exact is not None:
            return self.exact
        return self._raster(res)

    def _raster(self, res):
        cache = self.__dict__.setdefault("_rasters", {})
        if res not in cache:
            cache[res] = attractor_raster(self.system, res)
        return cache[res]

    def components(self, res: float = DEFAULT_RES) -> list:
        if not self.is_graph:
            return [self.attractor(res)]
        if self.polygons is not None:
            return [Polygon(p) for p in self.polygons]
        cache = self.__dict__.setdefault("_rasters", {})
        if res not in cache:
            cache[res] = gifs_attractor(self.system, res)
        return cache[res]


def interval() -> Preset:
    F = Ifs((MapSpec.affine([[0.5]], [0.0]), MapSpec.affine([[0.5]], [0.5])))
    return Preset("interval", F, "(12)", exact=Intervals1D.of((0, 1)))


def overlap1d(b: float = 0.65) -> Preset:
    if not 0.5 < b < 1:
        raise ConfigError("overlap1d needs 1/2 < b < 1")
    F = Ifs((MapSpec.affine([[b]], [0.0]), MapSpec.affine([[b]], [1 - b])))
    return Preset(f"overlap1d({b:g})", F, "(1)", exact=Intervals1D.of((0, 1)))


def overlap2d(b: float = 0.65) -> Preset:
    if not 0.5 < b < 1:
        raise ConfigError("overlap2d needs 1/2 < b < 1")
    l = 1 - b
    offs = [(0, 0), (l, 0), (0, l), (l, l)]
    F = Ifs(tuple(MapSpec.affine(b * np.eye(2), o) for o in offs))
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    return Preset(f"overlap2d({b:g})", F, "(1)", polygons=[square], exact=Polygon(square))


CHAIR = np.array([[0, 0], [1, 0], [1, 0.5], [0.5, 0.5], [0.5, 1], [0, 1]], float)


def chair() -> Preset:
    F = Ifs((MapSpec.from_coeffs([0.5, 0, 0, 0.5, 0, 0]),
             MapSpec.from_coeffs([0.5, 0, 0, 0.5, 0.25, 0.25]),
             MapSpec.from_coeffs([-0.5, 0, 0, 0.5, 1, 0]),
             MapSpec.from_coeffs([0.5, 0, 0, -0.5, 0, 1])))
    # the figure's word is written with digits 0..3
    return Preset("chair", F, "(12301230)", zero_based=True, polygons=[CHAIR],
                  exact=Polygon(CHAIR))


def foldout(e=(2 / 3, 1 / 3)) -> Preset:
    ex, ey = (float(v) for v in e)
    if not (0 < ex < 1 and 0 < ey < 1):
        raise ConfigError("fold-out point must lie inside the open unit square")
    A, B, C, D = (0, 0), (1, 0), (1, 1), (0, 1)
    E = (ex, ey)
    P, Q, R, S = (ex, 0), (1, ey), (ex, 1), (0, ey)
    corners = [A, B, D]
    targets = [(A, P, S), (B, P, Q), (C, R, Q), (D, R, S)]
    maps = tuple(affine_from_points(corners, t) for t in targets)
    for m in maps:
        if not np.allclose(m.apply(np.array(C, float)), E):
            raise InvariantViolation("fold-out maps do not meet at E")
    square = np.array([A, B, C, D], float)
    return Preset(f"foldout({ex:g},{ey:g})", Ifs(maps), "(1234)", polygons=[square],
                  exact=Polygon(square))


def triangle(A=(0, 0), B=(1, 0), C=(0, 1), a=None, b=None, c=None) -> Preset:
    """f1(ABC) = Abc, f2(ABC) = aBc, f3(ABC) = abC, f4(ABC) = abc.

    ``c`` lies on AB, ``a`` on BC and ``b`` on CA; midpoints by default.
    """
    A, B, C = (np.asarray(p, float) for p in (A, B, C))
    a = (B + C) / 2 if a is None else np.asarray(a, float)
    b = (C + A) / 2 if b is None else np.asarray(b, float)
    c = (A + B) / 2 if c is None else np.asarray(c, float)
    for name, p, (u, v) in (("a", a, (B, C)), ("b", b, (C, A)), ("c", c, (A, B))):
        cross = (v - u)[0] * (p - u)[1] - (v - u)[1] * (p - u)[0]
        t = np.dot(p - u, v - u) / np.dot(v - u, v - u)
        if abs(cross) > 1e-9 or not 0 < t < 1:
            raise ConfigError(f"point {name} must lie strictly inside its edge")
    src = [A, B, C]
    maps = tuple(affine_from_points(src, t) for t in ([A, b, c], [a, B, c], [a, b, C], [a, b, c]))
    F = Ifs(maps, declared_contractive=False)
    lam = estimate_contraction(F)
    if lam >= 1:
        raise ConfigError(f"triangle maps are not Euclidean contractions (estimate {lam:.3f})")
    tri = np.array([A, B, C])
    return Preset("triangle", Ifs(maps), "(1234)", polygons=[tri], exact=Polygon(tri))


def sierpinski() -> Preset:
    verts = [(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]
    F = Ifs(tuple(MapSpec.affine(0.5 * np.eye(2), 0.5 * np.asarray(v)) for v in verts))
    return Preset("sierpinski", F, "3(2)")


def empty_interior() -> Preset:
    F = Ifs((MapSpec.from_coeffs([-0.7, 0, 0, 0.65, 0.7, 0.35]),
             MapSpec.from_coeffs([0, -0.3, -0.6, -0.3, 1, 1.3]),
             MapSpec.from_coeffs([0, 0.375, -0.6, 0.35, 0.325, 0.65])))
    return Preset("empty-interior", F, "(123)")


def digit(L=((1, -1), (1, 1)), D=((0, 0), (1, 0))) -> Preset:
    """Digit tile of an expanding integer matrix L with digit set D: f_i(x) = L^{-1}(x - d_i)."""
    L = np.asarray(L, dtype=float)
    D = np.asarray(D, dtype=float)
    n = L.shape[0]
    if L.shape != (n, n) or D.ndim != 2 or D.shape[1] != n:
        raise ConfigError("L must be square and digits must match its size")
    if not np.array_equal(L, np.round(L)) or not np.array_equal(D, np.round(D)):
        raise ConfigError("L and the digits must be integral")
    det = round(abs(np.linalg.det(L)))
    if len(D) != det:
        raise ConfigError(f"need |D| = |det L| = {det}, got {len(D)}")
    if np.min(np.abs(np.linalg.eigvals(L))) <= 1:
        raise ConfigError("L is not expanding")
    if not any(np.all(d == 0) for d in D):
        raise ConfigError("the digit set must contain 0")
    Linv = np.linalg.inv(L)
    for i, j in combinations(range(len(D)), 2):
        q = Linv @ (D[i] - D[j])
        if np.allclose(q, np.round(q), atol=1e-9):
            raise ConfigError(f"digits {i + 1} and {j + 1} lie in the same coset")
    maps = tuple(MapSpec.affine(Linv, -Linv @ d) for d in D)
    return Preset("digit", Ifs(maps), "(" + "".join(str(i) for i in range(1, len(D) + 1)) + ")")


def _cmap(a: complex, b: complex) -> MapSpec:
    """z -> a z + b as a 2-D affine map."""
    return MapSpec.affine([[a.real, -a.imag], [a.imag, a.real]], [b.real, b.imag])


def _unit(k: int) -> complex:
    return cmath.exp(1j * k * math.pi / 5)


def _printed_penrose_maps():
    f1 = _cmap(_unit(1) / TAU, _unit(1))   # (z/tau + 1) w1
    f2 = _cmap(-1 / TAU, TAU**2)           # -z/tau + tau^2
    f3 = _cmap(_unit(3) / TAU, TAU**2)     # (z/tau) w3 + tau^2
    return f1, f2, f3


def _similarity(src, dst) -> tuple:
    """Orientation-preserving z -> a z + b taking isosceles triangle src onto dst (apex first)."""
    for d in (dst, (dst[0], dst[2], dst[1])):
        a = (d[1] - d[0]) / (src[1] - src[0])
        b = d[0] - a * src[0]
        if abs(a * src[2] + b - d[2]) < 1e-12:
            return a, b
    raise InvariantViolation("triangles are not directly similar")


def _robinson():
    """Acute triangle A and obtuse triangle B with A = f1(B) u f2(A) u f3(A), B = f1(B) u f2(A).

    The equations force B inside A: bisecting A at a base angle gives B and a small
    acute triangle f3(A); splitting B gives f2(A) and f1(B).  Among the mirror
    choices the one whose f3 turns by 3 pi/5 like the printed f3 is used, placed
    so that f3 equals the printed map and f2 fixes tau.
    """
    X, Y, Z = 0j, TAU + 0j, TAU * _unit(1)
    P = _unit(1)            # on XZ with |XP| = 1
    Q = TAU - 1 + 0j        # on YX with |YQ| = 1
    A, B = (X, Y, Z), (P, X, Y)
    f1 = _similarity(B, (Q, X, P))
    f2 = _similarity(A, (Y, Q, P))
    f3 = _similarity(A, (Y, Z, P))
    fixed = [b / (1 - a) for a, b in (f2, f3)]
    want = [TAU, TAU**2 / (1 - _unit(3) / TAU)]
    s = (want[1] - want[0]) / (fixed[1] - fixed[0])
    t = want[0] - s * fixed[0]
    maps = [_cmap(a, s * b + t - a * t) for a, b in (f1, f2, f3)]
    tri = [np.array([[(s * z + t).real, (s * z + t).imag] for z in T]) for T in (A, B)]
    return maps, tri


def penrose(variant: str = "robinson") -> Preset:
    """Two-vertex graph IFS of the Penrose triangles.

    ``printed`` uses the three complex maps exactly as usually quoted; their
    attractor satisfies the graph equations but its pieces overlap and it is not a
    pair of triangles.  ``robinson`` (default) realizes the golden triangles.
    """
    if variant == "printed":
        (f1, f2, f3), polys = _printed_penrose_maps(), None
    elif variant == "robinson":
        (f1, f2, f3), polys = _robinson()
    else:
        raise ConfigError(f"unknown penrose variant {variant!r}")
    A, B = 0, 1
    G = Gifs(2, [Edge(A, A, f2, "f2"), Edge(A, A, f3, "f3"), Edge(A, B, f1, "f1"),
                 Edge(B, A, f2, "f2"), Edge(B, B, f1, "f1")], names=("A", "B"))
    return Preset("penrose" if variant == "robinson" else "penrose-printed", G, "(34)",
                  polygons=polys, reconstruction=variant == "robinson")


def trisquare() -> Preset:
    """Reconstructed triangle and square graph IFS.

    T is the right isosceles triangle (0,0), (1,0), (0,1); S is the unit square.
    T splits into two half-size triangles and a half-size square; S splits into a
    half-size square, two triangles filling its lower right quarter and two
    rectangles filling its top half.
    """
    T, S = 0, 1
    c = MapSpec.from_coeffs
    edges = [
        Edge(T, T, c([0.5, 0, 0, 0.5, 0.5, 0]), "t1"),
        Edge(T, T, c([0.5, 0, 0, 0.5, 0, 0.5]), "t2"),
        Edge(T, S, c([0.5, 0, 0, 0.5, 0, 0]), "t3"),
        Edge(S, S, c([0.5, 0, 0, 0.5, 0, 0]), "s1"),
        Edge(S, T, c([0.5, 0, 0, 0.5, 0.5, 0]), "s2"),
        Edge(S, T, c([-0.5, 0, 0, -0.5, 1, 0.5]), "s3"),
        Edge(S, S, c([0.75, 0, 0, 0.5, 0, 0.5]), "s4"),
        Edge(S, S, c([0.25, 0, 0, 0.5, 0.75, 0.5]), "s5"),
    ]
    G = Gifs(2, edges, names=("T", "S"))
    tri = np.array([[0, 0], [1, 0], [0, 1]], float)
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    return Preset("trisquare", G, "(35)", polygons=[tri, sq], reconstruction=True)


PRESETS = {
    "interval": interval,
    "overlap1d": overlap1d,
    "overlap2d": overlap2d,
    "chair": chair,
    "foldout": foldout,
    "triangle": triangle,
    "sierpinski": sierpinski,
    "empty-interior": empty_interior,
    "empty-interior-3map": empty_interior,
    "digit": digit,
    "penrose": penrose,
    "trisquare": trisquare,
}


def get_preset(name: str, **params) -> Preset:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return factory(**params)
