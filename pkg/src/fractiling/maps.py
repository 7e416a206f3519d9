"""Invertible affine/projective maps, IFS containers and word compositions.

Every map is stored as a homogeneous ``(dim+1, dim+1)`` matrix.  For affine
maps the last row is kept exactly ``[0, ..., 0, 1]`` so products of affine maps
stay affine bit-for-bit; projective maps are applied with a division by the
last homogeneous coordinate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimMismatch, InvalidWord, NotContractive, SingularMap

log = logging.getLogger(__name__)

# points whose homogeneous weight falls below this are treated as lying at infinity
HOMOGENEOUS_EPS = 1e-12
# reciprocal condition number below which a map is rejected as singular
SINGULAR_RCOND = 1e-13


@dataclass(frozen=True, eq=False)
class MapSpec:
    """An invertible affine or projective self-map of R^dim."""

    matrix: np.ndarray
    projective: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise DimMismatch(f"homogeneous matrix must be square with size >= 2, got {m.shape}")
        if not self.projective:
            m[-1, :-1] = 0.0
            m[-1, -1] = 1.0
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    # -- constructors -------------------------------------------------------
    @classmethod
    def affine(cls, linear, offset) -> "MapSpec":
        linear = np.atleast_2d(np.asarray(linear, dtype=float))
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        d = linear.shape[0]
        if linear.shape != (d, d) or offset.shape != (d,):
            raise DimMismatch(f"linear {linear.shape} and offset {offset.shape} disagree")
        m = np.eye(d + 1)
        m[:d, :d] = linear
        m[:d, d] = offset
        return cls(m)

    @classmethod
    def homography(cls, hom) -> "MapSpec":
        return cls(np.asarray(hom, dtype=float), projective=True)

    @classmethod
    def identity(cls, dim: int) -> "MapSpec":
        return cls(np.eye(dim + 1))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[float]) -> "MapSpec":
        """2-D affine map from ``[a, b, c, d, e, f]``: (x, y) -> (ax+by+e, cx+dy+f)."""
        if len(coeffs) != 6:
            raise DimMismatch(f"expected 6 coefficients, got {len(coeffs)}")
        a, b, c, d, e, f = (float(v) for v in coeffs)
        return cls.affine([[a, b], [c, d]], [e, f])

    @classmethod
    def similarity(cls, scale: float, angle: float, offset) -> "MapSpec":
        """The complex map z -> scale * e^{i angle} * z + offset, as a 2-D affine map."""
        c, s = np.cos(angle), np.sin(angle)
        return cls.affine(scale * np.array([[c, -s], [s, c]]), offset)

    # -- accessors ----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[:-1, :-1]

    @property
    def offset(self) -> np.ndarray:
        return self.matrix[:-1, -1]

    @property
    def coeffs(self) -> list[float]:
        """``[a, b, c, d, e, f]`` for a 2-D affine map, ``[a, e]`` in 1-D."""
        if self.projective:
            raise ValueError("projective maps have no affine coefficient form")
        if self.dim == 1:
            return [float(self.matrix[0, 0]), float(self.matrix[0, 1])]
        if self.dim != 2:
            raise DimMismatch("coefficient form is defined for dim 1 and 2 only")
        (a, b, e), (c, d, f) = self.matrix[:2]
        return [float(v) for v in (a, b, c, d, e, f)]

    def det(self) -> float:
        return float(np.linalg.det(self.matrix if self.projective else self.linear))

    def is_invertible(self) -> bool:
        m = self.matrix if self.projective else self.linear
        if not np.all(np.isfinite(m)):
            return False
        return 1.0 / np.linalg.cond(m) > SINGULAR_RCOND

    # -- algebra ------------------------------------------------------------
    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise DimMismatch(f"point dim {pts.shape[-1]} vs map dim {self.dim}")
        if self.projective:
            h = pts @ self.matrix[:, :-1].T + self.matrix[:, -1]
            w = h[..., -1:]
            if np.any(np.abs(w) < HOMOGENEOUS_EPS):
                raise ValueError("point maps to (or near) the line at infinity")
            out = h[..., :-1] / w
        else:
            out = pts @ self.linear.T + self.offset
        return out[0] if single else out

    __call__ = apply

    def compose(self, other: "MapSpec") -> "MapSpec":
        """``self o other``: apply ``other`` first."""
        if other.dim != self.dim:
            raise DimMismatch(f"cannot compose dim {self.dim} with dim {other.dim}")
        return MapSpec(self.matrix @ other.matrix, self.projective or other.projective)

    __matmul__ = compose

    def inverse(self) -> "MapSpec":
        if not self.is_invertible():
            raise SingularMap("map is not invertible")
        if self.projective:
            return MapSpec(np.linalg.inv(self.matrix), True)
        inv = np.linalg.inv(self.linear)
        return MapSpec.affine(inv, -inv @ self.offset)

    def allclose(self, other: "MapSpec", tol: float = 1e-12) -> bool:
        a, b = self.matrix, other.matrix
        if self.projective or other.projective:
            a = a / np.linalg.norm(a)
            b = b / np.linalg.norm(b)
            b = b if np.sum(a * b) >= 0 else -b
        return a.shape == b.shape and float(np.max(np.abs(a - b))) <= tol

    def fixed_point(self) -> np.ndarray:
        if self.projective:
            vals, vecs = np.linalg.eig(self.matrix)
            v = np.real(vecs[:, np.argmax(np.abs(vals))])
            return v[:-1] / v[-1]
        return np.linalg.solve(np.eye(self.dim) - self.linear, self.offset)

    def __repr__(self):
        kind = "Projective" if self.projective else "Affine"
        return f"{kind}MapSpec({np.array2string(self.matrix, precision=6, separator=', ')})"


@dataclass(frozen=True)
class Ifs:
    """An ordered family of invertible maps on R^dim.

    ``declared_contractive`` is what operations that need a coordinate map
    check.  It is normally backed by :func:`estimate_contraction`; a caller who
    knows a better metric may set it on an IFS that fails the Euclidean
    certificate (a warning is logged).
    """

    maps: tuple
    declared_contractive: bool = True
    window: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        dims = {m.dim for m in maps}
        if len(dims) != 1:
            raise DimMismatch(f"maps have differing dims {sorted(dims)}")
        for i, m in enumerate(maps, start=1):
            if not m.is_invertible():
                raise SingularMap(f"map {i} is singular")
        object.__setattr__(self, "maps", maps)
        if self.declared_contractive:
            lam = estimate_contraction(self)
            if lam >= 1:
                log.warning("declared contractive but Euclidean estimate is %.4f >= 1", lam)

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def projective(self) -> bool:
        return any(m.projective for m in self.maps)

    def inverse_maps(self) -> tuple:
        return tuple(m.inverse() for m in self.maps)

    def star(self) -> "Ifs":
        """The IFS of inverse maps."""
        return Ifs(self.inverse_maps(), declared_contractive=False)

    def matrices(self) -> np.ndarray:
        return np.stack([m.matrix for m in self.maps])

    def inverse_matrices(self) -> np.ndarray:
        return np.stack([m.matrix for m in self.inverse_maps()])

    def require_contractive(self):
        if not self.declared_contractive:
            raise NotContractive("operation requires a contractive IFS")


# -- words --------------------------------------------------------------------

def check_word(word, n: int) -> tuple:
    w = tuple(int(c) for c in word)
    bad = [c for c in w if not 1 <= c <= n]
    if bad:
        raise InvalidWord(f"letters {bad} outside 1..{n}")
    return w


def reverse(word) -> tuple:
    return tuple(word)[::-1]


def compose(F: Ifs, word) -> MapSpec:
    """f_{w1} o f_{w2} o ... o f_{wk}; the identity for the empty word."""
    word = check_word(word, F.n)
    out = MapSpec.identity(F.dim)
    for c in word:
        out = out @ F.maps[c - 1]
    return out


def inverse_compose(F: Ifs, word) -> MapSpec:
    """f_{w1}^{-1} o ... o f_{wk}^{-1}, which is (f_{reverse(w)})^{-1}."""
    word = check_word(word, F.n)
    inv = F.inverse_maps()
    out = MapSpec.identity(F.dim)
    for c in word:
        out = out @ inv[c - 1]
    return out


def all_words(n: int, k: int) -> np.ndarray:
    """All words of length k over 1..n, lexicographic, as an (n**k, k) array."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(n**k, dtype=np.int64)
    powers = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers) % n + 1


def compose_batch(mats: np.ndarray, words: np.ndarray, left=None) -> np.ndarray:
    """Stack of products ``left @ mats[w1-1] @ ... @ mats[wk-1]`` for every row w."""
    words = np.asarray(words, dtype=np.int64)
    size = mats.shape[-1]
    out = np.broadcast_to(np.eye(size) if left is None else left, (len(words), size, size)).copy()
    for j in range(words.shape[1]):
        out = out @ mats[words[:, j] - 1]
    return out


# -- contraction and the coordinate map ------------------------------------------

def _lipschitz_samples(m: MapSpec, window, samples: int = 41) -> float:
    lo, hi = (np.asarray(v, dtype=float) for v in window)
    grids = np.meshgrid(*[np.linspace(a, b, samples) for a, b in zip(lo, hi)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    H = m.matrix
    h = pts @ H[:, :-1].T + H[:, -1]
    w = h[:, -1]
    if np.any(np.abs(w) < HOMOGENEOUS_EPS):
        return float("inf")
    # Jacobian of x -> (P x + p) / (q.x + r)
    P, q = H[:-1, :-1], H[-1, :-1]
    y = h[:, :-1] / w[:, None]
    jac = (P[None] - y[:, :, None] * q[None, None, :]) / w[:, None, None]
    return float(np.max(np.linalg.norm(jac, ord=2, axis=(1, 2))))


def estimate_contraction(F: Ifs, window=None) -> float:
    """Largest Euclidean Lipschitz constant over the maps.

    Affine maps use the top singular value of the linear part.  Projective
    maps use the largest Jacobian norm sampled over ``window`` (default the
    unit box, or ``F.window``).  A value below 1 certifies contractivity in the
    Euclidean metric; it is a sufficient condition only.
    """
    window = window if window is not None else F.window
    if window is None:
        window = (np.zeros(F.dim), np.ones(F.dim))
    vals = []
    for m in F.maps:
        if m.projective:
            vals.append(_lipschitz_samples(m, window))
        else:
            vals.append(float(np.linalg.norm(m.linear, ord=2)))
    return max(vals)


def invariant_ball(F: Ifs) -> tuple[np.ndarray, float]:
    """A ball (center, radius) mapped into itself by every map of a contractive IFS."""
    lam = estimate_contraction(F)
    if not lam < 1:
        raise NotContractive(f"no Euclidean invariant ball (estimate {lam:.4f})")
    c = F.maps[0].fixed_point()
    spread = max(float(np.linalg.norm(m.apply(c) - c)) for m in F.maps)
    return c, spread / (1 - lam)


class CoordinatePoint(NamedTuple):
    point: np.ndarray
    error_bound: float


def coordinate_point(F: Ifs, omega, depth: int, x0=None) -> CoordinatePoint:
    """f_{omega|depth}(x0) together with a bound on its distance to pi(omega)."""
    F.require_contractive()
    if depth < 1:
        raise ValueError("depth must be >= 1")
    prefix = omega.prefix(depth) if hasattr(omega, "prefix") else tuple(omega)[:depth]
    prefix = check_word(prefix, F.n)
    if len(prefix) < depth:
        raise InvalidWord(f"word shorter than depth {depth}")
    lam = estimate_contraction(F)
    if lam < 1:
        c, r = invariant_ball(F)
    else:
        c, r = F.maps[0].fixed_point(), float("inf")
    x = np.array(c if x0 is None else x0, dtype=float).reshape(F.dim)
    start = float(np.linalg.norm(x - c)) + r
    for letter in reversed(prefix):
        x = F.maps[letter - 1].apply(x)
    return CoordinatePoint(x, lam**depth * start if lam < 1 else float("inf"))


def affine_from_points(src, dst) -> MapSpec:
    """The affine map sending the dim+1 affinely independent points ``src`` to ``dst``."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    d = src.shape[1]
    if src.shape != (d + 1, d) or dst.shape != src.shape:
        raise DimMismatch(f"need {d + 1} source and target points in R^{d}")
    hs = np.hstack([src, np.ones((d + 1, 1))])
    if abs(np.linalg.det(hs)) < 1e-14:
        raise SingularMap("source points are affinely dependent")
    sol = np.linalg.solve(hs, dst)  # rows: linear^T then offset
    return MapSpec.affine(sol[:d].T, sol[d])
