"""Evidence that a word theta is strongly reversible, reversible or full.

These properties quantify over every M, so a finite scan can only certify
recurrence up to the scanned depth.  Checkers return a certificate with the
positions that were found, or ``Unknown``; they never return a negative verdict.

A match ``(m, L)`` always means ``omega_1 ... omega_L == theta_{m+L} ... theta_{m+1}``;
strong matches are the ones with ``m == 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .maps import Ifs, check_word, compose
from .regions import Intervals1D, Raster, Region, rasterize
from .symbols import InfiniteWord


class Verdict(str, Enum):
    STRONG = "VerifiedStrong"
    REVERSIBLE = "VerifiedReversible"
    FULL = "VerifiedFull"
    DISJUNCTIVE = "VerifiedDisjunctive"
    UNKNOWN = "Unknown"


@dataclass
class ReversalEvidence:
    theta_prefix_len: int
    omega_prefix: tuple
    match_positions: list
    verdict: Verdict
    ladder: list = field(default_factory=list)

    def recheck(self, theta: InfiniteWord) -> bool:
        """Re-verify every stored match by direct letter comparison."""
        need = max((m + L for m, L in self.match_positions), default=0)
        letters = theta.prefix(need)
        for m, L in self.match_positions:
            if L > len(self.omega_prefix):
                return False
            if tuple(self.omega_prefix[:L]) != tuple(reversed(letters[m:m + L])):
                return False
        return True


def _stream(letters: np.ndarray) -> bytes:
    return np.asarray(letters, dtype=np.int32).tobytes()


def _find(hay: bytes, needle: bytes, start: int) -> int:
    """Index (in letters) of the first occurrence at letter position >= start, or -1."""
    pos = start * 4
    while True:
        i = hay.find(needle, pos)
        if i < 0 or i % 4 == 0:
            return -1 if i < 0 else i // 4
        pos = i + 1


def find_reversible_matches(theta: InfiniteWord, omega_prefix, m_max: int,
                            limit: int | None = None) -> list:
    """All (m, L) with m <= m_max, L = len(omega_prefix), where omega|L occurs reversed at m."""
    omega = check_word(omega_prefix, theta.n)
    L = len(omega)
    hay = _stream(theta.prefix_array(m_max + L))
    needle = _stream(omega[::-1])
    out, pos = [], 0
    while limit is None or len(out) < limit:
        i = _find(hay, needle, pos)
        if i < 0:
            break
        out.append((i, L))
        pos = i + 1
    return out


def find_strong_matches(theta: InfiniteWord, omega_prefix, m_max: int) -> list:
    """All (0, m) with m <= min(m_max, len(omega_prefix)) and theta|m equal to omega|m reversed."""
    omega = np.asarray(check_word(omega_prefix, theta.n), dtype=np.int64)
    top = min(m_max, len(omega))
    th = theta.prefix_array(top)
    if top == 0:
        return []
    # omega_m must equal theta_1; only those m need the full comparison
    cands = np.flatnonzero(omega[:top] == th[0]) + 1
    return [(0, int(m)) for m in cands if np.array_equal(th[:m][::-1], omega[:m])]


def reversible_from_strong(theta: InfiniteWord, omega_prefix, n: int, L: int) -> tuple:
    """The reversible match (n - L, L) implied by a strong match of length n >= L."""
    if L > n:
        raise ValueError("need n >= L")
    letters = theta.prefix(n)
    m = n - L
    if tuple(omega_prefix[:L]) != tuple(reversed(letters[m:n])):
        raise ValueError(f"({m}, {L}) is not a reversible match")
    return (m, L)


def construct_reverse_word(theta: InfiniteWord, sigma_prefix, t_max: int = 10**6,
                           min_steps: int = 2, max_steps: int = 64) -> ReversalEvidence:
    """Run the inductive construction of a strong reverse word starting from sigma|s.

    t_1 is the first t > s with theta_t ... theta_{t-s+1} = sigma|s; t_{n+1} is the
    first later end of an occurrence of theta|t_n.  The reverse word is then
    omega|t_n = reverse(theta|t_n), and every (0, t_n) is a strong match.  With at
    least ``min_steps`` ladder steps the verdict is VerifiedStrong; the ladder
    stops after ``max_steps`` since each step rescans the prefix.  Otherwise
    the occurrences of reversed sigma|s are reported as reversible evidence when
    they recur, and Unknown when they do not.
    """
    sigma = check_word(sigma_prefix, theta.n)
    s = len(sigma)
    if s == 0:
        raise ValueError("sigma prefix must be nonempty")
    letters = theta.prefix_array(t_max)
    hay = _stream(letters)
    ladder = []
    i = _find(hay, _stream(sigma[::-1]), 1)  # t_1 > s means a start index >= 1
    if i >= 0:
        t = i + s
        ladder.append(t)
        while len(ladder) < max_steps:
            j = _find(hay, hay[:4 * t], 1)
            if j < 0:
                break
            t = j + t
            ladder.append(t)
    if len(ladder) >= min_steps:
        top = ladder[-1]
        omega = tuple(int(c) for c in letters[:top][::-1])
        return ReversalEvidence(t_max, omega, [(0, t) for t in ladder], Verdict.STRONG, ladder)
    matches = find_reversible_matches(theta, sigma, t_max - s)
    omega = tuple(int(c) for c in letters[:ladder[0]][::-1]) if ladder else sigma
    if len(matches) >= 2:
        return ReversalEvidence(t_max, sigma, matches, Verdict.REVERSIBLE, ladder)
    return ReversalEvidence(t_max, omega, matches, Verdict.UNKNOWN, ladder)


def check_reversal(theta: InfiniteWord, omega: InfiniteWord, lengths, m_max: int,
                   min_matches: int = 2) -> ReversalEvidence:
    """Evidence for a given candidate reverse word.

    Strong matches (0, m) are searched for m <= m_max; reversible matches (m, L)
    for every L in ``lengths``.  VerifiedStrong needs ``min_matches`` strong
    matches, VerifiedReversible needs that many distinct m for every L.
    """
    lengths = sorted(set(int(L) for L in lengths))
    top = max(max(lengths, default=0), m_max)
    prefix = omega.prefix(top)
    strong = find_strong_matches(theta, prefix, m_max)
    if len(strong) >= min_matches:
        return ReversalEvidence(m_max, prefix, strong, Verdict.STRONG, [m for _, m in strong])
    found, ok = [], bool(lengths)
    for L in lengths:
        hits = find_reversible_matches(theta, prefix[:L], m_max)
        ok &= len(hits) >= min_matches
        found.extend(hits)
    verdict = Verdict.REVERSIBLE if ok else Verdict.UNKNOWN
    return ReversalEvidence(m_max, prefix, strong + found, verdict)


# -- disjunctiveness ---------------------------------------------------------------------------

@dataclass
class DisjunctiveEvidence:
    verdict: Verdict
    length: int  # every word of this length or shorter occurs in the scanned prefix
    scanned: int
    missing: tuple | None = None  # shortest word not found, if any


def check_disjunctive(theta: InfiniteWord, depth: int, max_len: int | None = None) -> DisjunctiveEvidence:
    """Check that every word up to ``max_len`` letters occurs in theta|depth.

    ``max_len`` defaults to the longest length whose N^L words, laid end to end,
    fill at most a quarter of the prefix.  The verdict is VerifiedDisjunctive only when every length up to
    ``max_len`` is covered.
    """
    n = theta.n
    letters = theta.prefix_array(depth).astype(np.int64) - 1
    if max_len is None:
        max_len = 1
        while 4 * (max_len + 1) * n ** (max_len + 1) <= depth:
            max_len += 1
    codes = np.zeros(len(letters), dtype=np.int64)
    for L in range(1, max_len + 1):
        if L > len(letters):
            return DisjunctiveEvidence(Verdict.UNKNOWN, L - 1, depth, None)
        codes = codes[:len(letters) - L + 1] * n + letters[L - 1:]
        seen = np.zeros(n ** L, dtype=bool)
        seen[codes] = True
        if not seen.all():
            c = int(np.flatnonzero(~seen)[0])
            word = tuple(int(d) + 1 for d in np.base_repr(c, n).zfill(L)) if n <= 36 else None
            return DisjunctiveEvidence(Verdict.UNKNOWN, L - 1, depth, word)
    return DisjunctiveEvidence(Verdict.DISJUNCTIVE, max_len, depth)


# -- fullness ----------------------------------------------------------------------------------

@dataclass
class FullnessResult:
    verdict: Verdict
    witnesses: list

    def __bool__(self):
        return self.verdict is Verdict.FULL


def _contained(F: Ifs, A: Region, word, interior) -> bool:
    g = compose(F, word)
    if isinstance(A, Intervals1D):
        img = A.map(g)
        lo, hi = img.intervals[0][0], img.intervals[-1][1]
        return A.contains_interior(lo, hi)
    core, pts, min_extent = interior
    img = g.apply(pts)
    # images below a few cells fit inside any thickened raster, interior or not
    if np.ptp(img, axis=0).max() < min_extent:
        return False
    return bool(np.all(core.contains(img)))


def check_full(theta: InfiniteWord, F: Ifs, A: Region, depth: int, max_span: int = 64,
               erosion_cells: int = 1, witnesses: int = 2, res: float = 64.0,
               min_cells: float = 4.0) -> FullnessResult:
    """Search for n > m with f_{theta_n} o ... o f_{theta_{m+1}}(A) inside the interior of A.

    Witnesses are taken greedily, the next one starting at or after the previous
    n, so they use disjoint stretches of theta.  ``max_span`` caps n - m.
    Attractors other than interval unions are rasterized at ``res``, and a
    witness image must then span at least ``min_cells`` cells: a raster of a set
    with empty interior still has a thick core at the cell scale.
    """
    F.require_contractive()
    letters = theta.prefix(depth)
    interior = None
    if not isinstance(A, Intervals1D):
        if not isinstance(A, Raster):
            A = rasterize(A, res)
        core = A.erode(erosion_cells)
        if core.is_empty():
            return FullnessResult(Verdict.UNKNOWN, [])
        interior = (core, np.concatenate([A.centers(), A.corners()]), min_cells / A.res)
    found = []
    m = 0
    while m < depth and len(found) < witnesses:
        hit = None
        for n in range(m + 1, min(depth, m + max_span) + 1):
            if _contained(F, A, tuple(reversed(letters[m:n])), interior):
                hit = n
                break
        if hit is None:
            m += 1
            continue
        found.append((m, hit))
        m = hit
    verdict = Verdict.FULL if len(found) >= witnesses else Verdict.UNKNOWN
    return FullnessResult(verdict, found)
