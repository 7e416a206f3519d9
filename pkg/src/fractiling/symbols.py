"""Infinite words over the alphabet 1..N and the word-string grammar.

Grammar (letters are 1-based; use commas between letters when N > 9)::

    "312"            finite word 3,1,2
    "3(12)"          eventually periodic 3 12 12 12 ...
    "(1)"            constant word 1 1 1 ...
    "disjunctive"    length-then-lexicographic enumeration 1 2 11 12 21 22 111 ...
    "random:seed=7"  seeded i.i.d. uniform letters
"""
from __future__ import annotations

import re
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidWord
from .maps import check_word


class InfiniteWord(ABC):
    n: int

    @abstractmethod
    def prefix_array(self, k: int) -> np.ndarray:
        """First k letters as an int64 array."""

    def prefix(self, k: int) -> tuple:
        return tuple(int(c) for c in self.prefix_array(k))

    def letter(self, i: int) -> int:
        """The i-th letter, 1-based."""
        if i < 1:
            raise IndexError("letters are indexed from 1")
        return int(self.prefix_array(i)[i - 1])


@dataclass(frozen=True)
class EventuallyPeriodic(InfiniteWord):
    n: int
    pre: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise InvalidWord("period must be nonempty")
        object.__setattr__(self, "pre", check_word(self.pre, self.n))
        object.__setattr__(self, "period", check_word(self.period, self.n))

    def prefix_array(self, k: int) -> np.ndarray:
        head = np.array(self.pre[:k], dtype=np.int64)
        rest = k - len(head)
        if rest <= 0:
            return head
        reps = -(-rest // len(self.period))
        tail = np.tile(np.array(self.period, dtype=np.int64), reps)[:rest]
        return np.concatenate([head, tail])

    def __str__(self):
        sep = "," if self.n > 9 else ""
        return sep.join(map(str, self.pre)) + "(" + sep.join(map(str, self.period)) + ")"


@dataclass(frozen=True, eq=False)
class DisjunctiveEnumeration(InfiniteWord):
    """Concatenation of all finite words in length-then-lexicographic order."""

    n: int
    _cache: list = field(default_factory=lambda: [np.zeros(0, dtype=np.int64)], repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidWord("alphabet must be nonempty")

    def _grow(self, k: int) -> np.ndarray:
        from .maps import all_words

        parts, total, length = [], 0, 1
        while total < k:
            block = all_words(self.n, length).ravel()
            parts.append(block)
            total += len(block)
            length += 1
        return np.concatenate(parts)

    def prefix_array(self, k: int) -> np.ndarray:
        cached = self._cache[0]
        if len(cached) < k:
            with self._lock:
                cached = self._cache[0]
                if len(cached) < k:
                    cached = self._grow(max(k, 2 * len(cached)))
                    cached.setflags(write=False)
                    self._cache[0] = cached
        return cached[:k]

    def __str__(self):
        return "disjunctive"


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int, start: int = 1) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the splitmix64 generator seeded with ``seed``.

    The i-th output is ``mix(seed + i * 0x9E3779B97F4A7C15)`` so any position can be
    computed directly; arithmetic wraps modulo 2**64.
    """
    i = np.arange(start, start + count, dtype=np.uint64)
    z = np.uint64(seed % 2**64) + i * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RandomWord(InfiniteWord):
    """Letters drawn independently with probabilities ``probs`` from a splitmix64 stream."""

    n: int
    seed: int
    probs: tuple = ()

    def __post_init__(self):
        probs = np.full(self.n, 1.0 / self.n) if not self.probs else np.asarray(self.probs, float)
        if probs.shape != (self.n,) or probs.min() <= 0:
            raise InvalidWord("probabilities must be positive, one per letter")
        object.__setattr__(self, "probs", tuple(probs / probs.sum()))

    def prefix_array(self, k: int) -> np.ndarray:
        u = (splitmix64(self.seed, k) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        cum = np.cumsum(self.probs)[:-1]
        return np.searchsorted(cum, u, side="right").astype(np.int64) + 1

    def __str__(self):
        return f"random:seed={self.seed}"


# -- parsing ----------------------------------------------------------------------

_PERIODIC = re.compile(r"^([0-9,]*)\(([0-9,]+)\)$")
_RANDOM = re.compile(r"^random:seed=(\d+)$")


def parse_finite(text: str, n: int, zero_based: bool = False) -> tuple:
    text = text.strip()
    if text in ("", "-"):
        return ()
    if not re.fullmatch(r"[0-9,]+", text):
        raise InvalidWord(f"cannot parse word {text!r}")
    letters = [int(t) for t in text.split(",") if t] if "," in text else [int(c) for c in text]
    if zero_based:
        letters = [c + 1 for c in letters]
    return check_word(letters, n)


def parse_word(text: str, n: int, zero_based: bool = False) -> InfiniteWord:
    """Parse an infinite-word spec; ``zero_based`` reads digits 0..N-1 as letters 1..N."""
    text = text.strip()
    if text == "disjunctive":
        return DisjunctiveEnumeration(n)
    m = _RANDOM.match(text)
    if m:
        return RandomWord(n, int(m.group(1)))
    m = _PERIODIC.match(text)
    if not m:
        raise InvalidWord(f"cannot parse infinite word {text!r}; expected e.g. '3(12)'")
    pre = parse_finite(m.group(1), n, zero_based)
    period = parse_finite(m.group(2), n, zero_based)
    return EventuallyPeriodic(n, pre, period)


def format_word(word, n: int) -> str:
    if not word:
        return "-"
    sep = "," if n > 9 else ""
    return sep.join(str(c) for c in word)
