"""Marked spheres and words in their fundamental groups.

A sphere with punctures ``p_1..p_n`` has generators ``x_1..x_n`` (counterclockwise
peripheral loops, in listed order) with the single relation ``x_1 x_2 ... x_n = 1``.
Words are stored as tuples of nonzero ints: ``+i`` is ``x_i`` and ``-i`` its
inverse.  The normal form eliminates ``x_n`` and freely reduces, so it is a
reduced word in the free group on ``x_1..x_{n-1}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

Word = tuple[int, ...]

_TOKEN = re.compile(r"([xX])(\d+)")


class WordSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class MarkedSphere:
    punctures: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "punctures", tuple(self.punctures))
        if len(self.punctures) < 3:
            raise ValueError(f"a marked sphere needs at least 3 punctures, got {len(self.punctures)}")
        if len(set(self.punctures)) != len(self.punctures):
            raise ValueError(f"duplicate puncture labels in {self.punctures}")

    @property
    def n(self) -> int:
        return len(self.punctures)

    def index(self, label: str) -> int:
        """1-based generator index of a puncture label."""
        return self.punctures.index(label) + 1

    def generator(self, i: int) -> Word:
        """Normal form of ``x_i`` (``x_n`` becomes ``(x_1...x_{n-1})^-1``)."""
        return normal_form((i,), self.n)

    def relator_prefix(self) -> Word:
        return tuple(range(1, self.n))


def free_reduce(word: Iterable[int]) -> Word:
    out: list[int] = []
    for a in word:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def inverse(word: Sequence[int]) -> Word:
    return tuple(-a for a in reversed(word))


def multiply(*words: Sequence[int]) -> Word:
    return free_reduce(a for w in words for a in w)


def eliminate_last(word: Iterable[int], n: int) -> Word:
    out: list[int] = []
    for a in word:
        if a == n:
            out.extend(range(-(n - 1), 0))
        elif a == -n:
            out.extend(range(1, n))
        elif a == 0 or abs(a) > n:
            raise WordSyntaxError(f"letter {a} out of range for {n} generators")
        else:
            out.append(a)
    return tuple(out)


def normal_form(word: Iterable[int], n: int) -> Word:
    return free_reduce(eliminate_last(word, n))


def cyclic_reduce(word: Sequence[int]) -> tuple[Word, Word]:
    """Split a reduced word as ``c * core * c^-1`` with ``core`` cyclically reduced.

    Returns ``(c, core)``.
    """
    w = tuple(word)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[:i], w[i : j + 1]


def rotations(word: Sequence[int]) -> list[Word]:
    w = tuple(word)
    return [w[k:] + w[:k] for k in range(len(w))] or [()]


def _letter_key(a: int) -> tuple[int, int]:
    # x1 < X1 < x2 < X2 < ...
    return (abs(a), 0 if a > 0 else 1)


def word_key(word: Sequence[int]) -> tuple:
    return tuple(_letter_key(a) for a in word)


def oriented_key(word: Sequence[int]) -> Word:
    """Least cyclic rotation of the cyclically reduced core: a conjugacy invariant."""
    _, core = cyclic_reduce(free_reduce(word))
    return min(rotations(core), key=word_key)


def unoriented_key(word: Sequence[int]) -> Word:
    """Conjugacy class of ``word`` up to inversion (unoriented curves)."""
    a = oriented_key(word)
    b = oriented_key(inverse(word))
    return min(a, b, key=word_key)


def conjugator(u: Sequence[int], w: Sequence[int]) -> Word | None:
    """Return ``t`` with ``t u t^-1 == w`` in the free group, or ``None``."""
    u, w = free_reduce(u), free_reduce(w)
    a, cu = cyclic_reduce(u)
    b, cw = cyclic_reduce(w)
    if len(cu) != len(cw):
        return None
    if not cu:
        return ()
    for k in range(len(cu)):
        if cu[k:] + cu[:k] == cw:
            # rot_k(cu) = v^-1 cu v with v = cu[:k]
            v = cu[:k]
            t = multiply(b, inverse(v), inverse(a))
            assert multiply(t, u, inverse(t)) == w
            return t
    return None


def is_conjugate(u: Sequence[int], w: Sequence[int]) -> bool:
    return oriented_key(u) == oriented_key(w)


def parse_word(text: str, n: int | None = None) -> Word:
    """Parse ``"x1X2x3"`` (``X`` = inverse); ``""`` is the identity."""
    text = text.strip()
    pos = 0
    out: list[int] = []
    for m in _TOKEN.finditer(text):
        if m.start() != pos:
            raise WordSyntaxError(f"unexpected text {text[pos:m.start()]!r} in word {text!r}")
        i = int(m.group(2))
        if i == 0 or (n is not None and i > n):
            raise WordSyntaxError(f"generator index {i} out of range in {text!r}")
        out.append(i if m.group(1) == "x" else -i)
        pos = m.end()
    if pos != len(text):
        raise WordSyntaxError(f"trailing text {text[pos:]!r} in word {text!r}")
    return tuple(out)


def format_word(word: Sequence[int]) -> str:
    return "".join(f"x{a}" if a > 0 else f"X{-a}" for a in word)


def block_word(start: int, stop: int) -> Word:
    """``x_start x_{start+1} ... x_stop`` (1-based, inclusive)."""
    return tuple(range(start, stop + 1))
