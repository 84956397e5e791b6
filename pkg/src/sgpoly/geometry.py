"""Cell words, vertex addresses and the combinatorics of ``V_m``.

A cell of level ``m`` is a word of ``m`` letters over the nine-letter
alphabet ``00 .. 22``; it is stored as a digit string of length ``2m``
(``"0112"`` is the cell ``F_01 F_12 SG``).  A vertex is addressed as
``(word, index)`` meaning ``F_word q_index``.  Junction points have two
addresses at their own level; the canonical one is the lexicographically
smallest, after dropping redundant trailing letters ``ll`` from
``(w + "ll", l)``.

Points are compared through exact integer affine coordinates in which
``q0 = (0, 0)``, ``q1 = (1, 0)``, ``q2 = (0, 1)``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

LETTERS = tuple(f"{i}{j}" for i in range(3) for j in range(3))
Address = tuple[str, int]

_CORNERS = ((0, 0), (1, 0), (0, 1))
_SQRT3_2 = math.sqrt(3.0) / 2.0


def word_level(word: str) -> int:
    return len(word) // 2


def letters(word: str) -> list[str]:
    return [word[i:i + 2] for i in range(0, len(word), 2)]


def is_outer(letter: str) -> bool:
    return letter[0] == letter[1]


def outer_count(word: str) -> int:
    """Number of outer letters; the cell resistance is ``r0^c r1^(m-c)``."""
    return sum(1 for i in range(0, len(word), 2) if word[i] == word[i + 1])


def point(word: str, index: int) -> tuple[int, int, int]:
    """Exact affine coordinates of ``F_word q_index`` as ``(x, y, scale)``.

    The point is ``(x / 2^scale, y / 2^scale)``; ``scale`` is the digit
    count so that coordinates of vertices of one level share a denominator.
    """
    n = len(word)
    x, y = _CORNERS[index]
    x <<= n
    y <<= n
    for k, digit in enumerate(reversed(word)):
        cx, cy = _CORNERS[int(digit)]
        x = (x + (cx << n)) >> 1
        y = (y + (cy << n)) >> 1
    return x, y, n


def point_key(word: str, index: int, level: int) -> tuple[int, int]:
    x, y, n = point(word, index)
    shift = 2 * level - n
    return x << shift, y << shift


def embed(word: str, index: int) -> tuple[float, float]:
    """Planar coordinates in the equilateral triangle q0 top, q1 left, q2 right."""
    x, y, n = point(word, index)
    a, b = x / (1 << n), y / (1 << n)
    # q0 = (0, sqrt3/2), q1 = (-1/2, 0), q2 = (1/2, 0)
    return -0.5 * a + 0.5 * b, _SQRT3_2 * (1.0 - a - b)


def reduce_address(word: str, index: int) -> Address:
    tail = f"{index}{index}"
    while word.endswith(tail):
        word = word[:-2]
    return word, index


def _permute(address: Address, perm: tuple[int, int, int]) -> Address:
    word, index = address
    return "".join(str(perm[int(d)]) for d in word), perm[index]


ROTATION = (1, 2, 0)          # rho: q_i -> q_{i+1}
ROTATION_INV = (2, 0, 1)
REFLECTIONS = ((0, 2, 1), (2, 1, 0), (1, 0, 2))  # R_i fixes q_i


def rotate(address: Address, power: int = 1) -> Address:
    perm = {0: (0, 1, 2), 1: ROTATION, 2: ROTATION_INV}[power % 3]
    return _permute(address, perm)


def reflect(address: Address, fixed: int) -> Address:
    return _permute(address, REFLECTIONS[fixed])


def compose(word: str, address: Address) -> Address:
    """Address of ``F_word`` applied to the vertex ``address``."""
    return word + address[0], address[1]


@dataclass(frozen=True)
class Junction:
    """A vertex of ``V_m \\ V_0`` with its two incident level-``m`` cells.

    ``cells[0]`` is always the cell whose neighbours carry weight ``r`` in
    the mixed-resistance stencil (the one with fewer outer letters).
    """

    address: Address
    cells: tuple[Address, Address]
    mixed: bool


class LevelIndex:
    """Canonical vertex set of ``V_m`` with junction incidence."""

    def __init__(self, level: int):
        if level < 0:
            raise ValueError("level must be non-negative")
        self.level = level
        groups: dict[tuple[int, int], list[Address]] = {}
        for word in self.cells():
            for index in range(3):
                groups.setdefault(point_key(word, index, level), []).append((word, index))
        self._canonical: dict[Address, Address] = {}
        self.vertices: list[Address] = []
        self.incidence: dict[Address, list[Address]] = {}
        for members in groups.values():
            canon = min(reduce_address(w, i) for w, i in members)
            self.vertices.append(canon)
            self.incidence[canon] = sorted(members)
            for m in members:
                self._canonical[m] = canon
        self.vertices.sort()
        self.junctions: dict[Address, Junction] = {}
        for v in self.vertices:
            members = self.incidence[v]
            if len(members) == 2:
                a, b = members
                ca, cb = outer_count(a[0]), outer_count(b[0])
                if ca > cb:
                    a, b = b, a
                self.junctions[v] = Junction(v, (a, b), ca != cb)

    def cells(self) -> list[str]:
        return ["".join(p) for p in itertools.product(LETTERS, repeat=self.level)]

    def canonical(self, address: Address) -> Address:
        word, index = address
        if word_level(word) > self.level:
            raise ValueError(f"address {address} is finer than level {self.level}")
        if word_level(word) < self.level:
            word = word + f"{index}{index}" * (self.level - word_level(word))
        return self._canonical[(word, index)]

    def __len__(self) -> int:
        return len(self.vertices)


@functools.lru_cache(maxsize=8)
def level_index(level: int) -> LevelIndex:
    return LevelIndex(level)


def neighbours(cell_address: Address) -> tuple[Address, Address]:
    word, index = cell_address
    return (word, (index + 1) % 3), (word, (index + 2) % 3)


BOUNDARY: tuple[Address, Address, Address] = (("", 0), ("", 1), ("", 2))
