"""Lattices the engines run on: the integer line, a reflecting segment, cycles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class Lattice:
    """Minimal interface: how a car moves, and which vertices close the system."""

    closed = False

    def move(self, pos: np.ndarray, inc: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance_to_boundary(self, v: np.ndarray, lo: int, hi: int) -> np.ndarray:
        """Distance from ``v`` to the nearer end of the window ``[lo, hi]``.

        Values at ``v`` up to time ``t`` match the infinite line whenever this is
        at least ``2t``.
        """
        v = np.asarray(v)
        return np.minimum(v - lo, hi - v)


@dataclass(frozen=True)
class Line(Lattice):
    """The integer line; walks are unbounded."""

    def move(self, pos, inc):
        return pos + inc


@dataclass(frozen=True)
class Reflecting(Lattice):
    """The segment ``[lo, hi]`` with steps off either end reflected back."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi - self.lo < 1:
            raise ValueError("reflecting segment needs at least two vertices")

    def move(self, pos, inc):
        x = pos + inc
        x = np.where(x < self.lo, 2 * self.lo - x, x)
        return np.where(x > self.hi, 2 * self.hi - x, x)


@dataclass(frozen=True)
class Cycle(Lattice):
    """The cycle ``C_n`` on vertices ``0..n-1``."""

    n: int
    closed = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cycle needs n >= 1")

    def move(self, pos, inc):
        return np.mod(pos + inc, self.n)

    def distance_to_boundary(self, v, lo, hi):
        # no boundary; the cone of radius 2t fits without wrapping iff 4t+1 <= n
        return np.full(np.shape(v), (self.n - 1) // 2)
