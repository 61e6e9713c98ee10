"""Counter-based randomness for the parking process.

Every variate is a pure function of ``(master_seed, kind, entity, index)``.
Engines can therefore consume the same random environment in any order,
which is what lets the car-based engine, the space-based engine and the
different strategies be compared on shared randomness.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# stream kinds
CONFIG = 1
WALK = 2
TIE = 3
DIRECTION = 4
SPACE_TIE = 5
SHIFT = 6
REPLICA = 7

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _as_u64(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.int64)
    return a.view(np.uint64) if a.ndim else a.reshape(1).view(np.uint64)


def hash64(seed: int, kind: int, entity, index) -> np.ndarray:
    """64-bit hash of ``(seed, kind, entity, index)``, broadcast over arrays."""
    with np.errstate(over="ignore"):
        key = _mix(_as_u64(seed) + _GOLDEN * np.uint64(kind + 1))
        ent = _as_u64(entity)
        idx = _as_u64(index)
        h = _mix(key ^ _mix(ent + _GOLDEN))
        return _mix(h ^ _mix(idx * _M2 + _M1))


def uniforms(seed: int, kind: int, entity, index) -> np.ndarray:
    """Uniform variates in ``[0, 1)`` with 53-bit resolution."""
    return (hash64(seed, kind, entity, index) >> _S11).astype(np.float64) * _INV53


@dataclass(frozen=True)
class StepDistribution:
    """Step law ``mu`` on a finite set of integer offsets."""

    support: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.support or len(self.support) != len(self.weights):
            raise ValueError("support must be nonempty and match weights")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be distinct")

    @classmethod
    def symmetric(cls) -> "StepDistribution":
        return cls((-1, 1), (0.5, 0.5))

    @classmethod
    def point(cls, offset: int) -> "StepDistribution":
        return cls((offset,), (1.0,))

    @property
    def is_simple(self) -> bool:
        return set(self.support) <= {-1, 1}

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF map from uniforms to offsets."""
        cum = np.cumsum(self.weights)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, u, side="right")
        return np.asarray(self.support, dtype=np.int64)[np.minimum(idx, len(self.support) - 1)]


SYMMETRIC = StepDistribution.symmetric()


@dataclass(frozen=True)
class RandomSource:
    """Seeded, entity-addressed supplier of every random input of a run.

    Stateless: two sources with the same ``master_seed`` return identical
    variates for identical queries, whatever order queries arrive in.
    """

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")

    @property
    def _seed(self) -> int:
        # int64 reinterpretation of the unsigned seed
        return self.master_seed - 2**64 if self.master_seed >= 2**63 else self.master_seed

    def uniforms(self, kind: int, entity, index) -> np.ndarray:
        return uniforms(self._seed, kind, entity, index)

    def car_cells(self, positions) -> np.ndarray:
        """Uniforms deciding the car/space tag of each position."""
        return self.uniforms(CONFIG, positions, 0)

    def walk_increments(self, cars, s: int, mu: StepDistribution = SYMMETRIC) -> np.ndarray:
        return mu.from_uniform(self.uniforms(WALK, cars, s))

    def tie_breaks(self, cars, s: int) -> np.ndarray:
        return self.uniforms(TIE, cars, s)

    def space_tie_breaks(self, cars, s: int) -> np.ndarray:
        return self.uniforms(SPACE_TIE, cars, s)

    def directions(self, vertices, indices, mu: StepDistribution = SYMMETRIC) -> np.ndarray:
        return mu.from_uniform(self.uniforms(DIRECTION, vertices, indices))

    def shift(self, zeta: int) -> int:
        """The uniform interval shift, in ``{0, ..., zeta-1}``."""
        return int(self.uniforms(SHIFT, 0, zeta)[0] * zeta)

    def spawn(self, replica: int) -> "RandomSource":
        """Independent sub-source for one replica."""
        return RandomSource(int(hash64(self._seed, REPLICA, replica, 0)[0]))

    def generator(self, *key: int) -> np.random.Generator:
        """A bulk numpy stream keyed by ``key``, for Monte Carlo that needs no addressing."""
        return np.random.default_rng(np.random.SeedSequence(self.master_seed, spawn_key=key))


@dataclass(eq=False)
class InitialConfig:
    """Car/space placement on the finite window ``[lo, hi]``."""

    lo: int
    hi: int
    is_car: np.ndarray
    density: float
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        self.is_car = np.asarray(self.is_car, dtype=bool)
        if self.hi < self.lo:
            raise ValueError("window must be nonempty")
        if self.is_car.shape != (self.hi - self.lo + 1,):
            raise ValueError("one tag per window position required")

    def __eq__(self, other) -> bool:
        if not isinstance(other, InitialConfig):
            return NotImplemented
        return (self.lo, self.hi) == (other.lo, other.hi) and np.array_equal(self.is_car, other.is_car)

    @classmethod
    def from_tags(cls, tags: Sequence[bool] | str, lo: int = 0, density: float = float("nan")):
        """Build from booleans or a string such as ``"CSSC"`` (C = car)."""
        if isinstance(tags, str):
            tags = [c.upper() == "C" for c in tags]
        tags = np.asarray(tags, dtype=bool)
        return cls(lo, lo + len(tags) - 1, tags, density)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    @property
    def cars(self) -> np.ndarray:
        return self.positions[self.is_car]

    @property
    def spaces(self) -> np.ndarray:
        return self.positions[~self.is_car]

    def car_at(self, x: int) -> bool:
        return self.lo <= x <= self.hi and bool(self.is_car[x - self.lo])

    def restrict(self, lo: int, hi: int) -> "InitialConfig":
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        return InitialConfig(lo, hi, self.is_car[lo - self.lo:hi - self.lo + 1].copy(), self.density, self.seed)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# master_seed={self.seed}\n")
            w = csv.writer(fh)
            w.writerow(["position", "tag"])
            for x, c in zip(self.positions, self.is_car):
                w.writerow([int(x), "Car" if c else "Space"])

    @classmethod
    def from_csv(cls, path: str | Path) -> "InitialConfig":
        seed = None
        rows = []
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                if "master_seed=" in line:
                    val = line.split("master_seed=", 1)[1].strip()
                    seed = None if val == "None" else int(val)
            else:
                body.append(line)
        for row in csv.DictReader(body):
            rows.append((int(row["position"]), row["tag"] == "Car"))
        rows.sort()
        pos = [r[0] for r in rows]
        if pos != list(range(pos[0], pos[0] + len(pos))):
            raise ValueError("config positions must be contiguous")
        cfg = cls.from_tags([r[1] for r in rows], lo=pos[0])
        cfg.seed = seed
        return cfg


def sample_initial_config(window: tuple[int, int], p: float, src) -> InitialConfig:
    """Bernoulli(p) car placement on ``window``, deterministic given ``src``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density p={p} outside [0, 1]")
    lo, hi = window
    if hi < lo:
        raise ValueError("window must be nonempty")
    positions = np.arange(lo, hi + 1, dtype=np.int64)
    is_car = src.car_cells(positions) < p
    return InitialConfig(lo, hi, is_car, p, getattr(src, "master_seed", None))


def walk_increment(v: int, s: int, mu: StepDistribution, src: RandomSource) -> int:
    """The ``s``-th increment of the walk of the car starting at ``v``."""
    if s < 1:
        raise ValueError("steps are numbered from 1")
    return int(src.walk_increments(np.array([v]), s, mu)[0])


def tie_break_value(v: int, s: int, src: RandomSource) -> float:
    if s < 1:
        raise ValueError("steps are numbered from 1")
    return float(src.tie_breaks(np.array([v]), s)[0])
