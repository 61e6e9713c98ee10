"""Parking strategies (greedy, never-park, interval assignment) and barrier car removal.

A parking strategy answers, for a batch of active cars standing on free
spaces at time ``s``, which of them are allowed to park now. The engine
then parks the allowed car with the smallest tie-break value at each space.
A removal strategy answers which attempted steps delete the car.
"""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import InitialConfig

NO_SPOT = np.iinfo(np.int64).min


class PlanIntegrityError(AssertionError):
    pass


class AxiomViolation(AssertionError):
    pass


class ParkingStrategy:
    name = "abstract"

    def permits(self, cars: np.ndarray, positions: np.ndarray, time: int) -> np.ndarray:
        raise NotImplementedError


class Greedy(ParkingStrategy):
    """Park at the first free space reached."""

    name = "greedy"

    def permits(self, cars, positions, time):
        return np.ones(len(cars), dtype=bool)


class NeverPark(ParkingStrategy):
    name = "never"

    def permits(self, cars, positions, time):
        return np.zeros(len(cars), dtype=bool)


def greedy_decide(on_space: bool, space_free: bool) -> bool:
    return bool(on_space and space_free)


# ---------------------------------------------------------------------------
# interval-assignment strategy


def ceil_sqrt(x: int) -> int:
    r = math.isqrt(x)
    return r + (r * r < x)


def ceil_fourth_root(x: int) -> int:
    r = math.isqrt(math.isqrt(x))
    while r**4 < x:
        r += 1
    return r


def plan_scales(t: int) -> tuple[int, int]:
    """Interval length ``ceil(sqrt t)`` and queue capacity ``ceil(t^(1/4))``."""
    if t < 1:
        raise ValueError("horizon must be >= 1")
    return ceil_sqrt(t), ceil_fourth_root(t)


@dataclass(frozen=True)
class AssignmentPlan:
    """Target space of every car (``NO_SPOT`` for cars told never to park)."""

    horizon: int
    zeta: int
    nu: int
    shift: int
    lo: int
    is_car: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    queue_trace: tuple = field(default=(), repr=False, compare=False)

    @property
    def hi(self) -> int:
        return self.lo + len(self.target) - 1

    def assigned(self, i: int) -> int | None:
        v = int(self.target[i - self.lo])
        return None if v == NO_SPOT else v

    def targets_of(self, cars: np.ndarray) -> np.ndarray:
        return self.target[np.asarray(cars) - self.lo]

    @property
    def starred(self) -> np.ndarray:
        return self.target == NO_SPOT

    def star_fraction(self, per: str = "cell") -> float:
        """Fraction of window cells (or of cars, ``per="car"``) assigned no spot."""
        n = self.is_car.sum() if per == "car" else len(self.target)
        return float(self.starred.sum() / n) if n else 0.0

    def check(self) -> None:
        """Assert the structural invariants of the sweep."""
        pos = np.arange(self.lo, self.hi + 1)
        sp = ~self.is_car
        if np.any(self.target[sp] != pos[sp]):
            raise PlanIntegrityError("a space is not assigned to itself")
        cars = self.is_car & (self.target != NO_SPOT)
        tgt = self.target[cars]
        if np.any(self.is_car[tgt - self.lo]):
            raise PlanIntegrityError("a car was assigned to a car cell")
        if len(np.unique(tgt)) != len(tgt):
            raise PlanIntegrityError("a space was assigned twice")
        gap = pos[cars] - tgt
        if np.any(gap <= 0) or np.any(gap > 3 * self.nu):
            raise PlanIntegrityError("assignment distance outside (0, 3*nu]")
        same = (pos[cars] - self.shift) // self.zeta == (tgt - self.shift) // self.zeta
        if not np.all(same):
            raise PlanIntegrityError("assignment crosses an interval boundary")

    def to_csv(self, path: str | Path, seed: int | None = None) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# master_seed={seed} horizon={self.horizon} zeta={self.zeta} "
                     f"nu={self.nu} shift={self.shift}\n")
            w = csv.writer(fh)
            w.writerow(["position", "assigned"])
            for x, v in zip(range(self.lo, self.hi + 1), self.target):
                w.writerow([x, "" if v == NO_SPOT else int(v)])


def _sweep(cells: list[bool], base: int, nu: int, target: np.ndarray, lo: int, trace: list | None):
    """Right-to-left queue sweep over one interval; ``cells[j]`` is position ``base + j``."""
    queue: deque[int] = deque()  # oldest (largest) car on the left
    for j in range(len(cells) - 1, -1, -1):
        c = cells[j]
        if c is None:
            continue
        m = base + j
        if not c:
            target[m - lo] = m
            if queue:
                target[queue.popleft() - lo] = m
        else:
            queue.append(m)
        if trace is not None:
            trace.append(len(queue))
        if len(queue) == nu:
            target[queue.popleft() - lo] = NO_SPOT
    for v in queue:
        target[v - lo] = NO_SPOT


def build_assignment_plan(config: InitialConfig, t: int, src=None, shift: int | None = None,
                          record_queue: bool = False) -> AssignmentPlan:
    """Assign spaces to cars interval by interval with a bounded queue.

    Intervals are ``[z + k*zeta, z + (k+1)*zeta - 1]`` with ``z`` drawn from
    ``src`` unless ``shift`` is given. Cells of an interval lying outside the
    config window hold neither a car nor a space and are skipped.
    """
    zeta, nu = plan_scales(t)
    if shift is None:
        shift = src.shift(zeta) if src is not None else 0
    if not 0 <= shift < zeta:
        raise ValueError("shift must lie in [0, zeta)")
    lo, hi = config.lo, config.hi
    target = np.full(config.size, NO_SPOT, dtype=np.int64)
    tags = config.is_car.tolist()
    traces = [] if record_queue else None
    k = (lo - shift) // zeta
    while shift + k * zeta <= hi:
        a = shift + k * zeta
        b = a + zeta - 1
        cells = [tags[x - lo] if lo <= x <= hi else None for x in range(a, b + 1)]
        tr = [] if record_queue else None
        _sweep(cells, a, nu, target, lo, tr)
        if record_queue:
            traces.append(tuple(tr))
        k += 1
    plan = AssignmentPlan(t, zeta, nu, shift, lo, config.is_car.copy(), target,
                          tuple(traces) if record_queue else ())
    plan.check()
    return plan


class TStrategy(ParkingStrategy):
    """Each car parks on the first visit to its assigned space, or never."""

    name = "t"

    def __init__(self, plan: AssignmentPlan):
        self.plan = plan

    def permits(self, cars, positions, time):
        tgt = self.plan.targets_of(cars)
        return (tgt != NO_SPOT) & (tgt == positions)


def t_strategy_decide(plan: AssignmentPlan, car: int, position: int, time: int) -> bool:
    if not plan.is_car[car - plan.lo]:
        raise PlanIntegrityError(f"{car} is not a car")
    p = plan.assigned(car)
    if p == car:
        raise PlanIntegrityError(f"car {car} assigned to its own cell")
    return p is not None and p == position


# ---------------------------------------------------------------------------
# barrier removal


@dataclass(frozen=True)
class BarrierParams:
    """Barrier edges ``{r*M, r*M + 1}`` with ``M = 2(k+ell)zeta + 1``."""

    horizon: int
    k: int = 9
    ell: int = 5
    zeta: int | None = None

    def __post_init__(self):
        if self.k <= 8 or self.ell <= 4:
            raise ValueError("need k > 8 and ell > 4")
        if self.zeta is None:
            t = self.horizon
            z = ceil_sqrt_real(t * math.log(t)) if t > 1 else 1
            object.__setattr__(self, "zeta", max(1, z))
        elif self.zeta < 1:
            raise ValueError("zeta must be >= 1")

    @property
    def period(self) -> int:
        return 2 * (self.k + self.ell) * self.zeta + 1


def ceil_sqrt_real(x: float) -> int:
    r = math.ceil(math.sqrt(x))
    # guard float error around perfect squares
    while (r - 1) ** 2 >= x and r > 0:
        r -= 1
    while r * r < x:
        r += 1
    return r


class RemovalStrategy:
    name = "abstract"

    def removes(self, cars, frm, to, time) -> np.ndarray:
        raise NotImplementedError


class BarrierRemoval(RemovalStrategy):
    name = "barrier"

    def __init__(self, params: BarrierParams):
        self.params = params

    def removes(self, cars, frm, to, time):
        frm = np.asarray(frm)
        to = np.asarray(to)
        if np.any(np.abs(to - frm) != 1):
            raise ValueError("barrier removal needs unit steps")
        return np.minimum(frm, to) % self.params.period == 0


def barrier_removal_decide(params: BarrierParams, frm: int, to: int) -> bool:
    if abs(to - frm) != 1:
        raise ValueError(f"non-unit step {frm} -> {to}")
    return min(frm, to) % params.period == 0


# ---------------------------------------------------------------------------


class AxiomChecked(ParkingStrategy):
    """Wraps a strategy and asserts the parking-strategy axioms on every parking event."""

    def __init__(self, inner: ParkingStrategy):
        self.inner = inner
        self.name = inner.name
        self.parked_cars: set[int] = set()
        self.filled: set[int] = set()
        self.events = 0

    def permits(self, cars, positions, time):
        return self.inner.permits(cars, positions, time)

    def record(self, cars, spaces, positions, time, config: InitialConfig) -> None:
        for v, w, x in zip(np.asarray(cars).tolist(), np.asarray(spaces).tolist(),
                           np.asarray(positions).tolist()):
            if v in self.parked_cars:
                raise AxiomViolation(f"car {v} parked twice (t={time})")
            if w in self.filled:
                raise AxiomViolation(f"space {w} filled twice (t={time})")
            if not config.car_at(v):
                raise AxiomViolation(f"non-existent car {v} parked (t={time})")
            if not (config.lo <= w <= config.hi) or config.car_at(w):
                raise AxiomViolation(f"car {v} parked on non-space {w} (t={time})")
            if x != w:
                raise AxiomViolation(f"car {v} at {x} parked at {w} (t={time})")
            self.parked_cars.add(v)
            self.filled.add(w)
            self.events += 1


def make_strategy(name: str, config: InitialConfig | None = None, horizon: int | None = None,
                  src=None) -> ParkingStrategy:
    if name == "greedy":
        return Greedy()
    if name == "never":
        return NeverPark()
    if name == "t":
        if config is None or horizon is None:
            raise ValueError("strategy t needs a config and a horizon")
        return TStrategy(build_assignment_plan(config, horizon, src))
    raise ValueError(f"unknown strategy {name!r}")


def make_removal(name: str, horizon: int | None = None, k: int = 9, ell: int = 5,
                 zeta: int | None = None) -> RemovalStrategy | None:
    if name in (None, "none"):
        return None
    if name == "barrier":
        return BarrierRemoval(BarrierParams(horizon, k, ell, zeta))
    raise ValueError(f"unknown removal {name!r}")
