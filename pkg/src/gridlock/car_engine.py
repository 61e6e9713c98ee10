"""Car-based parking process: every car carries its own random walk."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .lattice import Cycle, Lattice, Line, Reflecting
from .rng import SYMMETRIC, InitialConfig, StepDistribution
from .strategies import ParkingStrategy, RemovalStrategy

ACTIVE, PARKED, REMOVED = 0, 1, 2
STATUS_NAMES = ("Active", "Parked", "Removed")


class StateError(AssertionError):
    """The process state broke one of its bookkeeping invariants."""


class ExactnessWarning(UserWarning):
    pass


def vertex_range(config: InitialConfig, lattice: Lattice, horizon: int,
                 mu: StepDistribution) -> tuple[int, int]:
    """Every vertex a car can occupy up to ``horizon``."""
    if isinstance(lattice, Cycle):
        return 0, lattice.n - 1
    if isinstance(lattice, Reflecting):
        return min(lattice.lo, config.lo), max(lattice.hi, config.hi)
    reach = horizon * max(abs(x) for x in mu.support)
    return config.lo - reach, config.hi + reach


def check_window(config: InitialConfig, lattice: Lattice) -> None:
    if isinstance(lattice, Cycle) and (config.lo != 0 or config.hi != lattice.n - 1):
        raise ValueError("a cycle config must cover exactly 0..n-1")


@dataclass
class CarProcessState:
    """Snapshot of the car-based process; ``cars[i]`` is the starting vertex of car ``i``."""

    config: InitialConfig
    lattice: Lattice
    time: int
    cars: np.ndarray
    pos: np.ndarray
    status: np.ndarray
    event_time: np.ndarray
    filler: np.ndarray  # per window cell: index of the parked car, -1 when free
    vlo: int
    visits: np.ndarray

    @classmethod
    def initial(cls, config: InitialConfig, lattice: Lattice | None = None, horizon: int = 0,
                mu: StepDistribution = SYMMETRIC) -> "CarProcessState":
        lattice = lattice or Line()
        check_window(config, lattice)
        vlo, vhi = vertex_range(config, lattice, horizon, mu)
        cars = config.cars.copy()
        visits = np.zeros(vhi - vlo + 1, dtype=np.int64)
        visits[cars - vlo] = 1
        n = len(cars)
        return cls(config, lattice, 0, cars, cars.copy(), np.zeros(n, dtype=np.int8),
                   np.zeros(n, dtype=np.int64), np.full(config.size, -1, dtype=np.int64),
                   vlo, visits)

    def ensure_vertex(self, lo: int, hi: int) -> None:
        """Grow the visit array so that ``[lo, hi]`` is covered."""
        vhi = self.vlo + len(self.visits) - 1
        if lo >= self.vlo and hi <= vhi:
            return
        nlo, nhi = min(lo, self.vlo), max(hi, vhi)
        grown = np.zeros(nhi - nlo + 1, dtype=np.int64)
        grown[self.vlo - nlo:self.vlo - nlo + len(self.visits)] = self.visits
        self.vlo, self.visits = nlo, grown

    def visits_at(self, v) -> np.ndarray:
        v = np.asarray(v)
        idx = v - self.vlo
        ok = (idx >= 0) & (idx < len(self.visits))
        out = np.zeros(v.shape, dtype=np.int64)
        out[ok] = self.visits[idx[ok]]
        return out

    @property
    def active(self) -> np.ndarray:
        return self.status == ACTIVE

    def unparked_at(self, w: int) -> set[int]:
        """Starting vertices of the active cars standing on ``w``."""
        sel = self.active & (self.pos == w)
        return set(self.cars[sel].tolist())

    def check(self) -> None:
        parked = np.flatnonzero(self.status == PARKED)
        filled = np.flatnonzero(self.filler >= 0)
        if len(parked) != len(filled):
            raise StateError("parked cars and filled spaces disagree in number")
        if np.any(self.config.is_car[filled]):
            raise StateError("a car cell is marked filled")
        for cell in filled:
            i = self.filler[cell]
            if self.status[i] != PARKED or self.pos[i] != cell + self.config.lo:
                raise StateError(f"space {cell + self.config.lo} and car {self.cars[i]} disagree")
        if np.any(self.event_time[self.status == ACTIVE] != 0):
            raise StateError("active car with a recorded event time")


def _free_space(state: CarProcessState, x: np.ndarray) -> np.ndarray:
    cfg = state.config
    inside = (x >= cfg.lo) & (x <= cfg.hi)
    cell = np.where(inside, x - cfg.lo, 0)
    return inside & ~cfg.is_car[cell] & (state.filler[cell] < 0)


def first_per_group(keys: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Indices of the smallest ``values`` entry within each distinct ``keys`` group."""
    order = np.lexsort((values, keys))
    k = keys[order]
    head = np.ones(len(k), dtype=bool)
    head[1:] = k[1:] != k[:-1]
    return order[head]


def shared(keys: np.ndarray) -> np.ndarray:
    """Mask of entries whose key occurs more than once."""
    _, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
    return counts[inv] > 1


def lazy_ties(keys: np.ndarray, ids: np.ndarray, draw) -> np.ndarray:
    """Tie values, drawn only where a key is shared; singletons get 0.

    Values are entity-addressed, so skipping uncontested draws changes nothing.
    """
    u = np.zeros(len(keys))
    multi = shared(keys)
    if multi.any():
        u[multi] = draw(ids[multi])
    return u


def step_car_model(state: CarProcessState, strategy: ParkingStrategy,
                   removal: RemovalStrategy | None, src, mu: StepDistribution = SYMMETRIC,
                   trace: list | None = None) -> CarProcessState:
    """Advance the process one step in place and return it."""
    s = state.time + 1
    act = np.flatnonzero(state.status == ACTIVE)
    if len(act):
        ids = state.cars[act]
        frm = state.pos[act]
        inc = src.walk_increments(ids, s, mu)
        to = state.lattice.move(frm, inc)
        if removal is not None:
            gone = np.asarray(removal.removes(ids, frm, frm + inc, s), dtype=bool)
            if gone.any():
                state.status[act[gone]] = REMOVED
                state.event_time[act[gone]] = s
                act, to = act[~gone], to[~gone]
        state.pos[act] = to
        if len(to):
            state.ensure_vertex(int(to.min()), int(to.max()))
            np.add.at(state.visits, to - state.vlo, 1)
        cand = act[_free_space(state, to)]
        if len(cand):
            ok = np.asarray(strategy.permits(state.cars[cand], state.pos[cand], s), dtype=bool)
            cand = cand[ok]
        if len(cand):
            u = lazy_ties(state.pos[cand], state.cars[cand], lambda c: src.tie_breaks(c, s))
            win = cand[first_per_group(state.pos[cand], u)]
            state.status[win] = PARKED
            state.event_time[win] = s
            state.filler[state.pos[win] - state.config.lo] = win
            hook = getattr(strategy, "record", None)
            if hook is not None:
                hook(state.cars[win], state.pos[win], state.pos[win], s, state.config)
    state.time = s
    if trace is not None:
        record_trace(state, trace)
    return state


def record_trace(state: CarProcessState, trace: list) -> None:
    for c, x, st in zip(state.cars.tolist(), state.pos.tolist(), state.status.tolist()):
        trace.append((state.time, c, x, STATUS_NAMES[st]))


@dataclass
class RunMetrics:
    """Per-vertex capped parking times and visit counts over the config window."""

    engine: str
    seed: int | None
    horizon: int
    lo: int
    hi: int
    closed: bool
    removal_used: bool
    is_car: np.ndarray = field(repr=False)
    tau_capped: np.ndarray = field(repr=False)
    visits: np.ndarray = field(repr=False)
    visits_total: int
    parked: int
    removed: int
    active: int
    active_by_time: np.ndarray = field(repr=False)
    exact: np.ndarray = field(repr=False)
    warnings: list = field(default_factory=list)

    @property
    def cars(self) -> int:
        return int(self.is_car.sum())

    def at(self, v: int) -> tuple[int, int]:
        """``(tau_capped, visits)`` at vertex ``v``."""
        i = v - self.lo
        return int(self.tau_capped[i]), int(self.visits[i])

    def totals(self) -> "MetricTotals":
        return MetricTotals(1, self.cars, int(self.tau_capped.sum()), self.visits_total,
                            self.parked, self.removed, self.active)

    def to_csv(self, path: str | Path, header: str | None = None) -> None:
        tagged = self.engine != "car"
        with open(path, "w", newline="") as fh:
            fh.write(f"# master_seed={self.seed} engine={self.engine} horizon={self.horizon}\n")
            if header:
                fh.write(header)
            w = csv.writer(fh)
            w.writerow((["engine"] if tagged else []) + ["vertex", "tau_capped", "visits"])
            for v, tc, vis in zip(range(self.lo, self.hi + 1), self.tau_capped, self.visits):
                w.writerow(([self.engine] if tagged else []) + [v, int(tc), int(vis)])


@dataclass(frozen=True)
class MetricTotals:
    """Order-independent reduction of many runs (sums and counts only)."""

    runs: int = 0
    cars: int = 0
    tau_sum: int = 0
    visit_sum: int = 0
    parked: int = 0
    removed: int = 0
    active: int = 0

    def __add__(self, other: "MetricTotals") -> "MetricTotals":
        return MetricTotals(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def as_tuple(self) -> tuple:
        return (self.runs, self.cars, self.tau_sum, self.visit_sum, self.parked,
                self.removed, self.active)


def collect_metrics(state: CarProcessState, engine: str, seed, removal_used: bool,
                    active_by_time, core: tuple[int, int] | None) -> RunMetrics:
    cfg, t = state.config, state.time
    tau = np.zeros(cfg.size, dtype=np.int64)
    cells = state.cars - cfg.lo
    tau[cells] = np.where(state.status == ACTIVE, t, np.minimum(state.event_time, t))
    dist = state.lattice.distance_to_boundary(cfg.positions, cfg.lo, cfg.hi)
    exact = dist >= 2 * t
    if isinstance(state.lattice, Cycle):
        exact = np.full(cfg.size, state.lattice.n >= 4 * t + 1)
    notes = []
    if core is not None:
        a, b = core
        sel = (cfg.positions >= a) & (cfg.positions <= b)
        if not np.all(exact[sel]):
            msg = f"horizon {t} exceeds the exactness radius for core [{a}, {b}]"
            notes.append(msg)
            warnings.warn(msg, ExactnessWarning, stacklevel=3)
    return RunMetrics(engine, seed, t, cfg.lo, cfg.hi, bool(state.lattice.closed), removal_used,
                      cfg.is_car.copy(), tau, state.visits_at(cfg.positions),
                      int(state.visits.sum()), int((state.status == PARKED).sum()),
                      int((state.status == REMOVED).sum()), int((state.status == ACTIVE).sum()),
                      np.asarray(active_by_time, dtype=np.int64), exact, notes)


def run_car_model(config: InitialConfig, strategy: ParkingStrategy,
                  removal: RemovalStrategy | None, horizon: int, src,
                  lattice: Lattice | None = None, mu: StepDistribution = SYMMETRIC,
                  core: tuple[int, int] | None = None, trace: list | None = None,
                  observer: Callable[[CarProcessState], None] | None = None) -> RunMetrics:
    """Run ``horizon`` steps and return per-vertex metrics.

    ``observer`` sees the state after every step (time 0 included). ``trace``
    collects ``(time, car, position, status)`` rows.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    state = CarProcessState.initial(config, lattice, horizon, mu)
    if trace is not None:
        record_trace(state, trace)
    if observer is not None:
        observer(state)
    active = [len(state.cars)]
    for _ in range(horizon):
        step_car_model(state, strategy, removal, src, mu, trace)
        active.append(int((state.status == ACTIVE).sum()))
        if observer is not None:
            observer(state)
    return collect_metrics(state, "car", getattr(src, "master_seed", None), removal is not None,
                           active, core)


def mass_transport_check(metrics: RunMetrics, config: InitialConfig) -> int:
    """Total visits minus total capped parking time minus the number of cars."""
    if not metrics.closed:
        raise ValueError("mass transport needs a run on a closed cycle")
    if metrics.removal_used:
        raise ValueError("mass transport does not hold with car removal")
    cars = config.is_car
    return int(metrics.visits_total - metrics.tau_capped[cars].sum() - cars.sum())


def write_trace(trace: list, path: str | Path, seed=None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# master_seed={seed}\n")
        w = csv.writer(fh)
        w.writerow(["time", "car_id", "position", "status"])
        w.writerows(trace)
