"""Label-preserving swap process on three adjacent intervals.

Cars are labelled by where they start: left block ``L``, middle block ``M``
or right block ``R``. After the raw walk move, three reordering passes
(L/R, then L/M, then M/R) exchange positions so that from left to right the
active cars always read L, M, R. Cars leaving the study interval become
inactive. The passes permute identities over a fixed multiset of positions,
so ignoring labels this is barrier removal on one period.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .car_engine import first_per_group
from .rng import InitialConfig, sample_initial_config
from .strategies import BarrierParams

LEFT, MIDDLE, RIGHT = 0, 1, 2
# parking priority at a shared space: L first, then R, then M
_PRIORITY = np.array([0, 2, 1])


class SwapInvariantError(AssertionError):
    pass


def reorder_pass(pos: np.ndarray, a: np.ndarray, b: np.ndarray,
                 start: np.ndarray | None = None) -> np.ndarray:
    """Move A-cars left of B-cars by permuting the positions of the violators.

    A-violators sit strictly right of some B-car, B-violators strictly left of
    some A-car. The pooled violator positions are sorted; the lowest go to the
    A-violators, the highest to the B-violators, each group in its own
    increasing order. Equal positions are ordered by starting vertex.
    """
    out = np.array(pos, copy=True)
    if not a.any() or not b.any():
        return out
    start = np.arange(len(pos)) if start is None else start
    va = np.flatnonzero(a & (out > out[b].min()))
    vb = np.flatnonzero(b & (out < out[a].max()))
    if len(va) == 0:
        return out
    pool = np.sort(np.concatenate([out[va], out[vb]]))
    va = va[np.lexsort((start[va], out[va]))]
    vb = vb[np.lexsort((start[vb], out[vb]))]
    out[va] = pool[:len(va)]
    out[vb] = pool[len(va):]
    return out


@dataclass(frozen=True)
class Blocks:
    """``L = [-(k+ell)z, -kz)``, ``M = [-kz, kz]``, ``R = (kz, (k+ell)z]``."""

    k: int
    ell: int
    zeta: int

    @property
    def lo(self) -> int:
        return -(self.k + self.ell) * self.zeta

    @property
    def hi(self) -> int:
        return (self.k + self.ell) * self.zeta

    @property
    def m_lo(self) -> int:
        return -self.k * self.zeta

    @property
    def m_hi(self) -> int:
        return self.k * self.zeta

    def label(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        return np.where(x < self.m_lo, LEFT, np.where(x > self.m_hi, RIGHT, MIDDLE))


@dataclass
class SwapState:
    blocks: Blocks
    config: InitialConfig
    time: int
    start: np.ndarray
    label: np.ndarray
    pos: np.ndarray
    filled: np.ndarray
    parked: int = 0
    left_inactive: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))
    right_inactive: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))
    crossed: bool = False

    @classmethod
    def initial(cls, blocks: Blocks, config: InitialConfig) -> "SwapState":
        if (config.lo, config.hi) != (blocks.lo, blocks.hi):
            raise ValueError("config must cover exactly L, M and R")
        cars = config.cars
        return cls(blocks, config, 0, cars.copy(), blocks.label(cars), cars.copy(),
                   config.is_car.copy())

    @property
    def active(self) -> int:
        return len(self.start)


def check_order(pos: np.ndarray, label: np.ndarray) -> None:
    for a, b in ((LEFT, MIDDLE), (LEFT, RIGHT), (MIDDLE, RIGHT)):
        pa, pb = pos[label == a], pos[label == b]
        if len(pa) and len(pb) and pa.max() > pb.min():
            raise SwapInvariantError(f"label {a} car right of label {b} car")


def step_modified(state: SwapState, src, check: bool = True) -> SwapState:
    """One step: raw move, three reordering passes, inactivation, parking."""
    s = state.time + 1
    bl, lab, st = state.blocks, state.label, state.start
    z1 = state.pos + src.walk_increments(st, s)
    z2 = reorder_pass(z1, lab == LEFT, lab == RIGHT, st)
    z3 = reorder_pass(z2, lab == LEFT, lab == MIDDLE, st)
    y = reorder_pass(z3, lab == MIDDLE, lab == RIGHT, st)
    if check:
        base = np.sort(z1)
        for z in (z2, z3, y):
            if not np.array_equal(np.sort(z), base):
                raise SwapInvariantError(f"occupancy multiset changed at step {s}")
        if np.any(np.abs(y - state.pos) > 1):
            raise SwapInvariantError(f"car moved more than one cell at step {s}")
        check_order(y, lab)
    m_lo, m_hi = bl.m_lo, bl.m_hi
    if np.any((lab == LEFT) & (y > m_hi)) or np.any((lab == RIGHT) & (y < m_lo)):
        state.crossed = True
    out_l = y < bl.lo
    out_r = y > bl.hi
    np.add.at(state.left_inactive, lab[out_l], 1)
    np.add.at(state.right_inactive, lab[out_r], 1)
    keep = ~(out_l | out_r)
    st, lab, y = st[keep], lab[keep], y[keep]
    cell = y - bl.lo
    free = ~state.filled[cell]
    cand = np.flatnonzero(free)
    gone = np.zeros(len(st), dtype=bool)
    if len(cand):
        u = src.tie_breaks(st[cand], s)
        win = cand[first_per_group(y[cand], _PRIORITY[lab[cand]] + u)]
        state.filled[cell[win]] = True
        gone[win] = True
        state.parked += len(win)
    state.start, state.label, state.pos = st[~gone], lab[~gone], y[~gone]
    state.time = s
    return state


def deterministic_drive_count(tags, horizon: int | None = None, direction: int = -1) -> int:
    """Cars that leave the block within ``horizon`` steps when every car drives one way.

    ``tags`` lists the block left to right (True = car). All cars move in
    lockstep, so a space is taken by the nearest car upstream of it; a stack
    sweep against the drive direction finds the unmatched cars.
    """
    tags = np.asarray(tags, dtype=bool)
    n = len(tags)
    order = range(n - 1, -1, -1) if direction < 0 else range(n)
    stack: list[int] = []
    for j in order:
        if tags[j]:
            stack.append(j)
        elif stack:
            stack.pop()
    if horizon is None:
        return len(stack)
    exit_time = [j + 1 if direction < 0 else n - j for j in stack]
    return sum(1 for e in exit_time if e <= horizon)


def scan_minimum(tags) -> int:
    """Minimum, including the start at 0, of the walk read right to left (car +1, space -1)."""
    steps = np.where(np.asarray(tags, dtype=bool)[::-1], 1, -1)
    return int(min(0, np.cumsum(steps).min())) if len(steps) else 0


@dataclass(frozen=True)
class ModifiedResult:
    seed: int | None
    t: int
    k: int
    ell: int
    zeta: int
    active_at_t: int
    S_L: int
    P_L: int
    S_M: int
    P_M: int
    S_R: int
    P_R: int
    D_L: int
    D_R: int
    I_L: int
    I_R: int
    m_inactive: int
    crossed: bool

    @property
    def excess(self) -> int:
        return ((self.S_M - self.P_M) + (self.S_L - self.P_L - self.D_L)
                + (self.S_R - self.P_R - self.D_R))

    @property
    def scale(self) -> float:
        return (self.t * math.log(self.t)) ** 0.25 if self.t > 1 else 0.0

    @property
    def event_A(self) -> bool:
        return self.m_inactive == 0 and not self.crossed

    @property
    def event_CM(self) -> bool:
        return self.S_M - self.P_M >= 3 * self.scale

    @property
    def event_CL(self) -> bool:
        return self.S_L - self.P_L - self.D_L >= -self.scale

    @property
    def event_CR(self) -> bool:
        return self.S_R - self.P_R - self.D_R >= -self.scale

    def row(self) -> list:
        return [self.seed, self.t, self.k, self.ell, self.active_at_t, self.S_M, self.P_M,
                self.D_L, self.D_R, int(self.event_A), int(self.event_CL),
                int(self.event_CM), int(self.event_CR)]


SUMMARY_HEADER = ["seed", "t", "k", "ell", "active_at_t", "S_M", "P_M", "D_L", "D_R",
                  "event_A", "event_CL", "event_CM", "event_CR"]


def run_modified(params: BarrierParams, p: float, src, check: bool = True,
                 config: InitialConfig | None = None) -> ModifiedResult:
    """Run the swap process for ``params.horizon`` steps and report the excess accounting."""
    t = params.horizon
    bl = Blocks(params.k, params.ell, params.zeta)
    if config is None:
        config = sample_initial_config((bl.lo, bl.hi), p, src)
    state = SwapState.initial(bl, config)
    for _ in range(t):
        step_modified(state, src, check)
    tags = config.is_car
    nl = bl.m_lo - bl.lo
    left, mid, right = tags[:nl], tags[nl:nl + bl.m_hi - bl.m_lo + 1], tags[nl + bl.m_hi - bl.m_lo + 1:]
    d_l = deterministic_drive_count(left, t, -1)
    d_r = deterministic_drive_count(right, t, +1)
    res = ModifiedResult(
        getattr(src, "master_seed", None), t, params.k, params.ell, params.zeta, state.active,
        int(left.sum()), int((~left).sum()), int(mid.sum()), int((~mid).sum()),
        int(right.sum()), int((~right).sum()), d_l, d_r,
        int(state.left_inactive[LEFT]), int(state.right_inactive[RIGHT]),
        int(state.left_inactive[MIDDLE] + state.right_inactive[MIDDLE]), state.crossed)
    if check:
        if res.I_L > res.D_L or res.I_R > res.D_R:
            raise SwapInvariantError(f"realized inactivations exceed drive bound: {res}")
        if res.event_A and res.active_at_t < res.excess:
            raise SwapInvariantError(f"active count below excess: {res}")
    return res


def write_summary(results, path: str | Path, header: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(header)
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for r in results:
            w.writerow(r.row())
