"""Space-based parking process: step directions are stacked at vertices.

A car that stands on ``v`` without parking takes the next unused direction
of ``v``. When several cars share ``v`` they take consecutive directions in
increasing order of their tie-break values. The tie stream here is the
space model's own and is never shared with the car model's.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .car_engine import (ACTIVE, PARKED, CarProcessState, RunMetrics, StateError,
                         collect_metrics, first_per_group, lazy_ties, record_trace, _free_space)
from .lattice import Lattice
from .rng import SYMMETRIC, InitialConfig, StepDistribution
from .strategies import ParkingStrategy


class DirectionStack:
    """Per-vertex cursors into the direction sequences, materialized on demand."""

    def __init__(self, src, mu: StepDistribution = SYMMETRIC):
        self.src = src
        self.mu = mu
        self.cursor: dict[int, int] = {}

    def consumed(self, v: int) -> int:
        return self.cursor.get(v, 0)

    def take(self, vertices: np.ndarray, ranks: np.ndarray) -> np.ndarray:
        """Direction number ``cursor(v) + rank + 1`` for each entry; then advance cursors.

        ``ranks`` within each vertex must be ``0..r-1``.
        """
        if len(vertices) == 0:
            return np.zeros(0, dtype=np.int64)
        base = np.array([self.cursor.get(v, 0) for v in vertices.tolist()], dtype=np.int64)
        out = self.src.directions(vertices, base + ranks + 1, self.mu)
        uniq, counts = np.unique(vertices, return_counts=True)
        for v, c in zip(uniq.tolist(), counts.tolist()):
            before = self.cursor.get(v, 0)
            after = before + c
            if after < before:
                raise StateError(f"cursor regression at vertex {v}")
            self.cursor[v] = after
        return out


@dataclass
class SpaceProcessState:
    """Car positions, occupancy and visits (shared layout with the car model) plus stacks."""

    core: CarProcessState
    stacks: DirectionStack

    @property
    def time(self) -> int:
        return self.core.time

    def check(self) -> None:
        self.core.check()


def _ranks(groups: np.ndarray, order_key: np.ndarray) -> np.ndarray:
    """Rank of each entry within its group by increasing ``order_key``."""
    order = np.lexsort((order_key, groups))
    g = groups[order]
    start = np.ones(len(g), dtype=bool)
    start[1:] = g[1:] != g[:-1]
    first = np.maximum.accumulate(np.where(start, np.arange(len(g)), 0))
    ranks = np.empty(len(g), dtype=np.int64)
    ranks[order] = np.arange(len(g)) - first
    return ranks


def initial_space_state(config: InitialConfig, src, lattice: Lattice | None = None,
                        horizon: int = 0, mu: StepDistribution = SYMMETRIC) -> SpaceProcessState:
    core = CarProcessState.initial(config, lattice, horizon, mu)
    return SpaceProcessState(core, DirectionStack(src, mu))


def step_space_model(state: SpaceProcessState, strategy: ParkingStrategy, src,
                     trace: list | None = None) -> SpaceProcessState:
    st = state.core
    s = st.time + 1
    act = np.flatnonzero(st.status == ACTIVE)
    if len(act):
        frm = st.pos[act]
        # co-located cars take consecutive directions in order of their current tie values
        order_u = lazy_ties(frm, st.cars[act], lambda c: src.space_tie_breaks(c, s - 1))
        to = st.lattice.move(frm, state.stacks.take(frm, _ranks(frm, order_u)))
        st.pos[act] = to
        st.ensure_vertex(int(to.min()), int(to.max()))
        np.add.at(st.visits, to - st.vlo, 1)
        cand = act[_free_space(st, to)]
        if len(cand):
            ok = np.asarray(strategy.permits(st.cars[cand], st.pos[cand], s), dtype=bool)
            cand = cand[ok]
            if len(cand):
                cu = lazy_ties(st.pos[cand], st.cars[cand], lambda c: src.space_tie_breaks(c, s))
                win = cand[first_per_group(st.pos[cand], cu)]
                st.status[win] = PARKED
                st.event_time[win] = s
                st.filler[st.pos[win] - st.config.lo] = win
                hook = getattr(strategy, "record", None)
                if hook is not None:
                    hook(st.cars[win], st.pos[win], st.pos[win], s, st.config)
    st.time = s
    if trace is not None:
        record_trace(st, trace)
    return state


def run_space_model(config: InitialConfig, strategy: ParkingStrategy, horizon: int, src,
                    lattice: Lattice | None = None, mu: StepDistribution = SYMMETRIC,
                    core: tuple[int, int] | None = None, trace: list | None = None,
                    observer=None) -> RunMetrics:
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    state = initial_space_state(config, src, lattice, horizon, mu)
    if trace is not None:
        record_trace(state.core, trace)
    if observer is not None:
        observer(state)
    active = [len(state.core.cars)]
    for _ in range(horizon):
        step_space_model(state, strategy, src, trace)
        active.append(int((state.core.status == ACTIVE).sum()))
        if observer is not None:
            observer(state)
    return collect_metrics(state.core, "space", getattr(src, "master_seed", None), False,
                           active, core)
