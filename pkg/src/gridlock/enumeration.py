"""Exhaustive enumeration of every random input of a small run, with exact weights.

``ChoiceSource`` answers the same queries as :class:`gridlock.rng.RandomSource`
but each fresh query becomes a branch point. A depth-first odometer walks
every branch sequence, so a deterministic function of the source induces an
exact distribution over its outputs, weighted by products of Fractions.

Tie-break values are continuous in the model, so only their relative order
matters. The first query of ``(car, s)`` inserts the car into a uniformly
chosen slot among the values already drawn at time ``s``. That produces a
uniformly random order of all queried cars, and the stored value sits strictly
between its neighbours so earlier answers stay valid.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Callable, Hashable

import numpy as np

from .car_engine import mass_transport_check, run_car_model
from .lattice import Cycle
from .rng import SYMMETRIC, InitialConfig, StepDistribution
from .space_engine import run_space_model
from .strategies import Greedy


class ChoiceSource:
    master_seed = None

    def __init__(self, prefix: list[int], p: Fraction = Fraction(1, 2)):
        self.prefix = list(prefix)
        self.p = Fraction(p)
        self.choices: list[int] = []
        self.arities: list[int] = []
        self.weight = Fraction(1)
        self._cache: dict[tuple, object] = {}
        self._ties: dict[tuple, list[float]] = defaultdict(list)

    def _choose(self, weights: list[Fraction]) -> int:
        live = [i for i, w in enumerate(weights) if w > 0]
        k = len(self.choices)
        c = self.prefix[k] if k < len(self.prefix) else 0
        self.choices.append(c)
        self.arities.append(len(live))
        self.weight *= weights[live[c]]
        return live[c]

    def _memo(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @staticmethod
    def _mu_weights(mu: StepDistribution) -> list[Fraction]:
        w = [Fraction(x).limit_denominator(10**9) for x in mu.weights]
        if sum(w) != 1:
            raise ValueError("step weights must be exact rationals")
        return w

    def car_cells(self, positions) -> np.ndarray:
        p = self.p
        out = []
        for x in np.atleast_1d(positions).tolist():
            car = self._memo(("cell", x), lambda: self._choose([p, 1 - p]) == 0)
            out.append(float(p) / 2 if car else (1 + float(p)) / 2)
        return np.array(out)

    def _steps(self, kind, keys, mu: StepDistribution) -> np.ndarray:
        w = self._mu_weights(mu)
        return np.array([mu.support[self._memo((kind,) + key, lambda: self._choose(w))]
                         for key in keys], dtype=np.int64)

    def walk_increments(self, cars, s: int, mu: StepDistribution = SYMMETRIC) -> np.ndarray:
        return self._steps("walk", [(c, s) for c in np.atleast_1d(cars).tolist()], mu)

    def directions(self, vertices, indices, mu: StepDistribution = SYMMETRIC) -> np.ndarray:
        keys = zip(np.atleast_1d(vertices).tolist(), np.atleast_1d(indices).tolist())
        return self._steps("dir", list(keys), mu)

    def _tie(self, stream: str, car: int, s: int) -> float:
        key = (stream, car, s)
        if key in self._cache:
            return self._cache[key]
        vals = self._ties[(stream, s)]
        n = len(vals)
        slot = self._choose([Fraction(1, n + 1)] * (n + 1))
        lo = vals[slot - 1] if slot > 0 else 0.0
        hi = vals[slot] if slot < n else 1.0
        v = (lo + hi) / 2
        vals.insert(slot, v)
        self._cache[key] = v
        return v

    def tie_breaks(self, cars, s: int) -> np.ndarray:
        return np.array([self._tie("car", c, s) for c in np.atleast_1d(cars).tolist()])

    def space_tie_breaks(self, cars, s: int) -> np.ndarray:
        return np.array([self._tie("space", c, s) for c in np.atleast_1d(cars).tolist()])

    def shift(self, zeta: int) -> int:
        return self._memo(("shift", zeta), lambda: self._choose([Fraction(1, zeta)] * zeta))


def enumerate_outcomes(fn: Callable[[ChoiceSource], Hashable], p: Fraction = Fraction(1, 2),
                       limit: int = 10**7) -> tuple[dict, int]:
    """Exact law of ``fn(source)`` over all branch sequences; also returns the leaf count."""
    dist: dict = defaultdict(Fraction)
    prefix: list[int] = []
    leaves = 0
    while True:
        src = ChoiceSource(prefix, p)
        out = fn(src)
        leaves += 1
        if leaves > limit:
            raise RuntimeError("enumeration exceeded its leaf budget")
        if src.weight:
            dist[out] += src.weight
        i = len(src.choices) - 1
        while i >= 0 and src.choices[i] == src.arities[i] - 1:
            i -= 1
        if i < 0:
            break
        prefix = src.choices[:i] + [src.choices[i] + 1]
    total = sum(dist.values())
    if total != 1:
        raise AssertionError(f"enumerated weights sum to {total}")
    return dict(dist), leaves


def _sample_cycle_config(n: int, src: ChoiceSource) -> InitialConfig:
    u = src.car_cells(np.arange(n))
    return InitialConfig(0, n - 1, u < float(src.p), float(src.p))


def _outcome(config: InitialConfig, trace: list) -> tuple:
    return (tuple(config.is_car.tolist()), tuple(trace))


def car_outcome(n: int, horizon: int, strategy_factory=Greedy) -> Callable:
    """Placement plus full labelled trajectory of the car engine on ``C_n``."""
    def fn(src):
        cfg = _sample_cycle_config(n, src)
        trace: list = []
        run_car_model(cfg, strategy_factory(), None, horizon, src, lattice=Cycle(n), trace=trace)
        return _outcome(cfg, trace)
    return fn


def space_outcome(n: int, horizon: int, strategy_factory=Greedy) -> Callable:
    def fn(src):
        cfg = _sample_cycle_config(n, src)
        trace: list = []
        run_space_model(cfg, strategy_factory(), horizon, src, lattice=Cycle(n), trace=trace)
        return _outcome(cfg, trace)
    return fn


def occupancy_projection(dist: dict) -> dict:
    """Marginal law of the final (placement, filled-by) occupancy."""
    out: dict = defaultdict(Fraction)
    for (tags, trace), w in dist.items():
        last = max((r[0] for r in trace), default=0)
        occ = tuple(sorted((r[2], r[1]) for r in trace if r[0] == last and r[3] == "Parked"))
        out[(tags, occ)] += w
    return dict(out)


def compare_engines(n: int, horizon: int, p: Fraction = Fraction(1, 2)) -> dict:
    """Exact outcome laws of both engines on ``C_n`` and whether they coincide."""
    car, car_leaves = enumerate_outcomes(car_outcome(n, horizon), p)
    space, space_leaves = enumerate_outcomes(space_outcome(n, horizon), p)
    return {"n": n, "horizon": horizon, "car": car, "space": space,
            "car_leaves": car_leaves, "space_leaves": space_leaves,
            "identical": car == space,
            "occupancy_identical": occupancy_projection(car) == occupancy_projection(space)}


def mass_transport_leaves(n: int, horizon: int, p: Fraction = Fraction(1, 2)) -> tuple[int, int]:
    """Count leaves of the car engine on ``C_n`` and how many have a nonzero residual."""
    bad = 0

    def fn(src):
        nonlocal bad
        cfg = _sample_cycle_config(n, src)
        m = run_car_model(cfg, Greedy(), None, horizon, src, lattice=Cycle(n))
        r = mass_transport_check(m, cfg)
        bad += r != 0
        return r
    dist, leaves = enumerate_outcomes(fn, p)
    return leaves, bad
