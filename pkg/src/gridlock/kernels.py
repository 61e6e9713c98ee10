"""Compiled kernels for replica-heavy experiments.

``ring_active_counts`` simulates the unlabelled greedy process on a cycle:
car identities do not matter for the number of active cars, so cars are kept
in a flat array and walk bits are drawn from one sequential stream.

``greedy_labelled`` is the labelled greedy process on the line with the same
entity-addressed hashing as :mod:`gridlock.rng`; it reproduces the reference
car engine bit for bit and is used where per-car values are needed quickly.
"""
from __future__ import annotations

import numba as nb
import numpy as np

from . import rng

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@nb.njit(inline="always", cache=True)
def _key(seed, kind):
    return _mix(seed + _G * np.uint64(kind + 1))


@nb.njit(inline="always", cache=True)
def _uniform(key, entity, index):
    h = _mix(key ^ _mix(np.uint64(entity) + _G))
    h = _mix(h ^ _mix(np.uint64(index) * _M2 + _M1))
    return (h >> np.uint64(11)) * _INV53


@nb.njit(cache=True)
def ring_active_counts(n, p, horizon, seed):
    """Active-car counts ``A(0..horizon)`` of greedy parking on the cycle ``C_n``."""
    state = np.uint64(seed)
    free = np.zeros(n, np.uint8)
    pos = np.empty(n, np.int64)
    m = 0
    for x in range(n):
        state += _G
        if (_mix(state) >> np.uint64(11)) * _INV53 < p:
            pos[m] = x
            m += 1
        else:
            free[x] = 1
    counts = np.empty(horizon + 1, np.int64)
    counts[0] = m
    for s in range(1, horizon + 1):
        nbits = 0
        bits = np.uint64(0)
        i = 0
        while i < m:
            if nbits == 0:
                state += _G
                bits = _mix(state)
                nbits = 64
            x = pos[i] + (1 if (bits & np.uint64(1)) else -1)
            bits >>= np.uint64(1)
            nbits -= 1
            if x < 0:
                x += n
            elif x >= n:
                x -= n
            if free[x]:
                # first arrival in processing order takes the space; identities are irrelevant
                free[x] = 0
                m -= 1
                pos[i] = pos[m]
            else:
                pos[i] = x
                i += 1
        counts[s] = m
    return counts


@nb.njit(cache=True)
def _greedy_labelled(lo, hi, p, horizon, seed, period, stop_car):
    size = hi - lo + 1
    kc = _key(seed, rng.CONFIG)
    kw = _key(seed, rng.WALK)
    kt = _key(seed, rng.TIE)
    is_car = np.zeros(size, np.bool_)
    for c in range(size):
        is_car[c] = _uniform(kc, lo + c, 0) < p
    ncar = 0
    for c in range(size):
        ncar += is_car[c]
    cars = np.empty(ncar, np.int64)
    j = 0
    for c in range(size):
        if is_car[c]:
            cars[j] = lo + c
            j += 1
    pos = cars.copy()
    tau = np.zeros(ncar, np.int64)
    status = np.zeros(ncar, np.int8)  # 0 active, 1 parked, 2 removed
    filled = is_car.copy()
    vlo = lo - horizon
    visits = np.zeros(size + 2 * horizon, np.int64)
    for i in range(ncar):
        visits[cars[i] - vlo] += 1
    best_u = np.full(size, 2.0)
    best_i = np.full(size, -1, np.int64)
    touched = np.empty(ncar, np.int64)
    act = np.arange(ncar)
    nact = ncar
    counts = np.empty(horizon + 1, np.int64)
    counts[0] = ncar
    last = 0
    for s in range(1, horizon + 1):
        nt = 0
        k = 0
        while k < nact:
            i = act[k]
            u = _uniform(kw, cars[i], s)
            frm = pos[i]
            to = frm - 1 if u < 0.5 else frm + 1
            if period > 0 and min(frm, to) % period == 0:
                status[i] = 2
                tau[i] = s
                nact -= 1
                act[k] = act[nact]
                act[nact] = i
                continue
            pos[i] = to
            visits[to - vlo] += 1
            c = to - lo
            if 0 <= c < size and not filled[c]:
                ut = _uniform(kt, cars[i], s)
                if best_i[c] < 0:
                    touched[nt] = c
                    nt += 1
                if ut < best_u[c]:
                    best_u[c] = ut
                    best_i[c] = i
            k += 1
        for q in range(nt):
            c = touched[q]
            i = best_i[c]
            status[i] = 1
            tau[i] = s
            filled[c] = True
            best_u[c] = 2.0
            best_i[c] = -1
        if nt:
            k = 0
            while k < nact:
                i = act[k]
                if status[i] != 0:
                    nact -= 1
                    act[k] = act[nact]
                    act[nact] = i
                else:
                    k += 1
        counts[s] = nact
        last = s
        if stop_car >= 0 and status[stop_car] != 0:
            break
    for i in range(ncar):
        if status[i] == 0:
            tau[i] = last
    return is_car, cars, tau, status, visits, counts[:last + 1]


def greedy_labelled(lo: int, hi: int, p: float, horizon: int, seed: int,
                    period: int = 0, stop_at: int | None = None):
    """Greedy run on the line over window ``[lo, hi]``, optionally with barrier removal.

    Returns ``(is_car, cars, tau_capped, status, visits, active_by_time)`` where
    visits cover ``[lo - horizon, hi + horizon]``. With ``stop_at`` the run ends
    as soon as the car starting there parks or is removed.
    """
    stop = -1
    if stop_at is not None:
        seed_i = seed - 2**64 if seed >= 2**63 else seed
        if rng.uniforms(seed_i, rng.CONFIG, stop_at, 0)[0] < p and lo <= stop_at <= hi:
            stop = int(np.searchsorted(
                np.flatnonzero(rng.uniforms(seed_i, rng.CONFIG, np.arange(lo, hi + 1), 0) < p),
                stop_at - lo))
    return _greedy_labelled(lo, hi, p, horizon, np.uint64(seed), period, stop)
