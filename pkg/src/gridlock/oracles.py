"""Independent brute-force oracles for the closed forms.

These use exact rational linear algebra, time-stepped probability mass
propagation, exhaustive path enumeration and literal lockstep simulation.
None of them reuses the closed forms they are meant to check.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm; works with Fractions for exact answers."""
    n = len(diag)
    c = [None] * n
    d = [None] * n
    c[0] = upper[0] / diag[0] if n > 1 else 0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m if i < n - 1 else 0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
    x = [None] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _interior_system(a: int, b: int, source, boundary):
    """Solve ``f(x) = source(x) + (f(x-1) + f(x+1))/2`` on ``-a < x < b``."""
    xs = list(range(-a + 1, b))
    half = Fraction(1, 2)
    n = len(xs)
    lower = [-half] * n
    upper = [-half] * n
    diag = [Fraction(1)] * n
    rhs = [Fraction(source(x)) for x in xs]
    rhs[0] += half * boundary[0]
    rhs[-1] += half * boundary[1]
    return dict(zip(xs, solve_tridiagonal(lower, diag, upper, rhs)))


def ruin_oracle(a: int, b: int) -> Fraction:
    """``P[hit b before -a]`` from the harmonic linear system."""
    return _interior_system(a, b, lambda x: 0, (Fraction(0), Fraction(1)))[0]


def conditional_hit_oracle(a: int, b: int) -> Fraction:
    """``E[H_b | H_b < H_-a]`` via ``g = h + (g(x-1) + g(x+1))/2`` with ``g = E[H; A]``."""
    h = _interior_system(a, b, lambda x: 0, (Fraction(0), Fraction(1)))
    h[-a], h[b] = Fraction(0), Fraction(1)
    g = _interior_system(a, b, lambda x: h[x], (Fraction(0), Fraction(0)))
    return g[0] / h[0]


def exit_time_oracle(a: int) -> Fraction:
    return _interior_system(a, a, lambda x: 1, (Fraction(0), Fraction(0)))[0]


def hitting_dp(a: int, b: int, tol: float = 1e-15, max_steps: int = 10**7):
    """Propagate the walk's mass step by step until at most ``tol`` remains unabsorbed.

    Returns ``(P[H_b < H_-a], E[H_b | H_b < H_-a], E[H_-a ^ H_b], leftover)``.
    """
    size = a + b + 1
    mass = np.zeros(size, dtype=np.longdouble)
    mass[a] = 1
    p_up = e_up = e_exit = np.longdouble(0)
    s = 0
    while mass.sum() > tol and s < max_steps:
        s += 1
        nxt = np.zeros_like(mass)
        nxt[1:] += mass[:-1] / 2
        nxt[:-1] += mass[1:] / 2
        hit_lo, hit_hi = nxt[0], nxt[-1]
        p_up += hit_hi
        e_up += s * hit_hi
        e_exit += s * (hit_lo + hit_hi)
        nxt[0] = nxt[-1] = 0
        mass = nxt
    return float(p_up), float(e_up / p_up), float(e_exit), float(mass.sum())


def max_pmf_enumeration(n: int) -> list[Fraction]:
    """Law of ``max_{0<=s<=n} S_s`` by enumerating all ``2^n`` paths."""
    if n == 0:
        return [Fraction(1)]
    paths = np.arange(2**n, dtype=np.int64)
    bits = ((paths[:, None] >> np.arange(n)) & 1).astype(np.int8) * 2 - 1
    walk = np.cumsum(bits, axis=1)
    top = np.maximum(walk.max(axis=1), 0)
    counts = np.bincount(top, minlength=n + 1)
    return [Fraction(int(c), 2**n) for c in counts]


def stationary_oracle(P: np.ndarray) -> np.ndarray:
    """Stationary vector from the left null space of ``P - I``."""
    n = len(P)
    A = np.vstack([(P - np.eye(n)).T, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1
    return np.linalg.lstsq(A, rhs, rcond=None)[0]


def lockstep_drive(tags, horizon: int, direction: int) -> int:
    """Literal simulation: all cars step ``direction`` each tick and park greedily.

    ``tags`` lists a block left to right; returns how many cars leave the block
    within ``horizon`` ticks.
    """
    tags = list(bool(c) for c in tags)
    n = len(tags)
    free = [not c for c in tags]
    cars = [j for j in range(n) if tags[j]]
    left = 0
    for _ in range(horizon):
        moved = []
        arrivals: dict[int, list[int]] = {}
        for x in cars:
            y = x + direction
            if y < 0 or y >= n:
                left += 1
                continue
            arrivals.setdefault(y, []).append(y)
            moved.append(y)
        nxt = []
        for y in moved:
            if free[y]:
                free[y] = False  # cars never share a cell in lockstep driving
            else:
                nxt.append(y)
        cars = nxt
        if not cars:
            break
    return left


def drive_to_end(tags) -> int:
    """Cars from a block that drive off its right end with unlimited time."""
    return lockstep_drive(tags, len(tags) + 1, +1)
