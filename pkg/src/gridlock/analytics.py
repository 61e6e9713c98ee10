"""Closed forms for the simple random walk, the assignment queue, excess scans and bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import InitialConfig
from .strategies import plan_scales


@dataclass(frozen=True)
class HittingQuery:
    """Walk from 0 between the barriers ``-a`` and ``b``."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise ValueError("barriers must satisfy a, b >= 1")


def gamblers_ruin_prob(q: HittingQuery) -> float:
    """Probability that the walk hits ``b`` before ``-a``."""
    return q.a / (q.a + q.b)


def conditional_hit_time(q: HittingQuery) -> float:
    """Mean time to hit ``b`` given that it is hit before ``-a``."""
    return q.b * (q.b + 2 * q.a) / 3


def expected_exit_time(a: int) -> int:
    """Mean exit time of ``(-a, a)``."""
    if a < 1:
        raise ValueError("a must be >= 1")
    return a * a


def max_walk_pmf(n: int, r: int, exact: bool = False):
    """Law of the maximum over times ``0..n`` of an ``n``-step simple walk."""
    if n < 0 or r < 0:
        raise ValueError("need n, r >= 0")
    if r > n:
        raise ValueError("the maximum of an n-step walk cannot exceed n")
    m = r if (n - r) % 2 == 0 else r + 1
    val = Fraction(math.comb(n, (n + m) // 2), 2**n) if m <= n else Fraction(0)
    return val if exact else float(val)


def max_walk_threshold(n: int, alpha: float) -> float:
    return 2 * alpha * math.sqrt(n * math.log(n))


def max_walk_tail(n: int, alpha: float) -> float:
    """Upper bound ``2 n^(-2 alpha^2)`` on the chance the maximum reaches the threshold."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 2.0 * n ** (-2.0 * alpha * alpha)


def max_walk_exact_tail(n: int, level: float) -> float:
    """Exact ``P[M_n >= level]`` from the pmf."""
    lo = max(0, math.ceil(level))
    return float(sum(max_walk_pmf(n, r, exact=True) for r in range(lo, n + 1)))


# ---------------------------------------------------------------------------
# queue chain of the assignment sweep


@dataclass(frozen=True)
class QueueChain:
    """Queue length just before the capacity check, on states ``0..nu``."""

    nu: int

    def __post_init__(self):
        if self.nu < 1:
            raise ValueError("capacity must be >= 1")

    def matrix(self, exact: bool = False):
        nu = self.nu
        half = Fraction(1, 2) if exact else 0.5
        zero = Fraction(0) if exact else 0.0
        P = [[zero] * (nu + 1) for _ in range(nu + 1)]
        P[0][0] += half
        P[0][1] += half
        for k in range(1, nu):
            P[k][k - 1] += half
            P[k][k + 1] += half
        P[nu][max(nu - 2, 0)] += half
        P[nu][nu] += half
        return P if exact else np.array(P)


def queue_chain_stationary(nu: int, exact: bool = False):
    if nu < 1:
        raise ValueError("capacity must be >= 1")
    one = Fraction(1) if exact else 1.0
    pi = [one / nu] * (nu + 1)
    pi[nu - 1] = pi[nu] = one / (2 * nu)
    if nu == 1:
        pi = [one / 2, one / 2]
    return pi if exact else np.array(pi)


def star_bound(t: int) -> float:
    """Bound on the chance a position is told never to park, capped at 1."""
    zeta, nu = plan_scales(t)
    return min(1.0, nu / zeta + 1 / (2 * nu))


# ---------------------------------------------------------------------------
# excess scans


def excess_scan(tags) -> int:
    """Cars from a half-line block that reach its right end when all cars drive right.

    ``tags`` lists ``[-t, -1]`` left to right. Queue recursion: a car joins,
    a space takes one queued car, an empty queue stays empty.
    """
    q = 0
    for c in np.asarray(tags, dtype=bool).tolist():
        q = q + 1 if c else max(q - 1, 0)
    return q


def excess_scan_batch(gen: np.random.Generator, p: float, depth: int, samples: int,
                      chunk: int = 4096) -> np.ndarray:
    """``samples`` independent scans over fresh Bernoulli(p) blocks of length ``depth``."""
    q = np.zeros(samples, dtype=np.int64)
    for a in range(0, depth, chunk):
        rows = min(chunk, depth - a)
        cars = gen.random((rows, samples)) < p
        for row in cars:
            q += np.where(row, 1, -1)
            np.maximum(q, 0, out=q)
    return q


def geom_parameter(p: float) -> float:
    """Success parameter ``(1-2p)/(1-p)`` of the limiting excess law."""
    if not 0 <= p < 0.5:
        raise ValueError("need 0 <= p < 1/2")
    return (1 - 2 * p) / (1 - p)


def geom_pmf(k, q: float) -> np.ndarray:
    k = np.asarray(k)
    return q * (1 - q) ** k


def tv_to_geometric(values: np.ndarray, q: float) -> float:
    values = np.asarray(values, dtype=np.int64)
    top = int(values.max()) if len(values) else 0
    emp = np.bincount(values, minlength=top + 1) / max(len(values), 1)
    pmf = geom_pmf(np.arange(top + 1), q)
    tail = (1 - q) ** (top + 1)
    return 0.5 * (np.abs(emp - pmf).sum() + tail)


def empirical_geom_check(p: float, t: int, samples: int, gen: np.random.Generator) -> float:
    """Total-variation distance between scan values and the geometric law."""
    q = geom_parameter(p)
    return tv_to_geometric(excess_scan_batch(gen, p, t, samples), q)


def stability_length(p: float) -> int:
    """Number of consecutive unchanged cells after which a truncated scan is taken as converged."""
    return 10 * math.ceil((1 - p) / (1 - 2 * p))


def _queue_profile(tags: np.ndarray) -> np.ndarray:
    """Queue value after each cell, sweeping left to right."""
    out = np.empty(len(tags), dtype=np.int64)
    q = 0
    for i, c in enumerate(tags.tolist()):
        q = q + 1 if c else max(q - 1, 0)
        out[i] = q
    return out


def _stable_cells(tags: np.ndarray) -> int:
    """How many far-end cells of a rightward scan could be dropped without changing it."""
    # the scan equals the largest suffix sum (car +1, space -1), floored at 0
    steps = np.where(tags[::-1], 1, -1)
    run = np.concatenate([[0], np.cumsum(steps)])
    best = np.maximum.accumulate(run)
    last = int(np.flatnonzero(run == best[-1])[0])
    return len(tags) - last


@dataclass(frozen=True)
class JResult:
    J: int | None
    K_max: int
    depth_left: int
    depth_right: int
    stable_left: int
    stable_right: int

    @property
    def exceeded(self) -> bool:
        return self.J is None


def compute_J(config: InitialConfig, K_max: int) -> JResult:
    """Smallest ``K`` for which both half-line excess inequalities hold around the origin.

    Scans use the config as the whole world: cells outside the window hold
    neither cars nor spaces.
    """
    if not config.lo <= 0 <= config.hi:
        raise ValueError("window must contain the origin")
    lo, hi = config.lo, config.hi
    tags = config.is_car
    left = tags[:-lo] if lo < 0 else tags[:0]  # [lo, -1]
    right = tags[1 - lo:]  # [1, hi]
    ql = _queue_profile(left)  # ql[x - lo]: cars reaching x + 1 from [lo, x]
    qr = _queue_profile(right[::-1])[::-1]  # qr[x - 1]: cars reaching x - 1 from [x, hi]
    e_l = int(ql[-1]) if len(ql) else 0
    e_r = int(qr[0]) if len(qr) else 0
    s_r = np.concatenate([[0], np.cumsum(right)])
    s_l = np.concatenate([[0], np.cumsum(left[::-1])])
    found = None
    for K in range(1, K_max + 1):
        er_k = int(qr[K]) if K < len(qr) else 0  # cells [K+1, hi]
        el_k = int(ql[len(ql) - K - 1]) if K < len(ql) else 0  # cells [lo, -K-1]
        sr = int(s_r[min(K, len(right))])
        sl = int(s_l[min(K, len(left))])
        if 2 * (er_k + e_l + sr) < K and 2 * (el_k + e_r + sl) < K:
            found = K
            break
    return JResult(found, K_max, -lo, hi, _stable_cells(left),
                   _stable_cells(right[::-1]))


def j_tail_bound(N: int, p: float) -> float:
    """Upper bound on ``P[J >= N]``."""
    q = geom_parameter(p)
    return (2 * math.exp(-((0.5 - p) ** 2) * N / 2)
            + 4 * math.exp(-q * N * (1 / 8 - p / 4)))


def tau_upper_series(p: float, tol: float = 1e-12) -> float:
    """Sum over N >= 1 of ``N^2`` times the tail bound on J, to within ``tol``."""
    if not 0 <= p < 0.5:
        raise ValueError("series converges only for 0 <= p < 1/2")
    rates = ((0.5 - p) ** 2 / 2, geom_parameter(p) * (1 / 8 - p / 4))
    coef = (2.0, 4.0)
    total = 0.0
    for c, a in zip(coef, rates):
        x = math.exp(-a)
        n, s = 0, 0.0
        while True:
            n += 1
            term = n * n * x**n
            s += term
            # past the mode each ratio is at most ((n+2)/(n+1))^2 x < 1
            rho = ((n + 2) / (n + 1)) ** 2 * x
            if rho < 1 and term * rho / (1 - rho) < tol / 2:
                break
        total += c * s
    return total
