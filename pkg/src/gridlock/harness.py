"""Experiment specs, replica execution, estimate tables and output files."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import stats

from . import analytics, oracles
from .car_engine import run_car_model, mass_transport_check
from .enumeration import compare_engines, mass_transport_leaves
from .kernels import greedy_labelled, ring_active_counts
from .lattice import Cycle
from .rng import RandomSource, sample_initial_config
from .space_engine import run_space_model
from .strategies import (BarrierParams, BarrierRemoval, Greedy, NeverPark, TStrategy,
                         build_assignment_plan, make_removal, make_strategy, plan_scales)
from .swap import SUMMARY_HEADER, run_modified

MODES = ("scaling", "drift", "plateau", "strategy-t", "modified", "verify", "bounds", "enumerate")
MIN_REPLICAS_FOR_CI = 30


class FewReplicasWarning(UserWarning):
    pass


@dataclass
class ExperimentSpec:
    mode: str
    p: float = 0.5
    horizons: tuple[int, ...] = ()
    replicas: int = 100
    seed: int = 0
    strategy: str = "greedy"
    removal: str = "none"
    k: int = 9
    ell: int = 5
    out: str | None = None
    workers: int = 1
    estimator: str = "ring"

    def __post_init__(self):
        self.horizons = tuple(int(t) for t in self.horizons) or default_horizons(self.mode, self.p)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if any(t < 1 for t in self.horizons) or list(self.horizons) != sorted(set(self.horizons)):
            raise ValueError("horizons must be positive and strictly increasing")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.strategy not in ("greedy", "t", "never"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.removal not in ("none", "barrier"):
            raise ValueError(f"unknown removal {self.removal!r}")
        if self.estimator not in ("ring", "origin"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["horizons"] = list(self.horizons)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def header(self) -> str:
        """Comment lines that make any output file self-describing."""
        body = {k: v for k, v in self.to_dict().items() if k not in ("out", "workers")}
        return f"# spec: {json.dumps(body, sort_keys=True)}\n"


def default_horizons(mode: str, p: float) -> tuple[int, ...]:
    if mode == "scaling":
        return tuple(2**j for j in range(8, 15))
    if mode == "drift":
        return (4096,)
    if mode == "plateau":
        t = 4096 if p <= 0.3 else 16384 if p <= 0.4 else 2**18
        return (t, 2 * t)
    if mode == "strategy-t":
        return (64,)
    if mode == "modified":
        return (32,)
    if mode == "verify":
        return (20,)
    if mode == "enumerate":
        return (1, 2)
    return (10_000,)


@dataclass(frozen=True)
class EstimateRow:
    t: int
    mean: float
    se: float
    replicas: int
    exact: bool

    @classmethod
    def from_samples(cls, t: int, x: np.ndarray, exact: bool = True) -> "EstimateRow":
        x = np.asarray(x, dtype=float)
        se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else float("nan")
        return cls(t, float(x.mean()), se, len(x), exact)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Results:
    spec: ExperimentSpec
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    slope: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_rows(self, name: str, rows: list[EstimateRow], extra: dict | None = None) -> None:
        head = ["t", "mean", "se", "replicas", "exact"] + list((extra or {}).keys())
        body = [[r.t, r.mean, r.se, r.replicas, int(r.exact)] + [v[i] for v in (extra or {}).values()]
                for i, r in enumerate(rows)]
        self.tables[name] = (head, body)


# ---------------------------------------------------------------------------
# replica execution


def replica_seed(master: int, r: int) -> int:
    return RandomSource(master).spawn(r).master_seed


def _chunks(n: int, k: int) -> list[range]:
    size = max(1, math.ceil(n / k))
    return [range(a, min(n, a + size)) for a in range(0, n, size)]


def _run_chunk(args):
    fn, spec, idx = args
    return [fn(spec, r) for r in idx]


def map_replicas(fn, spec: ExperimentSpec, n: int | None = None) -> list:
    """``[fn(spec, r) for r in range(n)]``, optionally across processes, in replica order."""
    n = spec.replicas if n is None else n
    if spec.workers <= 1 or n < 2:
        return [fn(spec, r) for r in range(n)]
    parts = _chunks(n, spec.workers * 4)
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        out = list(pool.map(_run_chunk, [(fn, spec, idx) for idx in parts]))
    return [v for part in out for v in part]


def _ring_replica(spec: ExperimentSpec, r: int) -> np.ndarray:
    """Capped-time averages over a ring, one value per horizon."""
    T = max(spec.horizons)
    n = 4 * T + 1
    counts = ring_active_counts(n, spec.p, T, np.uint64(replica_seed(spec.seed, r)))
    cum = np.concatenate([[0], np.cumsum(counts[:T])])
    return np.array([cum[t] / n for t in spec.horizons])


def _origin_replica(spec: ExperimentSpec, r: int) -> np.ndarray:
    """Capped time of the origin on a window of radius 2t, one run per horizon."""
    seed = replica_seed(spec.seed, r)
    out = []
    for t in spec.horizons:
        is_car, cars, tau, *_ = greedy_labelled(-2 * t, 2 * t, spec.p, t, seed)
        hit = np.flatnonzero(cars == 0)
        out.append(float(tau[hit[0]]) if len(hit) else 0.0)
    return np.array(out)


def estimate_capped_time(spec: ExperimentSpec) -> list[EstimateRow]:
    """``E[tau ^ t]`` for every horizon in the spec (greedy parking, no removal)."""
    fn = _ring_replica if spec.estimator == "ring" else _origin_replica
    samples = np.array(map_replicas(fn, spec))
    return [EstimateRow.from_samples(t, samples[:, j]) for j, t in enumerate(spec.horizons)]


def fit_slope(rows: list[EstimateRow]) -> float | None:
    t = np.array([r.t for r in rows], dtype=float)
    m = np.array([r.mean for r in rows])
    if len(rows) < 2 or np.any(m <= 0):
        return None
    return float(np.polyfit(np.log(t), np.log(m), 1)[0])


def _few_replicas(res: Results) -> None:
    if res.spec.replicas < MIN_REPLICAS_FOR_CI:
        msg = f"only {res.spec.replicas} replicas; standard errors are unreliable"
        res.notes.append(msg)
        warnings.warn(msg, FewReplicasWarning, stacklevel=3)


def _require_kernel_setup(spec: ExperimentSpec) -> None:
    if spec.strategy != "greedy" or spec.removal != "none":
        raise ValueError(f"mode {spec.mode} estimates greedy parking without removal")


# ---------------------------------------------------------------------------
# modes


def run_scaling(spec: ExperimentSpec) -> Results:
    _require_kernel_setup(spec)
    res = Results(spec)
    _few_replicas(res)
    rows = estimate_capped_time(spec)
    res.slope = fit_slope(rows)
    res.add_rows("scaling", rows, {"ratio_t34": [r.mean / r.t**0.75 for r in rows]})
    if res.slope is None:
        res.notes.append("degenerate: slope undefined")
    elif spec.p == 0.5 and len(rows) >= 2:
        res.checks.append(Check("slope in [0.70, 0.80]", 0.70 <= res.slope <= 0.80,
                                f"slope={res.slope:.4f}"))
    return res


def run_drift(spec: ExperimentSpec) -> Results:
    _require_kernel_setup(spec)
    res = Results(spec)
    _few_replicas(res)
    rows = estimate_capped_time(spec)
    coef = 2 * spec.p - 1
    ratios = [r.mean / r.t for r in rows]
    res.add_rows("drift", rows, {"ratio": ratios, "ratio_se": [r.se / r.t for r in rows]})
    if spec.p > 0.5:
        for r, q in zip(rows, ratios):
            res.checks.append(Check(f"t={r.t} ratio within 0.05 of {coef:g}",
                                    abs(q - coef) <= 0.05, f"ratio={q:.4f}"))
        if len(rows) >= 2:
            res.checks.append(Check("ratio closer at the largest horizon",
                                    abs(ratios[-1] - coef) < abs(ratios[0] - coef),
                                    f"{ratios[0]:.4f} -> {ratios[-1]:.4f}"))
    return res


def run_plateau(spec: ExperimentSpec) -> Results:
    _require_kernel_setup(spec)
    res = Results(spec)
    _few_replicas(res)
    fn = _ring_replica if spec.estimator == "ring" else _origin_replica
    samples = np.array(map_replicas(fn, spec))
    rows = [EstimateRow.from_samples(t, samples[:, j]) for j, t in enumerate(spec.horizons)]
    res.add_rows("plateau", rows)
    if len(rows) >= 2 and spec.p < 0.5:
        a, b = rows[-2], rows[-1]
        inc = samples[:, -1] - samples[:, -2]
        rel = (b.mean - a.mean) / a.mean if a.mean > 0 else 0.0
        res.checks.append(Check(f"increment {a.t}->{b.t} below 5%", rel < 0.05,
                                f"rel={rel:.4f} (se {inc.std(ddof=1) / math.sqrt(len(inc)) / max(a.mean, 1e-300):.4f})"))
        bound = analytics.tau_upper_series(spec.p)
        res.checks.append(Check("plateau below series bound", b.mean <= bound + 3 * b.se,
                                f"{b.mean:.4f} <= {bound:.6g}"))
    return res


def _strategy_replica(spec: ExperimentSpec, r: int):
    t = spec.horizons[0]
    half = 2 * t + max(2 * t, 32)
    src = RandomSource(replica_seed(spec.seed, r))
    cfg = sample_initial_config((-half, half), spec.p, src)
    core = slice(half - (half - 2 * t), half + (half - 2 * t) + 1)
    g = run_car_model(cfg, Greedy(), None, t, src)
    strat = make_strategy(spec.strategy if spec.strategy != "greedy" else "t", cfg, t, src)
    s = run_car_model(cfg, strat, None, t, src)
    return float(g.tau_capped[core].mean()), float(s.tau_capped[core].mean()), \
        int(g.visits[half]), int(s.visits[half])


def run_strategy_t(spec: ExperimentSpec) -> Results:
    """Greedy against the assignment strategy at matched seeds, plus plan structure."""
    res = Results(spec)
    _few_replicas(res)
    out = np.array(map_replicas(_strategy_replica, spec), dtype=float)
    t = spec.horizons[0]
    g = EstimateRow.from_samples(t, out[:, 0])
    s = EstimateRow.from_samples(t, out[:, 1])
    diff = EstimateRow.from_samples(t, out[:, 1] - out[:, 0])
    res.tables["strategy"] = (["strategy", "t", "mean", "se", "replicas"],
                              [["greedy", t, g.mean, g.se, g.replicas],
                               [spec.strategy if spec.strategy != "greedy" else "t", t, s.mean, s.se, s.replicas],
                               ["difference", t, diff.mean, diff.se, diff.replicas]])
    se = diff.se if diff.se == diff.se else 0.0
    res.checks.append(Check("assignment strategy not faster than greedy", diff.mean >= -3 * se,
                            f"diff={diff.mean:.4f} se={se:.4f}"))
    frac, sigma, worst = star_fraction_study(spec, max(t, 10_000), 10**6)
    bound = analytics.star_bound(max(t, 10_000))
    res.tables["star"] = (["t", "cells", "star_fraction", "sigma", "bound", "max_gap_over_nu"],
                          [[max(t, 10_000), 10**6, frac, sigma, bound, worst]])
    res.checks.append(Check("assignment distance within 3 nu", worst <= 3, f"max gap/nu={worst:.3f}"))
    res.checks.append(Check("star fraction below bound", frac <= bound + 3 * sigma,
                            f"{frac:.5f} <= {bound:.5f}"))
    return res


def star_fraction_study(spec: ExperimentSpec, t: int, cells: int) -> tuple[float, float, float]:
    """Fraction of cells assigned no spot, its interval-level standard error, and max gap / nu."""
    src = RandomSource(replica_seed(spec.seed, 10**9))
    cfg = sample_initial_config((0, cells - 1), 0.5, src)
    plan = build_assignment_plan(cfg, t, src)
    zeta = plan.zeta
    starred = plan.starred
    # per-interval fractions are independent across full intervals
    first = (-plan.shift) % zeta
    full = (cells - first) // zeta
    per = starred[first:first + full * zeta].reshape(full, zeta).mean(axis=1)
    sigma = float(per.std(ddof=1) / math.sqrt(full))
    cars = cfg.is_car & ~starred
    gap = (cfg.positions[cars] - plan.target[cars]).max(initial=0) / plan.nu
    return float(starred.mean()), sigma, float(gap)


def _modified_replica(spec: ExperimentSpec, r: int):
    t = spec.horizons[0]
    params = BarrierParams(t, spec.k, spec.ell)
    src = RandomSource(replica_seed(spec.seed, r))
    mod = run_modified(params, spec.p, src)
    period = params.period
    base = greedy_labelled(1, period, spec.p, t, replica_seed(spec.seed + 1, r), period)
    return mod, int(base[5][-1])


def run_modified_mode(spec: ExperimentSpec) -> Results:
    res = Results(spec)
    _few_replicas(res)
    out = map_replicas(_modified_replica, spec)
    mods = [m for m, _ in out]
    base = np.array([b for _, b in out], dtype=float)
    act = np.array([m.active_at_t for m in mods], dtype=float)
    res.tables["modified_summary"] = (SUMMARY_HEADER, [m.row() for m in mods])
    diff = act.mean() - base.mean()
    se = math.sqrt(act.var(ddof=1) / len(act) + base.var(ddof=1) / len(base)) if len(act) > 1 else 0.0
    z = stats.norm.ppf(0.995)
    res.tables["modified_vs_barrier"] = (["t", "mean_modified", "mean_barrier", "diff", "se"],
                                         [[spec.horizons[0], act.mean(), base.mean(), diff, se]])
    res.checks.append(Check("modified and barrier means agree (99%)", abs(diff) <= z * se,
                            f"diff={diff:.4f} se={se:.4f}"))
    a_rate = np.mean([m.event_A for m in mods])
    res.notes.append(f"event A rate {a_rate:.4f}")
    res.checks.append(Check("I_L <= D_L and I_R <= D_R", all(m.I_L <= m.D_L and m.I_R <= m.D_R for m in mods)))
    return res


# verification suites ------------------------------------------------------


def removal_suite_seed(spec: ExperimentSpec, r: int, t: int = 20, half: int = 100) -> int:
    """Violations of the removal-dominance statements on one coupled seed."""
    src = RandomSource(replica_seed(spec.seed, r))
    cfg = sample_initial_config((-half, half - 1), 0.5, src)
    greedy_states, removal_states = [], []
    snap = lambda dst: (lambda st: dst.append((st.status.copy(), st.pos.copy())))
    g = run_car_model(cfg, Greedy(), None, t, src, observer=snap(greedy_states))
    q = run_car_model(cfg, Greedy(), BarrierRemoval(BarrierParams(t, spec.k, spec.ell)), t, src,
                      observer=snap(removal_states))
    bad = 0
    for (sg, pg), (sq, pq) in zip(greedy_states, removal_states):
        aq = sq == 0
        # every car unparked under removal is unparked, at the same place, under greedy
        bad += int(np.sum(aq & ((sg != 0) | (pg != pq))))
    bad += int(np.sum(q.tau_capped > g.tau_capped)) + int(np.sum(q.visits > g.visits))
    return bad


def majorization_suite_seed(spec: ExperimentSpec, r: int, t: int = 20, half: int = 100) -> int:
    """Violations of visit majorization (never-park against greedy) in the space model."""
    src = RandomSource(replica_seed(spec.seed, r))
    cfg = sample_initial_config((-half, half - 1), 0.5, src)
    vg, vn = [], []
    g = run_space_model(cfg, Greedy(), t, src, observer=lambda st: vg.append(st.core.visits.copy()))
    n = run_space_model(cfg, NeverPark(), t, src, observer=lambda st: vn.append(st.core.visits.copy()))
    return int(sum(np.sum(a > b) for a, b in zip(vg, vn)))


def mass_transport_seed(spec: ExperimentSpec, r: int) -> int:
    src = RandomSource(replica_seed(spec.seed, r))
    n = 5 + r % 60
    t = 1 + (r * 7) % 25
    cfg = sample_initial_config((0, n - 1), spec.p, src)
    strategy = Greedy() if r % 3 else make_strategy("t", cfg, t, src)
    m = run_car_model(cfg, strategy, None, t, src, lattice=Cycle(n))
    return mass_transport_check(m, cfg)


def _visit_pair(spec: ExperimentSpec, r: int) -> tuple[int, int]:
    return _strategy_replica(spec, r)[2:]


def majorization_test(vg: np.ndarray, vt: np.ndarray, alpha: float = 1e-3) -> tuple[bool, float]:
    """One-sided tests that ``P[V_G <= k] >= P[V_T <= k]`` at every level, Bonferroni corrected."""
    levels = np.unique(np.concatenate([vg, vt]))
    worst = 1.0
    for k in levels:
        a, b = np.mean(vg <= k), np.mean(vt <= k)
        pooled = (a + b) / 2
        se = math.sqrt(max(pooled * (1 - pooled), 1e-12) * 2 / len(vg))
        pval = stats.norm.sf((b - a) / se)
        worst = min(worst, pval * len(levels))
    return worst >= alpha, worst


def _violation_detail(spec: ExperimentSpec, vals: list) -> str:
    bad = [r for r, v in enumerate(vals) if v]
    msg = f"violations={sum(abs(v) for v in vals)} over {len(vals)} seeds"
    if bad:
        msg += f"; replay seed {replica_seed(spec.seed, bad[0])} (replica {bad[0]})"
    return msg


def run_verify(spec: ExperimentSpec) -> Results:
    res = Results(spec)
    t = spec.horizons[0]
    for name, fn in (("removal dominance (pathwise)", _removal_replica),
                     ("visit majorization (pathwise)", _majorization_replica),
                     ("mass transport residual zero", mass_transport_seed)):
        vals = map_replicas(fn, spec)
        res.checks.append(Check(name, not any(vals), _violation_detail(spec, vals)))
    for n in (3, 4):
        for h in (1, 2):
            cmp = compare_engines(n, h)
            res.checks.append(Check(f"engine equivalence C_{n} horizon {h}", cmp["identical"],
                                    f"{len(cmp['car'])} outcomes"))
    pairs = np.array(map_replicas(_visit_pair, ExperimentSpec(
        "strategy-t", 0.5, (t,), spec.replicas, spec.seed, "t", workers=spec.workers)))
    ok, pval = majorization_test(pairs[:, 0], pairs[:, 1])
    res.checks.append(Check("greedy visit law dominated (Bonferroni)", ok, f"min adj p={pval:.3g}"))
    res.tables["verify"] = (["check", "passed", "detail"],
                            [[c.name, int(c.passed), c.detail] for c in res.checks])
    return res


def _removal_replica(spec, r):
    return removal_suite_seed(spec, r, spec.horizons[0])


def _majorization_replica(spec, r):
    return majorization_suite_seed(spec, r, spec.horizons[0])


def run_bounds(spec: ExperimentSpec) -> Results:
    """Closed forms against their oracles, and the numeric bounds."""
    res = Results(spec)
    rows = []
    worst = 0.0
    for a in range(1, 21):
        for b in range(1, 21):
            q = analytics.HittingQuery(a, b)
            worst = max(worst, abs(analytics.gamblers_ruin_prob(q) - float(oracles.ruin_oracle(a, b))),
                        abs(analytics.conditional_hit_time(q) - float(oracles.conditional_hit_oracle(a, b))))
        worst = max(worst, abs(analytics.expected_exit_time(a) - float(oracles.exit_time_oracle(a))))
    rows.append(["hitting closed forms", worst])
    pmf_err = 0.0
    for n in range(0, 21):
        enum = oracles.max_pmf_enumeration(n)
        pmf_err = max(pmf_err, max(abs(analytics.max_walk_pmf(n, r) - float(enum[r])) for r in range(n + 1)))
    rows.append(["max pmf", pmf_err])
    pi_err = 0.0
    for nu in range(1, 51):
        P = analytics.QueueChain(nu).matrix()
        pi = analytics.queue_chain_stationary(nu)
        pi_err = max(pi_err, float(np.abs(pi @ P - pi).max()))
    rows.append(["queue stationarity", pi_err])
    res.checks.append(Check("closed forms match oracles to 1e-9", max(worst, pmf_err) < 1e-9))
    res.checks.append(Check("stationary residual below 1e-12", pi_err < 1e-12))
    for p in (0.3, 0.4, 0.45):
        rows.append([f"tau series p={p}", analytics.tau_upper_series(p)])
    for t in spec.horizons:
        rows.append([f"star bound t={t}", analytics.star_bound(t)])
    res.tables["bounds"] = (["quantity", "value"], rows)
    return res


def run_enumerate(spec: ExperimentSpec) -> Results:
    res = Results(spec)
    rows = []
    for n in (3, 4):
        for h in spec.horizons:
            if h > 2:
                raise ValueError("exhaustive enumeration is capped at horizon 2")
            cmp = compare_engines(n, h, Fraction(spec.p).limit_denominator(1000))
            leaves, bad = mass_transport_leaves(n, h)
            rows.append([n, h, len(cmp["car"]), cmp["car_leaves"], cmp["space_leaves"],
                         int(cmp["identical"]), bad])
            res.checks.append(Check(f"C_{n} horizon {h} identical", cmp["identical"]))
            res.checks.append(Check(f"C_{n} horizon {h} mass transport", bad == 0))
    res.tables["enumerate"] = (["n", "horizon", "outcomes", "car_leaves", "space_leaves",
                                "identical", "residual_failures"], rows)
    return res


RUNNERS = {
    "scaling": run_scaling, "drift": run_drift, "plateau": run_plateau,
    "strategy-t": run_strategy_t, "modified": run_modified_mode, "verify": run_verify,
    "bounds": run_bounds, "enumerate": run_enumerate,
}


def run(spec: ExperimentSpec) -> Results:
    return RUNNERS[spec.mode](spec)


# ---------------------------------------------------------------------------
# outputs


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=10)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return "" if v is None else str(v)


def table_csv(spec: ExperimentSpec, head: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(spec.header())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def plot_script(spec: ExperimentSpec, name: str) -> str:
    return "\n".join([
        spec.header().rstrip("\n"),
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale xy",
        "set xlabel 't'",
        "set ylabel 'E[min(tau, t)]'",
        "f(x) = c * x**b",
        "c = 1; b = 0.75",
        f"fit log(f(x)) '{name}.csv' using 1:(log($2)) via c, b",
        f"plot '{name}.csv' using 1:2:3 with yerrorbars title 'estimate', f(x) title 'fit'",
        "",
    ])


def emit_outputs(results: Results, spec: ExperimentSpec | None = None) -> list[Path]:
    """Write every table as CSV, a JSON manifest and a gnuplot script into ``spec.out``."""
    spec = spec or results.spec
    if spec.out is None:
        raise ValueError("no output directory in the spec")
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (head, rows) in results.tables.items():
        path = out / f"{name}.csv"
        path.write_text(table_csv(spec, head, rows))
        written.append(path)
    manifest = {
        "spec": spec.to_dict(),
        "version": version_string(),
        "slope": results.slope,
        "checks": [asdict(c) for c in results.checks],
        "notes": results.notes,
        "files": sorted(p.name for p in written),
    }
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(mpath)
    plotted = [n for n in ("scaling", "drift", "plateau") if n in results.tables]
    if plotted:
        gp = out / f"{plotted[0]}.gp"
        gp.write_text(plot_script(spec, plotted[0]))
        written.append(gp)
    return written


def load_manifest(path: str | os.PathLike) -> ExperimentSpec:
    data = json.loads(Path(path).read_text())
    return ExperimentSpec.from_dict(data.get("spec", data))
