import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ScriptedSource
from gridlock.analytics import queue_chain_stationary
from gridlock.car_engine import run_car_model
from gridlock.rng import InitialConfig, RandomSource, sample_initial_config
from gridlock.strategies import (NO_SPOT, AxiomChecked, AxiomViolation, BarrierParams,
                                 BarrierRemoval, Greedy, NeverPark, PlanIntegrityError, TStrategy,
                                 _sweep, barrier_removal_decide, build_assignment_plan,
                                 ceil_fourth_root, ceil_sqrt, ceil_sqrt_real, greedy_decide,
                                 make_removal, make_strategy, plan_scales, t_strategy_decide)


def test_scales():
    assert plan_scales(10**4) == (100, 10)
    assert plan_scales(1) == (1, 1)
    assert plan_scales(17) == (5, 3)
    assert [ceil_sqrt(x) for x in (1, 2, 4, 5, 9, 10)] == [1, 2, 2, 3, 3, 4]
    assert [ceil_fourth_root(x) for x in (1, 2, 16, 17, 81, 82)] == [1, 2, 2, 3, 3, 4]
    with pytest.raises(ValueError):
        plan_scales(0)


def test_all_space_interval_is_identity():
    cfg = InitialConfig.from_tags("S" * 30)
    plan = build_assignment_plan(cfg, 25, shift=2)
    assert np.array_equal(plan.target, cfg.positions)
    assert not plan.starred.any()


def _four_cells(t):
    return build_assignment_plan(InitialConfig.from_tags("SCCS"), t, shift=0, record_queue=True)


def test_four_cell_hand_trace():
    plan = _four_cells(81)  # zeta 9, nu 3
    assert [plan.assigned(i) for i in range(4)] == [0, None, 0, 3]
    assert plan.queue_trace == ((0, 1, 2, 1),)


def test_four_cell_with_capacity_two():
    # with nu = 2 the queue is full after the second car, so the older car is starred
    plan = _four_cells(16)
    assert [plan.assigned(i) for i in range(4)] == [0, 0, None, 3]


def test_star_never_parks_and_integrity_errors():
    plan = _four_cells(81)
    assert not t_strategy_decide(plan, 1, 0, 5)
    assert t_strategy_decide(plan, 2, 0, 5)
    assert not t_strategy_decide(plan, 2, 1, 5)
    with pytest.raises(PlanIntegrityError):
        t_strategy_decide(plan, 0, 0, 1)
    plan.target[2] = 2
    with pytest.raises(PlanIntegrityError):
        t_strategy_decide(plan, 2, 2, 1)


def test_check_catches_corruption():
    cfg = InitialConfig.from_tags("SSCCSCSC")
    plan = build_assignment_plan(cfg, 64, shift=0)
    bad = plan.target.copy()
    cars = np.flatnonzero(cfg.is_car & (plan.target != NO_SPOT))
    plan.target[cars[0]] = plan.target[cars[1]]
    with pytest.raises(PlanIntegrityError):
        plan.check()
    plan.target[:] = bad
    plan.target[0] = 5
    with pytest.raises(PlanIntegrityError):
        plan.check()


def test_first_visit_parks_at_the_right_time():
    cfg = InitialConfig.from_tags("SCSSS")
    plan = build_assignment_plan(cfg, 16, shift=0)
    assert plan.assigned(1) == 0
    steps = dict(zip([(1, s) for s in range(1, 8)], [1, 1, 1, -1, -1, -1, -1]))
    m = run_car_model(cfg, TStrategy(plan), None, 10, ScriptedSource(steps))
    assert m.at(1)[0] == 7
    assert [t_strategy_decide(plan, 1, x, s) for s, x in enumerate([2, 3, 4, 3, 2, 1, 0], 1)] == \
        [False] * 6 + [True]


def test_star_fraction_modes_and_csv(tmp_path):
    plan = _four_cells(81)
    assert plan.star_fraction() == 0.25
    assert plan.star_fraction("car") == 0.5
    plan.to_csv(tmp_path / "plan.csv", seed=4)
    lines = (tmp_path / "plan.csv").read_text().splitlines()
    assert lines[1] == "position,assigned"
    assert lines[2:] == ["0,0", "1,", "2,0", "3,3"]


def test_queue_lengths_follow_the_stationary_law():
    gen = np.random.default_rng(5)
    for nu in (2, 3, 5):
        cells = (gen.random(400_000) < 0.5).tolist()
        target = np.zeros(len(cells), dtype=np.int64)
        trace = []
        _sweep(cells, 0, nu, target, 0, trace)
        freq = np.bincount(trace, minlength=nu + 1)[: nu + 1] / len(trace)
        assert np.allclose(freq, queue_chain_stationary(nu), atol=0.006)


def test_shift_is_uniform():
    counts = np.bincount([RandomSource(s).shift(7) for s in range(7000)], minlength=7)
    assert counts.min() > 850 and counts.max() < 1150


def test_greedy_decide_examples():
    assert greedy_decide(True, True)
    assert not greedy_decide(True, False)
    assert not greedy_decide(False, True)


def test_barrier_examples():
    params = BarrierParams(100, k=20, ell=5, zeta=2)
    assert params.period == 101
    assert barrier_removal_decide(params, 0, 1)
    assert not barrier_removal_decide(params, 1, 2)
    assert barrier_removal_decide(params, 102, 101)
    assert not barrier_removal_decide(params, 101, 100)
    assert barrier_removal_decide(params, -101, -100)
    with pytest.raises(ValueError):
        barrier_removal_decide(params, 0, 2)
    with pytest.raises(ValueError):
        BarrierRemoval(params).removes(None, np.array([0]), np.array([0]), 1)


def test_barrier_scale():
    p = BarrierParams(100)
    assert p.zeta == ceil_sqrt_real(100 * math.log(100)) == 22
    assert p.period == 2 * 14 * 22 + 1
    assert BarrierParams(1).zeta == 1
    assert ceil_sqrt_real(49.0) == 7 and ceil_sqrt_real(49.000001) == 8
    for k, ell in ((8, 5), (9, 4)):
        with pytest.raises(ValueError):
            BarrierParams(10, k, ell)


def test_factories():
    cfg = InitialConfig.from_tags("SCSC")
    assert isinstance(make_strategy("greedy"), Greedy)
    assert isinstance(make_strategy("never"), NeverPark)
    assert isinstance(make_strategy("t", cfg, 4, RandomSource(1)), TStrategy)
    assert make_removal("none") is None
    assert make_removal("barrier", 50).params.horizon == 50
    for bad in (lambda: make_strategy("t"), lambda: make_strategy("x"), lambda: make_removal("x")):
        with pytest.raises(ValueError):
            bad()


def test_axiom_checker_flags_violations():
    cfg = InitialConfig.from_tags("CSS")
    chk = AxiomChecked(Greedy())
    chk.record([0], [1], [1], 1, cfg)
    with pytest.raises(AxiomViolation):
        chk.record([0], [2], [2], 2, cfg)
    with pytest.raises(AxiomViolation):
        AxiomChecked(Greedy()).record([0], [0], [0], 1, cfg)
    with pytest.raises(AxiomViolation):
        AxiomChecked(Greedy()).record([1], [2], [2], 1, cfg)
    with pytest.raises(AxiomViolation):
        AxiomChecked(Greedy()).record([0], [2], [1], 1, cfg)


def test_t_strategy_runs_respect_axioms():
    for seed in range(30):
        src = RandomSource(seed)
        cfg = sample_initial_config((-60, 60), 0.5, src)
        plan = build_assignment_plan(cfg, 30, src)
        chk = AxiomChecked(TStrategy(plan))
        m = run_car_model(cfg, chk, None, 30, src)
        assert chk.events == m.parked
        parked_at = {}
        # every parked car sits on its assigned space
        run_car_model(cfg, TStrategy(plan), None, 30, src,
                      observer=lambda s: parked_at.update(
                          {int(c): int(x) for c, x, q in zip(s.cars, s.pos, s.status) if q == 1}))
        assert all(plan.assigned(c) == x for c, x in parked_at.items())


@settings(max_examples=80, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=120), st.integers(1, 3000), st.integers(-50, 50),
       st.integers(0, 10**6))
def test_plan_invariants(tags, t, lo, shift_seed):
    cfg = InitialConfig.from_tags(tags, lo=lo)
    zeta, nu = plan_scales(t)
    plan = build_assignment_plan(cfg, t, shift=shift_seed % zeta)
    plan.check()
    cars = cfg.is_car & ~plan.starred
    gap = cfg.positions[cars] - plan.target[cars]
    assert np.all((gap > 0) & (gap <= 3 * nu))
    assert not plan.starred[~cfg.is_car].any()
    assert len(np.unique(plan.target[cars])) == cars.sum()
