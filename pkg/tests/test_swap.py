import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ScriptedSource
from gridlock.oracles import lockstep_drive
from gridlock.rng import InitialConfig, RandomSource, sample_initial_config
from gridlock.strategies import BarrierParams
from gridlock.swap import (LEFT, MIDDLE, RIGHT, SUMMARY_HEADER, Blocks, SwapInvariantError,
                           SwapState, check_order, deterministic_drive_count, reorder_pass,
                           run_modified, scan_minimum, step_modified, write_summary)


def test_reorder_examples():
    pos = np.array([5, 3])
    a, b = np.array([True, False]), np.array([False, True])
    assert reorder_pass(pos, a, b).tolist() == [3, 5]
    pos = np.array([4, 6, 3, 5])
    a = np.array([True, True, False, False])
    out = reorder_pass(pos, a, ~a)
    assert out.tolist() == [3, 4, 5, 6]
    ok = np.array([1, 2, 7, 9])
    assert reorder_pass(ok, a, ~a).tolist() == ok.tolist()


def test_reorder_equal_positions_follow_start():
    pos = np.array([4, 4, 4])
    a = np.array([False, True, False])
    b = np.array([True, False, False])
    assert reorder_pass(pos, a, b, np.array([10, 0, 5])).tolist() == [4, 4, 4]


def test_blocks_and_labels():
    bl = Blocks(9, 5, 2)
    assert (bl.lo, bl.m_lo, bl.m_hi, bl.hi) == (-28, -18, 18, 28)
    assert bl.label(np.array([-28, -19, -18, 0, 18, 19, 28])).tolist() == \
        [LEFT, LEFT, MIDDLE, MIDDLE, MIDDLE, RIGHT, RIGHT]


def test_single_middle_car_follows_its_walk():
    bl = Blocks(9, 5, 1)
    tags = np.zeros(bl.hi - bl.lo + 1, dtype=bool)
    tags[-bl.lo] = True
    cfg = InitialConfig(bl.lo, bl.hi, tags, 0.5)
    state = SwapState.initial(bl, cfg)
    state.filled[:] = True  # nowhere to park
    src = ScriptedSource({(0, 1): -1, (0, 2): -1, (0, 3): 1})
    for expect in (-1, -2, -1):
        step_modified(state, src)
        assert state.pos.tolist() == [expect]


def test_drive_count_examples():
    assert deterministic_drive_count([False, True], 5) == 0
    assert deterministic_drive_count([True, False], 5) == 1
    assert deterministic_drive_count([True, True], 2) == 2
    assert deterministic_drive_count([True, True], 1) == 1
    assert deterministic_drive_count([True, False], 5, direction=+1) == 0
    assert deterministic_drive_count([False, True], 5, direction=+1) == 1
    assert deterministic_drive_count([], 3) == 0


def test_scan_minimum_examples():
    assert scan_minimum([]) == 0
    assert scan_minimum([True, True]) == 0
    assert scan_minimum([False, False, True]) == -1
    assert scan_minimum([False, True, False, False]) == -2


def test_all_space_block():
    params = BarrierParams(9, zeta=1)
    bl = Blocks(9, 5, 1)
    cfg = InitialConfig(bl.lo, bl.hi, np.zeros(bl.hi - bl.lo + 1, dtype=bool), 0.0)
    res = run_modified(params, 0.0, RandomSource(1), config=cfg)
    assert res.active_at_t == 0 and res.excess == -(res.P_L + res.P_M + res.P_R)
    assert (res.S_L, res.S_M, res.S_R, res.D_L, res.D_R, res.I_L, res.I_R) == (0,) * 7


def test_check_order_raises():
    with pytest.raises(SwapInvariantError):
        check_order(np.array([5, 3]), np.array([LEFT, MIDDLE]))
    check_order(np.array([3, 3, 5]), np.array([LEFT, MIDDLE, RIGHT]))


def test_initial_requires_matching_window():
    with pytest.raises(ValueError):
        SwapState.initial(Blocks(9, 5, 1), InitialConfig.from_tags("CS"))


def test_summary_rows(tmp_path):
    params = BarrierParams(9, zeta=1)
    results = [run_modified(params, 0.5, RandomSource(s)) for s in range(5)]
    write_summary(results, tmp_path / "s.csv", "# run\n")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "# run" and lines[1] == ",".join(SUMMARY_HEADER) and len(lines) == 7


def test_invariants_over_many_runs():
    for zeta, t in ((1, 5), (2, 12), (3, 30)):
        for seed in range(150):
            r = run_modified(BarrierParams(t, zeta=zeta), 0.5, RandomSource(seed))
            assert r.I_L <= r.D_L and r.I_R <= r.D_R
            assert not r.event_A or r.active_at_t >= r.excess


def test_every_car_is_accounted_for():
    bl = Blocks(9, 5, 2)
    for seed in range(40):
        src = RandomSource(seed)
        cfg = sample_initial_config((bl.lo, bl.hi), 0.55, src)
        state = SwapState.initial(bl, cfg)
        for _ in range(25):
            step_modified(state, src)
            gone = state.left_inactive.sum() + state.right_inactive.sum()
            assert state.active + state.parked + gone == len(cfg.cars)
            assert state.filled.sum() == cfg.is_car.sum() + state.parked


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), max_size=60), st.integers(1, 80), st.sampled_from([-1, 1]))
def test_drive_count_matches_lockstep(tags, horizon, direction):
    assert deterministic_drive_count(tags, horizon, direction) == lockstep_drive(tags, horizon, direction)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.booleans(), max_size=80))
def test_drive_identity(tags):
    s = sum(tags)
    d = deterministic_drive_count(tags, len(tags), -1)
    assert s - (len(tags) - s) - d == scan_minimum(tags)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**63), st.floats(0.1, 0.9), st.integers(1, 3), st.integers(1, 40))
def test_step_invariants(seed, p, zeta, t):
    params = BarrierParams(t, zeta=zeta)
    r = run_modified(params, p, RandomSource(seed), check=True)
    assert r.I_L <= r.D_L and r.I_R <= r.D_R
    assert r.active_at_t <= r.S_L + r.S_M + r.S_R
