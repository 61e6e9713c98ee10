import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridlock import analytics as an
from gridlock import oracles
from gridlock.rng import InitialConfig


# hitting probabilities and times ----------------------------------------------------------


def test_ruin_examples():
    assert an.gamblers_ruin_prob(an.HittingQuery(1, 1)) == 0.5
    assert an.gamblers_ruin_prob(an.HittingQuery(7, 7)) == 0.5
    assert an.gamblers_ruin_prob(an.HittingQuery(2, 3)) == pytest.approx(0.4, abs=1e-12)
    assert oracles.ruin_oracle(2, 3) == Fraction(2, 5)


def test_conditional_hit_examples():
    assert an.conditional_hit_time(an.HittingQuery(1, 1)) == 1
    assert an.conditional_hit_time(an.HittingQuery(1, 2)) == pytest.approx(8 / 3)
    _, e_up, _, left = oracles.hitting_dp(3, 2, tol=1e-16)
    assert left < 1e-15
    assert an.conditional_hit_time(an.HittingQuery(3, 2)) == pytest.approx(e_up, abs=1e-9)


def test_exit_time_examples():
    assert an.expected_exit_time(1) == 1
    assert an.expected_exit_time(3) == 9
    assert oracles.exit_time_oracle(5) == 25
    assert oracles.hitting_dp(5, 5, tol=1e-16)[2] == pytest.approx(25, abs=1e-9)
    with pytest.raises(ValueError):
        an.expected_exit_time(0)
    with pytest.raises(ValueError):
        an.HittingQuery(0, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20))
def test_closed_forms_match_linear_systems(a, b):
    q = an.HittingQuery(a, b)
    assert abs(an.gamblers_ruin_prob(q) - float(oracles.ruin_oracle(a, b))) < 1e-12
    assert abs(an.conditional_hit_time(q) - float(oracles.conditional_hit_oracle(a, b))) < 1e-9


def test_dp_oracle_agrees_with_linear_systems():
    for a, b in ((1, 4), (4, 1), (6, 3)):
        p_up, e_up, e_exit, _ = oracles.hitting_dp(a, b, tol=1e-16)
        assert p_up == pytest.approx(float(oracles.ruin_oracle(a, b)), abs=1e-12)
        assert e_up == pytest.approx(float(oracles.conditional_hit_oracle(a, b)), abs=1e-9)
        assert e_exit == pytest.approx(a * b, abs=1e-9)


# running maximum ---------------------------------------------------------------------------


def test_max_pmf_examples():
    assert an.max_walk_pmf(2, 0) == 0.5
    assert an.max_walk_pmf(2, 1) == 0.25
    assert an.max_walk_pmf(2, 2) == 0.25
    assert an.max_walk_pmf(1, 1) == 0.5
    assert an.max_walk_pmf(0, 0, exact=True) == 1
    with pytest.raises(ValueError):
        an.max_walk_pmf(2, 3)
    with pytest.raises(ValueError):
        an.max_walk_pmf(-1, 0)


def test_max_pmf_matches_enumeration():
    for n in range(0, 21):
        enum = oracles.max_pmf_enumeration(n)
        assert [an.max_walk_pmf(n, r, exact=True) for r in range(n + 1)] == enum


def test_max_tail_bound():
    assert an.max_walk_tail(100, 1.0) == pytest.approx(2e-4)
    assert an.max_walk_exact_tail(100, an.max_walk_threshold(100, 1.0)) <= 2e-4
    assert an.max_walk_tail(100, 0.01) > 1.0
    with pytest.raises(ValueError):
        an.max_walk_tail(1, 1.0)


def test_max_tail_monte_carlo(gen):
    n, walks = 10**4, 10**5
    level = an.max_walk_threshold(n, 1.0)
    # the maximum of a walk is distributed as |S_n| up to parity, so sample the endpoint
    ends = 2 * gen.binomial(n, 0.5, size=walks) - n
    assert np.mean(np.abs(ends) >= level) <= an.max_walk_tail(n, 1.0)


# queue chain -------------------------------------------------------------------------------


def test_stationary_examples():
    assert an.queue_chain_stationary(2, exact=True) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]
    assert an.queue_chain_stationary(3, exact=True) == [Fraction(1, 3), Fraction(1, 3),
                                                         Fraction(1, 6), Fraction(1, 6)]
    with pytest.raises(ValueError):
        an.QueueChain(0)


def test_stationarity_residual():
    for nu in range(1, 51):
        P = an.QueueChain(nu).matrix()
        assert np.allclose(P.sum(axis=1), 1)
        pi = an.queue_chain_stationary(nu)
        assert np.abs(pi @ P - pi).max() < 1e-12
        assert np.allclose(pi, oracles.stationary_oracle(P), atol=1e-10)


def test_exact_stationarity():
    for nu in (1, 2, 5, 9):
        P = an.QueueChain(nu).matrix(exact=True)
        pi = an.queue_chain_stationary(nu, exact=True)
        assert [sum(pi[i] * P[i][j] for i in range(nu + 1)) for j in range(nu + 1)] == pi


def test_star_bound():
    assert an.star_bound(10**4) == pytest.approx(0.15)
    assert an.star_bound(1) == 1.0
    assert an.star_bound(10**6) < an.star_bound(10**4)
    # decay like t^(-1/4): a factor 100 in t is about a factor 100^(1/4)
    assert an.star_bound(10**4) / an.star_bound(10**6) == pytest.approx(0.15 / 0.047625)


# excess scans ------------------------------------------------------------------------------


def test_scan_examples():
    assert an.excess_scan([True, False]) == 0
    assert an.excess_scan([False, True]) == 1
    assert an.excess_scan([False] * 5) == 0
    assert an.excess_scan([]) == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), max_size=60))
def test_scan_matches_lockstep_drive(tags):
    assert an.excess_scan(tags) == oracles.drive_to_end(tags)


def test_scan_batch_matches_single_scans():
    gen = np.random.default_rng(3)
    batch = an.excess_scan_batch(gen, 0.4, 50, 7, chunk=16)
    gen = np.random.default_rng(3)
    cells = np.concatenate([gen.random((16, 7)), gen.random((16, 7)), gen.random((16, 7)),
                            gen.random((2, 7))]) < 0.4
    assert batch.tolist() == [an.excess_scan(cells[:, j]) for j in range(7)]


def test_geometric_parameter():
    assert an.geom_parameter(0.25) == pytest.approx(2 / 3)
    q = an.geom_parameter(0.25)
    assert (1 - q) / q == pytest.approx(0.5)
    assert an.geom_parameter(0.0) == 1.0
    with pytest.raises(ValueError):
        an.geom_parameter(0.5)


def test_geometric_law_at_moderate_density(gen):
    assert an.empirical_geom_check(0.4, 10**4, 10**5, gen) < 0.01


def test_tv_of_exact_sample_is_small():
    q = 0.3
    k = np.arange(200)
    pmf = an.geom_pmf(k, q)
    fake = np.repeat(k, np.round(pmf * 10**6).astype(int))
    assert an.tv_to_geometric(fake, q) < 1e-5


# J and the series bound --------------------------------------------------------------------


def test_j_all_spaces():
    cfg = InitialConfig.from_tags("S" * 21, lo=-10)
    assert an.compute_J(cfg, 50).J == 1


def test_j_examples_by_hand():
    # one car on each side of the origin: each inequality reads 2 * (0 + 1 + 1) < K
    cfg = InitialConfig.from_tags("SSSSSSCSCSSSSSS", lo=-7)
    res = an.compute_J(cfg, 30)
    assert res.J == 5
    assert not res.exceeded
    with pytest.raises(ValueError):
        an.compute_J(InitialConfig.from_tags("CS", lo=1), 5)


def test_j_exceeded():
    cfg = InitialConfig.from_tags("C" * 41, lo=-20)
    assert an.compute_J(cfg, 10).exceeded


def test_stable_cells():
    assert an._stable_cells(np.array([True, False, False])) == 3
    assert an._stable_cells(np.array([False, False, True])) == 2
    assert an._stable_cells(np.array([True, True, False])) == 0


def test_series_values_frozen():
    assert an.tau_upper_series(0.25) == pytest.approx(241663.9980905095, rel=1e-12)
    assert an.tau_upper_series(0.3) == pytest.approx(842999.9987143516, rel=1e-12)
    assert an.tau_upper_series(0.45) > an.tau_upper_series(0.40)


def test_series_self_consistency():
    a = an.tau_upper_series(0.25)
    b = an.tau_upper_series(0.25, tol=0.5e-12)
    assert abs(a - b) <= 1e-9 * a
    # direct summation
    q = an.geom_parameter(0.25)
    direct = sum(n * n * (2 * math.exp(-(0.25**2) * n / 2) + 4 * math.exp(-q * n * (1 / 8 - 0.25 / 4)))
                 for n in range(1, 20000))
    assert direct == pytest.approx(a, rel=1e-12)


def test_series_blow_up_rate():
    scaled = [an.tau_upper_series(p) * (0.5 - p) ** 6 for p in (0.40, 0.45, 0.48, 0.49)]
    assert max(scaled) < 50 and min(scaled) > 30
    with pytest.raises(ValueError):
        an.tau_upper_series(0.5)


def test_tail_bound_is_series_summand():
    assert an.j_tail_bound(50, 0.3) == pytest.approx(
        2 * math.exp(-0.04 * 25) + 4 * math.exp(-(0.4 / 0.7) * 50 * (0.125 - 0.075)))
