import numpy as np
import pytest
from hypothesis import given, strategies as st

from risdrl.baselines import (
    compare_schemes,
    instantaneous_solve,
    matched_filter_precoder,
    random_tx,
    zero_forcing_precoder,
)
from risdrl.channel import ChannelRealization, complex_gaussian, generate_offline_dataset
from risdrl.models import LocalSearchConfig, PrecoderRule
from risdrl.rates import OverheadParams, effective_channel, rate, sinr
from tests.helpers import random_csi


def realization(seed, M, N, K):
    rng = np.random.default_rng(seed)
    return ChannelRealization(
        G=complex_gaussian((N, M), rng), g=complex_gaussian((K, N), rng), h=complex_gaussian((K, M), rng)
    )


def min_rate_of(real, tx, sigma2=1.0):
    return float(np.min(rate(sinr(real, tx, sigma2))))


@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_random_tx_is_feasible(seed, power):
    tx = random_tx(3, 5, 2, power, np.random.default_rng(seed))
    assert tx.satisfies_power(equality=True)
    assert tx.satisfies_modulus()


def test_random_tx_is_reproducible():
    a = random_tx(2, 4, 2, 1.0, np.random.default_rng(3))
    b = random_tx(2, 4, 2, 1.0, np.random.default_rng(3))
    np.testing.assert_array_equal(a.W, b.W)
    np.testing.assert_array_equal(a.phase_angles, b.phase_angles)


def test_matched_filter_aligns_with_channel():
    V = complex_gaussian((2, 3), np.random.default_rng(0))
    W = matched_filter_precoder(V, 2.0)
    assert np.real(np.trace(W @ W.conj().T)) == pytest.approx(2.0)
    np.testing.assert_allclose(np.linalg.norm(W, axis=0), 1.0)
    for k in range(2):
        np.testing.assert_allclose(V[k] @ W[:, k], np.linalg.norm(V[k]))


def test_zero_forcing_cancels_interference():
    V = complex_gaussian((2, 4), np.random.default_rng(1))
    W = zero_forcing_precoder(V, 1.0)
    gains = V @ W
    off_diagonal = gains - np.diag(np.diag(gains))
    np.testing.assert_allclose(off_diagonal, 0.0, atol=1e-10)
    assert np.real(np.trace(W @ W.conj().T)) == pytest.approx(1.0)


def test_matched_filter_rejects_zero_channel():
    with pytest.raises(ValueError):
        matched_filter_precoder(np.zeros((2, 2), dtype=complex), 1.0)


@pytest.mark.parametrize("rule", PrecoderRule.ALL)
def test_local_search_is_monotone_and_feasible(rule):
    real = realization(2, 3, 4, 2)
    history = []
    cfg = LocalSearchConfig(iterations=15, candidates_per_iter=4, phase_step=0.3, precoder_rule=rule)
    tx = instantaneous_solve(real, 1.0, 1.0, cfg, np.random.default_rng(0), history)
    assert len(history) == 16
    assert all(b >= a for a, b in zip(history, history[1:]))
    assert history[-1] == pytest.approx(min_rate_of(real, tx))
    assert tx.satisfies_power(equality=True)
    assert tx.satisfies_modulus()


def test_zero_iterations_returns_best_random_candidate():
    real = realization(3, 2, 3, 2)
    cfg = LocalSearchConfig(iterations=0, candidates_per_iter=5)
    tx = instantaneous_solve(real, 1.0, 1.0, cfg, np.random.default_rng(7))
    rng = np.random.default_rng(7)
    candidates = [random_tx(2, 3, 2, 1.0, rng) for _ in range(5)]
    best = max(candidates, key=lambda c: min_rate_of(real, c))
    np.testing.assert_array_equal(tx.W, best.W)


def test_scalar_instance_is_near_grid_optimum():
    real = realization(4, 1, 1, 1)
    grid = 2 * np.pi * np.arange(720) / 720
    best_grid = 0.0
    for angle in grid:
        V = effective_channel(real, np.array([angle]))
        W = matched_filter_precoder(V, 1.0)
        best_grid = max(best_grid, float(rate(np.abs(V @ W)[0, 0] ** 2)))
    cfg = LocalSearchConfig(iterations=40, candidates_per_iter=8, phase_step=0.3)
    tx = instantaneous_solve(real, 1.0, 1.0, cfg, np.random.default_rng(0))
    assert min_rate_of(real, tx) >= 0.95 * best_grid


def test_local_search_rejects_bad_config():
    real = realization(5, 1, 1, 1)
    with pytest.raises(ValueError):
        instantaneous_solve(real, 1.0, 1.0, LocalSearchConfig(precoder_rule="bogus"), np.random.default_rng(0))
    with pytest.raises(ValueError):
        instantaneous_solve(real, 1.0, 1.0, LocalSearchConfig(candidates_per_iter=0), np.random.default_rng(0))


class CountingSolver:
    def __init__(self):
        self.calls = 0

    def __call__(self, real, sigma2, power, cfg, rng):
        self.calls += 1
        M, N, K = real.dims
        return random_tx(M, N, K, power, rng)


def test_solver_counts_are_one_versus_t():
    csi = random_csi(2, 3, 2, seed=0)
    dataset = generate_offline_dataset(csi, 150, seed=1)
    longterm_calls = []

    def solve_longterm():
        longterm_calls.append(1)
        return random_tx(2, 3, 2, 1.0, np.random.default_rng(0))

    solver = CountingSolver()
    comparison = compare_schemes(
        csi, dataset, 1.0, solve_longterm, LocalSearchConfig(), OverheadParams(150, 2, 3), seed=4, solver=solver
    )
    assert len(longterm_calls) == 1
    assert solver.calls == 150
    assert comparison.solver_calls_longterm == 1
    assert comparison.solver_calls_instantaneous == 150
    assert comparison.solver_calls_instantaneous / comparison.solver_calls_longterm == len(dataset)
    assert comparison.wallclock_longterm_s >= 0.0


def test_instantaneous_maur_respects_pilot_factor(small_csi, small_dataset):
    tx = random_tx(2, 3, 2, 1.0, np.random.default_rng(0))
    cfg = LocalSearchConfig(iterations=3, candidates_per_iter=3)
    comparison = compare_schemes(small_csi, small_dataset, 1.0, tx, cfg, OverheadParams(20, 2, 3), seed=0)
    assert comparison.pilot_factor == pytest.approx(1 - 6 / 20)
    assert comparison.maur_instantaneous <= comparison.pilot_factor * comparison.maur_instantaneous_unpenalized + 1e-12
    assert comparison.maur_longterm > 0


def test_ready_configuration_costs_no_longterm_solve(small_csi, small_dataset):
    tx = random_tx(2, 3, 2, 1.0, np.random.default_rng(0))
    cfg = LocalSearchConfig(iterations=1, candidates_per_iter=2)
    comparison = compare_schemes(small_csi, small_dataset, 1.0, tx, cfg, OverheadParams(30, 2, 3), seed=0)
    assert comparison.solver_calls_longterm == 0
    assert comparison.solver_calls_instantaneous == len(small_dataset)
    assert comparison.longterm_tx is tx


def test_instantaneous_maur_is_zero_when_pilots_fill_the_interval(small_csi, small_dataset, caplog):
    tx = random_tx(2, 3, 2, 1.0, np.random.default_rng(0))
    cfg = LocalSearchConfig(iterations=1, candidates_per_iter=2)
    with caplog.at_level("WARNING"):
        comparison = compare_schemes(small_csi, small_dataset, 1.0, tx, cfg, OverheadParams(6, 2, 3), seed=0)
    assert comparison.maur_instantaneous == 0.0
    assert comparison.maur_instantaneous_unpenalized > 0
    assert "clamp to zero" in caplog.text


def test_large_coherence_interval_removes_the_penalty(small_csi, small_dataset):
    tx = random_tx(2, 3, 2, 1.0, np.random.default_rng(0))
    cfg = LocalSearchConfig(iterations=1, candidates_per_iter=2)
    comparison = compare_schemes(small_csi, small_dataset, 1.0, tx, cfg, OverheadParams(10**9, 2, 3), seed=0)
    assert comparison.maur_instantaneous == pytest.approx(comparison.maur_instantaneous_unpenalized, rel=1e-7)


def test_thread_pool_does_not_change_results(small_csi, small_dataset):
    tx = random_tx(2, 3, 2, 1.0, np.random.default_rng(0))
    serial = compare_schemes(
        small_csi, small_dataset, 1.0, tx, LocalSearchConfig(iterations=2, workers=1), OverheadParams(30, 2, 3), seed=8
    )
    pooled = compare_schemes(
        small_csi, small_dataset, 1.0, tx, LocalSearchConfig(iterations=2, workers=3), OverheadParams(30, 2, 3), seed=8
    )
    assert serial.maur_instantaneous == pooled.maur_instantaneous


def test_compare_schemes_checks_dimensions(small_csi, small_dataset):
    tx = random_tx(2, 3, 2, 1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        compare_schemes(small_csi, small_dataset, 1.0, tx, LocalSearchConfig(), OverheadParams(30, 2, 5), seed=0)
