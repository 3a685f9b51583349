"""End-to-end checks on seeded random ensembles.

Horizons are adaptive: max(200/|Re λ₂|, 30/|worst block abscissa|). Dense
graphs with heavy weights make the oscillator blocks overdamped, and their
slowest root then sits near 1/|λ_max| rather than near |Re λ₂|.
"""

import time

import numpy as np
import pytest

from syncgain.ensembles import random_connected, random_neutral_pair
from syncgain.interconnect import spectrum
from syncgain.simulate import (
    OSCILLATOR,
    harmonic_oscillators,
    input_coupled_array,
    output_coupled_array,
    simulate_array,
    sync_metrics,
)
from syncgain.synthesis import dualize, synth_algorithm1
from syncgain.verify import (
    criterion_agreement,
    demo_statement,
    spectral_sync_test,
)

DRAWS = 10
MAX_ATTEMPTS = 200
MIN_DECAY = 0.01


def adaptive_horizon(gamma, abscissa: float) -> float:
    lambda2 = abs(spectrum(gamma).lambda2_re)
    return max(200.0 / lambda2, 30.0 / abs(abscissa))


def test_oscillators_over_random_graphs() -> None:
    rng = np.random.default_rng(2024)
    M = np.diag([0.0, 1.0])
    start = time.perf_counter()
    for _ in range(DRAWS):
        gamma = random_connected(rng, int(rng.integers(2, 9)))
        verdict = spectral_sync_test(OSCILLATOR, M, gamma)
        assert verdict.overall
        x0 = rng.normal(size=2 * gamma.p)
        t_end = adaptive_horizon(gamma, verdict.worst.abscissa)
        traj = simulate_array(
            harmonic_oscillators(gamma, x0), t_end, 400, cross_check=False
        )
        summary = sync_metrics(traj)
        assert summary.final_sync_error <= 1e-6 * summary.initial_sync_error
    assert time.perf_counter() - start < 10.0


def test_algorithm1_tracks_weighted_average() -> None:
    rng = np.random.default_rng(31)
    done = attempts = 0
    while done < DRAWS and attempts < MAX_ATTEMPTS:
        attempts += 1
        pair = random_neutral_pair(rng, int(rng.integers(1, 5)))
        gain = synth_algorithm1(pair)
        gamma = random_connected(rng, int(rng.integers(2, 7)))
        verdict = spectral_sync_test(pair.A, gain.L @ pair.C, gamma)
        assert verdict.overall
        if verdict.worst.abscissa > -MIN_DECAY:
            continue
        x0 = rng.normal(size=gamma.p * pair.n)
        spec = output_coupled_array(pair, gain.L, gamma, x0)
        t_end = adaptive_horizon(gamma, verdict.worst.abscissa)
        traj = simulate_array(spec, t_end, 400, cross_check=False)
        summary = sync_metrics(traj)
        assert summary.final_tracking_error <= 1e-4 * np.linalg.norm(x0)
        done += 1
    assert done == DRAWS


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_ring_counterexample_grows(rho: float) -> None:
    report = demo_statement("f", [[2.0], [rho]])
    assert report.witness["p_star"] <= 200
    assert report.trajectory.times[-1] == 50.0
    assert report.summary.final_sync_error >= report.summary.initial_sync_error


def test_weak_edge_exponent() -> None:
    report = demo_statement("g", [[1.0]])
    predicted = report.witness["predicted_exponent"]
    assert predicted == pytest.approx(0.9)
    assert report.witness["measured_exponent"] == pytest.approx(
        predicted, rel=0.05
    )


def test_criterion_matches_simulation() -> None:
    result = criterion_agreement(np.random.default_rng(0), cases=20)
    assert result.margin == 0.05
    assert len(result.cases) == 20
    disagreements = [c for c in result.cases if not c.agree]
    assert disagreements == []


def test_dual_input_coupling_synchronizes() -> None:
    rng = np.random.default_rng(9)
    done = attempts = 0
    while done < 5 and attempts < MAX_ATTEMPTS:
        attempts += 1
        # (Bᵀ, Aᵀ) is neutrally stable and detectable by construction
        source = random_neutral_pair(rng, int(rng.integers(1, 5)))
        A, B = source.A.T, source.C.T
        K = dualize(A, B).K
        gamma = random_connected(rng, int(rng.integers(2, 7)))
        verdict = spectral_sync_test(A, B @ K, gamma)
        assert verdict.overall
        if verdict.worst.abscissa > -MIN_DECAY:
            continue
        x0 = rng.normal(size=gamma.p * A.shape[0])
        spec = input_coupled_array(A, B, K, gamma, x0)
        t_end = adaptive_horizon(gamma, verdict.worst.abscissa)
        traj = simulate_array(spec, t_end, 400, cross_check=False)
        summary = sync_metrics(traj)
        assert summary.final_sync_error <= 1e-6 * summary.initial_sync_error
        done += 1
    assert done == 5
