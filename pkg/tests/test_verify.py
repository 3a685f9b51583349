import numpy as np
import pytest

from syncgain.ensembles import random_connected
from syncgain.errors import NoStabilizingSolutionError, PreconditionError
from syncgain.interconnect import from_weighted_edges, ring, ring_eigenvalue
from syncgain.verify import (
    claim1_check,
    criterion_agreement,
    demo_statement,
    ring_instability_search,
    spectral_sync_test,
    statement_g_epsilon,
    unstable_mode_state,
)

DOUBLE_INTEGRATOR_A = [[0.0, 1.0], [0.0, 0.0]]
POSITION = [[1.0, 0.0]]


def ring_oracle(rho: float, p_max: int = 200) -> int | None:
    """First p whose ring puts a root of s² − 2λs − ρλ in Re s > 0."""
    for p in range(2, p_max + 1):
        for k in range(1, p):
            lam = ring_eigenvalue(p, k)
            root = np.sqrt(lam * lam + rho * lam)
            if max((lam + root).real, (lam - root).real) > 0:
                return p
    return None


### Spectral test ###


def test_consensus_synchronizes() -> None:
    verdict = spectral_sync_test([[0.0]], [[1.0]], ring(4))
    assert verdict.overall
    assert len(verdict.records) == 3
    assert verdict.margin == pytest.approx(1.0)
    assert verdict.worst.abscissa == pytest.approx(-1.0)


@pytest.mark.parametrize("factor", [0.01, 1.0, 100.0])
def test_consensus_verdict_is_scale_invariant(factor: float) -> None:
    rng = np.random.default_rng(12)
    for _ in range(5):
        G = random_connected(rng, int(rng.integers(2, 8)))
        base = spectral_sync_test([[0.0]], [[1.0]], G)
        moved = spectral_sync_test([[0.0]], [[1.0]], G.scaled(factor))
        assert base.overall and moved.overall
        assert moved.worst.abscissa == pytest.approx(
            factor * base.worst.abscissa
        )


def test_uncoupled_pair_has_repeated_zero_block() -> None:
    verdict = spectral_sync_test([[0.0]], [[1.0]], from_weighted_edges(2, []))
    assert not verdict.overall
    (record,) = verdict.records
    assert record.surplus_zero
    assert record.abscissa == 0.0


def test_margin_marks_indeterminate() -> None:
    verdict = spectral_sync_test([[-0.01]], [[0.0]], ring(3), margin=0.05)
    assert verdict.indeterminate
    assert not verdict.overall
    assert verdict.required_margin == 0.05


def test_complex_eigenvalue_blocks() -> None:
    # consensus over ring(5): every block is the scalar λ_k
    verdict = spectral_sync_test([[0.0]], [[1.0]], ring(5))
    expected = sorted(ring_eigenvalue(5, k).real for k in range(1, 5))
    assert sorted(r.abscissa for r in verdict.records) == pytest.approx(
        expected
    )


### Ring instability (statement f) ###


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_ring_search_matches_root_formula(rho: float) -> None:
    result = ring_instability_search(
        POSITION, DOUBLE_INTEGRATOR_A, [[2.0], [rho]]
    )
    assert result.p_star is not None
    assert result.p_star <= 200
    assert result.p_star == ring_oracle(rho)
    assert result.abscissa > 0


def test_ring_search_none_for_stabilizing_gain() -> None:
    result = ring_instability_search([[1.0]], [[0.0]], [[1.0]], p_max=20)
    assert result.p_star is None
    assert result.p_max == 20


def test_ring_search_p_max() -> None:
    with pytest.raises(PreconditionError):
        ring_instability_search([[1.0]], [[0.0]], [[1.0]], p_max=1)


def test_unstable_mode_state_real_eigenvector() -> None:
    M = np.diag([1.0, -1.0])
    x0 = unstable_mode_state(M, 2, 1)
    assert np.linalg.norm(x0) == pytest.approx(1.0)
    assert abs(x0[1]) < 1e-12


### Claim 1 ###


def test_claim1_double_integrator() -> None:
    result = claim1_check(POSITION, DOUBLE_INTEGRATOR_A)
    assert result.holds
    assert result.samples == 28
    assert result.worst_abscissa < 0


def test_claim1_sigma_below_one() -> None:
    with pytest.raises(PreconditionError, match="sigma"):
        claim1_check(POSITION, DOUBLE_INTEGRATOR_A, sigmas=(0.5,))


def test_claim1_undetectable() -> None:
    with pytest.raises(NoStabilizingSolutionError):
        claim1_check([[0.0]], [[0.0]])


### Counterexamples ###


def test_statement_e() -> None:
    report = demo_statement("e")
    assert report.confirmed
    assert not report.verdict.overall
    assert report.witness["max_state_change"] == 0.0
    assert report.summary.final_sync_error == 1.0


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_statement_f(rho: float) -> None:
    report = demo_statement("f", [[2.0], [rho]])
    assert report.confirmed
    assert report.witness["p_star"] == ring_oracle(rho)
    assert report.summary.final_sync_error >= report.summary.initial_sync_error
    assert not report.verdict.overall


def test_statement_f_default_gain() -> None:
    report = demo_statement("f")
    assert report.witness["p_star"] == ring_oracle(1.0)
    assert report.gamma.p == report.witness["p_star"]
    assert report.L.tolist() == [[2.0], [1.0]]


def test_statement_g() -> None:
    report = demo_statement("g")
    assert report.confirmed
    assert report.witness["epsilon"] == 0.1
    measured = report.witness["measured_exponent"]
    assert measured == pytest.approx(0.9, rel=0.05)


@pytest.mark.parametrize(
    "L, eps", [(1.0, 0.1), (10.0, 0.05), (-3.0, 0.1), (0.0, 0.1)]
)
def test_statement_g_epsilon(L: float, eps: float) -> None:
    assert statement_g_epsilon(L) == pytest.approx(eps)
    assert 1.0 - eps * L >= 0.5


def test_statement_h() -> None:
    report = demo_statement("h")
    assert report.confirmed
    finals = report.witness["final_sync_errors"]
    assert len(finals) == len(report.witness["gains"])
    assert all(f == pytest.approx(1.0) for f in finals)


def test_unknown_statement() -> None:
    with pytest.raises(PreconditionError, match="Unknown statement"):
        demo_statement("z")


### Criterion vs simulation ###


def test_criterion_agreement_small_ensemble() -> None:
    result = criterion_agreement(np.random.default_rng(5), cases=5)
    assert len(result.cases) == 5
    assert result.agreements == 5
    for case in result.cases:
        assert case.horizon == pytest.approx(30.0 / abs(case.abscissa))
