"""Spectral synchronization test, Riccati sampling and counterexamples.

The array ẋ = (I⊗A + Γ⊗M)x synchronizes iff A + λM is Hurwitz for every
eigenvalue λ of Γ other than one zero eigenvalue. Each block is tested on
its real embedding. When zero is a repeated eigenvalue (Γ not connected)
the surplus zero eigenvalues contribute the block A itself.
"""

import warnings
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from syncgain.ensembles import random_array_case
from syncgain.errors import PreconditionError
from syncgain.interconnect import (
    Interconnection,
    from_weighted_edges,
    ring,
    spectrum,
)
from syncgain.linops import (
    Mat,
    as_matrix,
    complex_abscissa,
    solve_care,
)
from syncgain.simulate import (
    ArraySpec,
    ArrayTrajectory,
    SyncSummary,
    build_closed_loop,
    output_coupled_array,
    pairwise_sync_error,
    simulate_array,
    sync_metrics,
)
from syncgain.sysclass import SystemPair

StatementId = Literal["e", "f", "g", "h"]
STATEMENTS: tuple[str, ...] = ("e", "f", "g", "h")

DEFAULT_SIGMAS = (1.0, 2.0, 5.0, 10.0)
DEFAULT_OMEGAS = (0.0, 1.0, -1.0, 5.0, -5.0, 10.0, -10.0)
DEFAULT_RHO = 1.0
DEFAULT_P_MAX = 200
PHASE_GRID = 720
H_GAINS = (-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0)


@dataclass(frozen=True)
class BlockRecord:
    index: int
    eigenvalue: complex
    abscissa: float
    hurwitz: bool
    indeterminate: bool
    surplus_zero: bool = False


@dataclass(frozen=True)
class SpectralVerdict:
    """Per-eigenvalue block results.

    ``margin`` is the smallest |abscissa| over the tested blocks (None when
    there are none); ``required_margin`` is the guard the test ran with.
    """

    records: tuple[BlockRecord, ...]
    overall: bool
    margin: float | None
    required_margin: float

    @property
    def indeterminate(self) -> bool:
        return any(r.indeterminate for r in self.records)

    @property
    def worst(self) -> BlockRecord | None:
        if not self.records:
            return None
        return max(self.records, key=lambda r: r.abscissa)


def spectral_sync_test(
    A: ArrayLike,
    M: ArrayLike,
    gamma: Interconnection,
    margin: float = 0.0,
    eps_zero: float | None = None,
) -> SpectralVerdict:
    """Hurwitz test of A + λM for every nonzero eigenvalue λ of Γ.

    A block counts as Hurwitz when its abscissa is below −margin; blocks
    with |abscissa| ≤ margin are also marked indeterminate.
    """
    A = as_matrix(A, "A", square=True)
    M = as_matrix(M, "M", square=True)
    spec = spectrum(gamma, eps_zero)
    lambdas = [(complex(lam), False) for lam in spec.nonzero]
    lambdas += [(0j, True)] * max(0, spec.zero_multiplicity - 1)

    records = []
    for index, (lam, surplus) in enumerate(lambdas):
        abscissa = complex_abscissa(A + lam.real * M, lam.imag * M)
        records.append(
            BlockRecord(
                index=index,
                eigenvalue=lam,
                abscissa=abscissa,
                hurwitz=abscissa < -margin,
                indeterminate=abs(abscissa) <= margin,
                surplus_zero=surplus,
            )
        )
    return SpectralVerdict(
        records=tuple(records),
        overall=all(r.hurwitz for r in records),
        margin=min((abs(r.abscissa) for r in records), default=None),
        required_margin=margin,
    )


@dataclass(frozen=True)
class RingSearchResult:
    p_star: int | None
    eigenvalue: complex | None
    abscissa: float | None
    p_max: int


def ring_instability_search(
    C: ArrayLike,
    A: ArrayLike,
    L: ArrayLike,
    p_max: int = DEFAULT_P_MAX,
    margin: float = 0.0,
) -> RingSearchResult:
    """Smallest p ≤ p_max for which ring(p) breaks synchronization."""
    if p_max < 2:
        raise PreconditionError(f"p_max must be at least 2, got {p_max}.")
    pair = SystemPair(C=C, A=A)
    M = as_matrix(L, "L") @ pair.C
    for p in range(2, p_max + 1):
        verdict = spectral_sync_test(pair.A, M, ring(p), margin)
        if not verdict.overall:
            worst = verdict.worst
            return RingSearchResult(
                p_star=p,
                eigenvalue=worst.eigenvalue,
                abscissa=worst.abscissa,
                p_max=p_max,
            )
    return RingSearchResult(None, None, None, p_max)


@dataclass(frozen=True)
class Claim1Result:
    holds: bool
    worst_abscissa: float
    samples: int


def claim1_check(
    C: ArrayLike,
    A: ArrayLike,
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS,
    omegas: tuple[float, ...] = DEFAULT_OMEGAS,
    eps_care: float = 1e-8,
) -> Claim1Result:
    """Sample the Hurwitz property of A − (σ+jω)·P·CᵀC for σ ≥ 1.

    Raises:
        PreconditionError: If any σ < 1.
        NoStabilizingSolutionError: If (C, A) is not detectable.
    """
    if any(s < 1 for s in sigmas):
        raise PreconditionError(
            f"Every sigma must be ≥ 1, got {min(sigmas)}."
        )
    pair = SystemPair(C=C, A=A)
    P = solve_care(pair.C, pair.A, eps_care)
    PQ = P @ pair.C.T @ pair.C
    worst = max(
        complex_abscissa(pair.A - s * PQ, -w * PQ)
        for s in sigmas
        for w in omegas
    )
    return Claim1Result(
        holds=worst < 0,
        worst_abscissa=float(worst),
        samples=len(sigmas) * len(omegas),
    )


# ----------------------------------------------------------------------
# Counterexamples
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    statement: str
    pair: SystemPair
    gamma: Interconnection
    L: Mat
    witness: dict[str, Any]
    verdict: SpectralVerdict
    summary: SyncSummary
    trajectory: ArrayTrajectory
    confirmed: bool
    notes: list[str] = field(default_factory=list)


def _run(spec: ArraySpec, t_end: float, steps: int, eps_int: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        traj = simulate_array(spec, t_end, steps, eps_int=eps_int)
    return traj, sync_metrics(traj)


def _statement_e(eps_int: float) -> CounterexampleReport:
    pair = SystemPair(C=[[1.0]], A=[[0.0]])
    gamma = from_weighted_edges(2, [])
    L = np.array([[1.0]])
    spec = output_coupled_array(pair, L, gamma, [0.0, 1.0])
    traj, summary = _run(spec, 10.0, 100, eps_int)
    change = float(np.max(np.abs(traj.states - traj.states[0])))
    return CounterexampleReport(
        statement="e",
        pair=pair,
        gamma=gamma,
        L=L,
        witness={"max_state_change": change},
        verdict=spectral_sync_test(pair.A, L @ pair.C, gamma),
        summary=summary,
        trajectory=traj,
        confirmed=change <= 1e-12 and summary.final_sync_error > 0,
    )


def unstable_mode_state(spec_matrix: Mat, p: int, n: int) -> np.ndarray:
    """Real initial state along the most unstable closed-loop mode.

    Among the phases Re(e^{jφ}v) of the eigenvector v, the one with the
    smallest pairwise sync error is chosen, so the sync error along the
    mode never drops below its initial value while the mode grows.
    """
    vals, vecs = linalg.eig(spec_matrix)
    v = vecs[:, int(np.argmax(vals.real))]
    phases = np.linspace(0.0, 2 * np.pi, PHASE_GRID, endpoint=False)
    candidates = np.real(np.exp(1j * phases)[:, None] * v[None, :])
    norms = np.linalg.norm(candidates, axis=1)
    errors = pairwise_sync_error(candidates.reshape(PHASE_GRID, p, n))
    # a real eigenvector vanishes at φ = π/2
    errors[norms < 1e-3 * norms.max()] = np.inf
    x0 = candidates[int(np.argmin(errors))]
    return x0 / np.linalg.norm(x0)


def _statement_f(
    L: ArrayLike | None, p_max: int, eps_int: float
) -> CounterexampleReport:
    pair = SystemPair(C=[[1.0, 0.0]], A=[[0.0, 1.0], [0.0, 0.0]])
    L = np.array([[2.0], [DEFAULT_RHO]]) if L is None else as_matrix(L, "L")
    search = ring_instability_search(pair.C, pair.A, L, p_max)
    witness: dict[str, Any] = {
        "p_star": search.p_star,
        "eigenvalue": search.eigenvalue,
        "abscissa": search.abscissa,
        "p_max": p_max,
    }
    notes = []
    if search.p_star is None:
        notes.append(f"No ring up to p={p_max} breaks synchronization.")
        gamma = ring(p_max)
    else:
        gamma = ring(search.p_star)
    base = output_coupled_array(pair, L, gamma, np.zeros(gamma.p * 2))
    x0 = unstable_mode_state(build_closed_loop(base), gamma.p, pair.n)
    spec = output_coupled_array(pair, L, gamma, x0)
    traj, summary = _run(spec, 50.0, 500, eps_int)
    growth = summary.final_sync_error / summary.initial_sync_error
    witness["growth"] = growth
    return CounterexampleReport(
        statement="f",
        pair=pair,
        gamma=gamma,
        L=L,
        witness=witness,
        verdict=spectral_sync_test(pair.A, spec.M, gamma),
        summary=summary,
        trajectory=traj,
        confirmed=search.p_star is not None and growth >= 1.0,
        notes=notes,
    )


def statement_g_epsilon(L: float) -> float:
    """Coupling weight ε with 1 − εL ≥ 1/2."""
    return 0.1 if L <= 0 else min(0.1, 0.5 / L)


def _statement_g(
    L: ArrayLike | None, eps_int: float
) -> CounterexampleReport:
    pair = SystemPair(C=[[1.0]], A=[[1.0]])
    L = np.array([[1.0]]) if L is None else as_matrix(L, "L")
    gain = float(L[0, 0])
    eps = statement_g_epsilon(gain)
    gamma = from_weighted_edges(2, [(1, 2, eps)])
    spec = output_coupled_array(pair, L, gamma, [1.0, 0.0])
    traj, summary = _run(spec, 5.0, 500, eps_int)
    predicted = 1.0 - eps * gain
    return CounterexampleReport(
        statement="g",
        pair=pair,
        gamma=gamma,
        L=L,
        witness={
            "epsilon": eps,
            "predicted_exponent": predicted,
            "measured_exponent": summary.exponent,
        },
        verdict=spectral_sync_test(pair.A, spec.M, gamma),
        summary=summary,
        trajectory=traj,
        confirmed=predicted > 0 and not summary.decayed,
    )


def _statement_h(eps_int: float) -> CounterexampleReport:
    pair = SystemPair(C=[[0.0]], A=[[0.0]])
    gamma = ring(2).scaled(10.0)
    finals = []
    kept = None
    for gain in H_GAINS:
        L = np.array([[gain]])
        spec = output_coupled_array(pair, L, gamma, [0.0, 1.0])
        traj, summary = _run(spec, 10.0, 100, eps_int)
        finals.append(summary.final_sync_error)
        if gain == 1.0:
            kept = (L, spec, traj, summary)
    L, spec, traj, summary = kept
    return CounterexampleReport(
        statement="h",
        pair=pair,
        gamma=gamma,
        L=L,
        witness={"gains": list(H_GAINS), "final_sync_errors": finals},
        verdict=spectral_sync_test(pair.A, spec.M, gamma),
        summary=summary,
        trajectory=traj,
        confirmed=all(abs(f - 1.0) <= 1e-12 for f in finals),
    )


def demo_statement(
    statement: str,
    L: ArrayLike | None = None,
    *,
    p_max: int = DEFAULT_P_MAX,
    eps_int: float = 1e-6,
) -> CounterexampleReport:
    """Build and run the counterexample for statement e, f, g or h.

    ``L`` replaces the default gain for statements f and g.
    """
    if statement == "e":
        return _statement_e(eps_int)
    if statement == "f":
        return _statement_f(L, p_max, eps_int)
    if statement == "g":
        return _statement_g(L, eps_int)
    if statement == "h":
        return _statement_h(eps_int)
    raise PreconditionError(
        f"Unknown statement '{statement}'; expected one of "
        f"{', '.join(STATEMENTS)}."
    )


# ----------------------------------------------------------------------
# Criterion vs simulation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleCase:
    index: int
    n: int
    p: int
    overall: bool
    decayed: bool
    abscissa: float
    horizon: float

    @property
    def agree(self) -> bool:
        return self.overall == self.decayed


@dataclass(frozen=True)
class EnsembleResult:
    cases: tuple[EnsembleCase, ...]
    margin: float
    rejected: int

    @property
    def agreements(self) -> int:
        return sum(c.agree for c in self.cases)


def criterion_agreement(
    rng: np.random.Generator,
    cases: int = 20,
    margin: float = 0.05,
    *,
    horizon_factor: float = 30.0,
    steps: int = 200,
    decay_tol: float = 1e-6,
) -> EnsembleResult:
    """Compare the spectral verdict with simulated decay on random arrays.

    Cases whose worst block abscissa is within ``margin`` of the axis are
    redrawn. Each case runs to horizon_factor/|worst abscissa|.
    """
    results = []
    rejected = 0
    while len(results) < cases:
        A, M, gamma = random_array_case(rng)
        verdict = spectral_sync_test(A, M, gamma, margin)
        if verdict.indeterminate:
            rejected += 1
            continue
        n = A.shape[0]
        abscissa = verdict.worst.abscissa
        horizon = horizon_factor / abs(abscissa)
        x0 = rng.normal(size=gamma.p * n)
        traj = simulate_array(
            ArraySpec(A=A, M=M, gamma=gamma, x0=x0),
            horizon,
            steps,
            cross_check=False,
            track=False,
        )
        summary = sync_metrics(traj, tol=decay_tol)
        results.append(
            EnsembleCase(
                index=len(results),
                n=n,
                p=gamma.p,
                overall=verdict.overall,
                decayed=summary.decayed,
                abscissa=abscissa,
                horizon=horizon,
            )
        )
    return EnsembleResult(
        cases=tuple(results), margin=margin, rejected=rejected
    )
