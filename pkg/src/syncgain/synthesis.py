"""Synchronizing output-feedback gains.

Four constructions are available, ordered by the size of the family of
interconnections they are guaranteed to synchronize over:

    hurwitz_zero    L = 0                          every Γ in G≥0
    algorithm1      L = U·P⁻¹·(CU)ᵀ                every connected Γ (G>0)
    fullstate_pinv  L = (CᵀC)⁻¹Cᵀ                  every connected Γ (G>0)
    riccati_delta   L = max{1, 1/δ}·P·Cᵀ           every Γ with |Re λ₂| ≥ δ

:func:`synth_auto` picks the first one that applies to a pair.
"""

import warnings
from dataclasses import dataclass, field
from math import comb
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from syncgain.errors import (
    ConvergenceError,
    NoGuaranteeError,
    PreconditionError,
)
from syncgain.linops import (
    Mat,
    as_matrix,
    care_residual,
    default_eig_tol,
    eig,
    expm,
    frozen,
    is_hurwitz,
    numerical_rank,
    solve_care,
    split_center_stable,
)
from syncgain.sysclass import SystemPair, classify, is_neutrally_stable

Branch = Literal[
    "hurwitz_zero", "algorithm1", "fullstate_pinv", "riccati_delta"
]

GUARANTEES: dict[str, str] = {
    "hurwitz_zero": "G>=0",
    "algorithm1": "G>0",
    "fullstate_pinv": "G>0",
    "riccati_delta": "G>=delta",
}

WINDOW_ORDER = 4
GAUSS_NODES = 24
MIN_TURNS = 200.0
MAX_HORIZON = 1e5


@dataclass(frozen=True, eq=False)
class FeedbackGain:
    L: Mat
    branch: Branch
    delta: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def guarantee(self) -> str:
        return GUARANTEES[self.branch]

    @property
    def shape(self) -> tuple[int, int]:
        return self.L.shape


@dataclass(frozen=True, eq=False)
class NeutralGram:
    """Cesàro limit P of e^{Fᵀτ}e^{Fτ} and how it was obtained."""

    P: Mat
    horizon: float
    residual: float


# ----------------------------------------------------------------------
# Gram limit
# ----------------------------------------------------------------------


def _window_coefficients(q: int) -> np.ndarray:
    """Monomial coefficients of (s(1−s))^q normalised to unit integral."""
    c = np.zeros(2 * q + 1)
    for j in range(q + 1):
        c[q + j] = comb(q, j) * (-1) ** j
    return c / np.sum(c / np.arange(1, 2 * q + 2))


def neutral_gram(
    F: ArrayLike, eps_gram: float = 1e-8, eps_eig: float | None = None
) -> NeutralGram:
    """Limit of t⁻¹∫₀ᵗ e^{Fᵀτ}e^{Fτ}dτ for F with all eigenvalues on the axis.

    The plain time average converges like 1/t, so the average is taken
    against the window (s(1−s))⁴ on [0, T], which has the same limit and
    converges much faster for separated frequencies. The window moments
    m_k(T) = ∫₀¹ s^k e^{FᵀTs}e^{FTs} ds are computed once by Gauss-Legendre
    on a short base panel and then carried to 2T, 4T, ... exactly via

        m_k(2T) = 2^-(k+1)·[m_k(T) + E_Tᵀ·(Σ_j C(k,j)·m_j(T))·E_T]

    with E_T = e^{FT}.

    Raises:
        PreconditionError: If F has an eigenvalue off the axis or a
            non-trivial Jordan block on it.
        ConvergenceError: If the estimates have not settled at T = 1e5.
    """
    F = as_matrix(F, "F", square=True)
    n = F.shape[0]
    tol = default_eig_tol(F) if eps_eig is None else eps_eig
    re = eig(F).eigenvalues.real
    if np.any(np.abs(re) > tol):
        raise PreconditionError(
            f"F has an eigenvalue with |Re| = {np.max(np.abs(re)):.3e} > "
            f"{tol:.3e}; the Gram limit needs all eigenvalues on the axis."
        )
    if not is_neutrally_stable(F, tol):
        raise PreconditionError("F has a Jordan block of size > 1.")

    norm_F = float(np.linalg.norm(F, 2))
    if norm_F <= tol:
        # only zero modes; the Gram limit of a zero F is I
        return NeutralGram(P=frozen(np.eye(n)), horizon=0.0, residual=0.0)

    K = 2 * WINDOW_ORDER
    powers = np.arange(K + 1)
    coeffs = _window_coefficients(WINDOW_ORDER)
    binom = np.array(
        [[comb(k, j) for j in range(K + 1)] for k in range(K + 1)],
        dtype=float,
    )

    T = min(1.0, 1.0 / norm_F)
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
    s, w = 0.5 * (nodes + 1.0), 0.5 * weights
    moments = np.zeros((K + 1, n, n))
    for si, wi in zip(s, w):
        E = expm(F, T * si)
        moments += (wi * si**powers)[:, None, None] * (E.T @ E)[None]

    estimate = np.tensordot(coeffs, moments, axes=1)
    while T < MAX_HORIZON:
        E_T = expm(F, T)
        mixed = np.tensordot(binom, moments, axes=1)
        moments = (0.5 ** (powers + 1))[:, None, None] * (
            moments + E_T.T @ mixed @ E_T
        )
        T *= 2.0

        new = np.tensordot(coeffs, moments, axes=1)
        new = 0.5 * (new + new.T)
        change = float(np.linalg.norm(new - estimate, 2))
        estimate = new
        scale = max(1.0, float(np.linalg.norm(new, 2)))
        residual = float(np.linalg.norm(new @ F + F.T @ new, 2))
        if (
            T * norm_F >= MIN_TURNS
            and change <= 0.5 * eps_gram * scale
            and residual <= eps_gram * scale
        ):
            if np.min(linalg.eigvalsh(new)) <= 0:
                raise ConvergenceError(
                    "Gram estimate settled but is not positive definite."
                )
            return NeutralGram(P=frozen(new), horizon=T, residual=residual)

    raise ConvergenceError(
        f"Gram estimate did not settle to {eps_gram:.1e} by horizon "
        f"{T:.3g}; eigenvalues of F may be too close together."
    )


def skew_normal_form(
    F: ArrayLike, P: ArrayLike, CU: ArrayLike
) -> tuple[Mat, Mat]:
    """S = P^½·F·P^-½ and H = CU·P^-½.

    PF + FᵀP = 0 makes S skew-symmetric, which turns the center part of the
    Algorithm-1 array into ẋ = (I⊗S + Γ⊗HᵀH)x.
    """
    d, Q = linalg.eigh(np.asarray(P, dtype=float))
    root = Q @ np.diag(np.sqrt(d)) @ Q.T
    root_inv = Q @ np.diag(1.0 / np.sqrt(d)) @ Q.T
    S = root @ np.asarray(F, dtype=float) @ root_inv
    H = np.asarray(CU, dtype=float) @ root_inv
    return S, H


# ----------------------------------------------------------------------
# Branches
# ----------------------------------------------------------------------


def synth_hurwitz(pair: SystemPair) -> FeedbackGain:
    if not is_hurwitz(pair.A):
        raise PreconditionError(
            "A is not Hurwitz; the zero gain synchronizes nothing."
        )
    return FeedbackGain(
        L=frozen(np.zeros((pair.n, pair.m))),
        branch="hurwitz_zero",
        diagnostics={"abscissa": eig(pair.A).abscissa},
    )


def synth_algorithm1(
    pair: SystemPair,
    eps_eig: float | None = None,
    eps_gram: float = 1e-8,
) -> FeedbackGain:
    """L = U·P⁻¹·(CU)ᵀ for a neutrally stable, detectable pair.

    U is the orthonormal basis of the imaginary-axis invariant subspace
    from the ordered Schur form, F = U'AU its restriction and P the Gram
    limit of F.

    Raises:
        PreconditionError: If (C, A) is not neutrally stable and detectable.
    """
    report = classify(pair, eps_eig)
    if not (report.in_AN and report.in_OP):
        raise PreconditionError(
            f"Algorithm 1 needs a neutrally stable, detectable pair; got "
            f"A_N={report.in_AN}, O_P={report.in_OP}."
        )
    split = split_center_stable(pair.A, report.eig_tol)
    diagnostics: dict[str, Any] = {
        "n1": split.n1,
        "n2": split.n2,
        "eig_tol": report.eig_tol,
        "split_residual": split.residual,
        "split_condition": split.condition,
    }
    if split.n1 == 0:
        warnings.warn(
            "A has no eigenvalue on the imaginary axis; Algorithm 1 "
            "returns L = 0.",
            stacklevel=2,
        )
        return FeedbackGain(
            L=frozen(np.zeros((pair.n, pair.m))),
            branch="algorithm1",
            diagnostics=diagnostics,
        )

    gram = neutral_gram(split.F, eps_gram, report.eig_tol)
    CU = pair.C @ split.U
    L = split.U @ linalg.solve(gram.P, CU.T, assume_a="pos")
    S, _ = skew_normal_form(split.F, gram.P, CU)
    diagnostics |= {
        "P": gram.P.tolist(),
        "U": split.U.tolist(),
        "gram_horizon": gram.horizon,
        "gram_residual": gram.residual,
        "skew_defect": float(np.linalg.norm(S + S.T, 2)),
    }
    return FeedbackGain(
        L=frozen(L), branch="algorithm1", diagnostics=diagnostics
    )


def synth_fullstate(
    pair: SystemPair, eps_eig: float | None = None
) -> FeedbackGain:
    """L = (CᵀC)⁻¹Cᵀ, a left inverse of C, so that LC = I.

    Raises:
        PreconditionError: If C is not of full column rank or A has an
            eigenvalue right of the axis.
    """
    rank, _ = numerical_rank(pair.C)
    if rank < pair.n:
        raise PreconditionError(
            f"C has rank {rank} < n = {pair.n}; full-state feedback needs "
            f"full column rank."
        )
    report = classify(pair, eps_eig)
    if not report.in_AJ:
        worst = max(m.eigenvalue.real for m in report.modes)
        raise PreconditionError(
            f"A has an eigenvalue with real part {worst:.3e} > "
            f"{report.eig_tol:.3e}."
        )
    L = linalg.pinv(pair.C)
    defect = float(np.linalg.norm(L @ pair.C - np.eye(pair.n), 2))
    return FeedbackGain(
        L=frozen(L),
        branch="fullstate_pinv",
        diagnostics={"left_inverse_defect": defect},
    )


def synth_riccati(
    pair: SystemPair, delta: float, eps_care: float = 1e-8
) -> FeedbackGain:
    """L = max{1, 1/δ}·P·Cᵀ with P the stabilizing Riccati solution.

    Raises:
        PreconditionError: If δ ≤ 0.
        NoStabilizingSolutionError: If (C, A) is not detectable.
    """
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}.")
    P = solve_care(pair.C, pair.A, eps_care)
    L = max(1.0, 1.0 / delta) * P @ pair.C.T
    return FeedbackGain(
        L=frozen(L),
        branch="riccati_delta",
        delta=float(delta),
        diagnostics={
            "P": P.tolist(),
            "care_residual": care_residual(pair.C, pair.A, P),
        },
    )


def synth_auto(
    pair: SystemPair,
    delta: float | None = None,
    *,
    eps_eig: float | None = None,
    eps_gram: float = 1e-8,
    eps_care: float = 1e-8,
) -> FeedbackGain:
    """Gain from the strongest construction that applies to ``pair``.

    Raises:
        NoGuaranteeError: If no construction applies. The error names the
            counterexample ('f', 'g' or 'h') of the situation.
    """
    report = classify(pair, eps_eig)
    if report.in_AH:
        return synth_hurwitz(pair)
    if report.in_AN and report.in_OP:
        return synth_algorithm1(pair, report.eig_tol, eps_gram)
    if report.in_AJ and report.in_OF:
        return synth_fullstate(pair, report.eig_tol)
    if report.in_OP and delta is not None:
        return synth_riccati(pair, delta, eps_care)

    flags = ", ".join(f"{k}={v}" for k, v in report.flags().items())
    if not report.in_OP:
        raise NoGuaranteeError(
            f"(C, A) is not detectable ({flags}); no gain synchronizes it "
            f"for any family of interconnections.",
            counterexample="h",
        )
    raise NoGuaranteeError(
        f"No gain works for every connected interconnection ({flags}); "
        f"pass delta to use the Riccati construction.",
        counterexample="f" if report.in_AJ else "g",
    )


@dataclass(frozen=True, eq=False)
class InputGain:
    """Gain K for the input-coupled array ẋ_i = Ax_i + BKz_i."""

    K: Mat
    source: FeedbackGain

    @property
    def guarantee(self) -> str:
        return self.source.guarantee


def dualize(
    A: ArrayLike,
    B: ArrayLike,
    delta: float | None = None,
    **tolerances: float | None,
) -> InputGain:
    """K = Lᵀ where L synchronizes the transposed pair (Bᵀ, Aᵀ)."""
    A = as_matrix(A, "A", square=True)
    B = as_matrix(B, "B")
    gain = synth_auto(SystemPair(C=B.T, A=A.T), delta, **tolerances)
    return InputGain(K=frozen(gain.L.T), source=gain)
