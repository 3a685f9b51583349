"""Membership of a pair (C, A) in the stability and output classes.

A_H: A Hurwitz. A_N: A neutrally stable. A_J: no eigenvalue of A in the
open right half-plane. O_F: C has full column rank. O_P: (C, A) detectable.
A_H ⊂ A_N ⊂ A_J and O_F ⊂ O_P.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from syncgain.errors import DimensionError, IndeterminateClassificationError
from syncgain.linops import (
    STRADDLE_FACTOR,
    EigenCluster,
    Mat,
    as_matrix,
    cluster_eigenvalues,
    default_eig_tol,
    eig,
    frozen,
    numerical_rank,
)


@dataclass(frozen=True, eq=False)
class SystemPair:
    """Output map C (m×n) and dynamics A (n×n)."""

    C: Mat
    A: Mat

    def __post_init__(self):
        A = as_matrix(self.A, "A", square=True)
        C = as_matrix(self.C, "C")
        if C.shape[1] != A.shape[0]:
            raise DimensionError(
                f"C has {C.shape[1]} columns but A is "
                f"{A.shape[0]}×{A.shape[0]}."
            )
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "C", frozen(C))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class ModeEvidence:
    """Numerical facts about one eigenvalue cluster of A."""

    eigenvalue: complex
    algebraic: int
    geometric: int
    pbh_rank: int


@dataclass(frozen=True)
class ClassReport:
    in_AH: bool
    in_AN: bool
    in_AJ: bool
    in_OF: bool
    in_OP: bool
    eigenvalues: tuple[complex, ...]
    modes: tuple[ModeEvidence, ...]
    rank_C: int
    rank_cutoff: float
    eig_tol: float
    cluster_radius: float

    def flags(self) -> dict[str, bool]:
        return {
            "A_H": self.in_AH,
            "A_N": self.in_AN,
            "A_J": self.in_AJ,
            "O_F": self.in_OF,
            "O_P": self.in_OP,
        }


def cluster_radius(A: Mat, eps_eig: float) -> float:
    return max(eps_eig, 1e-6 * (1.0 + float(np.linalg.norm(A, 2))))


def _group(A: Mat, eps_eig: float) -> list[EigenCluster]:
    return cluster_eigenvalues(
        eig(A).eigenvalues,
        cluster_radius(A, eps_eig),
        1.0 + float(np.linalg.norm(A, 2)),
    )


def _clusters(A: Mat, eps_eig: float) -> list[EigenCluster]:
    clusters = _group(A, eps_eig)
    for c in clusters:
        if eps_eig < abs(c.center.real) <= STRADDLE_FACTOR * eps_eig:
            raise IndeterminateClassificationError(c.center, eps_eig)
    return clusters


def _geometric(A: Mat, lam: complex) -> int:
    n = A.shape[0]
    rank, _ = numerical_rank(A - lam * np.eye(n))
    return n - rank


def _pbh_rank(C: Mat, A: Mat, lam: complex) -> int:
    n = A.shape[0]
    rank, _ = numerical_rank(np.vstack([A - lam * np.eye(n), C]))
    return rank


def is_detectable(pair: SystemPair, tol: float | None = None) -> bool:
    """PBH test at every eigenvalue with Re ≥ −tol."""
    tol = default_eig_tol(pair.A) if tol is None else tol
    return all(
        _pbh_rank(pair.C, pair.A, c.center) == pair.n
        for c in _clusters(pair.A, tol)
        if c.center.real >= -tol
    )


def is_observable(pair: SystemPair, tol: float | None = None) -> bool:
    """PBH test at every eigenvalue."""
    tol = default_eig_tol(pair.A) if tol is None else tol
    return all(
        _pbh_rank(pair.C, pair.A, c.center) == pair.n
        for c in _group(pair.A, tol)
    )


def is_neutrally_stable(A: ArrayLike, eps_eig: float | None = None) -> bool:
    """No eigenvalue right of the axis, axis eigenvalues semisimple.

    Raises:
        IndeterminateClassificationError: If an eigenvalue's real part lies
            in (eps_eig, 10·eps_eig].
    """
    A = as_matrix(A, "A", square=True)
    tol = default_eig_tol(A) if eps_eig is None else eps_eig
    clusters = _clusters(A, tol)
    if any(c.center.real > tol for c in clusters):
        return False
    return all(
        _geometric(A, c.center) == c.multiplicity
        for c in clusters
        if abs(c.center.real) <= tol
    )


def classify(pair: SystemPair, tol: float | None = None) -> ClassReport:
    """All five class flags with the evidence used to decide them."""
    tol = default_eig_tol(pair.A) if tol is None else tol
    clusters = _clusters(pair.A, tol)
    modes = tuple(
        ModeEvidence(
            eigenvalue=c.center,
            algebraic=c.multiplicity,
            geometric=_geometric(pair.A, c.center),
            pbh_rank=_pbh_rank(pair.C, pair.A, c.center),
        )
        for c in clusters
    )
    in_AJ = all(m.eigenvalue.real <= tol for m in modes)
    in_AH = all(m.eigenvalue.real < -tol for m in modes)
    semisimple_axis = all(
        m.geometric == m.algebraic
        for m in modes
        if abs(m.eigenvalue.real) <= tol
    )
    in_AN = in_AJ and semisimple_axis
    in_OP = all(
        m.pbh_rank == pair.n for m in modes if m.eigenvalue.real >= -tol
    )
    rank_C, cutoff = numerical_rank(pair.C)
    return ClassReport(
        in_AH=in_AH,
        in_AN=in_AN,
        in_AJ=in_AJ,
        in_OF=rank_C == pair.n,
        in_OP=in_OP,
        eigenvalues=tuple(complex(v) for v in eig(pair.A).eigenvalues),
        modes=modes,
        rank_C=rank_C,
        rank_cutoff=cutoff,
        eig_tol=tol,
        cluster_radius=cluster_radius(pair.A, tol),
    )
