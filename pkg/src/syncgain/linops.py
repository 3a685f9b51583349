"""Dense linear-algebra kernels shared by every other module.

Public API:
    as_matrix, eig, expm, split_center_stable, solve_care, is_hurwitz,
    real_embedding, complex_abscissa, numerical_rank, cluster_eigenvalues

Every function validates its inputs with :func:`as_matrix` and returns fresh
arrays; inputs are never modified. Matrices are real ``float64`` arrays;
complex quantities appear only as eigenvalues or through
:func:`real_embedding`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from syncgain.errors import (
    DimensionError,
    IllConditionedSplitError,
    InputError,
    NoStabilizingSolutionError,
    NumericalError,
    PreconditionError,
)

Mat = NDArray[np.float64]

RANK_RTOL = 1e-12
STRADDLE_FACTOR = 10.0
MAX_SPLIT_COND = 1e12
EPS = float(np.finfo(float).eps)
NEWTON_STEPS = 3


def as_matrix(
    value: ArrayLike, name: str = "matrix", *, square: bool = False
) -> Mat:
    """Convert ``value`` to a finite 2-D float array.

    Scalars are promoted to 1×1 matrices. One-dimensional input is rejected
    because it is ambiguous between a row and a column.

    Raises:
        DimensionError: If the array is not 2-D, is empty, or is not square
            when ``square`` is set.
        InputError: If the entries are not numeric or not finite.
    """
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} is not a numeric matrix: {e}") from e
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(
            f"{name} must be 2-dimensional, got shape {arr.shape}."
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and column.")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries.")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}.")
    return arr


def frozen(arr: ArrayLike) -> NDArray:
    """Return a read-only copy of ``arr``."""
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


def default_eig_tol(M: ArrayLike) -> float:
    """Relative imaginary-axis tolerance 1e-8·(1+‖M‖₂)."""
    return 1e-8 * (1.0 + float(np.linalg.norm(np.asarray(M, float), 2)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of a square matrix, sorted by decreasing real part."""

    eigenvalues: NDArray[np.complex128]

    @property
    def abscissa(self) -> float:
        """Largest real part over all eigenvalues."""
        return float(np.max(self.eigenvalues.real))

    def __len__(self) -> int:
        return len(self.eigenvalues)


def eig(M: ArrayLike) -> Spectrum:
    """Eigenvalues of ``M`` with multiplicity.

    For real input LAPACK returns exact conjugate pairs, so the result is
    conjugate-closed.

    Raises:
        DimensionError: If ``M`` is not square.
        NumericalError: If the QR iteration fails to converge.
    """
    M = as_matrix(M, "M", square=True)
    try:
        vals = linalg.eigvals(M)
    except linalg.LinAlgError as e:
        raise NumericalError(f"Eigenvalue iteration failed: {e}") from e
    vals = np.asarray(vals, dtype=complex)
    order = np.lexsort((vals.imag, -vals.real))
    return Spectrum(frozen(vals[order]))


def expm(M: ArrayLike, t: float = 1.0) -> Mat:
    """Matrix exponential e^{Mt} (scaling and squaring with Padé).

    Raises:
        NumericalError: If the result overflows.
    """
    M = as_matrix(M, "M", square=True)
    if t == 0:
        return np.eye(M.shape[0])
    with np.errstate(over="ignore", invalid="ignore"):
        E = linalg.expm(M * float(t))
    if not np.all(np.isfinite(E)):
        raise NumericalError(
            f"Matrix exponential overflowed at t={t:g} "
            f"(‖M‖={np.linalg.norm(M, 2):.3g})."
        )
    return np.asarray(E, dtype=float)


def is_hurwitz(M: ArrayLike, margin: float = 0.0) -> bool:
    """True iff the spectral abscissa of ``M`` is below ``-margin``."""
    return eig(M).abscissa < -margin


def real_embedding(X: ArrayLike, Y: ArrayLike) -> Mat:
    """Real 2n×2n form [[X, -Y], [Y, X]] of the complex matrix X + jY.

    Its spectrum is the spectrum of X + jY together with its conjugate, so
    both share the same abscissa.
    """
    X = as_matrix(X, "X", square=True)
    Y = as_matrix(Y, "Y", square=True)
    if X.shape != Y.shape:
        raise DimensionError(
            f"Real and imaginary parts differ in shape: {X.shape} vs "
            f"{Y.shape}."
        )
    return np.block([[X, -Y], [Y, X]])


def complex_abscissa(X: ArrayLike, Y: ArrayLike) -> float:
    """Spectral abscissa of X + jY computed through the real embedding."""
    return eig(real_embedding(X, Y)).abscissa


def numerical_rank(M: ArrayLike) -> tuple[int, float]:
    """Rank of a (possibly complex) matrix and the cutoff used.

    Singular values above max(rows, cols)·σ_max·1e-12 count.
    """
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"Rank needs a non-empty 2-D array: {arr.shape}")
    s = linalg.svdvals(arr)
    if s.size == 0 or s[0] == 0.0:
        return 0, 0.0
    cutoff = max(arr.shape) * float(s[0]) * RANK_RTOL
    return int(np.sum(s > cutoff)), cutoff


@dataclass(frozen=True)
class EigenCluster:
    center: complex
    multiplicity: int


def _link(vals: list[complex], radius: float) -> list[list[complex]]:
    """Single-linkage components of ``vals`` at ``radius``."""
    parent = list(range(len(vals)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= radius:
                parent[find(i)] = find(j)

    groups: dict[int, list[complex]] = {}
    for i, v in enumerate(vals):
        groups.setdefault(find(i), []).append(v)
    return list(groups.values())


def defect_reach(k: int, norm: float) -> float:
    """Spread (k·u)^(1/k)·norm of a size-k Jordan block split by rounding."""
    return (k * EPS) ** (1.0 / k) * norm


def cluster_eigenvalues(
    eigenvalues: ArrayLike, radius: float, norm: float = 0.0
) -> list[EigenCluster]:
    """Group eigenvalues that belong to one (possibly defective) eigenvalue.

    Rounding splits a Jordan block of size k into k eigenvalues spread
    about (k·u)^(1/k)·‖A‖ around the true value, so with ``norm`` = ‖A‖ a
    group of k is linked at max(radius, defect_reach(k, norm)). A group is
    only kept at the wider reach when every member lies within it of the
    group mean; a chain of distinct eigenvalues is relinked at ``radius``.
    Each cluster is summarised by its mean, which is far more accurate than
    individual members when a defective eigenvalue has been split.
    """

    def reach(k: int) -> float:
        return max(radius, defect_reach(k, norm)) if k > 1 else radius

    def settle(group: list[complex]) -> list[list[complex]]:
        wide = reach(len(group))
        parts = _link(group, wide)
        if len(parts) == 1 and wide > radius:
            center = np.mean(group)
            if max(abs(v - center) for v in group) > wide:
                parts = _link(group, radius)
        if len(parts) == 1:
            return parts
        return [g for part in parts for g in settle(part)]

    vals = [complex(v) for v in np.asarray(eigenvalues).ravel()]
    clusters = [
        EigenCluster(complex(np.mean(members)), len(members))
        for members in (settle(vals) if vals else [])
    ]
    clusters.sort(key=lambda c: (-c.center.real, c.center.imag))
    return clusters


@dataclass(frozen=True, eq=False)
class CenterStableSplit:
    """Block-diagonalising basis [U W] of a neutrally stable matrix.

    ``U`` spans the imaginary-axis invariant subspace (orthonormal columns
    from the ordered Schur form), ``W`` the stable one (unit columns).
    ``Udag``/``Wdag`` are the row blocks of [U W]⁻¹.
    """

    U: Mat
    W: Mat
    F: Mat
    G: Mat
    Udag: Mat
    Wdag: Mat
    eig_tol: float
    residual: float
    condition: float

    @property
    def n1(self) -> int:
        return self.U.shape[1]

    @property
    def n2(self) -> int:
        return self.W.shape[1]

    def reassemble(self) -> Mat:
        """[U W]·blkdiag(F, G)·[Udag; Wdag]."""
        V = np.hstack([self.U, self.W])
        Vinv = np.vstack([self.Udag, self.Wdag])
        return V @ linalg.block_diag(self.F, self.G) @ Vinv


def split_center_stable(
    A: ArrayLike, eps_eig: float | None = None
) -> CenterStableSplit:
    """Split A into its imaginary-axis and stable parts.

    An ordered real Schur form puts the eigenvalues with |Re| ≤ eps_eig in
    the leading block; a Sylvester solve then removes the coupling block so
    that [U W]⁻¹A[U W] = blkdiag(F, G).

    Raises:
        PreconditionError: If A has an eigenvalue with Re > eps_eig.
        IllConditionedSplitError: If eigenvalues straddle the tolerance, the
            reordering misplaces eigenvalues, or [U W] is nearly singular.
    """
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    tol = default_eig_tol(A) if eps_eig is None else float(eps_eig)
    re = eig(A).eigenvalues.real
    if np.any(re > tol):
        raise PreconditionError(
            f"A has an eigenvalue with real part {re.max():.3e} > "
            f"{tol:.3e}; only neutrally stable matrices can be split."
        )
    straddling = (np.abs(re) > tol) & (np.abs(re) <= STRADDLE_FACTOR * tol)
    if np.any(straddling):
        raise IllConditionedSplitError(
            f"Eigenvalues with real parts {re[straddling]} lie just outside "
            f"the axis tolerance {tol:.3e}."
        )
    n1 = int(np.sum(np.abs(re) <= tol))

    try:
        T, Z, sdim = linalg.schur(
            A, output="real", sort=lambda x, y: abs(x) <= tol
        )
    except (linalg.LinAlgError, ValueError) as e:
        raise IllConditionedSplitError(f"Schur reordering failed: {e}") from e
    if sdim != n1:
        raise IllConditionedSplitError(
            f"Schur reordering placed {sdim} eigenvalues on the axis, "
            f"expected {n1}."
        )

    Z1, Z2 = Z[:, :n1], Z[:, n1:]
    T11, T12, T22 = T[:n1, :n1], T[:n1, n1:], T[n1:, n1:]
    if 0 < n1 < n:
        # T11·X − X·T22 = −T12 zeroes the coupling block
        X = linalg.solve_sylvester(T11, -T22, -T12)
    else:
        X = np.zeros((n1, n - n1))

    W = Z1 @ X + Z2
    scale = np.linalg.norm(W, axis=0) if n - n1 else np.ones(0)
    W = W / scale
    G = scale[:, None] * T22 / scale[None, :]
    Udag = Z1.T - X @ Z2.T
    Wdag = scale[:, None] * Z2.T
    F = T11.copy()

    V = np.hstack([Z1, W])
    Vinv = np.vstack([Udag, Wdag])
    condition = float(np.linalg.norm(V, 2) * np.linalg.norm(Vinv, 2))
    if condition > MAX_SPLIT_COND:
        raise IllConditionedSplitError(
            f"Center/stable basis has condition number {condition:.3e}."
        )
    residual = float(
        np.linalg.norm(Vinv @ A @ V - linalg.block_diag(F, G), 2)
    )
    if residual > 1e-8 * (1.0 + np.linalg.norm(A, 2)) * condition:
        raise IllConditionedSplitError(
            f"Block-diagonalisation residual {residual:.3e} is too large."
        )
    if n - n1 and not is_hurwitz(G):
        raise IllConditionedSplitError("Stable block G is not Hurwitz.")

    return CenterStableSplit(
        U=frozen(Z1),
        W=frozen(W),
        F=frozen(F),
        G=frozen(G),
        Udag=frozen(Udag),
        Wdag=frozen(Wdag),
        eig_tol=tol,
        residual=residual,
        condition=condition,
    )


def care_residual(C: ArrayLike, A: ArrayLike, P: ArrayLike) -> float:
    """‖AP + PAᵀ + I − PCᵀCP‖₂."""
    C, A, P = np.asarray(C, float), np.asarray(A, float), np.asarray(P, float)
    R = A @ P + P @ A.T + np.eye(A.shape[0]) - P @ C.T @ C @ P
    return float(np.linalg.norm(R, 2))


def solve_care(C: ArrayLike, A: ArrayLike, tol: float = 1e-8) -> Mat:
    """Stabilizing solution of AP + PAᵀ + I − PCᵀCP = 0.

    Uses the stable invariant subspace span[I; P] of the Hamiltonian
    [[Aᵀ, −CᵀC], [−I, −A]] from an ordered real Schur form, then polishes
    P with Newton steps (A − PCᵀC)·dP + dP·(A − PCᵀC)ᵀ = −R(P). Weakly
    observed modes put Hamiltonian eigenvalues of size about ‖C‖ near the
    axis, where the subspace alone is only accurate to u/‖C‖.

    Raises:
        DimensionError: If C and A have different column counts.
        NoStabilizingSolutionError: If (C, A) is not detectable, so the
            Hamiltonian has imaginary-axis eigenvalues, or the computed P
            fails its residual, definiteness or stability checks.
    """
    A = as_matrix(A, "A", square=True)
    C = as_matrix(C, "C")
    n = A.shape[0]
    if C.shape[1] != n:
        raise DimensionError(
            f"C has {C.shape[1]} columns but A is {n}×{n}."
        )
    Q = C.T @ C
    H = np.block([[A.T, -Q], [-np.eye(n), -A]])
    try:
        T, Z, sdim = linalg.schur(H, output="real", sort="lhp")
    except (linalg.LinAlgError, ValueError) as e:
        raise NoStabilizingSolutionError(
            f"Hamiltonian Schur form failed: {e}"
        ) from e
    axis_tol = 100 * EPS * (1.0 + float(np.linalg.norm(H, 2)))
    axis = np.abs(eig(H).eigenvalues.real) <= axis_tol
    if sdim != n or np.any(axis):
        raise NoStabilizingSolutionError(
            "Hamiltonian has eigenvalues on the imaginary axis; "
            "(C, A) is not detectable."
        )
    X1, X2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(X1) > 1e12:
        raise NoStabilizingSolutionError(
            "Stable subspace is not a graph over the first block."
        )
    P = linalg.solve(X1.T, X2.T).T
    P = 0.5 * (P + P.T)

    for _ in range(NEWTON_STEPS):
        closed = A - P @ Q
        if not is_hurwitz(closed):
            break
        R = A @ P + P @ A.T + np.eye(n) - P @ Q @ P
        try:
            dP = linalg.solve_continuous_lyapunov(closed, -R)
        except (linalg.LinAlgError, ValueError):
            break
        P = P + 0.5 * (dP + dP.T)

    residual = care_residual(C, A, P)
    scale = max(1.0, float(np.linalg.norm(P, 2)) ** 2 * np.linalg.norm(Q, 2))
    if residual > tol * scale:
        raise NoStabilizingSolutionError(
            f"Riccati residual {residual:.3e} exceeds {tol * scale:.3e}."
        )
    if np.min(linalg.eigvalsh(P)) <= 0:
        raise NoStabilizingSolutionError("Riccati solution is not positive.")
    if not is_hurwitz(A - P @ Q):
        raise NoStabilizingSolutionError("A − PCᵀC is not Hurwitz.")
    return P
