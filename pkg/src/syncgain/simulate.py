"""Simulation of coupled arrays ẋ = (I_p⊗A + Γ⊗M)x.

M is LC for output coupling, HᵀH for the skew-symmetric array and BK for
input coupling. States are sampled exactly on a uniform grid: every 32nd
sample is e^{Mt_k}x0 computed directly and the samples in between take at
most 31 steps of the one-step propagator e^{MΔt} from it, so rounding does
not build up along long grids. A fixed-step RK4 run on the same grid is
kept as a cross-check.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from syncgain.errors import (
    DimensionError,
    IntegratorInconsistencyError,
    NumericalError,
    PreconditionError,
)
from syncgain.interconnect import Interconnection, is_connected, spectrum
from syncgain.linops import Mat, as_matrix, expm, frozen
from syncgain.sysclass import SystemPair, is_observable

RK4_STEP = 0.005
DEFAULT_HORIZON = 20.0
ANCHOR_EVERY = 32

OSCILLATOR = np.array([[0.0, 1.0], [-1.0, 0.0]])
OSCILLATOR_COUPLING = np.diag([0.0, 1.0])


@dataclass(frozen=True, eq=False)
class ArraySpec:
    A: Mat
    M: Mat
    gamma: Interconnection
    x0: NDArray[np.float64]

    def __post_init__(self):
        A = as_matrix(self.A, "A", square=True)
        M = as_matrix(self.M, "M", square=True)
        if M.shape != A.shape:
            raise DimensionError(
                f"Coupling M is {M.shape[0]}×{M.shape[1]} but A is "
                f"{A.shape[0]}×{A.shape[1]}."
            )
        x0 = np.asarray(self.x0, dtype=float).ravel()
        if x0.size != self.gamma.p * A.shape[0]:
            raise DimensionError(
                f"x0 has {x0.size} entries, expected p·n = "
                f"{self.gamma.p}·{A.shape[0]}."
            )
        if not np.all(np.isfinite(x0)):
            raise DimensionError("x0 has non-finite entries.")
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "M", frozen(M))
        object.__setattr__(self, "x0", frozen(x0))

    @property
    def p(self) -> int:
        return self.gamma.p

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class ArrayTrajectory:
    times: NDArray[np.float64]
    states: NDArray[np.float64]
    p: int
    n: int
    sync_error: NDArray[np.float64]
    tracking_error: NDArray[np.float64] | None = None
    predicted: NDArray[np.float64] | None = None
    weights: NDArray[np.float64] | None = None
    integrator_discrepancy: float | None = None

    def blocks(self) -> NDArray[np.float64]:
        """States reshaped to (time, node, n)."""
        return self.states.reshape(len(self.times), self.p, self.n)


@dataclass(frozen=True)
class SyncSummary:
    initial_sync_error: float
    final_sync_error: float
    final_tracking_error: float | None
    decayed: bool
    exponent: float | None
    average_drift: float | None
    tol: float


def build_closed_loop(spec: ArraySpec) -> Mat:
    """I_p⊗A + Γ⊗M."""
    return np.kron(np.eye(spec.p), spec.A) + np.kron(spec.gamma.gamma, spec.M)


def pairwise_sync_error(blocks: NDArray[np.float64]) -> NDArray[np.float64]:
    """max over i<j of ‖x_i − x_j‖ for every time; blocks is (T, p, n)."""
    diff = blocks[:, :, None, :] - blocks[:, None, :, :]
    return np.linalg.norm(diff, axis=-1).max(axis=(1, 2))


def rk4_step_matrix(M: Mat, h: float) -> Mat:
    """Linear map of one classical RK4 step of size h for ẋ = Mx."""
    hM = h * M
    hM2 = hM @ hM
    hM3 = hM2 @ hM
    return np.eye(len(M)) + hM + hM2 / 2 + hM3 / 6 + hM3 @ hM / 24


def _rk4_discrepancy(Mcl: Mat, dt: float, states: np.ndarray) -> float:
    norm = float(np.linalg.norm(Mcl, 2))
    h = dt if norm == 0 else min(dt, RK4_STEP / norm)
    substeps = max(1, math.ceil(dt / h - 1e-12))
    R = np.linalg.matrix_power(rk4_step_matrix(Mcl, dt / substeps), substeps)
    y = states[0].copy()
    worst = 0.0
    for x in states[1:]:
        y = R @ y
        worst = max(worst, float(np.linalg.norm(y - x)))
    peak = float(np.max(np.linalg.norm(states, axis=1)))
    return worst / (1.0 + peak)


def predicted_sync_trajectory(
    A: ArrayLike, r: ArrayLike, x0: ArrayLike, times: ArrayLike
) -> NDArray[np.float64]:
    """x̄(t) = (rᵀ⊗e^{At})·x0 on the given times, shape (T, n)."""
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    r = np.asarray(r, dtype=float).ravel()
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != r.size * n:
        raise DimensionError(
            f"x0 has {x0.size} entries, expected {r.size}·{n}."
        )
    average = r @ x0.reshape(r.size, n)
    return np.array([expm(A, t) @ average for t in np.asarray(times)])


def weighted_average(
    traj: ArrayTrajectory, r: ArrayLike
) -> NDArray[np.float64]:
    """Σ r_i x_i(t), shape (T, n)."""
    return np.einsum("i,tij->tj", np.asarray(r, dtype=float), traj.blocks())


def simulate_array(
    spec: ArraySpec,
    t_end: float,
    steps: int,
    *,
    eps_int: float = 1e-6,
    cross_check: bool = True,
    track: bool = True,
    eps_zero: float | None = None,
) -> ArrayTrajectory:
    """Sample the array on times linspace(0, t_end, steps + 1).

    Tracking against x̄(t) is only possible for a connected interconnection;
    for a disconnected one it is skipped with a warning.

    Raises:
        PreconditionError: If t_end ≤ 0 or steps < 2.
        NumericalError: If the propagated states overflow.
        IntegratorInconsistencyError: If RK4 disagrees with the exact
            propagator by more than 10·eps_int.
    """
    if not t_end > 0:
        raise PreconditionError(f"t_end must be positive, got {t_end}.")
    if steps < 2:
        raise PreconditionError(f"steps must be at least 2, got {steps}.")

    times = np.linspace(0.0, float(t_end), int(steps) + 1)
    dt = times[1] - times[0]
    Mcl = build_closed_loop(spec)
    step = expm(Mcl, dt)
    states = np.empty((len(times), spec.p * spec.n))
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            for k, t in enumerate(times):
                if k % ANCHOR_EVERY == 0:
                    states[k] = expm(Mcl, t) @ spec.x0
                else:
                    states[k] = step @ states[k - 1]
    except NumericalError:
        states[k:] = np.inf
    if not np.all(np.isfinite(states)):
        raise NumericalError(
            f"Array state overflowed before t_end={t_end:g}; shorten the "
            f"horizon."
        )

    discrepancy = None
    if cross_check:
        discrepancy = _rk4_discrepancy(Mcl, dt, states)
        if discrepancy > 10 * eps_int:
            raise IntegratorInconsistencyError(discrepancy)
        if discrepancy > eps_int:
            warnings.warn(
                f"RK4 and exact propagation differ by {discrepancy:.2e} "
                f"(relative), above {eps_int:.1e}.",
                stacklevel=2,
            )

    blocks = states.reshape(len(times), spec.p, spec.n)
    sync_error = pairwise_sync_error(blocks)

    tracking = predicted = weights = None
    if track:
        if is_connected(spec.gamma):
            weights = spectrum(spec.gamma, eps_zero).r
            predicted = predicted_sync_trajectory(
                spec.A, weights, spec.x0, times
            )
            tracking = np.linalg.norm(
                blocks - predicted[:, None, :], axis=-1
            ).max(axis=1)
        else:
            warnings.warn(
                "Interconnection is not connected; tracking against the "
                "predicted trajectory is omitted.",
                stacklevel=2,
            )

    return ArrayTrajectory(
        times=frozen(times),
        states=frozen(states),
        p=spec.p,
        n=spec.n,
        sync_error=frozen(sync_error),
        tracking_error=None if tracking is None else frozen(tracking),
        predicted=None if predicted is None else frozen(predicted),
        weights=weights,
        integrator_discrepancy=discrepancy,
    )


def sync_metrics(
    traj: ArrayTrajectory,
    xbar: ArrayLike | None = None,
    tol: float = 1e-6,
) -> SyncSummary:
    """Final errors, decay flag and a log-linear decay exponent.

    The exponent is the slope of log sync_error over the last half of the
    grid; it is None when fewer than two positive samples are available.
    ``xbar`` overrides the trajectory's own prediction for tracking.
    """
    initial = float(traj.sync_error[0])
    final = float(traj.sync_error[-1])
    decayed = final <= tol * initial if initial > 0 else final == 0.0

    half = len(traj.times) // 2
    t_tail = traj.times[half:]
    e_tail = traj.sync_error[half:]
    positive = e_tail > 0
    exponent = None
    if np.count_nonzero(positive) >= 2:
        slope, _ = np.polyfit(t_tail[positive], np.log(e_tail[positive]), 1)
        exponent = float(slope)

    predicted = traj.predicted if xbar is None else np.asarray(xbar, float)
    final_tracking = drift = None
    if predicted is not None:
        final_tracking = float(
            np.linalg.norm(traj.blocks()[-1] - predicted[-1], axis=-1).max()
        )
        if traj.weights is not None:
            avg = weighted_average(traj, traj.weights)
            drift = float(np.linalg.norm(avg - predicted, axis=-1).max())

    return SyncSummary(
        initial_sync_error=initial,
        final_sync_error=final,
        final_tracking_error=final_tracking,
        decayed=decayed,
        exponent=exponent,
        average_drift=drift,
        tol=tol,
    )


def default_horizon(
    gamma: Interconnection, eps_zero: float | None = None
) -> float:
    """20/|Re λ₂| for connected Γ, 20 otherwise."""
    if not is_connected(gamma):
        return DEFAULT_HORIZON
    lambda2_re = spectrum(gamma, eps_zero).lambda2_re
    if lambda2_re is None or lambda2_re == 0:
        return DEFAULT_HORIZON
    return DEFAULT_HORIZON / abs(lambda2_re)


# ----------------------------------------------------------------------
# Array builders
# ----------------------------------------------------------------------


def output_coupled_array(
    pair: SystemPair, L: ArrayLike, gamma: Interconnection, x0: ArrayLike
) -> ArraySpec:
    """ẋ_i = Ax_i + L·Σ_j γ_ij(y_j − y_i), y = Cx."""
    L = as_matrix(L, "L")
    if L.shape != (pair.n, pair.m):
        raise DimensionError(
            f"L is {L.shape[0]}×{L.shape[1]}, expected {pair.n}×{pair.m}."
        )
    return ArraySpec(A=pair.A, M=L @ pair.C, gamma=gamma, x0=x0)


def input_coupled_array(
    A: ArrayLike,
    B: ArrayLike,
    K: ArrayLike,
    gamma: Interconnection,
    x0: ArrayLike,
) -> ArraySpec:
    """ẋ_i = Ax_i + BK·Σ_j γ_ij(x_j − x_i)."""
    A = as_matrix(A, "A", square=True)
    B = as_matrix(B, "B")
    K = as_matrix(K, "K")
    if B.shape[0] != A.shape[0] or K.shape != (B.shape[1], A.shape[0]):
        raise DimensionError(
            f"B is {B.shape} and K is {K.shape}; expected B n×m and K m×n "
            f"with n = {A.shape[0]}."
        )
    return ArraySpec(A=A, M=B @ K, gamma=gamma, x0=x0)


def harmonic_oscillators(gamma: Interconnection, x0: ArrayLike) -> ArraySpec:
    """ẋ_i = y_i, ẏ_i = −x_i + Σ_j γ_ij(y_j − y_i)."""
    return ArraySpec(
        A=OSCILLATOR, M=OSCILLATOR_COUPLING, gamma=gamma, x0=x0
    )


def skew_symmetric_array(
    S: ArrayLike, H: ArrayLike, gamma: Interconnection, x0: ArrayLike
) -> ArraySpec:
    """ẋ = (I⊗S + Γ⊗HᵀH)x for skew-symmetric S, observable (H, S).

    Raises:
        PreconditionError: If S is not skew-symmetric, (H, S) is not
            observable or Γ is not connected.
    """
    S = as_matrix(S, "S", square=True)
    H = as_matrix(H, "H")
    if np.linalg.norm(S + S.T, 2) > 1e-10 * (1.0 + np.linalg.norm(S, 2)):
        raise PreconditionError("S is not skew-symmetric.")
    if not is_observable(SystemPair(C=H, A=S)):
        raise PreconditionError("(H, S) is not observable.")
    if not is_connected(gamma):
        raise PreconditionError("Interconnection is not connected.")
    return ArraySpec(A=S, M=H.T @ H, gamma=gamma, x0=x0)
