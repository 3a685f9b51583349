# src/syncgain/errors.py


class SyncGainError(Exception):
    """Base exception for all syncgain errors."""


class InputError(SyncGainError):
    """Raised when a matrix or vector argument is malformed."""


class DimensionError(InputError):
    """Raised when matrix shapes do not fit together."""


class GraphError(InputError):
    """Raised when an interconnection violates the coupling-matrix rules.

    Off-diagonal entries must be nonnegative and every row must sum to
    zero.
    """


class ConfigError(SyncGainError):
    """Raised when a run config, pair, graph or gain file cannot be loaded."""


class PreconditionError(SyncGainError):
    """Raised when an operation is called outside its domain."""


class NoGuaranteeError(SyncGainError):
    """Raised when no synthesis branch applies to a pair.

    Attributes:
        counterexample: Id of the counterexample ('f', 'g' or 'h') showing why
            no gain can be promised, or None.
    """

    def __init__(self, message: str, counterexample: str | None = None):
        self.counterexample = counterexample
        super().__init__(message)


class NumericalError(SyncGainError):
    """Base class for failures of the numerical kernels."""


class IllConditionedSplitError(NumericalError):
    """Raised when the center/stable split cannot be computed reliably."""


class NoStabilizingSolutionError(NumericalError):
    """Raised when the Riccati equation has no stabilizing solution."""


class ConvergenceError(NumericalError):
    """Raised when an iterative estimate does not settle in time."""


class IntegratorInconsistencyError(NumericalError):
    """Raised when RK4 and the exact propagator disagree.

    Attributes:
        discrepancy: Relative disagreement that was measured.
    """

    def __init__(self, discrepancy: float):
        self.discrepancy = discrepancy
        super().__init__(
            f"RK4 and matrix-exponential propagation disagree by "
            f"{discrepancy:.3e} (relative)."
        )


class IndeterminateClassificationError(NumericalError):
    """Raised when an eigenvalue sits too close to a tolerance boundary.

    Attributes:
        eigenvalue: The offending eigenvalue (cluster centre).
        tol: The axis tolerance in force.
    """

    def __init__(self, eigenvalue: complex, tol: float):
        self.eigenvalue = eigenvalue
        self.tol = tol
        super().__init__(
            f"Eigenvalue {eigenvalue:.6g} has |Re| within a factor 10 of "
            f"the axis tolerance {tol:.3e}; classification is indeterminate."
        )


class DegenerateSpectrumError(NumericalError):
    """Raised when connected-only spectral data is requested for a
    disconnected interconnection."""
