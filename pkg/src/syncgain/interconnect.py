"""Interconnection matrices Γ, their directed graphs and spectra.

Γ is a p×p matrix with nonnegative off-diagonal entries and zero row sums.
Node i listens to node j when γ_ij > 0, which is drawn as the edge (i, j).
The diagonal is always recomputed from the off-diagonals, so Γ·1 = 0 holds
for every constructed value.
"""

from collections.abc import Iterable
from dataclasses import dataclass

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from syncgain.errors import (
    DegenerateSpectrumError,
    GraphError,
    NumericalError,
    PreconditionError,
)
from syncgain.linops import Mat, as_matrix, eig, frozen

DIAGONAL_RTOL = 1e-12


def _with_diagonal(offdiag: Mat) -> Mat:
    gamma = offdiag.copy()
    np.fill_diagonal(gamma, 0.0)
    np.fill_diagonal(gamma, -gamma.sum(axis=1))
    return gamma


@dataclass(frozen=True)
class GraphView:
    """Weighted edge list of an interconnection, 1-based."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]

    def to_interconnection(self) -> "Interconnection":
        return from_weighted_edges(len(self.nodes), self.edges)


@dataclass(frozen=True, eq=False)
class Interconnection:
    """A validated interconnection matrix Γ."""

    gamma: Mat

    def __post_init__(self):
        gamma = as_matrix(self.gamma, "Gamma", square=True)
        off = gamma.copy()
        np.fill_diagonal(off, 0.0)
        if np.any(off < 0):
            i, j = np.argwhere(off < 0)[0]
            raise GraphError(
                f"Gamma[{i + 1},{j + 1}] = {off[i, j]:g} is negative; "
                f"off-diagonal weights must be nonnegative."
            )
        object.__setattr__(self, "gamma", frozen(_with_diagonal(off)))

    @property
    def p(self) -> int:
        return self.gamma.shape[0]

    def graph(self) -> GraphView:
        edges = tuple(
            (int(i) + 1, int(j) + 1, float(self.gamma[i, j]))
            for i, j in zip(*np.nonzero(self.gamma))
            if i != j
        )
        return GraphView(nodes=tuple(range(1, self.p + 1)), edges=edges)

    def to_networkx(self) -> nx.DiGraph:
        """Directed graph with an edge i → j of weight γ_ij for γ_ij > 0."""
        g = nx.DiGraph()
        g.add_nodes_from(range(1, self.p + 1))
        g.add_weighted_edges_from(self.graph().edges)
        return g

    def scaled(self, factor: float) -> "Interconnection":
        if not factor > 0:
            raise PreconditionError(
                f"Scale factor must be positive, got {factor}."
            )
        return Interconnection(self.gamma * float(factor))


def from_weighted_edges(
    p: int, edges: Iterable[tuple[int, int, float]]
) -> Interconnection:
    """Build Γ from 1-based weighted edges; repeated edges are summed.

    Raises:
        GraphError: On p < 1, self-loops, out-of-range indices or
            non-positive or non-finite weights.
    """
    if p < 1:
        raise GraphError(f"An interconnection needs p ≥ 1 nodes, got {p}.")
    off = np.zeros((p, p))
    for edge in edges:
        try:
            i, j, w = edge
        except (TypeError, ValueError) as e:
            raise GraphError(
                f"Edge {edge!r} is not an (i, j, weight) triple."
            ) from e
        if int(i) != i or int(j) != j:
            raise GraphError(f"Edge ({i}, {j}) has non-integer indices.")
        i, j, w = int(i), int(j), float(w)
        if not (1 <= i <= p and 1 <= j <= p):
            raise GraphError(
                f"Edge ({i}, {j}) is out of range for p={p} nodes."
            )
        if i == j:
            raise GraphError(f"Self-loop ({i}, {i}) is not allowed.")
        if not np.isfinite(w) or w <= 0:
            raise GraphError(
                f"Edge ({i}, {j}) has weight {w}; weights must be positive."
            )
        off[i - 1, j - 1] += w
    return Interconnection(_with_diagonal(off))


def from_matrix(gamma: ArrayLike) -> Interconnection:
    """Validate a full matrix against the interconnection rules.

    Raises:
        GraphError: If an off-diagonal entry is negative or the diagonal
            does not equal the negated off-diagonal row sums.
    """
    gamma = as_matrix(gamma, "Gamma", square=True)
    result = Interconnection(gamma)
    tol = DIAGONAL_RTOL * (1.0 + np.linalg.norm(gamma, 2))
    worst = float(np.max(np.abs(np.diag(gamma) - np.diag(result.gamma))))
    if worst > tol:
        raise GraphError(
            f"Row sums of Gamma must be zero; diagonal is off by {worst:.3e}."
        )
    return result


def ring(p: int) -> Interconnection:
    """Directed ring: node i listens to node i+1, node p to node 1."""
    if p < 2:
        raise GraphError(f"A ring needs p ≥ 2 nodes, got {p}.")
    return from_weighted_edges(
        p, [(i, i % p + 1, 1.0) for i in range(1, p + 1)]
    )


def ring_eigenvalue(p: int, k: int = 1) -> complex:
    """The eigenvalue e^{j2πk/p} − 1 of ring(p)."""
    return complex(np.exp(2j * np.pi * k / p) - 1.0)


def is_connected(G: Interconnection) -> bool:
    """True iff some node is reachable from every other node."""
    condensed = nx.condensation(G.to_networkx())
    sinks = [n for n, d in condensed.out_degree() if d == 0]
    return len(sinks) == 1


def default_zero_tol(G: Interconnection) -> float:
    return 1e-9 * (1.0 + float(np.linalg.norm(G.gamma, 2)))


@dataclass(frozen=True, eq=False)
class GammaSpectrum:
    """Eigen-data of Γ.

    ``lambda2_re`` and ``r`` are only defined when zero is a simple
    eigenvalue; reading them otherwise raises DegenerateSpectrumError.
    ``lambda2_re`` is None for p = 1, where there is no nonzero eigenvalue.
    """

    eigenvalues: NDArray[np.complex128]
    nonzero: NDArray[np.complex128]
    zero_multiplicity: int
    eps_zero: float
    _lambda2_re: float | None
    _r: NDArray[np.float64] | None

    @property
    def simple_zero(self) -> bool:
        return self.zero_multiplicity == 1

    @property
    def lambda2_re(self) -> float | None:
        self._require("lambda2_re")
        return self._lambda2_re

    @property
    def r(self) -> NDArray[np.float64]:
        self._require("r")
        return self._r

    def _require(self, name: str) -> None:
        if not self.simple_zero:
            raise DegenerateSpectrumError(
                f"{name} is undefined: the zero eigenvalue of Gamma has "
                f"multiplicity {self.zero_multiplicity} (graph not "
                f"connected)."
            )


def spectrum(
    G: Interconnection, eps_zero: float | None = None
) -> GammaSpectrum:
    """Eigenvalues of Γ, λ₂ real part and the left null vector r."""
    tol = default_zero_tol(G) if eps_zero is None else float(eps_zero)
    vals = eig(G.gamma).eigenvalues
    is_zero = np.abs(vals) <= tol
    nonzero = vals[~is_zero]
    mult = int(np.sum(is_zero))

    lambda2_re = r = None
    if mult == 1:
        if nonzero.size:
            lambda2_re = float(np.max(nonzero.real))
        _, _, vh = linalg.svd(G.gamma.T)
        v = vh[-1]
        total = v.sum()
        if abs(total) < 1e-12:
            raise NumericalError("Left null vector of Gamma sums to zero.")
        r = v / total
        r[np.abs(r) < 1e-14] = 0.0
        if np.linalg.norm(r @ G.gamma) > 1e-8 * (1 + np.linalg.norm(r)):
            raise NumericalError("Left null vector residual is too large.")
        r = frozen(r)
    return GammaSpectrum(
        eigenvalues=vals,
        nonzero=frozen(nonzero),
        zero_multiplicity=mult,
        eps_zero=tol,
        _lambda2_re=lambda2_re,
        _r=r,
    )


@dataclass(frozen=True)
class MembershipFlags:
    in_G_nonneg: bool
    in_G_connected: bool
    in_G_delta: bool
    delta: float
    lambda2_re: float | None


def membership(
    G: Interconnection, delta: float, eps_zero: float | None = None
) -> MembershipFlags:
    """Membership of Γ in G≥0, G>0 and G≥δ."""
    if delta < 0:
        raise PreconditionError(f"delta must be ≥ 0, got {delta}.")
    connected = is_connected(G)
    lambda2_re = None
    in_delta = False
    if connected:
        lambda2_re = spectrum(G, eps_zero).lambda2_re
        in_delta = lambda2_re is None or abs(lambda2_re) >= delta
    return MembershipFlags(
        in_G_nonneg=True,
        in_G_connected=connected,
        in_G_delta=in_delta,
        delta=float(delta),
        lambda2_re=lambda2_re,
    )
