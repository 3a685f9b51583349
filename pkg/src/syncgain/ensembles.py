"""Seeded random generators for interconnections, matrices and pairs.

Every generator takes a ``numpy.random.Generator`` so that a seed fixes the
whole ensemble.
"""

import numpy as np
from scipy import linalg

from syncgain.interconnect import Interconnection, from_weighted_edges
from syncgain.linops import Mat, eig
from syncgain.sysclass import SystemPair


def _weight(rng: np.random.Generator, high: float) -> float:
    # uniform on (0, high]
    return float(high * (1.0 - rng.random()))


def random_connected(
    rng: np.random.Generator,
    p: int,
    extra_edge_prob: float = 0.3,
    max_weight: float = 2.0,
) -> Interconnection:
    """Random weighted digraph in which every node reaches a common root.

    A random spanning in-tree (each node listens to one node added before
    it) is overlaid with extra edges drawn independently.
    """
    order = rng.permutation(p) + 1
    edges = []
    for k in range(1, p):
        parent = order[rng.integers(0, k)]
        edges.append((int(order[k]), int(parent), _weight(rng, max_weight)))
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            if i != j and rng.random() < extra_edge_prob:
                edges.append((i, j, _weight(rng, max_weight)))
    return from_weighted_edges(p, edges)


def _well_conditioned(rng: np.random.Generator, n: int) -> Mat:
    Q, _ = linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(rng.uniform(0.5, 2.0, size=n))


def random_frequencies(
    rng: np.random.Generator,
    count: int,
    min_sep: float = 0.1,
    low: float = 0.2,
    high: float = 3.0,
) -> list[float]:
    """Distinct frequencies in [low, high], pairwise further than min_sep."""
    chosen: list[float] = []
    while len(chosen) < count:
        w = float(rng.uniform(low, high))
        if all(abs(w - c) > min_sep for c in chosen):
            chosen.append(w)
    return sorted(chosen)


def random_onaxis_matrix(
    rng: np.random.Generator, n: int, min_sep: float = 0.1
) -> Mat:
    """n×n matrix similar to blkdiag of rotations (and 0 when n is odd).

    All eigenvalues are simple, on the imaginary axis, and at least
    ``min_sep`` apart.
    """
    blocks = [
        np.array([[0.0, w], [-w, 0.0]])
        for w in random_frequencies(rng, n // 2, min_sep, low=min_sep)
    ]
    if n % 2:
        blocks.append(np.zeros((1, 1)))
    core = linalg.block_diag(*blocks)
    T = _well_conditioned(rng, n)
    return T @ core @ linalg.inv(T)


def random_stable_matrix(
    rng: np.random.Generator, n: int, max_abscissa: float = -0.5
) -> Mat:
    """Random Hurwitz matrix with spectral abscissa max_abscissa."""
    B = rng.normal(size=(n, n))
    return B - (eig(B).abscissa - max_abscissa) * np.eye(n)


def random_neutral_pair(
    rng: np.random.Generator, n: int, m: int | None = None
) -> SystemPair:
    """Neutrally stable, detectable pair with a Hurwitz part when n > 1."""
    n1 = int(rng.integers(1, n + 1)) if n > 1 else 1
    n2 = n - n1
    blocks = [random_onaxis_matrix(rng, n1, min_sep=0.3)]
    if n2:
        blocks.append(random_stable_matrix(rng, n2))
    T = _well_conditioned(rng, n)
    A = T @ linalg.block_diag(*blocks) @ linalg.inv(T)
    m = int(rng.integers(1, n + 1)) if m is None else m
    return SystemPair(C=rng.normal(size=(m, n)), A=A)


def random_detectable_pair(
    rng: np.random.Generator, n: int, m: int | None = None
) -> SystemPair:
    """Random (C, A); a Gaussian C makes the pair observable almost surely."""
    m = int(rng.integers(1, n + 1)) if m is None else m
    return SystemPair(C=rng.normal(size=(m, n)), A=rng.normal(size=(n, n)))


def random_array_case(
    rng: np.random.Generator, n_max: int = 3, p_max: int = 6
) -> tuple[Mat, Mat, Interconnection]:
    """(A, M, Γ) with abscissa of A in [−0.3, 0] and a random coupling M."""
    n = int(rng.integers(1, n_max + 1))
    p = int(rng.integers(2, p_max + 1))
    A = random_stable_matrix(rng, n, -float(rng.uniform(0.0, 0.3)))
    M = rng.normal(size=(n, n))
    return A, M, random_connected(rng, p)
