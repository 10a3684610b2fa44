"""Node and configuration mobility kernels.

Each node independently moves one step left with probability p_l, one
step right with probability p_r, or stays with probability
p_t = 1 - p_l - p_r, at the start of every slot. At the ends of the
line a node either waits in place (STUCK) or re-enters from the other
end (WRAP). The occupancy-count process of N such walkers is itself a
Markov chain; its kernel is built here exactly by enumerating, per
position, the ways its occupants can split into left/stay/right movers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .errors import EnumerationLimitError, ReducibleChainError
from .grid import Boundary, Configuration, NetworkParams, enumerate_configurations

DEFAULT_SPLIT_LIMIT = 10**6
DEFAULT_KERNEL_CONFIG_LIMIT = 4000


@dataclass(frozen=True)
class NodeKernel:
    """Single-node transition matrix over positions 1..K (row-stochastic;
    also column-stochastic for WRAP, and for STUCK when p_l == p_r)."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def K(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ConfigKernel:
    """Transition matrix of the occupancy-count chain, dense over the
    configuration list in enumeration order."""

    configs: tuple[Configuration, ...]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def index(self, config: Configuration) -> int:
        return self._index[config.counts]

    @property
    def _index(self) -> dict:
        idx = getattr(self, "_index_cache", None)
        if idx is None:
            idx = {c.counts: i for i, c in enumerate(self.configs)}
            object.__setattr__(self, "_index_cache", idx)
        return idx


def move_targets(params: NetworkParams) -> np.ndarray:
    """(K, 3) table: where a node at each position lands when it moves
    left / stays / moves right, 0-based. Boundary handling folds the
    blocked move back onto the position (STUCK) or wraps it (WRAP)."""
    K = params.K
    t = np.empty((K, 3), dtype=np.int64)
    for p in range(K):
        t[p, 1] = p
        if p > 0:
            t[p, 0] = p - 1
        else:
            t[p, 0] = K - 1 if params.boundary is Boundary.WRAP else 0
        if p < K - 1:
            t[p, 2] = p + 1
        else:
            t[p, 2] = 0 if params.boundary is Boundary.WRAP else K - 1
    return t


def node_kernel(params: NetworkParams) -> NodeKernel:
    """Exact single-node kernel for the given mobility parameters."""
    K = params.K
    targets = move_targets(params)
    probs = (params.p_l, params.p_t, params.p_r)
    P = np.zeros((K, K))
    for p in range(K):
        for which in range(3):
            P[p, targets[p, which]] += probs[which]
    return NodeKernel(matrix=P)


def _closed_classes(P: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Strongly connected component labels and the list of closed
    classes (no outgoing edge), each as an array of state indices."""
    sparse = csr_matrix(P > 0)
    n_comp, labels = csgraph.connected_components(
        sparse, directed=True, connection="strong"
    )
    rows, cols = sparse.nonzero()
    open_labels = set(labels[rows[labels[rows] != labels[cols]]].tolist())
    closed = [
        np.flatnonzero(labels == lab)
        for lab in range(n_comp)
        if lab not in open_labels
    ]
    return labels, closed


def _stationary_dense(P: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible row-stochastic matrix via a
    direct solve of pi (P - I) = 0 with the normalisation replacing one
    equation."""
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_node_distribution(kernel: NodeKernel) -> np.ndarray:
    """Unique stationary distribution of the node kernel. Raises
    ReducibleChainError when the kernel is not irreducible (for example
    p_l = p_r = 0)."""
    P = kernel.matrix
    if P.shape[0] == 1:
        return np.array([1.0])
    _, closed = _closed_classes(P)
    if len(closed) != 1 or len(closed[0]) != P.shape[0]:
        raise ReducibleChainError(
            f"node kernel is not irreducible ({len(closed)} closed classes)",
            classes=closed,
        )
    return _stationary_dense(P)


def config_stationary_prob(config: Configuration, params: NetworkParams) -> float:
    """Steady-state probability of an occupancy vector when every node
    is independently uniform over the K positions:
    N! / (n_1! ... n_K!) * K^-N."""
    counts = config.counts
    if len(counts) != params.K:
        raise ValueError(f"configuration has {len(counts)} positions, K={params.K}")
    if sum(counts) != params.N:
        raise ValueError(f"configuration holds {sum(counts)} nodes, N={params.N}")
    coeff = math.factorial(params.N)
    for c in counts:
        coeff //= math.factorial(c)
    return float(coeff) / float(params.K) ** params.N


@lru_cache(maxsize=8)
def _config_kernel_cached(
    K: int,
    N: int,
    p_l: float,
    p_r: float,
    boundary: Boundary,
    split_limit: int,
    config_limit: int,
) -> ConfigKernel:
    params = NetworkParams(K=K, N=N, p_l=p_l, p_r=p_r, boundary=boundary)
    configs = tuple(enumerate_configurations(params))
    C = len(configs)
    if C > config_limit:
        raise EnumerationLimitError(
            f"{C} configurations exceed the kernel size limit {config_limit}"
        )
    index = {c.counts: i for i, c in enumerate(configs)}
    targets = move_targets(params)
    probs = (params.p_l, params.p_t, params.p_r)

    # Splits of n occupants into (left, stay, right) movers, with their
    # multinomial weights; weights depend only on n, not the position.
    splits_for = []
    for n in range(N + 1):
        splits = []
        for a in range(n + 1):
            for b in range(n - a + 1):
                c = n - a - b
                w = (
                    math.comb(n, a)
                    * math.comb(n - a, b)
                    * probs[0] ** a
                    * probs[1] ** b
                    * probs[2] ** c
                )
                if w > 0.0:
                    splits.append((a, b, c, w))
        splits_for.append(splits)

    P = np.zeros((C, C))
    for i, config in enumerate(configs):
        cross = 1
        for n in config.counts:
            cross *= len(splits_for[n])
            if cross > split_limit:
                raise EnumerationLimitError(
                    f"per-position split cross-product exceeds {split_limit} "
                    f"for configuration {config}"
                )
        partial: dict[tuple[int, ...], float] = {(0,) * K: 1.0}
        for p, n in enumerate(config.counts):
            if n == 0:
                continue
            nxt: dict[tuple[int, ...], float] = {}
            dl, ds, dr = targets[p]
            for vec, pr in partial.items():
                base = list(vec)
                for a, b, c, w in splits_for[n]:
                    dest = base.copy()
                    dest[dl] += a
                    dest[ds] += b
                    dest[dr] += c
                    key = tuple(dest)
                    nxt[key] = nxt.get(key, 0.0) + pr * w
            partial = nxt
        for vec, pr in partial.items():
            P[i, index[vec]] += pr
    return ConfigKernel(configs=configs, matrix=P)


def config_kernel(
    params: NetworkParams,
    split_limit: int = DEFAULT_SPLIT_LIMIT,
    config_limit: int = DEFAULT_KERNEL_CONFIG_LIMIT,
) -> ConfigKernel:
    """Exact transition kernel of the configuration chain.

    Guards: raises EnumerationLimitError when a row would need more than
    `split_limit` split combinations or when the configuration count
    exceeds `config_limit` (the kernel is stored dense).
    """
    return _config_kernel_cached(
        params.K,
        params.N,
        params.p_l,
        params.p_r,
        params.boundary,
        split_limit,
        config_limit,
    )
