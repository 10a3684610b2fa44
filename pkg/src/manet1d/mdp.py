"""Average-reward control of route discovery.

State: (configuration, held route). Action: discover a fresh route
(earning (1 - phi) times the best currently supported throughput and
replacing the held route with that best route) or continue on the held
route (earning its throughput if its relay positions are all occupied,
else nothing). The configuration component moves by the exact occupancy
kernel regardless of the action, so a transition matrix never has to be
materialised for the optimiser: one dense config-kernel product per
sweep suffices.

Policies are boolean arrays of shape (configs, routes), True = discover.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .errors import ConvergenceError, EnumerationLimitError, ReducibleChainError
from .grid import (
    Boundary,
    Configuration,
    NetworkParams,
    Route,
    enumerate_configurations,
)
from .mobility import ConfigKernel, _closed_classes, config_kernel
from .scheduling import _route_table, route_supported

DEFAULT_STATE_LIMIT = 200_000
DEFAULT_EPSILON = 1e-8
DEFAULT_MAX_ITER = 10**5

CONTINUE = False
DISCOVER = True


@dataclass(frozen=True)
class MdpState:
    config: Configuration
    held: Route

    def __str__(self):
        return f"(config={self.config}, held={self.held})"


class StateSpace:
    """Configuration/route product space with per-route throughputs.

    Everything here is independent of phi and of the mobility
    probabilities, so one instance serves a whole parameter sweep.
    """

    def __init__(self, params: NetworkParams):
        routes, values, order = _route_table(params.K, params.m, params.rates)
        self.params = params
        self.configs: tuple[Configuration, ...] = tuple(
            enumerate_configurations(params)
        )
        self.routes: tuple[Route, ...] = routes
        self.route_f = np.array([float(v) for v in values])
        self.counts = np.array([c.counts for c in self.configs], dtype=np.int64)
        C, R = len(self.configs), len(routes)

        supported = np.zeros((C, R), dtype=bool)
        for j, route in enumerate(routes):
            if route.is_null:
                continue
            interior = [p - 1 for p in route.interior]
            if interior:
                supported[:, j] = (self.counts[:, interior] > 0).all(axis=1)
            else:
                supported[:, j] = True
        # Throughput earned by continuing on each route in each config.
        self.cont_f = np.where(supported, self.route_f[None, :], 0.0)
        self.cont_f.setflags(write=False)

        # Best supported route per config: first supported in best-first order.
        self.best_route_idx = np.full(C, len(routes) - 1, dtype=np.int64)
        self.best_f = np.zeros(C)
        remaining = np.ones(C, dtype=bool)
        for j in order:
            if routes[j].is_null:
                continue
            hit = remaining & supported[:, j]
            self.best_route_idx[hit] = j
            self.best_f[hit] = self.route_f[j]
            remaining &= ~hit
        self.best_route_idx.setflags(write=False)
        self.best_f.setflags(write=False)

        self.n_configs = C
        self.n_routes = R
        self.null_route_idx = R - 1

    def config_index(self, config: Configuration) -> int:
        idx = getattr(self, "_config_index", None)
        if idx is None:
            idx = {c.counts: i for i, c in enumerate(self.configs)}
            self._config_index = idx
        return idx[config.counts]

    def route_index(self, route: Route) -> int:
        idx = getattr(self, "_route_index", None)
        if idx is None:
            idx = {r.positions: i for i, r in enumerate(self.routes)}
            self._route_index = idx
        return idx[route.positions]


@lru_cache(maxsize=8)
def _state_space_cached(K, N, m, rates) -> StateSpace:
    return StateSpace(NetworkParams(K=K, N=N, m=m, rates=rates))


def state_space(params: NetworkParams) -> StateSpace:
    return _state_space_cached(params.K, params.N, params.m, params.rates)


class Mdp:
    """State space plus mobility kernel plus phi. States are indexed
    s = config_index * n_routes + route_index."""

    def __init__(self, space: StateSpace, kernel: ConfigKernel, params: NetworkParams):
        self.space = space
        self.kernel = kernel
        self.params = params

    @property
    def n_states(self) -> int:
        return self.space.n_configs * self.space.n_routes

    def state(self, s: int) -> MdpState:
        c, r = divmod(s, self.space.n_routes)
        return MdpState(config=self.space.configs[c], held=self.space.routes[r])

    def state_index(self, state: MdpState) -> int:
        return self.space.config_index(state.config) * self.space.n_routes + (
            self.space.route_index(state.held)
        )

    def states(self):
        for s in range(self.n_states):
            yield self.state(s)

    @property
    def reward_discover(self) -> np.ndarray:
        """(C,) array: reward of discovering in each configuration."""
        return (1.0 - self.params.phi) * self.space.best_f

    @property
    def reward_continue(self) -> np.ndarray:
        """(C, R) array: reward of continuing on each held route."""
        return self.space.cont_f

    def rewards(self, actions: np.ndarray) -> np.ndarray:
        """(C, R) per-state reward under the given action table."""
        return np.where(actions, self.reward_discover[:, None], self.reward_continue)

    def with_phi(self, phi: float) -> "Mdp":
        return Mdp(self.space, self.kernel, self.params.with_phi(phi))

    def materialize_policy(self, policy) -> np.ndarray:
        """Accept a (C, R) boolean table or a callable MdpState -> bool
        and return the boolean table."""
        C, R = self.space.n_configs, self.space.n_routes
        if callable(policy):
            table = np.zeros((C, R), dtype=bool)
            for c in range(C):
                for r in range(R):
                    table[c, r] = bool(
                        policy(MdpState(self.space.configs[c], self.space.routes[r]))
                    )
            return table
        table = np.asarray(policy)
        if table.shape != (C, R):
            raise ValueError(f"policy table must have shape {(C, R)}, got {table.shape}")
        return table.astype(bool)


def build_mdp(
    params: NetworkParams, state_limit: int = DEFAULT_STATE_LIMIT
) -> Mdp:
    """Assemble the decision process for the given parameters. Raises
    EnumerationLimitError when |configs| x |routes| exceeds state_limit."""
    space = state_space(params)
    n_states = space.n_configs * space.n_routes
    if n_states > state_limit:
        raise EnumerationLimitError(
            f"{space.n_configs} configurations x {space.n_routes} routes "
            f"= {n_states} states exceed the state limit {state_limit}"
        )
    kernel = config_kernel(params)
    return Mdp(space=space, kernel=kernel, params=params)


@dataclass(frozen=True)
class MdpSolution:
    gain: float
    bias: np.ndarray  # (C, R) relative values
    action: np.ndarray  # (C, R) bool, True = discover
    iterations: int
    span: float


def solve_avg_reward(
    mdp: Mdp,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    v0: np.ndarray | None = None,
) -> MdpSolution:
    """Relative value iteration.

    Each sweep applies the Bellman operator, recentres on the first
    state, and stops when the span of the value increment falls below
    epsilon; the gain estimate is the midpoint of the increment bounds
    (error at most epsilon / 2). Ties between actions go to continue.

    A half-lazy aperiodicity transform is applied when the mobility
    kernel can be periodic (WRAP with p_t = 0); it preserves the optimal
    policy and the stationary laws, and the gain is rescaled exactly.

    The configuration chain must have a single closed class, or no
    single long-run average exists (e.g. frozen nodes with K > 1, or a
    symmetric walk with p_t = 0 on an even cycle, where position parity
    never mixes); such kernels raise ReducibleChainError immediately.
    """
    space = mdp.space
    P = mdp.kernel.matrix
    r_disc = mdp.reward_discover
    r_cont = mdp.reward_continue
    br = space.best_route_idx

    if space.n_configs > 1:
        _, closed = _closed_classes(P)
        if len(closed) != 1:
            parts = []
            for cls in closed:
                parts.append(f"{len(cls)} configs incl. {space.configs[int(cls[0])]}")
            raise ReducibleChainError(
                "configuration chain is reducible; the long-run average "
                f"depends on the initial state ({len(closed)} closed classes: "
                + "; ".join(parts) + ")",
                classes=closed,
            )

    # Half-lazy transform TV = (1 - tau) V + tau T0(V): same optimal
    # actions, gain scaled by tau, and the iteration cannot cycle on a
    # periodic kernel (WRAP with p_t = 0 is periodic or a rotation).
    tau = 1.0
    if mdp.params.boundary is Boundary.WRAP and mdp.params.p_t <= 1e-15:
        tau = 0.5

    C = space.n_configs
    rows = np.arange(C)
    V = np.zeros((C, space.n_routes)) if v0 is None else np.array(v0, dtype=float)
    eps = epsilon * tau
    for it in range(1, max_iter + 1):
        M = P @ V
        q_cont = r_cont + M
        q_disc = r_disc + M[rows, br]
        T0V = np.maximum(q_cont, q_disc[:, None])
        TV = T0V if tau == 1.0 else (1.0 - tau) * V + tau * T0V
        delta = TV - V
        lo = float(delta.min())
        hi = float(delta.max())
        if hi - lo < eps:
            gain = 0.5 * (lo + hi) / tau
            action = q_disc[:, None] > q_cont
            return MdpSolution(
                gain=gain,
                bias=TV - TV[0, 0],
                action=action,
                iterations=it,
                span=(hi - lo) / tau,
            )
        V = TV - TV[0, 0]
    raise ConvergenceError(
        f"value iteration did not reach span {epsilon} within {max_iter} sweeps "
        f"(span {hi - lo:.3e})"
    )


def _induced_chain(mdp: Mdp, actions: np.ndarray) -> csr_matrix:
    """Sparse transition matrix of the chain a policy induces. From
    (config c, route r) the chain moves to (c', next(c, r)) with the
    config-kernel probability of c -> c', where next is the best route
    on discovery and r otherwise."""
    space = mdp.space
    R = space.n_routes
    Pc = csr_matrix(mdp.kernel.matrix)
    next_route = np.where(actions, space.best_route_idx[:, None], np.arange(R)[None, :])

    indptr = [0]
    indices = []
    data = []
    nnz = 0
    for c in range(space.n_configs):
        seg = slice(Pc.indptr[c], Pc.indptr[c + 1])
        cols = Pc.indices[seg].astype(np.int64) * R
        vals = Pc.data[seg]
        for r in range(R):
            indices.append(cols + next_route[c, r])
            data.append(vals)
            nnz += len(vals)
            indptr.append(nnz)
    n = mdp.n_states
    return csr_matrix(
        (np.concatenate(data), np.concatenate(indices), np.array(indptr)),
        shape=(n, n),
    )


def _closed_classes_sparse(P: csr_matrix) -> list[np.ndarray]:
    n_comp, labels = csgraph.connected_components(
        P, directed=True, connection="strong"
    )
    rows, cols = P.nonzero()
    cross = labels[rows] != labels[cols]
    open_labels = set(labels[rows[cross]].tolist())
    return [
        np.flatnonzero(labels == lab)
        for lab in range(n_comp)
        if lab not in open_labels
    ]


DENSE_CLASS_LIMIT = 1500


def _stationary_on_class(P: csr_matrix, tol: float = 1e-12, max_iter: int = 500_000):
    """Stationary vector of an irreducible row-stochastic CSR matrix.

    Small chains get a direct dense solve. Larger ones use power
    iteration on the half-lazy chain (same stationary vector, never
    periodic), verified against the un-lazied residual.
    """
    n = P.shape[0]
    if n <= DENSE_CLASS_LIMIT:
        A = P.toarray().T - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
        return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()

    PT = P.T.tocsr()
    pi = np.full(n, 1.0 / n)
    for it in range(max_iter):
        nxt = 0.5 * (pi + PT @ pi)
        if it % 16 == 0:
            residual = float(np.abs(PT @ nxt - nxt).sum())
            if residual < tol:
                nxt = np.clip(nxt, 0.0, None)
                return nxt / nxt.sum()
        pi = nxt
    raise ConvergenceError(
        f"stationary distribution did not converge to residual {tol} "
        f"within {max_iter} iterations"
    )


def policy_stationary(mdp: Mdp, actions: np.ndarray) -> np.ndarray:
    """(C, R) stationary distribution of the chain the policy induces.

    Requires a single closed class; otherwise raises ReducibleChainError
    naming the classes (transient states simply carry zero mass).
    """
    actions = mdp.materialize_policy(actions)
    P = _induced_chain(mdp, actions)
    closed = _closed_classes_sparse(P)
    if len(closed) != 1:
        parts = []
        for cls in closed:
            example = mdp.state(int(cls[0]))
            parts.append(f"{len(cls)} states incl. {example}")
        raise ReducibleChainError(
            f"policy induces {len(closed)} closed classes: " + "; ".join(parts),
            classes=closed,
        )
    cls = closed[0]
    sub = P[cls][:, cls]
    pi_cls = _stationary_on_class(sub)
    pi = np.zeros(mdp.n_states)
    pi[cls] = pi_cls
    return pi.reshape(mdp.space.n_configs, mdp.space.n_routes)


def evaluate_policy(mdp: Mdp, policy) -> float:
    """Exact long-run average reward of a stationary policy."""
    actions = mdp.materialize_policy(policy)
    pi = policy_stationary(mdp, actions)
    return float((pi * mdp.rewards(actions)).sum())


class PolicyEvaluator:
    """Caches stationary distributions by action table.

    The induced chain depends only on the action table, never on phi,
    so one stationary solve serves every phi in a sweep; the gain is a
    reweighted dot product per phi.
    """

    def __init__(self, mdp: Mdp):
        self.mdp = mdp
        self._cache: dict[bytes, np.ndarray] = {}

    def stationary(self, actions: np.ndarray) -> np.ndarray:
        actions = self.mdp.materialize_policy(actions)
        key = actions.tobytes()
        if key not in self._cache:
            self._cache[key] = policy_stationary(self.mdp, actions)
        return self._cache[key]

    def gain(self, actions: np.ndarray, phi: float | None = None) -> float:
        mdp = self.mdp if phi is None else self.mdp.with_phi(phi)
        actions = mdp.materialize_policy(actions)
        pi = self.stationary(actions)
        return float((pi * mdp.rewards(actions)).sum())

    def discovery_frequency(self, actions: np.ndarray) -> float:
        actions = self.mdp.materialize_policy(actions)
        pi = self.stationary(actions)
        return float(pi[actions].sum())
