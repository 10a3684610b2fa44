"""Link scheduling: conflict graphs, independent sets, and the
optimal-throughput LP for a single route.

Two links conflict when any endpoint of one lies within distance m of
any endpoint of the other (carrier sensing reaches strictly beyond the
longest usable hop but not a full position further). A schedule time-
shares maximal sets of mutually non-conflicting links; the end-to-end
throughput of a route is the best min-link flow over such schedules.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import EnumerationLimitError
from .grid import (
    NULL_ROUTE,
    Configuration,
    NetworkParams,
    Route,
    enumerate_routes,
    hop_rate,
    route_supported,
)
from .simplex import solve_lp

DEFAULT_SET_LIMIT = 10**4


@dataclass(frozen=True)
class Link:
    """A directed hop of a route, from grid position a to position b > a."""

    a: int
    b: int
    rate: float

    @property
    def length(self) -> int:
        return self.b - self.a

    def __str__(self):
        return f"{self.a}-{self.b}"


@dataclass(frozen=True)
class ConflictGraph:
    links: tuple[Link, ...]
    edges: frozenset[tuple[int, int]]  # (i, j) with i < j

    def conflicts(self, i: int, j: int) -> bool:
        if i == j:
            return False
        if i > j:
            i, j = j, i
        return (i, j) in self.edges


@dataclass(frozen=True)
class Schedule:
    """Time shares over maximal independent sets, plus the throughput
    they achieve. Each entry pairs a tuple of link indices with the
    fraction of time that set is active; entries with zero share are
    dropped."""

    sets: tuple[tuple[tuple[int, ...], float], ...]
    throughput: float


def build_conflict_graph(route: Route, params: NetworkParams) -> ConflictGraph:
    """Conflict graph over the consecutive links of a route."""
    if route.is_null:
        return ConflictGraph(links=(), edges=frozenset())
    pos = route.positions
    links = tuple(
        Link(a, b, hop_rate(b - a, params)) for a, b in zip(pos, pos[1:])
    )
    edges = set()
    for i in range(len(links)):
        for j in range(i + 1, len(links)):
            d = min(
                abs(x - y)
                for x in (links[i].a, links[i].b)
                for y in (links[j].a, links[j].b)
            )
            if d <= params.m:
                edges.add((i, j))
    return ConflictGraph(links=links, edges=frozenset(edges))


def maximal_independent_sets(
    graph: ConflictGraph, limit: int = DEFAULT_SET_LIMIT
) -> list[tuple[int, ...]]:
    """All maximal independent sets of the conflict graph, as sorted
    tuples of link indices, in lexicographic order.

    Bron-Kerbosch with pivoting on the complement graph (independent
    sets are cliques of the complement). Raises EnumerationLimitError
    when more than `limit` sets are produced.
    """
    n = len(graph.links)
    if n == 0:
        return []
    comp = [set() for _ in range(n)]  # complement adjacency
    for i in range(n):
        for j in range(n):
            if i != j and not graph.conflicts(i, j):
                comp[i].add(j)

    out: list[tuple[int, ...]] = []

    def expand(r: set[int], p: set[int], x: set[int]):
        if not p and not x:
            out.append(tuple(sorted(r)))
            if len(out) > limit:
                raise EnumerationLimitError(
                    f"more than {limit} maximal independent sets"
                )
            return
        pivot = max(p | x, key=lambda v: len(comp[v] & p))
        for v in sorted(p - comp[pivot]):
            expand(r | {v}, p & comp[v], x & comp[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(n)), set())
    return sorted(out)


def _throughput_lp(
    graph: ConflictGraph, sets: list[tuple[int, ...]]
) -> tuple[Fraction, list[Fraction]]:
    """Exact LP: maximise f subject to sum(shares) <= 1 and, per link,
    coverage >= f / rate. Variables are (f, share_0, ..., share_{q-1})."""
    q = len(sets)
    L = len(graph.links)
    c = [Fraction(1)] + [Fraction(0)] * q
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    A.append([Fraction(0)] + [Fraction(1)] * q)  # total time budget
    b.append(Fraction(1))
    for ell in range(L):
        row = [Fraction(1) / Fraction(graph.links[ell].rate)]
        row += [Fraction(-1) if ell in s else Fraction(0) for s in sets]
        A.append(row)  # f/rate - coverage <= 0
        b.append(Fraction(0))
    return solve_lp(c, A, b)


def _route_throughput_exact(
    route: Route, params: NetworkParams, set_limit: int = DEFAULT_SET_LIMIT
) -> tuple[Fraction, Schedule]:
    if route.is_null:
        return Fraction(0), Schedule(sets=(), throughput=0.0)
    graph = build_conflict_graph(route, params)
    sets = maximal_independent_sets(graph, limit=set_limit)
    value, x = _throughput_lp(graph, sets)
    entries = tuple(
        (sets[i], float(x[1 + i])) for i in range(len(sets)) if x[1 + i] > 0
    )
    return value, Schedule(sets=entries, throughput=float(value))


def route_throughput(
    route: Route, params: NetworkParams, set_limit: int = DEFAULT_SET_LIMIT
) -> tuple[float, Schedule]:
    """Optimal end-to-end throughput of a route and a schedule achieving
    it. The null route yields (0.0, empty schedule)."""
    value, schedule = _route_throughput_exact(route, params, set_limit)
    return float(value), schedule


@lru_cache(maxsize=32)
def _route_table(
    K: int, m: int, rates: tuple[float, ...]
) -> tuple[tuple[Route, ...], tuple[Fraction, ...], tuple[int, ...]]:
    """Per-parameter route facts: the route list (null last), each
    route's exact throughput, and route indices sorted best-first
    (higher throughput, then fewer hops, then lexicographic positions).
    """
    params = NetworkParams(K=K, N=0, m=m, rates=rates)
    routes = tuple(enumerate_routes(params))
    values = tuple(_route_throughput_exact(r, params)[0] for r in routes)
    order = tuple(
        sorted(
            range(len(routes)),
            key=lambda i: (-values[i], routes[i].hops, routes[i].positions),
        )
    )
    return routes, values, order


def best_route(config: Configuration, params: NetworkParams) -> tuple[Route, float]:
    """The supported route with the highest optimal throughput.

    Ties go to the route with the fewest hops, then to the
    lexicographically smallest position sequence. When no route is
    supported, returns (null route, 0.0).
    """
    routes, values, order = _route_table(params.K, params.m, params.rates)
    for i in order:
        if route_supported(routes[i], config):
            return routes[i], float(values[i])
    return NULL_ROUTE, 0.0
