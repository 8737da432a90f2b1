"""Lateration orderings: validation, discovery and (d+1)-tree detection.

Functions take the edge set as pairs of 1-based labels and an ordering as a
sequence of labels (``order[0]`` is the first vertex).  "Position" ``k`` below
is 1-based, so ``order[k - 1]`` is the k-th ordered vertex.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import NamedTuple

from .exceptions import BudgetExhausted, NotFound

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class LaterationOrder:
    """A validated lateration ordering.

    ``supports[k - 1]`` lists the labels of the ``d+1`` predecessors that
    vertex ``perm[k - 1]`` is attached through (empty for the seed clique).
    When a vertex has more than ``d+1`` earlier neighbours the
    lexicographically first ``d+1`` of them (by position) are selected.
    """

    perm: tuple
    d: int
    supports: tuple
    exact: bool

    @property
    def n(self) -> int:
        return len(self.perm)

    def position(self) -> dict:
        """label -> 0-based position"""
        return {v: p for p, v in enumerate(self.perm)}


class OrderCheck(NamedTuple):
    valid: bool
    failing_vertex: int | None
    # every non-seed vertex has exactly d+1 earlier neighbours
    exact: bool


def _adjacency(edges):
    adj = {}
    for i, j in edges:
        adj.setdefault(i, set()).add(j)
        adj.setdefault(j, set()).add(i)
    return adj


def neighbors_before(edges, order, k) -> frozenset:
    """Labels of the earlier vertices adjacent to the k-th ordered vertex."""
    adj = _adjacency(edges)
    v = order[k - 1]
    return frozenset(u for u in order[:k - 1] if u in adj.get(v, ()))


def validate_lateration_order(edges, order, d, n) -> OrderCheck:
    order = tuple(order)
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"order must be a permutation of 1..{n}")
    adj = _adjacency(edges)
    for p in range(min(d + 1, n)):
        v = order[p]
        if any(u not in adj.get(v, ()) for u in order[:p]):
            return OrderCheck(False, v, False)
    exact = True
    seen = set(order[:d + 1])
    for v in order[d + 1:]:
        cnt = len(adj.get(v, set()) & seen)
        if cnt < d + 1:
            return OrderCheck(False, v, False)
        exact &= cnt == d + 1
        seen.add(v)
    return OrderCheck(True, None, exact)


def lateration_order(edges, order, d) -> LaterationOrder:
    """Validate ``order`` and attach the selected predecessor supports.

    Raises :class:`NotFound` naming the first vertex that breaks the definition.
    """
    order = tuple(order)
    n = len(order)
    check = validate_lateration_order(edges, order, d, n)
    if not check.valid:
        raise NotFound(f"not a {d + 1}-lateration order: fails at vertex {check.failing_vertex}")
    adj = _adjacency(edges)
    supports = []
    for p, v in enumerate(order):
        if p <= d:
            supports.append(())
            continue
        nb = adj.get(v, set())
        supports.append(tuple(u for u in order[:p] if u in nb)[:d + 1])
    return LaterationOrder(order, d, tuple(supports), check.exact)


def _cliques(adj, labels, size):
    """(size)-cliques as sorted tuples, in lexicographic order."""
    def extend(prefix, candidates):
        if len(prefix) == size:
            yield tuple(prefix)
            return
        for idx, v in enumerate(candidates):
            yield from extend(prefix + [v], [u for u in candidates[idx + 1:] if u in adj.get(v, ())])
    yield from extend([], list(labels))


def find_lateration_order(edges, d, n, budget: int = DEFAULT_BUDGET) -> LaterationOrder:
    """Deterministic search for a lateration ordering of a spanning subgraph.

    Seeds are ``(d+1)``-cliques in lexicographic order; from a seed the
    ordering grows by always taking the smallest addable label.  Addability
    is monotone in the placed set, so one greedy pass decides each seed and
    the first success is the lexicographically smallest valid ordering.

    Raises :class:`NotFound` when no seed works and :class:`BudgetExhausted`
    when more than ``budget`` partial states were visited first.
    """
    adj = _adjacency(edges)
    labels = range(1, n + 1)
    states = 0
    if n <= d + 1:
        # the whole vertex set must be the seed clique
        order = tuple(labels)
        if validate_lateration_order(edges, order, d, n).valid:
            return lateration_order(edges, order, d)
        raise NotFound(f"{n} vertices do not form a clique")
    for seed in _cliques(adj, labels, d + 1):
        states += 1
        placed = set(seed)
        order = list(seed)
        count = {}
        heap = []
        for v in seed:
            for u in adj.get(v, ()):
                if u not in placed:
                    count[u] = count.get(u, 0) + 1
                    if count[u] == d + 1:
                        heapq.heappush(heap, u)
        while heap:
            v = heapq.heappop(heap)
            states += 1
            if states > budget:
                raise BudgetExhausted(f"gave up after {states} partial states")
            placed.add(v)
            order.append(v)
            for u in adj.get(v, ()):
                if u not in placed:
                    count[u] = count.get(u, 0) + 1
                    if count[u] == d + 1:
                        heapq.heappush(heap, u)
        if len(order) == n:
            return lateration_order(edges, order, d)
        if states > budget:
            raise BudgetExhausted(f"gave up after {states} partial states")
    raise NotFound(f"graph contains no spanning {d + 1}-lateration subgraph")


def is_dplus1_tree(edges, order, d=None) -> bool:
    """True when every selected support is itself a clique.

    On such instances the Gale pre-stress already vanishes on every non-edge.
    ``order`` may be a :class:`LaterationOrder` or a plain label sequence.
    """
    if not isinstance(order, LaterationOrder):
        order = lateration_order(edges, order, d)
    es = {(min(e), max(e)) for e in edges}
    for sup in order.supports:
        for a, b in itertools.combinations(sup, 2):
            if (min(a, b), max(a, b)) not in es:
                return False
    return True
