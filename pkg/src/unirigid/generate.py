"""Seeded random lateration instances with integer coordinates."""
from __future__ import annotations

import itertools
import random

import numpy as np

from . import numerics
from .exceptions import BudgetExhausted
from .framework import AnchoredNetwork, Framework

COORD_RANGE = 1000


def _lateration_supports(rng, total, d, tree):
    """Predecessor supports (0-based) for vertices d+1..total-1."""
    supports = {}
    cliques = [tuple(range(d + 1))]
    for v in range(d + 1, total):
        if tree:
            sup = rng.choice(cliques)
            cliques.extend(tuple(sorted(sup[:i] + sup[i + 1:] + (v,))) for i in range(d + 1))
        else:
            sup = tuple(sorted(rng.sample(range(v), d + 1)))
        supports[v] = sup
    return supports


def _place_points(rng, total, d, supports, max_tries):
    """Integer points such that the seed simplex and every support are affinely independent."""
    checks = {v: [] for v in range(total)}
    for sup in itertools.chain([tuple(range(d + 1))], supports.values()):
        checks[max(sup)].append(sup)
    pts = []
    for v in range(total):
        for _ in range(max_tries):
            cand = [rng.randint(-COORD_RANGE, COORD_RANGE) for _ in range(d)]
            trial = pts + [cand]
            if all(_independent(trial, sup, d) for sup in checks[v]):
                pts.append(cand)
                break
        else:
            raise BudgetExhausted(f"could not place point {v + 1} in general position")
    return np.array(pts, dtype=object).reshape(total, d).T


def _independent(pts, sup, d):
    M = np.array([[*pts[i], 1] for i in sup], dtype=object).T
    return numerics.rank(M) == d + 1


def random_framework(d: int, n: int, seed=None, tree: bool = False,
                     extra_edge_prob: float = 0.0, max_tries: int = 1000) -> Framework:
    """Random ``(d+1)``-lateration framework in natural order.

    Each vertex after the seed clique attaches to ``d+1`` uniformly chosen
    predecessors (or, with ``tree=True``, to a uniformly chosen existing
    ``(d+1)``-clique).  ``extra_edge_prob`` adds surplus edges on top.
    """
    if not 0 <= d <= n - 1:
        raise ValueError(f"need 0 <= d <= n-1, got d={d}, n={n}")
    rng = random.Random(seed)
    supports = _lateration_supports(rng, n, d, tree)
    edges = set(itertools.combinations(range(1, d + 2), 2))
    for v, sup in supports.items():
        edges.update((i + 1, v + 1) for i in sup)
    if extra_edge_prob > 0:
        for i, j in itertools.combinations(range(1, n + 1), 2):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    P = _place_points(rng, n, d, supports, max_tries)
    return Framework(P, edges, tuple(range(1, n + 1)))


def random_network(d: int, n: int, m: int | None = None, seed=None, tree: bool = False,
                   max_tries: int = 1000) -> AnchoredNetwork:
    """Random anchored network: ``m`` anchors followed by ``n`` sensors.

    The combined graph is a lateration graph whose first ``m`` vertices are
    the anchors; each sensor attaches to ``d+1`` earlier points.
    """
    m = d + 1 if m is None else m
    if m < d + 1 or n < 0:
        raise ValueError(f"need m >= d+1 anchors and n >= 0 sensors, got m={m}, n={n}")
    rng = random.Random(seed)
    total = m + n
    supports = {}
    if tree:
        cliques = [tuple(range(d + 1))]
        for v in range(d + 1, m):
            cliques.append(tuple(range(v - d, v + 1)))
        for v in range(m, total):
            sup = rng.choice(cliques)
            cliques.extend(tuple(sorted(sup[:i] + sup[i + 1:] + (v,))) for i in range(d + 1))
            supports[v] = sup
    else:
        for v in range(m, total):
            supports[v] = tuple(sorted(rng.sample(range(v), d + 1)))
    # anchors beyond the seed only need to avoid degenerate seed simplices
    pts = _place_points(rng, total, d, supports, max_tries)
    sensor_edges, anchor_edges = set(), set()
    for v, sup in supports.items():
        for i in sup:
            if i < m:
                anchor_edges.add((i + 1, v - m + 1))
            else:
                sensor_edges.add((i - m + 1, v - m + 1))
    return AnchoredNetwork(pts[:, :m], pts[:, m:], sensor_edges, anchor_edges,
                           tuple(range(1, total + 1)))
