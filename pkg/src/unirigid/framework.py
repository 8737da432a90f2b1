"""Problem instances: bar frameworks and anchored sensor networks.

Vertices are labelled 1..n throughout the public API.  Positions are kept
as a ``d x n`` numpy array: ``dtype=object`` of Fractions when every input
numeral was an integer or a ``"p/q"`` string, ``float64`` otherwise.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import numerics
from .exceptions import DegenerateSpan, ParseError, SingularMatrix, VertexIndexError
from .numerics import DEFAULT_TOL, FLOAT, RATIONAL, Tolerances


def _normalize_edges(edges, n, what="edge"):
    out = set()
    for e in edges:
        i, j = (int(v) for v in e)
        if i == j:
            raise ValueError(f"self-loop {what} ({i},{j})")
        if not (1 <= i <= n and 1 <= j <= n):
            raise VertexIndexError(f"{what} ({i},{j}) references a vertex outside 1..{n}")
        pair = (min(i, j), max(i, j))
        if pair in out:
            raise ValueError(f"duplicate {what} {pair}")
        out.add(pair)
    return frozenset(out)


def _positions_array(P):
    P = np.asarray(P)
    if P.dtype == object:
        return numerics.as_backend(P, RATIONAL)
    if np.issubdtype(P.dtype, np.integer):
        return numerics.as_backend(P, RATIONAL)
    return P.astype(np.float64)


def _check_order(order, count):
    if order is None:
        return None
    order = tuple(int(v) for v in order)
    if sorted(order) != list(range(1, count + 1)):
        raise ValueError(f"order must be a permutation of 1..{count}")
    return order


@dataclass(frozen=True, eq=False)
class Framework:
    """A bar framework ``(G, P)`` in dimension ``d``.

    ``P`` is ``d x n``; ``edges`` holds pairs ``(i, j)`` with ``i < j``.
    """

    P: np.ndarray
    edges: frozenset
    order: tuple | None = None

    def __post_init__(self):
        P = _positions_array(self.P)
        if P.ndim != 2:
            raise ValueError("positions must form a d x n matrix")
        d, n = P.shape
        if n < 1 or d > n - 1:
            raise ValueError(f"need d <= n-1, got d={d}, n={n}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "edges", _normalize_edges(self.edges, n))
        object.__setattr__(self, "order", _check_order(self.order, n))

    @property
    def d(self) -> int:
        return self.P.shape[0]

    @property
    def n(self) -> int:
        return self.P.shape[1]

    @property
    def exact(self) -> bool:
        return self.P.dtype == object

    def positions(self, backend: str | None = None) -> np.ndarray:
        if backend is None:
            return self.P.copy()
        if backend == RATIONAL and not self.exact:
            raise ValueError("rational backend needs integer or p/q coordinates")
        return numerics.as_backend(self.P, backend)

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i - 1, j - 1] = adj[j - 1, i - 1] = True
        return adj

    def squared_lengths(self, backend: str | None = None) -> dict:
        """``{(i, j): ||p_i - p_j||^2}`` for every edge."""
        P = self.positions(backend)
        out = {}
        for i, j in sorted(self.edges):
            diff = P[:, i - 1] - P[:, j - 1]
            out[(i, j)] = sum(diff * diff) if P.dtype == object else float(diff @ diff)
        return out

    def with_order(self, order) -> Framework:
        return Framework(self.P, self.edges, order)


@dataclass(frozen=True, eq=False)
class AnchoredNetwork:
    """Sensor network with ``m`` anchors and ``n`` sensors in dimension ``d``.

    ``sensor_edges`` pairs sensors ``(i, j)``, ``i < j``; ``anchor_edges``
    pairs ``(k, j)`` with anchor ``k`` in 1..m and sensor ``j`` in 1..n.
    ``order`` (optional) runs over the combined labels 1..m+n where anchors
    come first; the first ``m`` entries of an order must be the anchors.
    """

    anchors: np.ndarray
    sensors: np.ndarray
    sensor_edges: frozenset
    anchor_edges: frozenset
    order: tuple | None = None

    def __post_init__(self):
        A = _positions_array(self.anchors)
        X = _positions_array(self.sensors)
        if A.ndim != 2 or X.ndim != 2:
            raise ValueError("anchor and sensor positions must be matrices")
        d, m = A.shape
        if X.shape[0] != d:
            raise ValueError("anchors and sensors must share a dimension")
        if m < d + 1:
            raise ValueError(f"need at least d+1={d + 1} anchors, got {m}")
        if A.dtype != X.dtype:
            A = A.astype(np.float64)
            X = X.astype(np.float64)
        n = X.shape[1]
        object.__setattr__(self, "anchors", A)
        object.__setattr__(self, "sensors", X)
        object.__setattr__(self, "sensor_edges", _normalize_edges(self.sensor_edges, n, "sensor edge"))
        ae = set()
        for e in self.anchor_edges:
            k, j = (int(v) for v in e)
            if not (1 <= k <= m):
                raise VertexIndexError(f"anchor edge ({k},{j}) references an anchor outside 1..{m}")
            if not (1 <= j <= n):
                raise VertexIndexError(f"anchor edge ({k},{j}) references a sensor outside 1..{n}")
            if (k, j) in ae:
                raise ValueError(f"duplicate anchor edge ({k},{j})")
            ae.add((k, j))
        object.__setattr__(self, "anchor_edges", frozenset(ae))
        order = _check_order(self.order, m + n)
        if order is not None and sorted(order[:m]) != list(range(1, m + 1)):
            raise ValueError("an anchored order must list the anchors 1..m first")
        object.__setattr__(self, "order", order)

    @property
    def d(self) -> int:
        return self.anchors.shape[0]

    @property
    def m(self) -> int:
        return self.anchors.shape[1]

    @property
    def n(self) -> int:
        return self.sensors.shape[1]

    @property
    def exact(self) -> bool:
        return self.sensors.dtype == object

    def anchor_positions(self, backend: str | None = None) -> np.ndarray:
        return self._convert(self.anchors, backend)

    def sensor_positions(self, backend: str | None = None) -> np.ndarray:
        return self._convert(self.sensors, backend)

    def _convert(self, M, backend):
        if backend is None:
            return M.copy()
        if backend == RATIONAL and not self.exact:
            raise ValueError("rational backend needs integer or p/q coordinates")
        return numerics.as_backend(M, backend)

    def combined_edges(self) -> frozenset:
        """Edges of the combined graph on labels 1..m+n.

        Anchor pairs are always present: anchor positions are known, so all
        anchor-anchor distances are too.
        """
        m = self.m
        out = set(itertools.combinations(range(1, m + 1), 2))
        out.update((k, m + j) for k, j in self.anchor_edges)
        out.update((m + i, m + j) for i, j in self.sensor_edges)
        return frozenset(out)

    def combined_framework(self) -> Framework:
        P = np.concatenate([self.anchors, self.sensors], axis=1)
        return Framework(P, self.combined_edges(), self.order)


class GeneralPosition(NamedTuple):
    ok: bool
    # 1-based labels of the first affinely dependent (d+1)-subset, if any
    subset: tuple | None


def extended_position_matrix(F: Framework, backend: str | None = None,
                             tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``[P; 1^T]``, the ``(d+1) x n`` extended position matrix.

    Raises :class:`DegenerateSpan` when the points do not affinely span R^d.
    """
    P = F.positions(backend)
    backend = numerics.backend_of(P)
    ones = numerics.zeros((1, F.n), backend) + (Fraction(1) if backend == RATIONAL else 1.0)
    A = np.concatenate([P, ones], axis=0)
    if numerics.rank(A, tol) < F.d + 1:
        raise DegenerateSpan(f"points do not affinely span R^{F.d}")
    return A


def check_general_position(F: Framework, mode: str = "lazy", backend: str | None = None,
                           tol: Tolerances = DEFAULT_TOL) -> GeneralPosition:
    """Test that no ``d+1`` points are affinely dependent.

    ``mode="full"`` scans every ``(d+1)``-subset; ``mode="lazy"`` returns a
    positive verdict and leaves detection to :class:`SingularMatrix` errors
    raised while solving the pipeline's systems.
    """
    if mode == "lazy":
        return GeneralPosition(True, None)
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    A = extended_position_matrix(F, backend, tol) if F.n > F.d else None
    if A is None:
        return GeneralPosition(True, None)
    k = F.d + 1
    for subset in itertools.combinations(range(F.n), k):
        sub = A[:, list(subset)]
        if numerics.rank(sub, tol) < k:
            return GeneralPosition(False, tuple(i + 1 for i in subset))
    return GeneralPosition(True, None)


def solve_on_subset(A, subset, rhs, tol: Tolerances = DEFAULT_TOL, labels=None):
    """Solve ``A[:, subset] x = rhs`` naming the subset on failure."""
    try:
        return numerics.solve_square(A[:, list(subset)], rhs, tol)
    except SingularMatrix as exc:
        names = [labels[i] for i in subset] if labels is not None else [i + 1 for i in subset]
        raise SingularMatrix(
            f"points {sorted(names)} are affinely dependent: {exc}", subset=sorted(names)
        ) from exc


# ---------------------------------------------------------------------------
# file format


def _parse_number(x, field):
    """Returns (value, exact) for a JSON numeral or "p/q" string."""
    if isinstance(x, bool):
        raise ParseError("expected a number, got a boolean", field=field)
    if isinstance(x, int):
        return Fraction(x), True
    if isinstance(x, float):
        return x, False
    if isinstance(x, str):
        try:
            if "/" in x:
                p, q = x.split("/")
                p, q = int(p), int(q)
                if q == 0:
                    raise ParseError(f"zero denominator in {x!r}", field=field)
                return Fraction(p, q), True
            return Fraction(int(x)), True
        except ValueError:
            raise ParseError(f"malformed number {x!r}", field=field) from None
    raise ParseError(f"expected a number, got {type(x).__name__}", field=field)


def _parse_points(raw, dim, field):
    if not isinstance(raw, list):
        raise ParseError("expected a list of points", field=field)
    values, exact = [], True
    for idx, pt in enumerate(raw):
        if not isinstance(pt, list) or len(pt) != dim:
            raise ParseError(f"point must have {dim} coordinates", field=f"{field}[{idx}]")
        row = []
        for c, x in enumerate(pt):
            v, e = _parse_number(x, f"{field}[{idx}][{c}]")
            exact &= e
            row.append(v)
        values.append(row)
    if exact:
        M = np.empty((dim, len(values)), dtype=object)
        for j, row in enumerate(values):
            for i, v in enumerate(row):
                M[i, j] = v
    else:
        M = np.array([[float(v) for v in row] for row in values], dtype=np.float64).reshape(len(values), dim).T
    return M


def _parse_pairs(raw, field):
    if not isinstance(raw, list):
        raise ParseError("expected a list of pairs", field=field)
    out = []
    for idx, e in enumerate(raw):
        if (not isinstance(e, list) or len(e) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in e)):
            raise ParseError("expected an integer pair", field=f"{field}[{idx}]")
        out.append(tuple(e))
    return out


def read_framework(text: str):
    """Parse the JSON instance format into a Framework or AnchoredNetwork."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    if "dim" not in doc or "positions" not in doc:
        raise ParseError("missing required field", field="dim" if "dim" not in doc else "positions")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise ParseError("dim must be a non-negative integer", field="dim")
    positions = _parse_points(doc["positions"], dim, "positions")
    edges = _parse_pairs(doc.get("edges", []), "edges")
    order = doc.get("order")
    if order is not None and (not isinstance(order, list)
                              or not all(isinstance(v, int) and not isinstance(v, bool) for v in order)):
        raise ParseError("order must be a list of integers", field="order")
    try:
        if "anchors" in doc:
            m = doc["anchors"]
            if not isinstance(m, int) or isinstance(m, bool) or not 0 <= m <= positions.shape[1]:
                raise ParseError("anchors must be an integer count within the position list", field="anchors")
            if "anchor_edges" not in doc:
                raise ParseError("anchor_edges is required when anchors is present", field="anchor_edges")
            anchor_edges = _parse_pairs(doc["anchor_edges"], "anchor_edges")
            return AnchoredNetwork(positions[:, :m], positions[:, m:], edges, anchor_edges, order)
        if "anchor_edges" in doc:
            raise ParseError("anchor_edges given without anchors", field="anchor_edges")
        return Framework(positions, edges, order)
    except VertexIndexError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_number(x):
    """JSON value for a scalar: ints stay ints, other rationals become "p/q"."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _points_json(M):
    return [[format_number(x) for x in M[:, j]] for j in range(M.shape[1])]


def write_framework(obj) -> str:
    """Canonical JSON text: sorted edges, integers and "p/q" strings for exact data."""
    if isinstance(obj, AnchoredNetwork):
        doc = {
            "dim": obj.d,
            "positions": _points_json(obj.anchors) + _points_json(obj.sensors),
            "edges": [list(e) for e in sorted(obj.sensor_edges)],
            "anchors": obj.m,
            "anchor_edges": [list(e) for e in sorted(obj.anchor_edges)],
        }
    else:
        doc = {
            "dim": obj.d,
            "positions": _points_json(obj.P),
            "edges": [list(e) for e in sorted(obj.edges)],
        }
    if obj.order is not None:
        doc["order"] = list(obj.order)
    return json.dumps(doc, indent=1) + "\n"


def read_framework_file(path):
    with open(path, encoding="utf-8") as fh:
        return read_framework(fh.read())


def write_framework_file(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_framework(obj))
