"""Maximum-rank PSD stress matrices for lateration frameworks.

Pipeline: Gale matrix ``L`` (a staircase basis of the nullspace of the
extended position matrix) -> pre-stress ``L L^T`` -> purification, a reverse
column sweep of rank-one PSD updates that zeroes every non-edge entry while
keeping ``A S = 0``, positive semidefiniteness and rank ``n - d - 1``.

All public functions speak in the framework's own vertex labels.  Internally
vertices are permuted so that the lateration order reads ``0..n-1``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .exceptions import (DegenerateSpan, DimensionMismatch, NumericalBreakdown, SingularMatrix,
                         VerificationFailed)
from .framework import Framework, extended_position_matrix, solve_on_subset
from .graph import LaterationOrder, find_lateration_order, lateration_order
from .numerics import DEFAULT_TOL, RATIONAL, Tolerances

log = logging.getLogger(__name__)


@dataclass
class GaleMatrix:
    """``n x (n-d-1)`` nullspace basis of ``A``.

    Column ``c`` belongs to the ordered vertex at position ``d+2+c`` (1-based):
    it holds 1 there, zeros at every later position, and is supported on
    that vertex's selected predecessors.  Rows are indexed by vertex label.
    """

    L: np.ndarray
    order: LaterationOrder


@dataclass
class StressMatrix:
    S: np.ndarray
    kind: str  # "pre-stress" or "stress"
    rank: int | None = None


@dataclass
class PurificationStep:
    position: int  # 1-based position k in the lateration order
    vertex: int
    skipped: bool
    s: np.ndarray | None = None  # update vector indexed by label; S' = S + scale * s s^T
    scale: object = 1
    rank: int | None = None


@dataclass
class PurificationTrace:
    steps: list = field(default_factory=list)

    @property
    def modified(self) -> list:
        return [st.position for st in self.steps if not st.skipped]

    def summary(self) -> list:
        return [("skip" if st.skipped else "modify", st.position) for st in self.steps]


@dataclass
class StressReport:
    null_ok: bool
    offedge_ok: bool
    psd_ok: bool
    rank: int
    rank_ok: bool
    complementarity_ok: bool
    dual_objective_ok: bool
    null_residual: float = 0.0
    worst_offedge: tuple | None = None
    psd_witness: object = None
    dual_objective: object = 0

    @property
    def passed(self) -> bool:
        return (self.null_ok and self.offedge_ok and self.psd_ok and self.rank_ok
                and self.complementarity_ok and self.dual_objective_ok)

    def failures(self) -> list:
        names = ["null_ok", "offedge_ok", "psd_ok", "rank_ok", "complementarity_ok", "dual_objective_ok"]
        return [nm for nm in names if not getattr(self, nm)]

    def as_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "null_ok": bool(self.null_ok),
            "offedge_ok": bool(self.offedge_ok),
            "psd_ok": bool(self.psd_ok),
            "rank": int(self.rank),
            "rank_ok": bool(self.rank_ok),
            "complementarity_ok": bool(self.complementarity_ok),
            "dual_objective_ok": bool(self.dual_objective_ok),
            "null_residual": numerics.safe_float(self.null_residual),
            "worst_offedge": list(self.worst_offedge) if self.worst_offedge else None,
            "psd_witness": None if self.psd_witness is None else numerics.safe_float(self.psd_witness),
            "dual_objective": numerics.safe_float(self.dual_objective),
        }


@dataclass
class StressResult:
    stress: StressMatrix
    trace: PurificationTrace
    order: LaterationOrder
    report: StressReport | None = None


class _Ordered:
    """Framework data permuted into lateration order."""

    def __init__(self, F: Framework, order: LaterationOrder, backend, tol):
        self.tol = tol
        self.d, self.n = F.d, F.n
        self.labels = order.perm
        self.idx = np.array([v - 1 for v in order.perm], dtype=int)
        A = extended_position_matrix(F, backend, tol)
        self.backend = numerics.backend_of(A)
        self.A = A[:, self.idx]
        self.adj = F.adjacency()[np.ix_(self.idx, self.idx)]
        pos = order.position()
        self.supports = [[pos[u] for u in sup] for sup in order.supports]

    def to_positions(self, S):
        return S[np.ix_(self.idx, self.idx)]

    def from_positions(self, S):
        out = np.empty_like(S)
        out[np.ix_(self.idx, self.idx)] = S
        return out

    def vector_from_positions(self, s):
        out = np.empty_like(s)
        out[self.idx] = s
        return out

    def solve_support(self, p, rhs):
        """Solve on the support of position ``p``, re-selecting if it is singular."""
        sup = self.supports[p]
        try:
            return sup, solve_on_subset(self.A, sup, rhs, self.tol, self.labels)
        except SingularMatrix as first:
            preds = [i for i in range(p) if self.adj[i, p]]
            for cand in itertools.combinations(preds, self.d + 1):
                if list(cand) == sup:
                    continue
                try:
                    x = numerics.solve_square(self.A[:, list(cand)], rhs, self.tol)
                except SingularMatrix:
                    continue
                log.warning("support of vertex %s is singular; using %s instead",
                            self.labels[p], [self.labels[i] for i in cand])
                self.supports[p] = list(cand)
                return list(cand), x
            raise first


def _resolve_order(F: Framework, order=None) -> LaterationOrder:
    if isinstance(order, LaterationOrder):
        return order
    if order is None:
        order = F.order
    if order is None:
        return find_lateration_order(F.edges, F.d, F.n)
    return lateration_order(F.edges, order, F.d)


def _backend(F: Framework, backend):
    if backend is None:
        return RATIONAL if F.exact else numerics.FLOAT
    return backend


def projection_prestress(A, tol: Tolerances = DEFAULT_TOL) -> StressMatrix:
    """Orthogonal projector ``I - A^T (A A^T)^{-1} A`` onto the nullspace of ``A``."""
    A = np.asarray(A)
    k, n = A.shape
    backend = numerics.backend_of(A)
    if numerics.rank(A, tol) < k:
        raise DegenerateSpan("extended position matrix is rank deficient")
    G = A @ A.T
    X = numerics.zeros((k, n), backend)
    for j in range(n):
        X[:, j] = numerics.solve_square(G, A[:, j], tol)
    S = numerics.identity(n, backend) - A.T @ X
    return StressMatrix(S, "pre-stress", n - k)


def _gale_positions(ctx: _Ordered):
    d, n = ctx.d, ctx.n
    L = numerics.zeros((n, n - d - 1), ctx.backend)
    for c in range(n - d - 1):
        p = d + 1 + c
        sup, x = ctx.solve_support(p, -ctx.A[:, p])
        L[p, c] = numerics.one(ctx.backend)
        L[sup, c] = x
    return L


def gale_matrix(F: Framework, order=None, backend: str | None = None,
                tol: Tolerances = DEFAULT_TOL) -> GaleMatrix:
    """Staircase Gale matrix of ``F`` along a lateration order.

    Raises :class:`SingularMatrix` naming the affinely dependent support.
    """
    order = _resolve_order(F, order)
    ctx = _Ordered(F, order, _backend(F, backend), tol)
    Lp = _gale_positions(ctx)
    L = np.empty_like(Lp)
    L[ctx.idx] = Lp
    return GaleMatrix(L, order)


def pre_stress(L) -> StressMatrix:
    """``S = L L^T``; PSD by construction with rank equal to the column count."""
    L = L.L if isinstance(L, GaleMatrix) else np.asarray(L)
    return StressMatrix(L @ L.T, "pre-stress", L.shape[1])


def _log2_norm(v) -> float:
    if v.dtype == object:
        q = sum(x * x for x in v)
        return 0.5 * (math.log2(q.numerator) - math.log2(q.denominator)) if q else -math.inf
    nrm = float(np.linalg.norm(v))
    return math.log2(nrm) if nrm > 0 else -math.inf


def _purify_step(ctx: _Ordered, S, p, skip=True, scaling="unit"):
    """One purification step at 0-based position ``p``; updates ``S`` in place.

    The update is ``tau * u u^T`` with ``u[p] = 1``, ``u[i] = -S[i, p] / tau``
    on earlier non-neighbours, zeros after ``p``, and the support entries
    chosen so that ``A u = 0``.  ``scaling="unit"`` fixes ``tau = 1``;
    ``"balanced"`` picks the power of two closest to ``|u1| / |u0|`` where
    ``u0`` is the part of ``u`` independent of ``S`` and ``u1`` the
    cancelling part, which keeps float magnitudes from squaring each step.

    Returns ``(u, tau)`` in positions, or None when the column is skipped.
    """
    col = S[:p, p]
    off = ~ctx.adj[:p, p]
    if skip and not np.any(col[off] != 0):
        return None
    one = numerics.one(ctx.backend)
    u = numerics.zeros(ctx.n, ctx.backend)
    u[p] = one
    u[:p][off] = -col[off]
    if scaling == "unit":
        tau = one
        rhs = -(ctx.A[:, :p + 1] @ u[:p + 1])
        sup, x = ctx.solve_support(p, rhs)
        u[sup] = x
    elif scaling == "balanced":
        u1 = u.copy()
        u1[p] = 0 * one
        sup, x1 = ctx.solve_support(p, -(ctx.A[:, :p] @ u1[:p]))
        u1[sup] = x1
        u0 = numerics.zeros(ctx.n, ctx.backend)
        u0[p] = one
        sup, x0 = ctx.solve_support(p, -ctx.A[:, p])
        u0[sup] = x0
        l1, l0 = _log2_norm(u1), _log2_norm(u0)
        e = int(round(l1 - l0)) if math.isfinite(l1) else 0
        tau = one * 2 ** e if e >= 0 else one / 2 ** -e
        u = u0 + u1 / tau
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    head = u[:p + 1]
    S[:p + 1, :p + 1] += tau * np.multiply.outer(head, head)
    return u, tau


def purify_column(S, k: int, F: Framework, order=None, backend: str | None = None,
                  tol: Tolerances = DEFAULT_TOL, skip: bool = False, scaling: str = "unit"):
    """Purify column ``k`` (1-based position in the order) of a pre-stress.

    Returns ``(s, S')`` in vertex labels with ``S' = S + s s^T`` under unit
    scaling; ``s`` is None when ``skip`` is set and the column has no
    non-edge entries left to cancel.  Balanced scaling returns ``(u, tau)``
    in place of ``s``.
    """
    order = _resolve_order(F, order)
    S = np.asarray(S)
    ctx = _Ordered(F, order, backend or numerics.backend_of(S), tol)
    Sp = ctx.to_positions(numerics.as_backend(S, ctx.backend))
    res = _purify_step(ctx, Sp, k - 1, skip, scaling)
    if res is None:
        return None, S.copy()
    u, tau = res
    u = ctx.vector_from_positions(u)
    return (u if scaling == "unit" else (u, tau)), ctx.from_positions(Sp)


def _purify_positions(ctx: _Ordered, Sp, skip=True, track_rank=False, on_step=None, scaling="unit"):
    trace = PurificationTrace()
    for p in range(ctx.n - 1, ctx.d + 1, -1):
        with np.errstate(over="ignore", invalid="ignore"):
            res = _purify_step(ctx, Sp, p, skip, scaling)
        step = PurificationStep(p + 1, ctx.labels[p], res is None)
        if res is not None:
            step.s = ctx.vector_from_positions(res[0])
            step.scale = res[1]
        if track_rank:
            step.rank = numerics.rank(Sp, ctx.tol)
        trace.steps.append(step)
        if on_step is not None:
            on_step(step, ctx.from_positions(Sp))
    if ctx.backend != RATIONAL and not np.all(np.isfinite(Sp)):
        raise NumericalBreakdown(
            "float overflow during purification; entries roughly square with every "
            "modified column (try scaling='balanced' or the rational backend)")
    return trace


def purify(S, F: Framework, order=None, backend: str | None = None, tol: Tolerances = DEFAULT_TOL,
           skip: bool = True, track_rank: bool = False, on_step=None, scaling: str = "unit"):
    """Run purification for ``k = n, n-1, ..., d+3``.

    ``on_step(step, S)`` is called after every column with the current matrix
    in vertex labels.  Returns ``(StressMatrix, PurificationTrace)``.
    """
    order = _resolve_order(F, order)
    S = S.S if isinstance(S, StressMatrix) else np.asarray(S)
    ctx = _Ordered(F, order, _backend(F, backend), tol)
    Sp = ctx.to_positions(numerics.as_backend(S, ctx.backend))
    trace = _purify_positions(ctx, Sp, skip, track_rank, on_step, scaling)
    return StressMatrix(ctx.from_positions(Sp), "stress", F.n - F.d - 1), trace


def compute_stress_matrix(F: Framework, order=None, backend: str | None = None,
                          tol: Tolerances = DEFAULT_TOL, skip: bool = True,
                          verify: bool = True, track_rank: bool = False,
                          scaling: str = "unit") -> StressResult:
    """Full pipeline: order -> Gale matrix -> pre-stress -> purification.

    The result is checked with :func:`verify_stress` unless ``verify`` is
    false; a failing check raises :class:`VerificationFailed`.
    """
    order = _resolve_order(F, order)
    ctx = _Ordered(F, order, _backend(F, backend), tol)
    Lp = _gale_positions(ctx)
    Sp = Lp @ Lp.T
    trace = _purify_positions(ctx, Sp, skip, track_rank, scaling=scaling)
    stress = StressMatrix(ctx.from_positions(Sp), "stress", F.n - F.d - 1)
    result = StressResult(stress, trace, order)
    if verify:
        report = verify_stress(stress.S, F, tol)
        result.report = report
        if not report.passed:
            raise VerificationFailed(f"constructed stress failed: {report.failures()}", report)
    return result


def verify_stress(S, F: Framework, tol: Tolerances = DEFAULT_TOL) -> StressReport:
    """Check ``A S = 0``, non-edge zeros, PSD, rank ``n-d-1``, strict
    complementarity with ``A^T A`` and the vanishing dual objective.

    The backend follows ``S``: exact comparisons for Fraction matrices.
    """
    S = S.S if isinstance(S, StressMatrix) else np.asarray(S)
    n, d = F.n, F.d
    if S.shape != (n, n):
        raise DimensionMismatch(f"stress has shape {S.shape}, framework has n={n}")
    backend = numerics.backend_of(S)
    if backend == RATIONAL and not F.exact:
        S = numerics.as_backend(S, numerics.FLOAT)
        backend = numerics.FLOAT
    exact = backend == RATIONAL
    numerics.check_symmetric(S, tol)
    A = extended_position_matrix(F, backend, tol)
    scale = numerics.max_abs(S)

    AS = A @ S
    if exact:
        null_res = numerics.max_abs(AS)
        null_ok = null_res == 0
    else:
        null_res = float(np.linalg.norm(AS))
        null_ok = null_res <= tol.tol_solve * max(1.0, np.linalg.norm(A) * np.linalg.norm(S))

    adj = F.adjacency()
    worst, worst_val = None, 0
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i, j] and abs(S[i, j]) > worst_val:
                worst, worst_val = (i + 1, j + 1), abs(S[i, j])
    offedge_ok = worst_val == 0 if exact else worst_val <= tol.tol_solve * max(1.0, scale)
    if offedge_ok:
        worst = None

    psd = numerics.psd_check(S, tol)
    r = numerics.rank(S, tol)
    rank_ok = r == n - d - 1
    comp_ok = numerics.rank(A.T @ A, tol) + r == n

    obj, obj_scale = 0, 0.0
    for (i, j), dsq in F.squared_lengths(backend).items():
        w = -S[i - 1, j - 1]
        obj += w * dsq
        obj_scale += numerics.safe_float(abs(w) * dsq)
    dual_ok = obj == 0 if exact else abs(obj) <= tol.tol_solve * max(1.0, obj_scale)

    return StressReport(null_ok, offedge_ok, psd.is_psd, r, rank_ok, comp_ok, dual_ok,
                        null_res, worst, psd.witness, obj)
