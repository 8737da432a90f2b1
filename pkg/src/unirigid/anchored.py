"""Rank-n optimal dual stress matrices for anchored sensor networks.

The dual matrix ``S`` is ``(d+n) x (d+n)``: the first ``d`` rows/columns
belong to the coordinate block of ``Z = [[I, P], [P^T, P^T P]]`` and the
remaining ``n`` to the sensors.  Starting from ``[[P P^T, -P], [-P^T, I]]``,
every sensor column is rewritten from the last to the first by a rank-one
PSD update whose ``d+1`` free stresses solve the nullspace and diagonal
equations for that sensor.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .exceptions import DimensionMismatch, NotFound, SingularMatrix, VerificationFailed
from .framework import AnchoredNetwork
from .graph import LaterationOrder, find_lateration_order, lateration_order
from .numerics import DEFAULT_TOL, RATIONAL, Tolerances


@dataclass
class AnchoredStress:
    S: np.ndarray
    sensor_weights: dict  # (i, j) sensor pair -> w_ij
    anchor_weights: dict  # (k, j) anchor/sensor pair -> wbar_kj
    V: np.ndarray  # dual variable of the Z[:d, :d] = I constraint

    @property
    def rank(self) -> int:
        return self.S.shape[0] - self.V.shape[0]


@dataclass
class AnchoredStep:
    position: int  # 1-based sensor position in the order
    sensor: int
    s: np.ndarray
    weights: dict = field(default_factory=dict)


@dataclass
class AnchoredReport:
    null_ok: bool
    psd_ok: bool
    rank: int
    rank_ok: bool
    offedge_ok: bool
    weights_ok: bool
    gap_ok: bool
    duality_gap: object = 0
    psd_witness: object = None
    worst_offedge: tuple | None = None
    failing_sensor: int | None = None

    @property
    def passed(self) -> bool:
        return all(getattr(self, nm) for nm in self._checks)

    _checks = ("null_ok", "psd_ok", "rank_ok", "offedge_ok", "weights_ok", "gap_ok")

    def failures(self) -> list:
        return [nm for nm in self._checks if not getattr(self, nm)]

    def as_dict(self) -> dict:
        out = {nm: bool(getattr(self, nm)) for nm in self._checks}
        out.update(passed=self.passed, rank=self.rank, duality_gap=numerics.safe_float(self.duality_gap),
                   psd_witness=None if self.psd_witness is None else numerics.safe_float(self.psd_witness),
                   worst_offedge=list(self.worst_offedge) if self.worst_offedge else None,
                   failing_sensor=self.failing_sensor)
        return out


def anchored_prestress(P) -> np.ndarray:
    """``[[P P^T, -P], [-P^T, I]]``: PSD, rank ``n``, annihilated by ``Z``."""
    P = np.asarray(P)
    d, n = P.shape
    backend = numerics.backend_of(P)
    top = np.concatenate([P @ P.T, -P], axis=1)
    bottom = np.concatenate([-P.T, numerics.identity(n, backend)], axis=1)
    out = np.concatenate([top, bottom], axis=0)
    if out.size == 0 or out.dtype != object:
        return out.astype(np.float64) if backend != RATIONAL else out
    return out


def z_matrix(P) -> np.ndarray:
    """Primal solution ``[[I, P], [P^T, P^T P]]`` for known sensor positions."""
    P = np.asarray(P)
    d, n = P.shape
    backend = numerics.backend_of(P)
    top = np.concatenate([numerics.identity(d, backend), P], axis=1)
    return np.concatenate([top, np.concatenate([P.T, P.T @ P], axis=1)], axis=0)


def resolve_network_order(net: AnchoredNetwork, order=None) -> LaterationOrder:
    """Lateration order of the combined graph with the anchors first."""
    edges = net.combined_edges()
    total = net.m + net.n
    if isinstance(order, LaterationOrder):
        lo = order
    elif order is not None or net.order is not None:
        lo = lateration_order(edges, order if order is not None else net.order, net.d)
    else:
        lo = find_lateration_order(edges, net.d, total)
    if sorted(lo.perm[:net.m]) != list(range(1, net.m + 1)):
        raise NotFound("no lateration order lists the anchors first")
    return lo


class _Network:
    """Sensors permuted into lateration order."""

    def __init__(self, net: AnchoredNetwork, order: LaterationOrder, backend, tol):
        self.tol = tol
        self.d, self.m, self.n = net.d, net.m, net.n
        self.backend = backend
        self.anchors = net.anchor_positions(backend)
        self.sensor_labels = [v - net.m for v in order.perm[net.m:]]
        self.idx = np.array([j - 1 for j in self.sensor_labels], dtype=int)
        self.P = net.sensor_positions(backend)[:, self.idx]
        pos = {j: q for q, j in enumerate(self.sensor_labels)}
        self.sensor_adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in net.sensor_edges:
            self.sensor_adj[pos[i], pos[j]] = self.sensor_adj[pos[j], pos[i]] = True
        # per sensor position: (anchor indices, earlier sensor positions) of its support
        self.supports = []
        for sup in order.supports[net.m:]:
            self.supports.append(([v - 1 for v in sup if v <= net.m],
                                  [pos[v - net.m] for v in sup if v > net.m]))

    def full_index(self):
        return np.concatenate([np.arange(self.d), self.d + self.idx]).astype(int)

    def from_positions(self, S):
        full = self.full_index()
        out = np.empty_like(S)
        out[np.ix_(full, full)] = S
        return out


def _column_step(ctx: _Network, S, q):
    """Rewrite sensor column ``d+q`` (0-based ``q``); updates ``S`` in place."""
    d = ctx.d
    c = d + q
    one = numerics.one(ctx.backend)
    anc, sens = ctx.supports[q]
    # unknowns: wbar for support anchors, then w for support sensors
    cols = [np.append(-ctx.anchors[:, k], one) for k in anc]
    cols += [np.append(-ctx.P[:, i], one) for i in sens]
    M = np.array(cols, dtype=S.dtype).T.reshape(d + 1, d + 1)
    top = S[:d, c] + ctx.P[:, :q] @ S[d:c, c] - ctx.P[:, q]
    diag = one + S[c, c] + np.sum(S[c + 1:, c]) if q + 1 < ctx.n else one + S[c, c]
    rhs = np.append(top, diag)
    try:
        x = numerics.solve_square(M, rhs, ctx.tol)
    except SingularMatrix as exc:
        names = [f"anchor {k + 1}" for k in anc] + [f"sensor {ctx.sensor_labels[i]}" for i in sens]
        raise SingularMatrix(f"support of sensor {ctx.sensor_labels[q]} ({', '.join(names)}) "
                             f"is affinely dependent: {exc}",
                             subset=[k + 1 for k in anc] + [ctx.m + ctx.sensor_labels[i] for i in sens]) from exc
    wbar, w = x[:len(anc)], x[len(anc):]
    s = numerics.zeros(d + ctx.n, ctx.backend)
    s[c] = one
    s[:d] = -S[:d, c]
    if len(anc):
        s[:d] -= ctx.anchors[:, anc] @ wbar
    s[d:c] = -S[d:c, c]
    for i, wi in zip(sens, w):
        s[d + i] -= wi
    head = s[:c + 1]
    S[:c + 1, :c + 1] += np.multiply.outer(head, head)
    weights = {("anchor", k): wk for k, wk in zip(anc, wbar)}
    weights.update({("sensor", i): wi for i, wi in zip(sens, w)})
    return s, weights


def anchored_purify_column(S, ell: int, net: AnchoredNetwork, order=None, backend: str | None = None,
                           tol: Tolerances = DEFAULT_TOL):
    """Rewrite the column of the ``ell``-th ordered sensor (1-based).

    ``S`` and the returned ``(s, S')`` are indexed coordinates-first, then
    sensors by label.
    """
    order = resolve_network_order(net, order)
    S = np.asarray(S)
    backend = backend or numerics.backend_of(S)
    ctx = _Network(net, order, backend, tol)
    full = ctx.full_index()
    Sp = numerics.as_backend(S, backend)[np.ix_(full, full)]
    s, _ = _column_step(ctx, Sp, ell - 1)
    out_s = np.empty_like(s)
    out_s[full] = s
    return out_s, ctx.from_positions(Sp)


def _default_backend(net, backend):
    if backend is None:
        return RATIONAL if net.exact else numerics.FLOAT
    return backend


def anchored_stress(net: AnchoredNetwork, order=None, backend: str | None = None,
                    tol: Tolerances = DEFAULT_TOL, verify: bool = True):
    """Construct the rank-``n`` optimal dual stress for ``net``.

    Every sensor column is rewritten, last to first.  Returns
    ``(AnchoredStress, steps)``; with ``verify`` the result is checked by
    :func:`verify_anchored_stress` and :class:`VerificationFailed` raised on
    any failing check.
    """
    order = resolve_network_order(net, order)
    backend = _default_backend(net, backend)
    ctx = _Network(net, order, backend, tol)
    d, n = ctx.d, ctx.n
    Sp = anchored_prestress(ctx.P)
    steps = []
    sensor_w, anchor_w = {}, {}
    for q in range(n - 1, -1, -1):
        with np.errstate(over="ignore", invalid="ignore"):
            s, weights = _column_step(ctx, Sp, q)
        j = ctx.sensor_labels[q]
        for (kind, t), value in weights.items():
            if kind == "anchor":
                anchor_w[(t + 1, j)] = value
            else:
                i = ctx.sensor_labels[t]
                sensor_w[(min(i, j), max(i, j))] = value
        full_s = np.empty_like(s)
        full_s[ctx.full_index()] = s
        steps.append(AnchoredStep(q + 1, j, full_s, weights))
    if backend != RATIONAL and not np.all(np.isfinite(Sp)):
        from .exceptions import NumericalBreakdown
        raise NumericalBreakdown("float overflow while rewriting sensor columns")
    zero = numerics.zeros((), backend)[()]
    for e in net.sensor_edges:
        sensor_w.setdefault(e, zero)
    for e in net.anchor_edges:
        anchor_w.setdefault(e, zero)
    S = ctx.from_positions(Sp)
    V = S[:d, :d].copy()
    anchors = net.anchor_positions(backend)
    for (k, _j), wk in anchor_w.items():
        V = V - wk * np.multiply.outer(anchors[:, k - 1], anchors[:, k - 1])
    result = AnchoredStress(S, sensor_w, anchor_w, V)
    if verify:
        report = verify_anchored_stress(S, net, tol)
        if not report.passed:
            raise VerificationFailed(f"constructed anchored stress failed: {report.failures()}", report)
    return result, steps


def recover_weights(S, net: AnchoredNetwork, tol: Tolerances = DEFAULT_TOL):
    """Read stresses back from a dual matrix.

    Sensor-pair stresses are ``-S_ij``; anchor stresses of sensor ``j`` solve
    the coordinate-block equations together with the diagonal equation.
    Returns ``(sensor_weights, anchor_weights, failing_sensor)`` where the
    last item is the first sensor whose equations are inconsistent.
    """
    d, n = net.d, net.n
    backend = numerics.backend_of(S)
    anchors = net.anchor_positions(backend)
    sensor_w = {(i, j): -S[d + i - 1, d + j - 1] for i, j in net.sensor_edges}
    anchor_w = {}
    for j in range(1, n + 1):
        ks = sorted(k for k, jj in net.anchor_edges if jj == j)
        diag_rest = S[d + j - 1, d + j - 1] - sum(
            (w for (a, b), w in sensor_w.items() if j in (a, b)), start=numerics.zeros((), backend)[()])
        M = numerics.zeros((d + 1, len(ks)), backend)
        for col, k in enumerate(ks):
            M[:d, col] = -anchors[:, k - 1]
            M[d, col] = numerics.one(backend)
        rhs = np.append(S[:d, d + j - 1], diag_rest)
        x = numerics.solve_consistent(M, rhs, tol)
        if x is None:
            return sensor_w, anchor_w, j
        anchor_w.update({(k, j): xk for k, xk in zip(ks, x)})
    return sensor_w, anchor_w, None


def verify_anchored_stress(S, net: AnchoredNetwork, tol: Tolerances = DEFAULT_TOL) -> AnchoredReport:
    """Six checks: ``Z S = 0``, PSD, rank ``n``, sensor non-edge zeros,
    consistent stress recovery, and zero duality gap."""
    S = np.asarray(S)
    d, n = net.d, net.n
    if S.shape != (d + n, d + n):
        raise DimensionMismatch(f"expected a {(d + n)}x{(d + n)} matrix, got {S.shape}")
    backend = numerics.backend_of(S)
    if backend == RATIONAL and not net.exact:
        S = numerics.as_backend(S, numerics.FLOAT)
        backend = numerics.FLOAT
    exact = backend == RATIONAL
    numerics.check_symmetric(S, tol)
    P = net.sensor_positions(backend)
    Z = z_matrix(P)
    ZS = Z @ S
    if exact:
        null_ok = numerics.max_abs(ZS) == 0
    else:
        null_ok = float(np.linalg.norm(ZS)) <= tol.tol_solve * max(1.0, np.linalg.norm(Z) * np.linalg.norm(S))

    psd = numerics.psd_check(S, tol)
    r = numerics.rank(S, tol)
    scale = max(1.0, numerics.max_abs(S))

    worst, worst_val = None, 0
    for i in range(n):
        for j in range(i + 1, n):
            if (i + 1, j + 1) not in net.sensor_edges and abs(S[d + i, d + j]) > worst_val:
                worst, worst_val = (i + 1, j + 1), abs(S[d + i, d + j])
    offedge_ok = worst_val == 0 if exact else worst_val <= tol.tol_solve * scale
    if offedge_ok:
        worst = None

    sensor_w, anchor_w, failing = recover_weights(S, net, tol)
    weights_ok = failing is None

    gap, gap_ok = None, False
    if weights_ok:
        anchors = net.anchor_positions(backend)
        V = S[:d, :d].copy()
        for (k, _j), wk in anchor_w.items():
            V = V - wk * np.multiply.outer(anchors[:, k - 1], anchors[:, k - 1])
        gap = sum((V[a, a] for a in range(d)), start=numerics.zeros((), backend)[()])
        gap_scale = numerics.safe_float(sum(abs(V[a, a]) for a in range(d)))
        for (i, j), w in sensor_w.items():
            diff = P[:, i - 1] - P[:, j - 1]
            term = w * sum(diff * diff)
            gap += term
            gap_scale += numerics.safe_float(abs(term))
        for (k, j), w in anchor_w.items():
            diff = anchors[:, k - 1] - P[:, j - 1]
            term = w * sum(diff * diff)
            gap += term
            gap_scale += numerics.safe_float(abs(term))
        gap_ok = gap == 0 if exact else abs(gap) <= tol.tol_solve * max(1.0, gap_scale)

    return AnchoredReport(null_ok, psd.is_psd, r, r == n, offedge_ok, weights_ok, gap_ok,
                          0 if gap is None else gap, psd.witness, worst, failing)
