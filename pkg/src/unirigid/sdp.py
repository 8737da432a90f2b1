"""SDP problem export in SDPA sparse format and certificate checking.

Problems have the form ``maximize C . Y  s.t.  A_i . Y = b_i,  Y PSD``.
In SDPA terms the ``A_i`` are ``F_1..F_m``, ``C`` is ``F_0`` (constraint 0)
and ``b`` is the cost vector on the second data line.  Coefficient matrices
are stored as upper-triangular triplets ``(block, i, j, value)``, 1-based.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import numerics
from .exceptions import DimensionMismatch, ParseError
from .framework import AnchoredNetwork, Framework, format_number
from .numerics import DEFAULT_TOL, RATIONAL, Tolerances


@dataclass
class SdpProblem:
    block_sizes: list
    objective: list = field(default_factory=list)  # triplets of C
    constraints: list = field(default_factory=list)  # list of triplet lists
    rhs: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def dense(self, triplets) -> np.ndarray:
        """Dense symmetric matrix of a single-block triplet list (object dtype)."""
        k = sum(self.block_sizes)
        M = np.array([[Fraction(0)] * k for _ in range(k)], dtype=object).reshape(k, k)
        offsets = np.cumsum([0] + list(self.block_sizes))
        for blk, i, j, v in triplets:
            o = offsets[blk - 1]
            M[o + i - 1, o + j - 1] = v
            M[o + j - 1, o + i - 1] = v
        return M


def _add(entries, i, j, v):
    if v != 0:
        a, b = min(i, j), max(i, j)
        entries[(a, b)] = entries.get((a, b), 0) + v


def _triplets(entries):
    return [(1, i, j, v) for (i, j), v in sorted(entries.items()) if v != 0]


def _identity_objective(k):
    return [(1, i, i, Fraction(1)) for i in range(1, k + 1)]


def _edge_constraint(i, j):
    return [(1, i, i, Fraction(1)), (1, i, j, Fraction(-1)), (1, j, j, Fraction(1))]


def export_realization_sdp(F: Framework, squared_lengths: dict | None = None,
                           maximize_trace: bool = False) -> SdpProblem:
    """Relaxed realization problem: ``(e_i - e_j)(e_i - e_j)^T . Y = d_ij^2``.

    ``squared_lengths`` replaces measured values for selected edges.  With
    ``maximize_trace`` the objective is ``I . Y`` instead of zero.
    """
    lengths = dict(F.squared_lengths())
    lengths.update({(min(e), max(e)): v for e, v in (squared_lengths or {}).items()})
    cons, rhs = [], []
    for (i, j) in sorted(F.edges):
        cons.append(_edge_constraint(i, j))
        rhs.append(lengths[(i, j)])
    obj = _identity_objective(F.n) if maximize_trace else []
    return SdpProblem([F.n], obj, cons, rhs)


def export_anchored_sdp(net: AnchoredNetwork, squared_lengths: dict | None = None,
                        maximize_trace: bool = False) -> SdpProblem:
    """Anchored relaxation on ``Z`` of order ``d+n``.

    The first ``d(d+1)/2`` constraints pin ``Z[:d, :d] = I``; then one
    constraint per sensor edge and one per anchor edge.  Override keys are
    ``("x", i, j)`` for sensor pairs and ``("a", k, j)`` for anchor pairs.
    """
    d, n = net.d, net.n
    overrides = squared_lengths or {}
    anchors = net.anchor_positions()
    sensors = net.sensor_positions()
    cons, rhs = [], []
    for a in range(1, d + 1):
        for b in range(a, d + 1):
            cons.append([(1, a, b, Fraction(1) if a == b else Fraction(1, 2))])
            rhs.append(Fraction(int(a == b)))
    for (i, j) in sorted(net.sensor_edges):
        cons.append(_edge_constraint(d + i, d + j))
        diff = sensors[:, i - 1] - sensors[:, j - 1]
        rhs.append(overrides.get(("x", i, j), sum(diff * diff)))
    for (k, j) in sorted(net.anchor_edges):
        pk = anchors[:, k - 1]
        entries = {}
        for a in range(d):
            for b in range(a, d):
                _add(entries, a + 1, b + 1, pk[a] * pk[b])
            _add(entries, a + 1, d + j, -pk[a])
        _add(entries, d + j, d + j, 1)
        cons.append(_triplets(entries))
        diff = pk - sensors[:, j - 1]
        rhs.append(overrides.get(("a", k, j), sum(diff * diff)))
    obj = _identity_objective(d + n) if maximize_trace else []
    return SdpProblem([d + n], obj, cons, rhs)


# ---------------------------------------------------------------------------
# SDPA sparse I/O


def format_value(v) -> str:
    """Exact decimal when one exists, otherwise the shortest float repr."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        den = v.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den == 1:
            if v.denominator == 1:
                return str(v.numerator)
            k = max(twos, fives)
            digits = abs(v.numerator) * 10**k // v.denominator
            sign = "-" if v < 0 else ""
            whole, frac = divmod(digits, 10**k)
            return f"{sign}{whole}.{str(frac).rjust(k, '0').rstrip('0')}"
        return repr(float(v))
    return repr(float(v))


def write_sdpa(problem: SdpProblem) -> str:
    lines = [f'"exported SDP: {problem.m} constraints"',
             f"{problem.m} = mDIM",
             f"{len(problem.block_sizes)} = nBLOCK",
             " ".join(str(b) for b in problem.block_sizes) + " = bLOCKsTRUCT",
             " ".join(format_value(v) for v in problem.rhs)]
    for c, triplets in enumerate([problem.objective] + problem.constraints):
        for blk, i, j, v in triplets:
            lines.append(f"{c} {blk} {i} {j} {format_value(v)}")
    return "\n".join(lines) + "\n"


def _parse_value(tok, line):
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"malformed number {tok!r}", line=line) from None


def _first_int(text, line, what):
    m = re.match(r"\s*[-+]?\d+", text)
    if not m:
        raise ParseError(f"expected {what}", line=line)
    return int(m.group())


def read_sdpa(text: str) -> SdpProblem:
    """Parse an SDPA sparse file; numbers come back as exact fractions."""
    data = [(no, ln) for no, ln in enumerate(text.splitlines(), 1)
            if ln.strip() and ln.lstrip()[0] not in '"*']
    if len(data) < 3:
        raise ParseError("truncated SDPA header")
    (l1, t1), (l2, t2), (l3, t3) = data[:3]
    m = _first_int(t1, l1, "mDIM")
    nblock = _first_int(t2, l2, "nBLOCK")
    tokens = re.split(r"[\s,{}()]+", t3.split("=")[0].strip())
    sizes = [int(t) for t in tokens if t][:nblock]
    if len(sizes) != nblock or any(s == 0 for s in sizes):
        raise ParseError("bad block structure", line=l3)
    if any(s < 0 for s in sizes):
        raise ParseError("diagonal (LP) blocks are not supported", line=l3)
    rest = data[3:]
    rhs = []
    idx = 0
    while len(rhs) < m:
        if idx >= len(rest):
            raise ParseError("truncated cost vector")
        no, ln = rest[idx]
        rhs.extend(_parse_value(t, no) for t in re.split(r"[\s,{}()]+", ln.strip()) if t)
        idx += 1
    if len(rhs) != m:
        raise ParseError(f"expected {m} cost entries, got {len(rhs)}")
    mats = [[] for _ in range(m + 1)]
    for no, ln in rest[idx:]:
        parts = ln.split()
        if len(parts) != 5:
            raise ParseError("expected 'constraint block i j value'", line=no)
        try:
            c, blk, i, j = (int(p) for p in parts[:4])
        except ValueError:
            raise ParseError("non-integer index", line=no) from None
        if not 0 <= c <= m or not 1 <= blk <= nblock:
            raise ParseError("constraint or block index out of range", line=no)
        if not (1 <= i <= sizes[blk - 1] and 1 <= j <= sizes[blk - 1]):
            raise ParseError("entry index outside its block", line=no)
        mats[c].append((blk, min(i, j), max(i, j), _parse_value(parts[4], no)))
    return SdpProblem(sizes, mats[0], mats[1:], rhs)


def write_sdpa_file(problem: SdpProblem, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_sdpa(problem))


def read_sdpa_file(path) -> SdpProblem:
    with open(path) as fh:
        return read_sdpa(fh.read())


# ---------------------------------------------------------------------------
# dense matrix text ("rows cols" header, whitespace-separated entries)


def read_matrix_text(text: str) -> np.ndarray:
    """Integers and ``p/q`` give an exact matrix; any decimal makes it float."""
    toks = text.split()
    if len(toks) < 2:
        raise ParseError("missing 'rows cols' header", line=1)
    try:
        r, c = int(toks[0]), int(toks[1])
    except ValueError:
        raise ParseError("malformed 'rows cols' header", line=1) from None
    vals = toks[2:]
    if r < 0 or c < 0 or len(vals) != r * c:
        raise ParseError(f"expected {r * c} entries, got {len(vals)}")
    exact = all(re.fullmatch(r"[-+]?\d+(/[-+]?\d+)?", t) for t in vals)
    try:
        if exact:
            flat = [Fraction(t) for t in vals]
            M = np.empty(r * c, dtype=object)
            M[:] = flat
            return M.reshape(r, c)
        return np.array([float(t) for t in vals], dtype=np.float64).reshape(r, c)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"malformed matrix entry: {exc}") from None


def _matrix_token(x) -> str:
    v = format_number(x)
    return repr(v) if isinstance(v, float) else str(v)


def write_matrix_text(M) -> str:
    M = np.asarray(M)
    rows = [" ".join(_matrix_token(x) for x in row) for row in M]
    return f"{M.shape[0]} {M.shape[1]}\n" + "".join(r + "\n" for r in rows)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class CertificateReport:
    primal_residual: float
    primal_feasible: bool
    primal_psd: bool
    dual_psd: bool
    dual_in_span: bool
    dual_objective: object
    dual_objective_ok: bool
    inner_product: object
    complementary: bool
    rank_primal: int
    rank_dual: int
    strictly_complementary: bool
    multipliers: list | None = None

    @property
    def passed(self) -> bool:
        return (self.primal_feasible and self.primal_psd and self.dual_psd and self.dual_in_span
                and self.dual_objective_ok and self.complementary and self.strictly_complementary)

    def as_dict(self) -> dict:
        keys = ("primal_feasible", "primal_psd", "dual_psd", "dual_in_span", "dual_objective_ok",
                "complementary", "rank_primal", "rank_dual", "strictly_complementary")
        out = {k: getattr(self, k) if k.startswith("rank") else bool(getattr(self, k)) for k in keys}
        out.update(passed=bool(self.passed), primal_residual=numerics.safe_float(self.primal_residual),
                   dual_objective=numerics.safe_float(self.dual_objective),
                   inner_product=numerics.safe_float(self.inner_product))
        return out


def _inner(A, B):
    return np.sum(A * B)


def _is_zero(x, scale, exact, tol):
    return x == 0 if exact else abs(float(x)) <= tol.tol_solve * max(1.0, scale)


def check_certificate(Y, S, problem: SdpProblem, tol: Tolerances = DEFAULT_TOL) -> CertificateReport:
    """Check a primal/dual pair against ``problem``.

    The dual slack must satisfy ``S = sum_i y_i A_i - C`` for some ``y``; the
    multipliers are recovered and the dual objective ``b . y`` must vanish
    together with ``Y . S``.
    """
    Y, S = np.asarray(Y), np.asarray(S)
    k = sum(problem.block_sizes)
    for name, M in (("Y", Y), ("S", S)):
        if M.shape != (k, k):
            raise DimensionMismatch(f"{name} is {M.shape}, problem block is {k}x{k}")
    exact = numerics.backend_of(Y) == RATIONAL and numerics.backend_of(S) == RATIONAL
    backend = RATIONAL if exact else numerics.FLOAT
    Y, S = numerics.as_backend(Y, backend), numerics.as_backend(S, backend)
    mats = [numerics.as_backend(problem.dense(t), backend) for t in problem.constraints]
    C = numerics.as_backend(problem.dense(problem.objective), backend)
    rhs = [numerics.as_backend(np.array([v], dtype=object), backend)[0] for v in problem.rhs]

    resid, scale = 0.0, 1.0
    for A_i, b_i in zip(mats, rhs):
        r = _inner(A_i, Y) - b_i
        resid = max(resid, abs(r) if exact else abs(float(r)))
        scale = max(scale, numerics.safe_float(abs(b_i)))
    feasible = resid == 0 if exact else resid <= tol.tol_solve * scale * max(1.0, numerics.max_abs(Y))

    iu = np.triu_indices(k)
    if mats:
        M = np.stack([A_i[iu] for A_i in mats], axis=1)
    else:
        M = numerics.zeros((len(iu[0]), 0), backend)
    y = numerics.solve_consistent(M, (S + C)[iu], tol)
    in_span = y is not None
    if in_span:
        dual_obj = sum((b * yi for b, yi in zip(rhs, y)), start=numerics.zeros((), backend)[()])
        obj_scale = sum(numerics.safe_float(abs(b * yi)) for b, yi in zip(rhs, y))
        dual_ok = _is_zero(dual_obj, obj_scale, exact, tol)
    else:
        dual_obj, dual_ok = math.nan, False

    ip = _inner(Y, S)
    ip_scale = numerics.max_abs(Y) * numerics.max_abs(S) * k
    rY, rS = numerics.rank(Y, tol), numerics.rank(S, tol)
    return CertificateReport(
        primal_residual=resid, primal_feasible=bool(feasible),
        primal_psd=numerics.psd_check(Y, tol).is_psd, dual_psd=numerics.psd_check(S, tol).is_psd,
        dual_in_span=in_span, dual_objective=dual_obj, dual_objective_ok=bool(dual_ok),
        inner_product=ip, complementary=bool(_is_zero(ip, ip_scale, exact, tol)),
        rank_primal=rY, rank_dual=rS, strictly_complementary=rY + rS == k,
        multipliers=None if y is None else list(y))
