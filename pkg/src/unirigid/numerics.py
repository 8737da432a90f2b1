"""Dense linear algebra on two backends.

Matrices are plain numpy arrays.  The rational backend stores
:class:`fractions.Fraction` entries in ``dtype=object`` arrays and every
operation is exact; the float backend uses ``float64`` arrays and the
thresholds in :class:`Tolerances`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import NamedTuple

import numpy as np

try:  # GMP integers speed up fraction-free elimination on large entries
    from gmpy2 import mpz as _gmp_mpz

    def _mpz(q):
        return _gmp_mpz(q.numerator) // _gmp_mpz(q.denominator) if isinstance(q, Fraction) else _gmp_mpz(q)
except ImportError:  # pragma: no cover
    def _mpz(q):
        return int(q)

from .exceptions import DimensionMismatch, NotSymmetric, SingularMatrix

RATIONAL = "rational"
FLOAT = "float"
BACKENDS = (RATIONAL, FLOAT)


@dataclass(frozen=True)
class Tolerances:
    """Thresholds for the float backend; the rational backend ignores them."""

    tol_solve: float = 1e-10
    tol_rank: float = 1e-9
    tol_psd: float = 1e-9
    tol_sym: float = 1e-12
    tol_match: float = 1e-4

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"{f.name} must be strictly positive, got {value!r}")


DEFAULT_TOL = Tolerances()


class PsdResult(NamedTuple):
    is_psd: bool
    # most negative eigenvalue (float) or the failing pivot (rational);
    # None when the matrix is PSD on the rational backend
    witness: object
    # rank as a by-product of the factorization, None if not PSD
    rank: int | None


def to_fraction(x) -> Fraction:
    """Exact conversion of an int, Fraction, float or ``"p/q"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def backend_of(M) -> str:
    return RATIONAL if np.asarray(M).dtype == object else FLOAT


def as_backend(M, backend: str) -> np.ndarray:
    """Return a copy of ``M`` with entries converted to ``backend``."""
    M = np.asarray(M)
    if backend == FLOAT:
        if M.dtype == object:
            return np.vectorize(float, otypes=[np.float64])(M) if M.size else M.astype(np.float64)
        return M.astype(np.float64)
    if backend == RATIONAL:
        out = np.empty(M.shape, dtype=object)
        flat = out.reshape(-1)
        for idx, x in enumerate(M.reshape(-1)):
            flat[idx] = to_fraction(x)
        return out
    raise ValueError(f"unknown backend {backend!r}")


def zeros(shape, backend: str) -> np.ndarray:
    if backend == FLOAT:
        return np.zeros(shape)
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def one(backend: str):
    return Fraction(1) if backend == RATIONAL else 1.0


def identity(k: int, backend: str) -> np.ndarray:
    out = zeros((k, k), backend)
    for i in range(k):
        out[i, i] = one(backend)
    return out


def safe_float(x) -> float:
    """``float(x)`` that saturates to +-inf instead of raising on huge rationals."""
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def max_abs(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if M.dtype == object:
        return safe_float(max(abs(x) for x in M.reshape(-1)))
    return float(np.max(np.abs(M)))


def check_symmetric(M, tol: Tolerances = DEFAULT_TOL) -> None:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.dtype == object:
        if not np.all(M == M.T):
            raise NotSymmetric("matrix is not exactly symmetric")
    elif M.size and np.max(np.abs(M - M.T)) > tol.tol_sym * max(1.0, max_abs(M)):
        raise NotSymmetric("matrix is not symmetric within tol_sym")


# ---------------------------------------------------------------------------
# exact kernels (fraction-free elimination on integer rows)


def _integer_rows(rows):
    """Scale each row of Fractions by the lcm of its denominators."""
    out = []
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([_mpz(x * den) for x in row])
    return out


def _bareiss(M, ncols=None):
    """In-place fraction-free elimination of integer rows.

    Only the first ``ncols`` columns are used as pivot candidates.  Returns
    the list of pivot columns; rows are swapped so that row ``r`` holds the
    ``r``-th pivot.
    """
    nrows = len(M)
    if ncols is None:
        ncols = len(M[0]) if M else 0
    width = len(M[0]) if M else 0
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        row_r = M[r]
        for i in range(r + 1, nrows):
            row_i = M[i]
            f = row_i[c]
            for j in range(c + 1, width):
                row_i[j] = (row_i[j] * piv - f * row_r[j]) // prev
            row_i[c] = 0
        # rows above the pivot keep their scale; only later rows are divided
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def _exact_rank(M) -> int:
    if M.size == 0:
        return 0
    rows = _integer_rows([[to_fraction(x) for x in row] for row in M])
    return len(_bareiss(rows))


def _exact_solve(M, b):
    k = M.shape[0]
    aug = [[to_fraction(x) for x in M[i]] + [to_fraction(b[i])] for i in range(k)]
    rows = _integer_rows(aug)
    pivots = _bareiss(rows, ncols=k)
    if len(pivots) < k:
        raise SingularMatrix(f"singular {k}x{k} system (exact rank {len(pivots)})")
    x = [Fraction(0)] * k
    for i in range(k - 1, -1, -1):
        acc = Fraction(int(rows[i][k]))
        for j in range(i + 1, k):
            acc -= int(rows[i][j]) * x[j]
        x[i] = acc / int(rows[i][i])
    out = np.empty(k, dtype=object)
    out[:] = x
    return out


def _exact_ldl(M) -> PsdResult:
    """Symmetric fraction-free elimination with positive diagonal pivots.

    After scaling to integers, the diagonal entry of a remaining index
    equals (previous pivot) x (Schur complement diagonal), so signs can be
    read off without ever forming a fraction.
    """
    n = M.shape[0]
    den = 1
    for x in M.reshape(-1):
        d = to_fraction(x).denominator
        den = den * d // math.gcd(den, d)
    W = [[_mpz(to_fraction(x) * den) for x in row] for row in M]
    remaining = list(range(n))
    prev = _mpz(1)
    rank = 0
    while remaining:
        for i in remaining:
            if W[i][i] < 0:
                return PsdResult(False, Fraction(int(W[i][i]), int(prev) * den), None)
        p = next((i for i in remaining if W[i][i] > 0), None)
        if p is None:
            # zero diagonal: PSD iff the remaining block is zero
            for i in remaining:
                for j in remaining:
                    if W[i][j] != 0:
                        w = Fraction(int(W[i][j]), int(prev) * den)
                        return PsdResult(False, -w * w, None)
            break
        remaining.remove(p)
        piv = W[p][p]
        row_p = W[p]
        for i in remaining:
            f = W[i][p]
            row_i = W[i]
            for j in remaining:
                row_i[j] = (row_i[j] * piv - f * row_p[j]) // prev
        prev = piv
        rank += 1
    return PsdResult(True, None, rank)


def _exact_consistent(M, b):
    """One solution of a rectangular rational system, or None if inconsistent."""
    m, k = M.shape
    if m == 0:
        return np.array([Fraction(0)] * k, dtype=object)
    rows = [[to_fraction(x) for x in M[i]] + [to_fraction(b[i])] for i in range(m)]
    r = 0
    pivots = []
    for c in range(k):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    if any(rows[i][k] != 0 for i in range(r, m)):
        return None
    x = np.array([Fraction(0)] * k, dtype=object)
    for i, c in enumerate(pivots):
        x[c] = rows[i][k]
    return x


# ---------------------------------------------------------------------------
# float kernels


def _float_solve(M, b, tol: Tolerances):
    M = np.array(M, dtype=np.float64)
    x = np.array(b, dtype=np.float64)
    k = M.shape[0]
    scale = max(1.0, max_abs(M))
    U = M.copy()
    for c in range(k):
        p = c + int(np.argmax(np.abs(U[c:, c])))
        if abs(U[p, c]) <= tol.tol_rank * scale:
            raise SingularMatrix(f"pivot {abs(U[p, c]):.3g} below threshold in {k}x{k} system")
        if p != c:
            U[[c, p]] = U[[p, c]]
            x[[c, p]] = x[[p, c]]
        f = U[c + 1:, c] / U[c, c]
        U[c + 1:, c:] -= np.outer(f, U[c, c:])
        x[c + 1:] -= f * x[c]
    for i in range(k - 1, -1, -1):
        x[i] = (x[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    bnorm = np.linalg.norm(b)
    resid = np.linalg.norm(M @ x - b)
    if resid > tol.tol_solve * max(1.0, np.linalg.norm(M) * np.linalg.norm(x), bnorm):
        raise SingularMatrix(f"relative residual {resid:.3g} exceeds tol_solve in {k}x{k} system")
    return x


# ---------------------------------------------------------------------------
# public operations


def solve_square(M, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve ``M x = b`` for square ``M``.

    Raises :class:`SingularMatrix` when no usable pivot exists.
    """
    M = np.asarray(M)
    b = np.asarray(b)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if b.shape != (M.shape[0],):
        raise DimensionMismatch(f"right-hand side has shape {b.shape}, expected ({M.shape[0]},)")
    if M.dtype == object or b.dtype == object:
        if M.dtype != b.dtype:
            raise TypeError("mixed backends in solve_square")
        return _exact_solve(M, b)
    return _float_solve(M, b, tol)


def rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Exact rank (rational) or numerical rank relative to the largest singular value."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if M.dtype == object:
        return _exact_rank(M)
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > tol.tol_rank * max(1.0, sv[0])))


def psd_check(M, tol: Tolerances = DEFAULT_TOL) -> PsdResult:
    """Decide positive semidefiniteness.

    Float: all eigenvalues must be at least ``-tol_psd * max(1, |lambda_max|)``;
    the witness is the smallest eigenvalue.  Rational: a symmetric-pivoted
    LDL^T factorization must produce no negative pivot.
    """
    M = np.asarray(M)
    check_symmetric(M, tol)
    n = M.shape[0]
    if n == 0:
        return PsdResult(True, None, 0)
    if M.dtype == object:
        return _exact_ldl(M)
    w = np.linalg.eigvalsh(M)
    top = max(1.0, float(np.max(np.abs(w))))
    ok = bool(w[0] >= -tol.tol_psd * top)
    r = int(np.sum(w > tol.tol_rank * top)) if ok else None
    return PsdResult(ok, float(w[0]), r)


def solve_consistent(M, b, tol: Tolerances = DEFAULT_TOL):
    """Some solution of a possibly rectangular system, or ``None`` if inconsistent."""
    M = np.asarray(M)
    b = np.asarray(b)
    if M.dtype == object:
        return _exact_consistent(M, b)
    if M.shape[1] == 0:
        x = np.zeros(0)
    else:
        x = np.linalg.lstsq(M, b, rcond=None)[0]
    resid = np.linalg.norm(M @ x - b) if M.shape[0] else 0.0
    scale = max(1.0, np.linalg.norm(b), (np.linalg.norm(M) * np.linalg.norm(x)) if x.size else 0.0)
    return x if resid <= tol.tol_solve * scale else None
