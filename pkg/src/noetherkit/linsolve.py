"""Exact linear algebra over symbolic expressions.

Gaussian elimination where matrix entries are expressions (rationals, or
rational functions of parameters).  Pivots must be provably nonzero; entries
that merely *might* vanish are never divided by.  Used for isolating
accelerations from the velocity Hessian, inverting quadratic Legendre maps,
and the nullspace computation of the symmetry finder.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .expr import (
    DEFAULT_PROBES,
    ONE,
    ZERO,
    Expr,
    Num,
    ProbeConfig,
    ZeroVerdict,
    add,
    is_zero,
    mul,
    neg,
    pow_,
    sub,
)


class SingularMatrixError(ValueError):
    """No provably-nonzero pivot available."""


def _verdict(e: Expr, probes: ProbeConfig) -> ZeroVerdict:
    if isinstance(e, Num):
        return ZeroVerdict.PROVEN_ZERO if e.value == 0 else ZeroVerdict.PROVEN_NONZERO
    return is_zero(e, probes)


def rref(rows: Sequence[Sequence[Expr]], probes: ProbeConfig = DEFAULT_PROBES) -> Tuple[List[List[Expr]], List[int]]:
    """Reduced row echelon form; returns (matrix, pivot column indices).

    Raises SingularMatrixError when a column has no provably-nonzero entry
    but some entry's zero verdict is Unknown (we refuse to guess).
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        if r >= len(m):
            break
        pivot_row = None
        saw_unknown = False
        for i in range(r, len(m)):
            v = _verdict(m[i][col], probes)
            if v == ZeroVerdict.PROVEN_NONZERO:
                pivot_row = i
                break
            if v == ZeroVerdict.UNKNOWN:
                saw_unknown = True
        if pivot_row is None:
            if saw_unknown:
                raise SingularMatrixError(f"cannot certify a pivot in column {col}")
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = pow_(m[r][col], -1)
        m[r] = [mul(inv, x) for x in m[r]]
        for i in range(len(m)):
            if i == r:
                continue
            f = m[i][col]
            if f == ZERO:
                continue
            m[i] = [sub(x, mul(f, y)) for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    return m, pivots


def solve_square(a: Sequence[Sequence[Expr]], b: Sequence[Expr], probes: ProbeConfig = DEFAULT_PROBES) -> List[Expr]:
    """Solve A x = b for square A with provably-nonzero determinant."""
    n = len(a)
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = rref(aug, probes)
    if pivots != list(range(n)):
        raise SingularMatrixError("matrix is singular (or singularity cannot be ruled out)")
    return [m[i][n] for i in range(n)]


def nullspace(a: Sequence[Sequence[Expr]], probes: ProbeConfig = DEFAULT_PROBES) -> List[List[Expr]]:
    """Basis of the kernel of A (exact)."""
    if not a:
        return []
    ncols = len(a[0])
    m, pivots = rref(a, probes)
    free_cols = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [ZERO] * ncols
        vec[fc] = ONE
        for row_idx, pc in enumerate(pivots):
            vec[pc] = neg(m[row_idx][fc])
        basis.append(vec)
    return basis


def solve_affine(
    a: Sequence[Sequence[Expr]], b: Sequence[Expr], probes: ProbeConfig = DEFAULT_PROBES
) -> Tuple[Optional[List[Expr]], List[List[Expr]]]:
    """General solution of A x = b: (particular or None, kernel basis).

    The particular solution sets all free variables to zero.  Returns None
    for the particular part when the system is inconsistent.
    """
    if not a:
        return [], []
    ncols = len(a[0])
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = rref(aug, probes)
    if ncols in pivots:
        return None, nullspace(a, probes)
    particular = [ZERO] * ncols
    for row_idx, pc in enumerate(pivots):
        particular[pc] = m[row_idx][ncols]
    return particular, nullspace(a, probes)


def determinant(a: Sequence[Sequence[Expr]]) -> Expr:
    """Determinant by cofactor expansion (matrices here are tiny)."""
    n = len(a)
    if n == 0:
        return ONE
    if n == 1:
        return a[0][0]
    if n == 2:
        return sub(mul(a[0][0], a[1][1]), mul(a[0][1], a[1][0]))
    total = ZERO
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in a[1:]]
        term = mul(a[0][j], determinant(minor))
        total = add(total, term if j % 2 == 0 else neg(term))
    return total
