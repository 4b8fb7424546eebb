"""
Smith Normal Form over k[x] localized at (x).

Diagonalizes a polynomial matrix with polynomial row and column operations
whose determinants have nonzero constant term, i.e. operations invertible
over the local ring. Pivots are entries of minimal x-adic valuation, ties
broken by (row, col), so the output is deterministic.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from homascend.core.polynomials import Poly, PolyMat

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SNFResult:
    """U·A·V = D with D diagonal: x^{e_i}·u_i for i < r, then zeros."""
    U: PolyMat
    V: PolyMat
    D: PolyMat
    exponents: Tuple[int, ...]
    units: Tuple[Poly, ...]
    free_defect: int

    @property
    def rank(self) -> int:
        return len(self.exponents)


def _find_pivot(A: List[List[Poly]], t: int) -> Optional[Tuple[int, int]]:
    best = None
    best_val = None
    for i in range(t, len(A)):
        for j in range(t, len(A[i])):
            v = A[i][j].valuation
            if v is not None and (best_val is None or v < best_val):
                best, best_val = (i, j), v
    return best


def _row_combine(M: List[List[Poly]], i: int, t: int, u: Poly, q: Poly) -> None:
    """row_i ← u·row_i − q·row_t."""
    M[i] = [u * a - q * b for a, b in zip(M[i], M[t])]


def _col_combine(M: List[List[Poly]], j: int, t: int, u: Poly, q: Poly) -> None:
    """col_j ← u·col_j − q·col_t."""
    for row in M:
        row[j] = u * row[j] - q * row[t]


def snf_localized(A: PolyMat) -> SNFResult:
    """
    Smith normal form over k[x]_(x).

    Returns U, V with determinants of nonzero constant term such that U·A·V is
    diagonal with entries x^{e_1}·u_1, …, x^{e_r}·u_r (u_i units) followed by
    zeros, e_1 ≤ … ≤ e_r, and the free defect z = cols − r.
    """
    field = A.field
    m, n = A.rows, A.cols
    W = [list(row) for row in A.entries]
    U = [list(row) for row in PolyMat.identity(field, m).entries]
    V = [list(row) for row in PolyMat.identity(field, n).entries]
    exponents: List[int] = []
    units: List[Poly] = []

    for t in range(min(m, n)):
        pivot = _find_pivot(W, t)
        if pivot is None:
            break
        i, j = pivot
        if i != t:
            W[t], W[i] = W[i], W[t]
            U[t], U[i] = U[i], U[t]
        if j != t:
            for row in W:
                row[t], row[j] = row[j], row[t]
            for row in V:
                row[t], row[j] = row[j], row[t]

        p = W[t][t]
        e = p.valuation
        u = p.shift_down(e)
        for r in range(t + 1, m):
            if W[r][t]:
                q = W[r][t].shift_down(e)
                _row_combine(W, r, t, u, q)
                _row_combine(U, r, t, u, q)
        for c in range(t + 1, n):
            if W[t][c]:
                q = W[t][c].shift_down(e)
                _col_combine(W, c, t, u, q)
                _col_combine(V, c, t, u, q)
        exponents.append(e)
        units.append(u)

    r = len(exponents)
    logger.debug(f"SNF of {m}×{n} matrix: exponents {exponents}, free defect {n - r}")
    return SNFResult(
        U=PolyMat(field, m, m, U),
        V=PolyMat(field, n, n, V),
        D=PolyMat(field, m, n, W),
        exponents=tuple(exponents),
        units=tuple(units),
        free_defect=n - r,
    )
