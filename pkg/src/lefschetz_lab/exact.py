"""Exact sparse linear algebra over the rationals.

Columns are dicts mapping a row index to a nonzero ``Fraction``. The
reduction is the standard left-to-right column algorithm used for
persistent homology: after reduction, no two nonzero columns share the
same lowest row.  Cycle representatives come from the recorded column
operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

Column = Dict[int, Fraction]


def as_column(entries: Dict[int, int]) -> Column:
    return {k: Fraction(v) for k, v in entries.items() if v != 0}


def axpy(target: Column, alpha: Fraction, source: Column) -> None:
    """In place ``target += alpha * source`` dropping zeros."""
    for k, v in source.items():
        nv = target.get(k, 0) + alpha * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


@dataclass
class Reduction:
    """Result of reducing a boundary-type matrix.

    Attributes
    ----------
    reduced : list of columns after reduction (R = D V).
    combos : list of columns of V, only kept for columns that reduced to zero.
    pivot_of_row : maps a pivot row to the column that owns it.
    """

    n_rows: int
    reduced: List[Column]
    combos: List[Optional[Column]]
    pivot_of_row: Dict[int, int] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.pivot_of_row)

    def zero_columns(self) -> List[int]:
        return [j for j, col in enumerate(self.reduced) if not col]


def reduce_columns(columns: Sequence[Column], n_rows: int,
                   skip: Optional[set] = None) -> Reduction:
    """Column-reduce ``columns`` so that pivots (lowest rows) are unique.

    Columns listed in ``skip`` are known to reduce to zero (clearing) and
    are not touched; their combination vector is left as ``None``.
    """
    skip = skip or set()
    reduced: List[Column] = []
    combos: List[Optional[Column]] = []
    pivot_of_row: Dict[int, int] = {}
    for j, col in enumerate(columns):
        if j in skip:
            reduced.append({})
            combos.append(None)
            continue
        r = dict(col)
        v: Column = {j: Fraction(1)}
        while r:
            low = max(r)
            k = pivot_of_row.get(low)
            if k is None:
                break
            alpha = -r[low] / reduced[k][low]
            axpy(r, alpha, reduced[k])
            axpy(v, alpha, combos[k])
        reduced.append(r)
        if r:
            pivot_of_row[max(r)] = j
        combos.append(v)
    return Reduction(n_rows, reduced, combos, pivot_of_row)


def transpose(columns: Sequence[Column], n_rows: int) -> List[Column]:
    rows: List[Column] = [dict() for _ in range(n_rows)]
    for j, col in enumerate(columns):
        for i, v in col.items():
            rows[i][j] = v
    return rows


def antitranspose(columns: Sequence[Column], n_rows: int) -> List[Column]:
    """Transpose with both index orders reversed."""
    n_cols = len(columns)
    out: List[Column] = [dict() for _ in range(n_rows)]
    for j, col in enumerate(columns):
        for i, v in col.items():
            out[n_rows - 1 - i][n_cols - 1 - j] = v
    return out


def matmul_is_zero(a: Sequence[Column], b: Sequence[Column]) -> bool:
    """Check ``A @ B == 0`` where both are column lists and rows(B) = cols(A)."""
    for col in b:
        acc: Column = {}
        for k, v in col.items():
            axpy(acc, v, a[k])
        if acc:
            return False
    return True


def dot(cochain: Column, chain: Column) -> Fraction:
    if len(cochain) > len(chain):
        cochain, chain = chain, cochain
    return sum((v * chain[k] for k, v in cochain.items() if k in chain), Fraction(0))


def solve(matrix: List[List[Fraction]], rhs: List[List[Fraction]]) -> List[List[Fraction]]:
    """Solve ``matrix @ X = rhs`` exactly by Gauss-Jordan elimination."""
    n = len(matrix)
    a = [list(row) + list(r) for row, r in zip(matrix, rhs)]
    width = len(a[0]) if a else 0
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:width] for row in a]


def trace_of_quotient(m: List[List[Fraction]], p: List[List[Fraction]]) -> Fraction:
    """Return ``Tr(P^{-1} M)`` for square rational matrices."""
    if not m:
        return Fraction(0)
    x = solve(p, m)
    return sum((x[i][i] for i in range(len(x))), Fraction(0))
