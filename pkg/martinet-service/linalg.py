"""
Martinet Engine - Exact Linear Algebra

Row reduction, solving, rank and null spaces over QQ, backed by sympy's sparse
DomainMatrix. Callers pass and receive fractions.Fraction; rows may be dense
sequences or sparse {column: value} mappings.
"""

from fractions import Fraction
from typing import List, Mapping, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Row = Union[Sequence[Fraction], Mapping[int, Fraction]]


def _items(row: Row):
    if isinstance(row, Mapping):
        return row.items()
    return enumerate(row)


def _to_qq(value) -> "QQ":
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def to_domain_matrix(rows: Sequence[Row], ncols: int) -> DomainMatrix:
    dod = {}
    for i, row in enumerate(rows):
        entries = {j: _to_qq(v) for j, v in _items(row) if v != 0}
        if entries:
            dod[i] = entries
    return DomainMatrix.from_dod(dod, (len(rows), ncols), QQ)


def rref(rows: Sequence[Row], ncols: int) -> Tuple[List[dict], Tuple[int, ...]]:
    """Reduced row echelon form as sparse rows, plus pivot columns."""
    if not rows or ncols == 0:
        return [], ()
    reduced, pivots = to_domain_matrix(rows, ncols).rref()
    out: List[dict] = [{} for _ in range(len(pivots))]
    for (i, j), v in reduced.to_dok().items():
        if i < len(pivots) and v:
            out[i][j] = _to_fraction(v)
    return out, tuple(pivots)


def rank(rows: Sequence[Row], ncols: int) -> int:
    if not rows or ncols == 0:
        return 0
    return to_domain_matrix(rows, ncols).rank()


def solve(rows: Sequence[Row], rhs: Sequence[Fraction], ncols: int) -> Optional[List[Fraction]]:
    """A particular solution of A x = b (free variables set to 0), or None if inconsistent."""
    if len(rows) != len(rhs):
        raise ValueError("row count and right-hand side length differ")
    augmented = []
    for row, b in zip(rows, rhs):
        entries = dict(_items(row))
        if b != 0:
            entries[ncols] = Fraction(b)
        augmented.append(entries)
    reduced, pivots = rref(augmented, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        x[p] = row.get(ncols, Fraction(0))
    return x


def canonical_basis(vectors: Sequence[Row], ncols: int) -> List[Tuple[Fraction, ...]]:
    """Canonical basis of a span: the nonzero RREF rows, densified."""
    reduced, _ = rref(vectors, ncols)
    basis = []
    for row in reduced:
        dense = [Fraction(0)] * ncols
        for j, v in row.items():
            dense[j] = v
        basis.append(tuple(dense))
    return basis


def nullspace(rows: Sequence[Row], ncols: int) -> List[Tuple[Fraction, ...]]:
    """Canonical basis of {x : A x = 0}."""
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    vectors = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = {free: Fraction(1)}
        for row, p in zip(reduced, pivots):
            coeff = row.get(free)
            if coeff:
                v[p] = -coeff
        vectors.append(v)
    return canonical_basis(vectors, ncols)


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    return _to_fraction(to_domain_matrix(rows, n).to_dense().det())


def inverse(rows: Sequence[Sequence[Fraction]]) -> Optional[List[List[Fraction]]]:
    n = len(rows)
    if det(rows) == 0:
        return None
    inv = to_domain_matrix(rows, n).to_dense().inv()
    return [[_to_fraction(v) for v in row] for row in inv.to_list()]


def intersection_dim(a: Sequence[Row], b: Sequence[Row], ncols: int) -> int:
    """dim(span a ∩ span b) via dim a + dim b - dim(a + b)."""
    return rank(a, ncols) + rank(b, ncols) - rank(list(a) + list(b), ncols)


def in_span(vector: Row, basis: Sequence[Row], ncols: int) -> bool:
    return rank(list(basis) + [vector], ncols) == rank(basis, ncols)
