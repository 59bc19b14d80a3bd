"""Exact dense linear algebra over a :class:`~nilca.fields.Field`.

The kernels work on bare sequences of raw field values (lists of lists); the
:class:`Matrix` wrapper is the user-facing type.  Everything is elementary
Gauss-Jordan elimination; problem sizes here are bounded by enumeration
budgets, not by asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import FieldMismatchError
from .fields import Field, Raw, Scalar

Vec = list  # list[Raw]


# -- vector helpers ----------------------------------------------------------


def vec_zero(field: Field, n: int) -> Vec:
    return [field.zero] * n


def vec_is_zero(field: Field, v: Sequence[Raw]) -> bool:
    return all(field.is_zero(x) for x in v)


def vec_add(field: Field, u: Sequence[Raw], v: Sequence[Raw]) -> Vec:
    return [field.add(x, y) for x, y in zip(u, v)]


def vec_sub(field: Field, u: Sequence[Raw], v: Sequence[Raw]) -> Vec:
    return [field.sub(x, y) for x, y in zip(u, v)]


def vec_scale(field: Field, c: Raw, v: Sequence[Raw]) -> Vec:
    return [field.mul(c, x) for x in v]


def vec_eq(field: Field, u: Sequence[Raw], v: Sequence[Raw]) -> bool:
    return len(u) == len(v) and all(x == y for x, y in zip(u, v))


def row_times_mat(field: Field, v: Sequence[Raw], rows: Sequence[Sequence[Raw]]) -> Vec:
    """v . rows  (v has one entry per row)."""
    if not rows:
        return []
    out = vec_zero(field, len(rows[0]))
    for c, row in zip(v, rows):
        if not field.is_zero(c):
            for j, x in enumerate(row):
                if not field.is_zero(x):
                    out[j] = field.add(out[j], field.mul(c, x))
    return out


def mat_mul(field: Field, a: Sequence[Sequence[Raw]], b: Sequence[Sequence[Raw]]) -> list[Vec]:
    return [row_times_mat(field, row, b) for row in a]


def mat_transpose(rows: Sequence[Sequence[Raw]]) -> list[Vec]:
    return [list(col) for col in zip(*rows)] if rows else []


def identity_rows(field: Field, n: int) -> list[Vec]:
    rows = []
    for i in range(n):
        row = vec_zero(field, n)
        row[i] = field.one
        rows.append(row)
    return rows


# -- elimination kernels -------------------------------------------------------


def _rref_rows_prime(p: int, rows) -> tuple[list[Vec], list[int]]:
    """Mod-p specialization of rref_rows (plain int arithmetic, no calls)."""
    work = [list(r) for r in rows]
    ncols = len(work[0]) if work else 0
    pivots: list[int] = []
    out: list[Vec] = []
    for col in range(ncols):
        pivot_row = None
        for r, row in enumerate(work):
            if row[col]:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        row = work.pop(pivot_row)
        inv = pow(row[col], -1, p)
        if inv != 1:
            row = [(inv * x) % p for x in row]
        for group in (work, out):
            for other in group:
                c = other[col]
                if c:
                    for j in range(col, ncols):
                        rj = row[j]
                        if rj:
                            other[j] = (other[j] - c * rj) % p
        out.append(row)
        pivots.append(col)
        if not work:
            break
    return out, pivots


def rref_rows(field: Field, rows: Sequence[Sequence[Raw]]) -> tuple[list[Vec], list[int]]:
    """Reduced row-echelon form; returns (nonzero rows, pivot columns)."""
    if field.p and field.m == 1:
        return _rref_rows_prime(field.p, rows)
    work = [list(r) for r in rows]
    ncols = len(work[0]) if work else 0
    pivots: list[int] = []
    out: list[Vec] = []
    for col in range(ncols):
        pivot_row = None
        for r, row in enumerate(work):
            if not field.is_zero(row[col]):
                pivot_row = r
                break
        if pivot_row is None:
            continue
        row = work.pop(pivot_row)
        inv = field.inv(row[col])
        row = [field.mul(inv, x) for x in row]
        for other in work:
            c = other[col]
            if not field.is_zero(c):
                for j in range(col, ncols):
                    other[j] = field.sub(other[j], field.mul(c, row[j]))
        for other in out:
            c = other[col]
            if not field.is_zero(c):
                for j in range(col, ncols):
                    other[j] = field.sub(other[j], field.mul(c, row[j]))
        out.append(row)
        pivots.append(col)
        if not work:
            break
    return out, pivots


def reduce_vector(
    field: Field,
    v: Sequence[Raw],
    basis: Sequence[Sequence[Raw]],
    pivots: Sequence[int],
) -> Vec:
    """Canonical representative of v modulo the row space of an RREF basis."""
    v = list(v)
    if field.p and field.m == 1:
        p = field.p
        for row, piv in zip(basis, pivots):
            c = v[piv]
            if c:
                for j in range(piv, len(v)):
                    rj = row[j]
                    if rj:
                        v[j] = (v[j] - c * rj) % p
        return v
    for row, piv in zip(basis, pivots):
        c = v[piv]
        if not field.is_zero(c):
            for j in range(piv, len(v)):
                if not field.is_zero(row[j]):
                    v[j] = field.sub(v[j], field.mul(c, row[j]))
    return v


def in_span(field: Field, v, basis, pivots) -> bool:
    return vec_is_zero(field, reduce_vector(field, v, basis, pivots))


def solve_rows(
    field: Field, rows: Sequence[Sequence[Raw]], b: Sequence[Raw]
) -> Optional[Vec]:
    """Solve x . rows = b for a row vector x (free coordinates set to 0).

    Returns None when b is outside the row span.  The returned solution is
    re-checked by multiplication before being handed back.
    """
    if not rows:
        return [] if vec_is_zero(field, b) else None
    ncols = len(rows[0])
    nrows = len(rows)
    # eliminate on [rows | I] so each reduced row remembers its combination
    work = [list(r) + [field.zero] * nrows for r in rows]
    for i in range(nrows):
        work[i][ncols + i] = field.one
    red, pivots = rref_rows(field, work)
    # restrict pivots to the original columns
    x = [field.zero] * nrows
    v = list(b)
    for row, piv in zip(red, pivots):
        if piv >= ncols:
            break
        c = v[piv]
        if not field.is_zero(c):
            for j in range(ncols):
                if not field.is_zero(row[j]):
                    v[j] = field.sub(v[j], field.mul(c, row[j]))
            for j in range(nrows):
                coeff = row[ncols + j]
                if not field.is_zero(coeff):
                    x[j] = field.add(x[j], field.mul(c, coeff))
    if not vec_is_zero(field, v):
        return None
    assert vec_eq(field, row_times_mat(field, x, rows), list(b))
    return x


def invert_rows(field: Field, rows: Sequence[Sequence[Raw]]) -> list[Vec]:
    """Inverse of a square row matrix: returns inv with inv . rows = I."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix is not square")
    work = [list(r) + [field.zero] * n for r in rows]
    for i in range(n):
        work[i][n + i] = field.one
    red, pivots = rref_rows(field, work)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red[:n]]


class PresolvedSystem:
    """Factorization of x . rows = b for many right-hand sides b.

    The elimination of [rows | I] is done once; each solve is a single
    reduction pass.  Also exposes the left kernel for enumerating the full
    solution set.
    """

    def __init__(self, field: Field, rows: Sequence[Sequence[Raw]]):
        self.field = field
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        work = [list(r) + [field.zero] * self.nrows for r in rows]
        for i in range(self.nrows):
            work[i][self.ncols + i] = field.one
        red, pivots = rref_rows(field, work)
        self.solve_rows_ = [
            (piv, row) for row, piv in zip(red, pivots) if piv < self.ncols
        ]
        self.kernel_rows = rref_rows(
            field, [row[self.ncols :] for row, piv in zip(red, pivots) if piv >= self.ncols]
        )[0]
        self._orig = [list(r) for r in rows]

    def solve(self, b: Sequence[Raw]) -> Optional[Vec]:
        field = self.field
        v = list(b)
        x = [field.zero] * self.nrows
        if field.p and field.m == 1:
            p = field.p
            for piv, row in self.solve_rows_:
                c = v[piv]
                if c:
                    for j in range(piv, self.ncols):
                        rj = row[j]
                        if rj:
                            v[j] = (v[j] - c * rj) % p
                    for j in range(self.nrows):
                        rj = row[self.ncols + j]
                        if rj:
                            x[j] = (x[j] + c * rj) % p
            if any(v):
                return None
            return x
        for piv, row in self.solve_rows_:
            c = v[piv]
            if not field.is_zero(c):
                for j in range(piv, self.ncols):
                    if not field.is_zero(row[j]):
                        v[j] = field.sub(v[j], field.mul(c, row[j]))
                for j in range(self.nrows):
                    rj = row[self.ncols + j]
                    if not field.is_zero(rj):
                        x[j] = field.add(x[j], field.mul(c, rj))
        if not vec_is_zero(field, v):
            return None
        return x


def left_kernel(field: Field, rows: Sequence[Sequence[Raw]]) -> list[Vec]:
    """Basis of {x : x . rows = 0}, in RREF over the x-coordinates."""
    nrows = len(rows)
    if nrows == 0:
        return []
    ncols = len(rows[0])
    work = [list(r) + [field.zero] * nrows for r in rows]
    for i in range(nrows):
        work[i][ncols + i] = field.one
    red, pivots = rref_rows(field, work)
    kernel = [row[ncols:] for row, piv in zip(red, pivots) if piv >= ncols]
    return rref_rows(field, kernel)[0] if kernel else []


def intersect_spans(
    field: Field, rows_a: Sequence[Sequence[Raw]], rows_b: Sequence[Sequence[Raw]]
) -> list[Vec]:
    """RREF basis of rowspace(a) ∩ rowspace(b)."""
    if not rows_a or not rows_b:
        return []
    stacked = [list(r) for r in rows_a] + [list(r) for r in rows_b]
    na = len(rows_a)
    result = []
    for combo in left_kernel(field, stacked):
        vec = row_times_mat(field, combo[:na], rows_a)
        if not vec_is_zero(field, vec):
            result.append(vec)
    return rref_rows(field, result)[0] if result else []


class SpanBuilder:
    """Incrementally maintained RREF basis of a growing span."""

    __slots__ = ("field", "ncols", "rows", "pivots")

    def __init__(self, field: Field, ncols: int):
        self.field = field
        self.ncols = ncols
        self.rows: list[Vec] = []
        self.pivots: list[int] = []

    def copy(self) -> "SpanBuilder":
        sb = SpanBuilder(self.field, self.ncols)
        sb.rows = [list(r) for r in self.rows]
        sb.pivots = list(self.pivots)
        return sb

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence[Raw]) -> Vec:
        return reduce_vector(self.field, v, self.rows, self.pivots)

    def contains(self, v: Sequence[Raw]) -> bool:
        return vec_is_zero(self.field, self.reduce(v))

    def add(self, v: Sequence[Raw]) -> bool:
        """Insert v; True iff the span grew."""
        field = self.field
        r = self.reduce(v)
        piv = next((j for j, x in enumerate(r) if not field.is_zero(x)), None)
        if piv is None:
            return False
        inv = field.inv(r[piv])
        r = [field.mul(inv, x) for x in r]
        for row in self.rows:
            c = row[piv]
            if not field.is_zero(c):
                for j in range(piv, self.ncols):
                    if not field.is_zero(r[j]):
                        row[j] = field.sub(row[j], field.mul(c, r[j]))
        at = 0
        while at < len(self.pivots) and self.pivots[at] < piv:
            at += 1
        self.rows.insert(at, r)
        self.pivots.insert(at, piv)
        return True


# -- matrix wrapper ------------------------------------------------------------


@dataclass(frozen=True)
class Matrix:
    """Immutable matrix of raw values over one field."""

    field: Field
    rows: tuple

    @staticmethod
    def from_rows(field: Field, rows: Sequence[Sequence]) -> "Matrix":
        canon = tuple(tuple(field.canonical(x) for x in row) for row in rows)
        widths = {len(r) for r in canon}
        if len(widths) > 1:
            raise ValueError("ragged matrix")
        return Matrix(field, canon)

    @staticmethod
    def from_scalars(rows: Sequence[Sequence[Scalar]]) -> "Matrix":
        fields = {s.field for row in rows for s in row}
        if len(fields) != 1:
            raise FieldMismatchError("matrix entries must share one field")
        field = fields.pop()
        return Matrix(field, tuple(tuple(s.value for s in row) for row in rows))

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        return Matrix(field, tuple(tuple(r) for r in identity_rows(field, n)))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def entry(self, i: int, j: int) -> Scalar:
        return Scalar(self.field, self.rows[i][j])

    def rref(self) -> tuple["Matrix", tuple[int, ...], int]:
        """(RREF with original shape, pivot columns, rank)."""
        red, pivots = rref_rows(self.field, self.rows)
        pad = [vec_zero(self.field, self.ncols) for _ in range(self.nrows - len(red))]
        full = tuple(tuple(r) for r in red + pad)
        return Matrix(self.field, full), tuple(pivots), len(pivots)

    def rank(self) -> int:
        return self.rref()[2]

    def transpose(self) -> "Matrix":
        return Matrix(self.field, tuple(tuple(r) for r in mat_transpose(self.rows)))

    def solve(self, b: Sequence) -> Optional[list]:
        """Some x with M x = b (column convention), or None."""
        bb = [self.field.canonical(x) for x in b]
        if len(bb) != self.nrows:
            raise ValueError("shape mismatch")
        return solve_rows(self.field, mat_transpose(self.rows), bb)

    def mul_vec(self, x: Sequence) -> list:
        xs = [self.field.canonical(v) for v in x]
        return row_times_mat(self.field, xs, mat_transpose(self.rows))
