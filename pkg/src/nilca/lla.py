"""Nilpotent Lie algebras with a distinguished descending filtration.

An :class:`LLA` is a finite-dimensional Lie algebra over an exact field,
presented by structure constants ``alpha[i][j][k]`` on a distinguished basis
``v_1..v_n`` together with a filtration profile ``(k_1, ..., k_{c+1})``.  The
basis is adapted to the filtration: the i-th filtration term is the span of
the first ``k_i`` basis vectors, and the chain satisfies
``[P_i, P_j] <= P_{i+j}`` (with terms past ``c`` trivial), so the algebra is
nilpotent of class at most ``c``.

Tables are stored sparsely as ``{(i, j): {k: value}}`` with 0-based indices
and both orientations present.  A table is only wrapped into an ``LLA`` after
validation; loaders and constructors reject anything that fails the rules:

* antisymmetry  ``alpha[i][j][k] == -alpha[j][i][k]``,
* zero diagonal ``alpha[i][i][k] == 0`` (needed over F_2, where antisymmetry
  alone does not force an alternating bracket),
* the Jacobi identity,
* the filtration rule: the bracket of basis vectors of weights ``w, w'``
  is supported on basis vectors of weight at least ``w + w'``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import linalg
from .errors import (
    FormatError,
    ParentMismatchError,
    SearchTooLargeError,
    ValidationError,
)
from .fields import Field, Raw, Scalar
from .linalg import SpanBuilder

Table = dict  # {(int, int): {int: Raw}}


# ---------------------------------------------------------------------------
# filtration profiles


@dataclass(frozen=True)
class Profile:
    """Dimensions (k_1, ..., k_{c+1}) of the distinguished filtration."""

    c: int
    dims: tuple[int, ...]

    def __post_init__(self):
        if self.c < 1:
            raise ValidationError("profile", (), "class bound must be >= 1")
        if len(self.dims) != self.c + 1:
            raise ValidationError("profile", (), f"need {self.c + 1} dimensions")
        if any(d < 0 for d in self.dims):
            raise ValidationError("profile", (), "negative dimension")
        if any(a < b for a, b in zip(self.dims, self.dims[1:])):
            raise ValidationError("profile", (), "dimensions must be non-increasing")
        if self.dims[-1] != 0:
            raise ValidationError("profile", (), "the last filtration term must vanish")

    @property
    def n(self) -> int:
        return self.dims[0]

    def weight(self, index: int) -> int:
        """Filtration weight of the 0-based basis position."""
        w = 0
        for d in self.dims:
            if index < d:
                w += 1
            else:
                break
        return w

    def weights(self) -> list[int]:
        return [self.weight(i) for i in range(self.n)]

    def cutoff(self, weight_sum: int) -> int:
        """Number of basis positions allowed in a bracket of combined weight."""
        if weight_sum > self.c:
            return 0
        return self.dims[weight_sum - 1]

    @staticmethod
    def from_weights(c: int, weights: Sequence[int]) -> "Profile":
        dims = tuple(sum(1 for w in weights if w >= i) for i in range(1, c + 2))
        return Profile(c, dims)


def profile_for_abelian(c: int, n: int) -> Profile:
    return Profile(c, (n,) + (0,) * c)


# ---------------------------------------------------------------------------
# table plumbing


def canon_table(field: Field, entries) -> Table:
    """Normalize to the sparse nested-dict form, dropping zeros."""
    table: Table = {}
    if isinstance(entries, dict):
        it = ((i, j, k, v) for (i, j), col in entries.items() for k, v in col.items())
    else:
        it = entries
    for i, j, k, v in it:
        v = field.canonical(v)
        if field.is_zero(v):
            continue
        table.setdefault((i, j), {})[k] = v
    return {pair: col for pair, col in table.items() if col}


def table_entries(table: Table):
    for (i, j), col in sorted(table.items()):
        for k in sorted(col):
            yield i, j, k, col[k]


def tables_equal(field: Field, a: Table, b: Table) -> bool:
    return canon_table(field, a) == canon_table(field, b)


def relabel_table(table: Table, sigma: Sequence[int]) -> Table:
    """Table of the re-indexed basis u_a = v_{sigma[a]}."""
    inv = {orig: pos for pos, orig in enumerate(sigma)}
    out: Table = {}
    for (i, j), col in table.items():
        out[(inv[i], inv[j])] = {inv[k]: v for k, v in col.items()}
    return out


def table_from_dense(field: Field, dense) -> Table:
    n = len(dense)
    entries = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                entries.append((i, j, k, dense[i][j][k]))
    return canon_table(field, entries)


def table_to_dense(field: Field, n: int, table: Table):
    dense = [[[field.zero] * n for _ in range(n)] for _ in range(n)]
    for i, j, k, v in table_entries(table):
        dense[i][j][k] = v
    return dense


def symmetrize_entries(field: Field, entries) -> Table:
    """Fill antisymmetric partners of upper-triangular input entries."""
    full = []
    for i, j, k, v in entries:
        full.append((i, j, k, v))
        full.append((j, i, k, field.neg(field.canonical(v))))
    return canon_table(field, full)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    condition: str = ""
    witness: tuple = ()
    detail: str = ""

    def raise_if_invalid(self):
        if not self.ok:
            raise ValidationError(self.condition, self.witness, self.detail)


def _bracket_in_table(field: Field, table: Table, u: Sequence[Raw], v: Sequence[Raw]):
    out = [field.zero] * len(u)
    for (i, j), col in table.items():
        ui = u[i]
        if field.is_zero(ui):
            continue
        vj = v[j]
        if field.is_zero(vj):
            continue
        c = field.mul(ui, vj)
        for k, a in col.items():
            out[k] = field.add(out[k], field.mul(c, a))
    return out


def _check_antisymmetry(field: Field, table: Table) -> Optional[tuple]:
    for (i, j), col in sorted(table.items()):
        partner = table.get((j, i), {})
        for k in sorted(set(col) | set(partner)):
            lhs = col.get(k, field.zero)
            rhs = partner.get(k, field.zero)
            if lhs != field.neg(rhs):
                return (i + 1, j + 1, k + 1)
    return None


def _check_diagonal(field: Field, table: Table) -> Optional[tuple]:
    for (i, j), col in sorted(table.items()):
        if i == j and col:
            k = sorted(col)[0]
            return (i + 1, i + 1, k + 1)
    return None


def _check_jacobi(field: Field, n: int, table: Table, triples=None) -> Optional[tuple]:
    """First basis triple (i<j<k) with a nonzero Jacobi residual."""
    basis = linalg.identity_rows(field, n)
    if triples is None:
        triples = (
            (i, j, k)
            for i in range(n)
            for j in range(i + 1, n)
            for k in range(j + 1, n)
        )
    for i, j, k in triples:
        acc = _bracket_in_table(field, table, basis[i], _bracket_in_table(field, table, basis[j], basis[k]))
        t2 = _bracket_in_table(field, table, basis[j], _bracket_in_table(field, table, basis[k], basis[i]))
        t3 = _bracket_in_table(field, table, basis[k], _bracket_in_table(field, table, basis[i], basis[j]))
        for m in range(n):
            s = field.add(acc[m], field.add(t2[m], t3[m]))
            if not field.is_zero(s):
                return (i + 1, j + 1, k + 1, m + 1)
    return None


def _check_filtration(field: Field, table: Table, profile: Profile) -> Optional[tuple]:
    for (i, j), col in sorted(table.items()):
        cutoff = profile.cutoff(profile.weight(i) + profile.weight(j))
        for k in sorted(col):
            if k >= cutoff:
                return (i + 1, j + 1, k + 1)
    return None


def validate_ordered(field: Field, n: int, table, profile: Profile) -> ValidationReport:
    """Check the three structure-constant rules against a fixed profile.

    Conditions are reported in the order: antisymmetry, zero diagonal,
    Jacobi, filtration.
    """
    if profile.n != n:
        raise ValidationError("profile", (), f"profile is for dimension {profile.n}, not {n}")
    table = canon_table(field, table)
    w = _check_antisymmetry(field, table)
    if w:
        return ValidationReport(False, "antisymmetry", w)
    w = _check_diagonal(field, table)
    if w:
        return ValidationReport(False, "diagonal", w)
    w = _check_jacobi(field, n, table)
    if w:
        return ValidationReport(False, "jacobi", w)
    w = _check_filtration(field, table, profile)
    if w:
        return ValidationReport(False, "filtration", w)
    return ValidationReport(True)


def _validate_graded(field: Field, n: int, table: Table, profile: Profile) -> ValidationReport:
    """Same verdict as validate_ordered, but checks the filtration rule first
    so the Jacobi pass can skip triples whose combined weight exceeds c
    (all three terms then vanish by the filtration rule)."""
    w = _check_antisymmetry(field, table)
    if w:
        return ValidationReport(False, "antisymmetry", w)
    w = _check_diagonal(field, table)
    if w:
        return ValidationReport(False, "diagonal", w)
    w = _check_filtration(field, table, profile)
    if w:
        return ValidationReport(False, "filtration", w)
    weights = profile.weights()
    triples = (
        (i, j, k)
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(j + 1, n)
        if weights[i] + weights[j] + weights[k] <= profile.c
    )
    w = _check_jacobi(field, n, table, triples)
    if w:
        return ValidationReport(False, "jacobi", w)
    return ValidationReport(True)


def minimal_weights(field: Field, n: int, table, c: int) -> Optional[list[int]]:
    """Least admissible weight assignment for the table, or None.

    A weight assignment w: positions -> 1..c is admissible when every bracket
    [v_i, v_j] is supported on positions of weight >= w(i) + w(j) (and is zero
    when that sum exceeds c).  The admissible assignments are the pre-fixpoints
    of a monotone operator, so the least one is found by upward iteration; if
    it escapes the bound c there is none at all.
    """
    table = canon_table(field, table)
    w = [1] * n
    changed = True
    while changed:
        changed = False
        for (i, j), col in table.items():
            need = w[i] + w[j]
            if need > c:
                return None
            for k in col:
                if w[k] < need:
                    w[k] = need
                    changed = True
    return w


def weight_assignment_ok(field: Field, table, weights: Sequence[int], c: int) -> bool:
    table = canon_table(field, table)
    for (i, j), col in table.items():
        need = weights[i] + weights[j]
        if col and need > c:
            return False
        if any(weights[k] < need for k in col):
            return False
    return True


def admissible_weight_assignments(
    field: Field, n: int, table, c: int, fixed_prefix: Sequence[int] = ()
):
    """All admissible weight assignments, the given prefix held fixed."""
    table = canon_table(field, table)
    free = n - len(fixed_prefix)
    base = list(fixed_prefix)

    def rec(pos: int, acc: list[int]):
        if pos == free:
            if weight_assignment_ok(field, table, base + acc, c):
                yield tuple(base + acc)
            return
        for w in range(1, c + 1):
            yield from rec(pos + 1, acc + [w])

    yield from rec(0, [])


def validate_any_order(
    field: Field, n: int, table, c: int, bound: int = 8
) -> Optional[tuple[tuple[int, ...], Profile]]:
    """Search for a basis re-indexing under which the table is valid.

    Returns ``(sigma, profile)`` where ``u_a = v_{sigma[a]}`` is the reordered
    basis, or None.  Antisymmetry, the zero diagonal and Jacobi are invariant
    under re-indexing and are checked once up front; the filtration rule only
    depends on a weight assignment to the basis vectors, for which the least
    fixpoint is computed directly instead of searching permutations.
    """
    if n > bound:
        raise SearchTooLargeError(f"re-indexing search disabled for n={n} > {bound}")
    table = canon_table(field, table)
    if _check_antisymmetry(field, table) or _check_diagonal(field, table):
        return None
    if _check_jacobi(field, n, table):
        return None
    weights = minimal_weights(field, n, table, c)
    if weights is None:
        return None
    sigma = tuple(sorted(range(n), key=lambda i: (-weights[i], i)))
    profile = Profile.from_weights(c, weights)
    relabeled = relabel_table(table, sigma)
    report = _validate_graded(field, n, relabeled, profile)
    assert report.ok, f"re-indexed table failed validation: {report}"
    return sigma, profile


# ---------------------------------------------------------------------------
# the LLA proper


class Vec:
    """A coordinate vector in the distinguished basis of its parent LLA."""

    __slots__ = ("parent", "coords")

    def __init__(self, parent: "LLA", coords: Sequence[Raw]):
        if len(coords) != parent.n:
            raise ValueError(f"expected {parent.n} coordinates")
        self.parent = parent
        self.coords = tuple(coords)

    def _check(self, other: "Vec"):
        if self.parent is not other.parent and self.parent != other.parent:
            raise ParentMismatchError("vectors belong to different algebras")

    def __add__(self, other: "Vec") -> "Vec":
        self._check(other)
        f = self.parent.field
        return Vec(self.parent, [f.add(a, b) for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "Vec") -> "Vec":
        self._check(other)
        f = self.parent.field
        return Vec(self.parent, [f.sub(a, b) for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "Vec":
        f = self.parent.field
        return Vec(self.parent, [f.neg(a) for a in self.coords])

    def scale(self, c) -> "Vec":
        f = self.parent.field
        if isinstance(c, Scalar):
            c = c.value
        c = f.canonical(c)
        return Vec(self.parent, [f.mul(c, a) for a in self.coords])

    def bracket(self, other: "Vec") -> "Vec":
        self._check(other)
        return self.parent.bracket(self, other)

    def is_zero(self) -> bool:
        return all(self.parent.field.is_zero(a) for a in self.coords)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vec)
            and (self.parent is other.parent or self.parent == other.parent)
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        f = self.parent.field
        return "(" + ", ".join(f.format(c) for c in self.coords) + ")"


class LLA:
    """Validated structure-constant presentation of a filtered Lie algebra."""

    __slots__ = ("field", "n", "profile", "table", "_key")

    def __init__(self, field: Field, n: int, table, profile: Profile, _trust: str = "validate"):
        self.field = field
        self.n = n
        self.profile = profile
        self.table = canon_table(field, table)
        if profile.n != n:
            raise ValidationError("profile", (), "profile dimension mismatch")
        if any(not (0 <= i < n and 0 <= j < n and 0 <= k < n) for i, j, k, _ in table_entries(self.table)):
            raise ValidationError("profile", (), "table index out of range")
        if _trust == "validate":
            report = (
                validate_ordered(field, n, self.table, profile)
                if n <= 10
                else _validate_graded(field, n, self.table, profile)
            )
            report.raise_if_invalid()
        elif _trust == "fast":
            _validate_graded(field, n, self.table, profile).raise_if_invalid()
        self._key = (
            field,
            n,
            profile.dims,
            tuple(table_entries(self.table)),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, LLA) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"LLA(dim={self.n}, c={self.profile.c}, field={self.field}, profile={self.profile.dims})"

    # -- constructors ------------------------------------------------------

    @staticmethod
    def abelian(field: Field, n: int, c: int = 2) -> "LLA":
        return LLA(field, n, {}, profile_for_abelian(c, n))

    @staticmethod
    def zero(field: Field, c: int = 2) -> "LLA":
        return LLA.abelian(field, 0, c)

    @staticmethod
    def heisenberg(field: Field, c: int = 2) -> "LLA":
        """Basis (z, x, y) with [x, y] = z; profile (3, 1, 0, ...)."""
        one = field.one
        table = symmetrize_entries(field, [(1, 2, 0, one)])
        dims = (3, 1) + (0,) * (c - 1)
        return LLA(field, 3, table, Profile(c, dims))

    # -- vectors and brackets ------------------------------------------------

    def vec(self, coords) -> Vec:
        return Vec(self, [self.field.canonical(c) for c in coords])

    def vec_from_ints(self, coords: Sequence[int]) -> Vec:
        return Vec(self, [self.field.from_int(c) for c in coords])

    def zero_vec(self) -> Vec:
        return Vec(self, [self.field.zero] * self.n)

    def basis_vector(self, i: int) -> Vec:
        coords = [self.field.zero] * self.n
        coords[i] = self.field.one
        return Vec(self, coords)

    def basis(self) -> list[Vec]:
        return [self.basis_vector(i) for i in range(self.n)]

    def bracket_basis(self, i: int, j: int) -> dict:
        return self.table.get((i, j), {})

    def bracket_coords(self, u: Sequence[Raw], v: Sequence[Raw]) -> list[Raw]:
        f = self.field
        out = [f.zero] * self.n
        for (i, j), col in self.table.items():
            ui = u[i]
            if f.is_zero(ui):
                continue
            vj = v[j]
            if f.is_zero(vj):
                continue
            c = f.mul(ui, vj)
            for k, a in col.items():
                out[k] = f.add(out[k], f.mul(c, a))
        return out

    def bracket(self, u: Vec, v: Vec) -> Vec:
        if u.parent is not self and u.parent != self:
            raise ParentMismatchError("left operand belongs to another algebra")
        if v.parent is not self and v.parent != self:
            raise ParentMismatchError("right operand belongs to another algebra")
        return Vec(self, self.bracket_coords(u.coords, v.coords))

    def random_vec(self, rng) -> Vec:
        return Vec(self, [self.field.random(rng) for _ in range(self.n)])

    # -- linear-independence predicates ---------------------------------------

    def theta(self, vectors: Sequence[Vec]) -> bool:
        """True iff the vectors are linearly independent."""
        rows = [list(v.coords) for v in vectors]
        return len(linalg.rref_rows(self.field, rows)[0]) == len(vectors)

    def coordinates_in(self, vectors: Sequence[Vec], w: Vec) -> Optional[list[Raw]]:
        """Coordinates of w over an independent tuple, or None."""
        rows = [list(v.coords) for v in vectors]
        if len(linalg.rref_rows(self.field, rows)[0]) != len(vectors):
            return None
        return linalg.solve_rows(self.field, rows, list(w.coords))

    def pi(self, vectors: Sequence[Vec], w: Vec, i: int) -> Scalar:
        """The i-th coordinate function (1-based i), 0 on degenerate input."""
        if not 1 <= i <= len(vectors):
            raise ValueError(f"coordinate index {i} out of range")
        coords = self.coordinates_in(vectors, w)
        if coords is None:
            return Scalar(self.field, self.field.zero)
        return Scalar(self.field, coords[i - 1])

    def str_of(self, vectors: Sequence[Vec]) -> Optional[Table]:
        """Structure constants of the tuple, or None unless it is a basis of
        a subalgebra (independent, with all pairwise brackets in the span)."""
        m = len(vectors)
        rows = [list(v.coords) for v in vectors]
        if len(linalg.rref_rows(self.field, rows)[0]) != m:
            return None
        entries = []
        for a in range(m):
            for b in range(a + 1, m):
                br = self.bracket_coords(vectors[a].coords, vectors[b].coords)
                coords = linalg.solve_rows(self.field, rows, br)
                if coords is None:
                    return None
                for k, val in enumerate(coords):
                    entries.append((a, b, k, val))
                    entries.append((b, a, k, self.field.neg(val)))
        return canon_table(self.field, entries)

    def phi_lie(self, vectors: Sequence[Vec]) -> bool:
        return self.str_of(vectors) is not None

    # -- spans and series -------------------------------------------------------

    def subspace(self, vectors: Iterable[Vec]) -> "Subspace":
        sb = SpanBuilder(self.field, self.n)
        for v in vectors:
            sb.add(list(v.coords))
        return Subspace._from_builder(self, sb)

    def full_subspace(self) -> "Subspace":
        return self.subspace(self.basis())

    def prefix_subspace(self, k: int) -> "Subspace":
        return self.subspace(self.basis_vector(i) for i in range(k))

    def filtration_subspace(self, i: int) -> "Subspace":
        """P_i as a subspace (prefix span from the profile)."""
        if i <= 0:
            raise ValueError("filtration index starts at 1")
        k = self.profile.dims[i - 1] if i <= self.profile.c + 1 else 0
        return self.prefix_subspace(k)

    def weight_of(self, coords: Sequence[Raw]) -> int:
        """max{i : v in P_i}; n+1-safe value c+1 is returned for 0."""
        f = self.field
        last = -1
        for idx in range(self.n - 1, -1, -1):
            if not f.is_zero(coords[idx]):
                last = idx
                break
        if last == -1:
            return self.profile.c + 1
        return self.profile.weight(last)

    def generate_subalgebra(self, seed: Sequence[Vec]) -> "Subspace":
        """Least subspace containing the seed and closed under the bracket."""
        sb = SpanBuilder(self.field, self.n)
        work: list[list[Raw]] = []
        for v in seed:
            if sb.add(list(v.coords)):
                work.append(list(v.coords))
        basis_so_far: list[list[Raw]] = list(work)
        while work:
            v = work.pop()
            for u in list(basis_so_far):
                w = self.bracket_coords(u, v)
                if sb.add(w):
                    work.append(w)
                    basis_so_far.append(w)
        return Subspace._from_builder(self, sb)

    def lower_central_series(self) -> list["Subspace"]:
        """Descending chain L = L_1, L_{i+1} = [L_i, L], ending at 0."""
        series = [self.full_subspace()]
        if self.n == 0:
            return series
        while True:
            current = series[-1]
            sb = SpanBuilder(self.field, self.n)
            for row in current.rows:
                for j in range(self.n):
                    ej = [self.field.zero] * self.n
                    ej[j] = self.field.one
                    sb.add(self.bracket_coords(list(row), ej))
            nxt = Subspace._from_builder(self, sb)
            series.append(nxt)
            if nxt.dim == 0:
                return series
            if nxt.dim >= current.dim:
                raise ValidationError("filtration", (), "lower central series does not descend")

    def derived_subspace(self) -> "Subspace":
        sb = SpanBuilder(self.field, self.n)
        for (i, j), col in self.table.items():
            v = [self.field.zero] * self.n
            for k, a in col.items():
                v[k] = a
            sb.add(v)
        return Subspace._from_builder(self, sb)

    def center(self) -> "Subspace":
        """{v : [v, L] = 0}, via the kernel of ad."""
        rows = []
        for i in range(self.n):
            ei = [self.field.zero] * self.n
            ei[i] = self.field.one
            big = []
            for j in range(self.n):
                ej = [self.field.zero] * self.n
                ej[j] = self.field.one
                big.extend(self.bracket_coords(ei, ej))
            rows.append(big)
        kernel = linalg.left_kernel(self.field, rows)
        sb = SpanBuilder(self.field, self.n)
        for v in kernel:
            sb.add(v)
        return Subspace._from_builder(self, sb)

    def lazard_check(self) -> bool:
        """[P_i, P_j] <= P_{i+j} for the profile's prefix filtration."""
        return _check_filtration(self.field, self.table, self.profile) is None

    def nilpotency_class(self) -> int:
        return len(self.lower_central_series()) - 1

    def is_isomorphic_layout(self, other: "LLA") -> bool:
        """Cheap invariant screen used before isomorphism search."""
        return (
            self.field == other.field
            and self.n == other.n
            and self.profile.dims == other.profile.dims
            and [s.dim for s in self.lower_central_series()]
            == [s.dim for s in other.lower_central_series()]
            and self.derived_subspace().dim == other.derived_subspace().dim
            and self.center().dim == other.center().dim
        )

    def text_hash(self) -> str:
        return hashlib.sha256(lla_to_text(self).encode()).hexdigest()[:16]


class Subspace:
    """An RREF-presented subspace of an LLA; equality is row equality."""

    __slots__ = ("parent", "rows", "pivots")

    def __init__(self, parent: LLA, rows, pivots):
        self.parent = parent
        self.rows = tuple(tuple(r) for r in rows)
        self.pivots = tuple(pivots)

    @staticmethod
    def _from_builder(parent: LLA, sb: SpanBuilder) -> "Subspace":
        return Subspace(parent, sb.rows, sb.pivots)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, v: Vec) -> bool:
        return linalg.in_span(self.parent.field, list(v.coords), self.rows, self.pivots)

    def contains_coords(self, coords) -> bool:
        return linalg.in_span(self.parent.field, list(coords), self.rows, self.pivots)

    def reduce(self, coords):
        return linalg.reduce_vector(self.parent.field, coords, self.rows, self.pivots)

    def vectors(self) -> list[Vec]:
        return [self.parent.vec(r) for r in self.rows]

    def sum(self, other: "Subspace") -> "Subspace":
        sb = SpanBuilder(self.parent.field, self.parent.n)
        for r in self.rows + other.rows:
            sb.add(list(r))
        return Subspace._from_builder(self.parent, sb)

    def intersect(self, other: "Subspace") -> "Subspace":
        rows = linalg.intersect_spans(self.parent.field, self.rows, other.rows)
        sb = SpanBuilder(self.parent.field, self.parent.n)
        for r in rows:
            sb.add(r)
        return Subspace._from_builder(self.parent, sb)

    def is_bracket_closed(self) -> bool:
        for a in range(self.dim):
            for b in range(a + 1, self.dim):
                w = self.parent.bracket_coords(self.rows[a], self.rows[b])
                if not self.contains_coords(w):
                    return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and (self.parent is other.parent or self.parent == other.parent)
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"Subspace(dim={self.dim} of {self.parent!r})"


# ---------------------------------------------------------------------------
# linear maps between algebras


class Morphism:
    """A linear map src -> dst, stored as images of the source basis."""

    __slots__ = ("src", "dst", "rows")

    def __init__(self, src: LLA, dst: LLA, rows):
        if src.field != dst.field:
            raise ParentMismatchError("morphism endpoints over different fields")
        self.src = src
        self.dst = dst
        self.rows = tuple(tuple(dst.field.canonical(x) for x in row) for row in rows)
        if len(self.rows) != src.n or any(len(r) != dst.n for r in self.rows):
            raise ValueError("morphism matrix shape mismatch")

    @staticmethod
    def identity(lla: LLA) -> "Morphism":
        return Morphism(lla, lla, linalg.identity_rows(lla.field, lla.n))

    @staticmethod
    def zero_map(src: LLA, dst: LLA) -> "Morphism":
        return Morphism(src, dst, [[dst.field.zero] * dst.n for _ in range(src.n)])

    def apply_coords(self, coords):
        return linalg.row_times_mat(self.src.field, coords, self.rows)

    def apply(self, v: Vec) -> Vec:
        if v.parent is not self.src and v.parent != self.src:
            raise ParentMismatchError("vector is not in the morphism source")
        return Vec(self.dst, self.apply_coords(list(v.coords)))

    def compose(self, then: "Morphism") -> "Morphism":
        """then o self : src -> then.dst."""
        if self.dst != then.src:
            raise ParentMismatchError("morphisms do not compose")
        return Morphism(self.src, then.dst, linalg.mat_mul(self.src.field, self.rows, then.rows))

    def image(self) -> Subspace:
        sb = SpanBuilder(self.dst.field, self.dst.n)
        for r in self.rows:
            sb.add(list(r))
        return Subspace._from_builder(self.dst, sb)

    def rank(self) -> int:
        return self.image().dim

    def is_injective(self) -> bool:
        return self.rank() == self.src.n

    def is_lie_hom(self) -> bool:
        f = self.src.field
        for i in range(self.src.n):
            for j in range(i + 1, self.src.n):
                lhs_src = [f.zero] * self.src.n
                for k, a in self.src.bracket_basis(i, j).items():
                    lhs_src[k] = a
                lhs = self.apply_coords(lhs_src)
                rhs = self.dst.bracket_coords(self.rows[i], self.rows[j])
                if not linalg.vec_eq(f, lhs, rhs):
                    return False
        return True

    def is_filtration_preserving(self) -> bool:
        """f(P_i(src)) <= P_i(dst) for every filtration level."""
        c = max(self.src.profile.c, self.dst.profile.c)
        for i in range(1, c + 2):
            k_src = self.src.profile.dims[i - 1] if i <= self.src.profile.c + 1 else 0
            k_dst = self.dst.profile.dims[i - 1] if i <= self.dst.profile.c + 1 else 0
            f = self.dst.field
            for r in range(k_src):
                if any(not f.is_zero(x) for x in self.rows[r][k_dst:]):
                    return False
        return True

    def is_strong_embedding(self) -> bool:
        """Injective hom with image(f) ∩ P_i(dst) = f(P_i(src)) for all i."""
        if not (self.is_injective() and self.is_lie_hom() and self.is_filtration_preserving()):
            return False
        f = self.dst.field
        img_rows = [list(r) for r in self.rows]
        for i in range(1, self.src.profile.c + 2):
            k_src = self.src.profile.dims[i - 1]
            k_dst = self.dst.profile.dims[i - 1] if i <= self.dst.profile.c + 1 else 0
            # dim(image ∩ P_i(dst)) = dim(image) - rank of the coordinates past k_dst
            tails = [r[k_dst:] for r in img_rows]
            tail_rank = len(linalg.rref_rows(f, tails)[0]) if tails and tails[0] else 0
            if self.src.n - tail_rank != k_src:
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, Morphism)
            and self.src == other.src
            and self.dst == other.dst
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.rows,))

    def __repr__(self):
        return f"Morphism({self.src.n} -> {self.dst.n} over {self.src.field})"


# ---------------------------------------------------------------------------
# ideals, quotients, subalgebras


def ideal_closure(lla: LLA, seed_coords: Iterable[Sequence[Raw]]) -> Subspace:
    """Least ideal containing the seed: close the span under bracketing with
    basis vectors (which generate, so this closes under [., L])."""
    sb = SpanBuilder(lla.field, lla.n)
    work = []
    for v in seed_coords:
        v = list(v)
        if sb.add(v):
            work.append(v)
    basis = linalg.identity_rows(lla.field, lla.n)
    while work:
        v = work.pop()
        for e in basis:
            w = lla.bracket_coords(v, e)
            if sb.add(w):
                work.append(w)
    return Subspace._from_builder(lla, sb)


def quotient_by_ideal(lla: LLA, ideal: Subspace, check_ideal: bool = True) -> tuple[LLA, Morphism]:
    """Quotient LLA and the projection morphism.

    Internally the coordinates are processed in reversed (ascending-weight)
    order: every reduced vector then keeps its filtration depth, so the coset
    representatives inherit well-defined weights and the quotient profile can
    be read off from the surviving columns.
    """
    f = lla.field
    n = lla.n
    if check_ideal:
        basis = linalg.identity_rows(f, n)
        for row in ideal.rows:
            for e in basis:
                if not ideal.contains_coords(lla.bracket_coords(list(row), e)):
                    raise ValueError("subspace is not an ideal")
    rev = SpanBuilder(f, n)
    for row in ideal.rows:
        rev.add(list(row)[::-1])
    rev_pivots = set(rev.pivots)
    # surviving columns, in original (descending-weight) order
    reps = [i for i in range(n) if (n - 1 - i) not in rev_pivots]
    index_of = {orig: pos for pos, orig in enumerate(reps)}

    def project(coords) -> list:
        reduced = rev.reduce(list(coords)[::-1])[::-1]
        return [reduced[orig] for orig in reps]

    entries = []
    weights = [lla.profile.weight(i) for i in reps]
    c = lla.profile.c
    for a, orig_a in enumerate(reps):
        for b, orig_b in enumerate(reps):
            if weights[a] + weights[b] > c:
                continue
            col = lla.bracket_basis(orig_a, orig_b)
            if not col:
                continue
            v = [f.zero] * n
            for k, val in col.items():
                v[k] = val
            for k, val in enumerate(project(v)):
                entries.append((a, b, k, val))
    profile = Profile.from_weights(c, weights)
    quo = LLA(f, len(reps), canon_table(f, entries), profile, _trust="fast")
    proj_rows = []
    for i in range(n):
        e = [f.zero] * n
        e[i] = f.one
        proj_rows.append(project(e))
    return quo, Morphism(lla, quo, proj_rows)


def subalgebra_as_lla(lla: LLA, sub: Subspace) -> tuple[LLA, Morphism]:
    """Present a bracket-closed subspace as an abstract LLA.

    The chosen basis is adapted to the induced filtration (sub ∩ P_i), deepest
    vectors first, so the result carries the substructure profile and the
    returned embedding is strong.
    """
    f = lla.field
    if not sub.is_bracket_closed():
        raise ValueError("subspace is not a subalgebra")
    c = lla.profile.c
    chosen: list[list[Raw]] = []
    weights: list[int] = []
    sb = SpanBuilder(f, lla.n)
    for level in range(c, 0, -1):
        cut = lla.profile.dims[level - 1]
        if cut == 0:
            continue
        # basis of sub ∩ P_level: kernel of the projection onto late coordinates
        tails = [list(r[cut:]) for r in sub.rows]
        if sub.dim == 0:
            break
        if lla.n == cut:
            level_rows = [list(r) for r in sub.rows]
        else:
            combos = linalg.left_kernel(f, tails) if tails and tails[0] else linalg.identity_rows(f, sub.dim)
            level_rows = [linalg.row_times_mat(f, cmb, sub.rows) for cmb in combos]
        for row in level_rows:
            if sb.add(row):
                chosen.append(row)
                weights.append(level)
    assert len(chosen) == sub.dim, "adapted basis extension failed"
    entries = []
    for a in range(len(chosen)):
        for b in range(len(chosen)):
            if a == b:
                continue
            br = lla.bracket_coords(chosen[a], chosen[b])
            coords = linalg.solve_rows(f, chosen, br)
            assert coords is not None, "bracket escaped the subalgebra"
            for k, val in enumerate(coords):
                entries.append((a, b, k, val))
    profile = Profile.from_weights(c, weights)
    abstract = LLA(f, len(chosen), canon_table(f, entries), profile, _trust="fast")
    embed = Morphism(abstract, lla, chosen)
    return abstract, embed


# ---------------------------------------------------------------------------
# .lla files


def lla_to_text(lla: LLA, comment: str = "") -> str:
    f = lla.field
    lines = []
    if comment:
        for ln in comment.splitlines():
            lines.append(f"# {ln}")
    if f.p == 0:
        lines.append("field p=0 m=1")
    elif f.m == 1:
        lines.append(f"field p={f.p} m=1")
    else:
        mod = ",".join(str(c) for c in f.modulus)
        lines.append(f"field p={f.p} m={f.m} mod={mod}")
    lines.append(f"class c={lla.profile.c}")
    lines.append(f"dim n={lla.n}")
    lines.append("filtration " + " ".join(str(k) for k in lla.profile.dims))
    for i, j, k, v in table_entries(lla.table):
        lines.append(f"alpha {i + 1} {j + 1} {k + 1} {f.format(v)}")
    return "\n".join(lines) + "\n"


def lla_from_text(text: str) -> LLA:
    field: Optional[Field] = None
    c = n = None
    dims: Optional[tuple[int, ...]] = None
    raw_entries: list[tuple[int, int, int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "field":
                opts = dict(p.split("=", 1) for p in parts[1:])
                p = int(opts["p"])
                m = int(opts.get("m", "1"))
                mod = None
                if "mod" in opts:
                    mod = tuple(int(x) for x in opts["mod"].split(","))
                field = Field(p, m, mod)
            elif kind == "class":
                c = int(parts[1].split("=", 1)[1])
            elif kind == "dim":
                n = int(parts[1].split("=", 1)[1])
            elif kind == "filtration":
                dims = tuple(int(x) for x in parts[1:])
            elif kind == "alpha":
                i, j, k = int(parts[1]), int(parts[2]), int(parts[3])
                raw_entries.append((i - 1, j - 1, k - 1, parts[4]))
            else:
                raise FormatError(f"line {lineno}: unknown directive {kind!r}")
        except (KeyError, IndexError, ValueError) as exc:
            raise FormatError(f"line {lineno}: cannot parse {raw!r}") from exc
    if field is None or c is None or n is None or dims is None:
        raise FormatError("missing one of the field/class/dim/filtration headers")
    profile = Profile(c, dims)
    entries = [(i, j, k, field.parse(s)) for i, j, k, s in raw_entries]
    for i, j, k, _ in entries:
        if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
            raise FormatError(f"alpha index out of range: {(i + 1, j + 1, k + 1)}")
    return LLA(field, n, canon_table(field, entries), profile)


def save_lla(path, lla: LLA, comment: str = "") -> None:
    with open(path, "w") as fh:
        fh.write(lla_to_text(lla, comment))


def load_lla(path) -> LLA:
    with open(path) as fh:
        return lla_from_text(fh.read())
