"""Isomorphism search, exhaustive catalogs and the back-and-forth engine.

The isomorphism search backtracks over images of the source basis, deepest
filtration layer first.  At each position the bracket relations against the
already placed images form a linear system, so candidates are enumerated from
an affine solution set instead of the whole layer; cheap invariants (profile,
lower-central dimensions, centre, derived subalgebra) screen hopeless pairs
up front.

The catalog enumerates every antisymmetric table on the free entries with a
weight-feasibility prune, keeps the ones that define a filtered nilpotent
algebra in some basis order, and buckets them by bracket isomorphism; class
sizes count adaptable tables, and an optional orbit walk under GL generators
cross-checks each class against the group action.

Partial isomorphisms between finite stages follow the standard three cases:
field elements ride along a global Frobenius twist, vectors inside the
matched span extend linearly through the coordinate functions, and a genuinely
new vector first drags in its brackets (deepest first), then has its
structure constants realized in the target by the exact stage search.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

from . import linalg
from .errors import BudgetError, PreconditionError
from .fields import Field, Scalar
from .generic import ModelStage, realize_search
from .lla import (
    LLA,
    Morphism,
    Profile,
    Vec,
    canon_table,
    minimal_weights,
    relabel_table,
    symmetrize_entries,
    table_entries,
    validate_any_order,
)


# ---------------------------------------------------------------------------
# isomorphism search


def _candidate_images(
    B: LLA, placed: list, a_table, i: int, w: int, respect_filtration: bool
):
    """Solutions x of the bracket constraints for position i, as an affine
    set (x0, kernel) intersected with the right filtration layer."""
    fld = B.field
    if respect_filtration:
        k_w = B.profile.dims[w - 1] if w <= B.profile.c + 1 else 0
    else:
        k_w = B.n
    big = [[] for _ in range(k_w)]
    rhs = []
    for j in range(i):
        col = a_table.get((i, j), {})
        target = [fld.zero] * B.n
        for k, v in col.items():
            # valid source tables only reference deeper (earlier) positions
            for t, pv in enumerate(placed[k]):
                target[t] = fld.add(target[t], fld.mul(v, pv))
        for r in range(k_w):
            e = [fld.zero] * B.n
            e[r] = fld.one
            big[r].extend(B.bracket_coords(e, placed[j]))
        rhs.extend(target)
    if i == 0:
        x0 = [fld.zero] * k_w
        kernel = linalg.identity_rows(fld, k_w)
    else:
        x0 = linalg.solve_rows(fld, big, rhs)
        if x0 is None:
            return None
        kernel = linalg.left_kernel(fld, big)
    pad = lambda v: list(v) + [fld.zero] * (B.n - k_w)
    return pad(x0), [pad(k) for k in kernel]


def iso_search(
    A: LLA,
    B: LLA,
    respect_filtration: bool = True,
    node_budget: int = 200_000,
) -> Optional[Morphism]:
    """A filtration-preserving Lie isomorphism A -> B, or None.

    With ``respect_filtration=False`` the distinguished filtrations are
    ignored and any Lie-algebra isomorphism is accepted (used to bucket
    catalog tables).  Raises BudgetError when the backtracking exceeds the
    node budget; verdicts below the budget are exact.
    """
    if A.field != B.field or A.n != B.n:
        return None
    if respect_filtration and A.profile.dims != B.profile.dims:
        return None
    if [s.dim for s in A.lower_central_series()] != [s.dim for s in B.lower_central_series()]:
        return None
    if A.center().dim != B.center().dim or A.derived_subspace().dim != B.derived_subspace().dim:
        return None
    if A.n == 0:
        return Morphism(A, B, [])
    fld = A.field
    weights = A.profile.weights()
    nodes = 0

    def layer_bound(w: int) -> int:
        if not respect_filtration:
            return 0
        return B.profile.dims[w] if w <= B.profile.c else 0

    def backtrack(placed: list, span: linalg.SpanBuilder) -> Optional[list]:
        nonlocal nodes
        i = len(placed)
        if i == A.n:
            return placed
        w = weights[i]
        got = _candidate_images(B, placed, A.table, i, w, respect_filtration)
        if got is None:
            return None
        x0, kernel = got
        dim = len(kernel)
        if fld.order**dim > node_budget:
            raise BudgetError("isomorphism search: affine candidate set too large")
        k_next = layer_bound(w)
        for combo in itertools.product(range(fld.order), repeat=dim):
            nodes += 1
            if nodes > node_budget:
                raise BudgetError("isomorphism search: node budget exceeded")
            cand = list(x0)
            for lam_idx, krow in zip(combo, kernel):
                if lam_idx:
                    lam = fld.element_from_index(lam_idx)
                    cand = linalg.vec_add(fld, cand, linalg.vec_scale(fld, lam, krow))
            if respect_filtration and not any(
                not fld.is_zero(x) for x in cand[k_next:]
            ):
                continue  # lands too deep: cannot be part of a layer bijection
            sub = span.copy()
            if not sub.add(list(cand)):
                continue
            res = backtrack(placed + [cand], sub)
            if res is not None:
                return res
        return None

    rows = backtrack([], linalg.SpanBuilder(fld, B.n))
    if rows is None:
        return None
    hom = Morphism(A, B, rows)
    assert hom.is_injective() and hom.is_lie_hom()
    if respect_filtration:
        assert hom.is_filtration_preserving()
    return hom


def automorphism_count(A: LLA, respect_filtration: bool = False, node_budget: int = 500_000) -> int:
    """Number of (Lie, optionally filtered) automorphisms, by full backtracking."""
    if A.n == 0:
        return 1
    fld = A.field
    weights = A.profile.weights()
    count = 0
    nodes = 0

    def backtrack(placed: list, span: linalg.SpanBuilder):
        nonlocal count, nodes
        i = len(placed)
        if i == A.n:
            count += 1
            return
        got = _candidate_images(A, placed, A.table, i, weights[i], respect_filtration)
        if got is None:
            return
        x0, kernel = got
        if fld.order ** len(kernel) > node_budget:
            raise BudgetError("automorphism count: candidate set too large")
        k_next = A.profile.dims[weights[i]] if weights[i] <= A.profile.c else 0
        for combo in itertools.product(range(fld.order), repeat=len(kernel)):
            nodes += 1
            if nodes > node_budget:
                raise BudgetError("automorphism count: node budget exceeded")
            cand = list(x0)
            for lam_idx, krow in zip(combo, kernel):
                if lam_idx:
                    lam = fld.element_from_index(lam_idx)
                    cand = linalg.vec_add(fld, cand, linalg.vec_scale(fld, lam, krow))
            if respect_filtration and not any(not fld.is_zero(x) for x in cand[k_next:]):
                continue
            sub = span.copy()
            if not sub.add(list(cand)):
                continue
            backtrack(placed + [cand], sub)

    backtrack([], linalg.SpanBuilder(fld, A.n))
    return count


# ---------------------------------------------------------------------------
# exhaustive catalogs


DOCUMENTED_BUDGETS = {2: 4, 3: 3, 5: 3}  # p -> max_dim


@dataclass(frozen=True)
class CatalogEntry:
    lla: LLA  # representative on the minimal profile, basis sorted by weight
    table_count: int  # adaptable tables in the bracket-isomorphism class
    aut_count: Optional[int] = None


@dataclass(frozen=True)
class Catalog:
    field: Field
    c: int
    max_dim: int
    entries_by_dim: dict  # n -> list[CatalogEntry]
    valid_counts: dict  # n -> number of valid tables

    def entries(self, n: Optional[int] = None):
        if n is not None:
            return list(self.entries_by_dim.get(n, ()))
        return [e for n_ in sorted(self.entries_by_dim) for e in self.entries_by_dim[n_]]


def enumerate_valid_tables(field: Field, c: int, n: int):
    """DFS over the free entries (pairs i<j, any k) with a weight-feasibility
    prune; yields canonical antisymmetric tables accepted in the given basis
    order by some admissible weight assignment, Jacobi included."""
    from .lla import _check_jacobi

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def rec(idx: int, tab: dict):
        if minimal_weights(field, n, tab, c) is None:
            return
        if idx == len(pairs):
            if n >= 3 and _check_jacobi(field, n, tab) is not None:
                return
            yield canon_table(field, tab)
            return
        i, j = pairs[idx]
        for combo in itertools.product(range(field.order), repeat=n):
            col = {k: field.element_from_index(v) for k, v in enumerate(combo) if v}
            tab2 = dict(tab)
            if col:
                tab2[(i, j)] = col
                tab2[(j, i)] = {k: field.neg(v) for k, v in col.items()}
            yield from rec(idx + 1, tab2)

    yield from rec(0, {})


def minimal_profile_rep(field: Field, n: int, table, c: int) -> LLA:
    """The LLA on the minimal weight assignment, basis re-sorted by weight."""
    weights = minimal_weights(field, n, table, c)
    sigma = sorted(range(n), key=lambda i: (-weights[i], i))
    relabeled = relabel_table(table, sigma)
    profile = Profile.from_weights(c, [weights[i] for i in sigma])
    return LLA(field, n, relabeled, profile, _trust="fast")


def enumerate_catalog(
    field: Field,
    c: int,
    max_dim: int,
    node_budget: int = 500_000,
) -> Catalog:
    """All bracket-isomorphism classes of valid tables of dimension <= max_dim.

    The documented budgets are p = 2 up to dimension 4 and p in {3, 5} up to
    dimension 3; larger requests are refused rather than answered slowly or
    wrongly.
    """
    if field.p == 0 or field.m != 1:
        raise BudgetError("catalogs are enumerated over prime fields only")
    allowed = DOCUMENTED_BUDGETS.get(field.p)
    if allowed is None or max_dim > allowed:
        raise BudgetError(
            f"catalog budget: p={field.p} supports max_dim <= {allowed or 0}"
        )
    entries_by_dim: dict = {}
    valid_counts: dict = {}
    for n in range(1, max_dim + 1):
        reps: list[LLA] = []
        counts: list[int] = []
        total = 0
        screens: list[tuple] = []
        for table in enumerate_valid_tables(field, c, n):
            total += 1
            rep = minimal_profile_rep(field, n, table, c)
            screen = (
                tuple(s.dim for s in rep.lower_central_series()),
                rep.center().dim,
                rep.derived_subspace().dim,
            )
            for idx in range(len(reps)):
                if screens[idx] != screen:
                    continue
                if iso_search(rep, reps[idx], respect_filtration=False, node_budget=node_budget):
                    counts[idx] += 1
                    break
            else:
                reps.append(rep)
                counts.append(1)
                screens.append(screen)
        valid_counts[n] = total
        entries_by_dim[n] = [
            CatalogEntry(rep, cnt, automorphism_count(rep, node_budget=node_budget))
            for rep, cnt in zip(reps, counts)
        ]
    return Catalog(field, c, max_dim, entries_by_dim, valid_counts)


def gl_orbit_of_table(field: Field, n: int, table, cap: int = 2_000_000) -> set:
    """The orbit of a table under basis changes, walked from GL generators.

    Returns the set of canonical entry tuples; used to cross-check catalog
    class sizes against the group action (orbit members failing the
    weight-feasibility test are the non-adaptable bases of the same algebra).
    """
    def transform(tab, g_rows, g_inv):
        # new basis u_a = sum_b g[a][b] v_b; alpha'_{a,b,c} expresses [u_a, u_b]
        entries = []
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                br = [field.zero] * n
                for (i, j), col in tab.items():
                    cval = field.mul(g_rows[a][i], g_rows[b][j])
                    if field.is_zero(cval):
                        continue
                    for k, v in col.items():
                        br[k] = field.add(br[k], field.mul(cval, v))
                coords = linalg.row_times_mat(field, br, g_inv)
                for k, v in enumerate(coords):
                    entries.append((a, b, k, v))
        return canon_table(field, entries)

    def key(tab):
        return tuple(table_entries(tab))

    gens = []
    if n >= 1:
        # transvection and a cyclic permutation generate GL_n(F_p) for n >= 2
        t = linalg.identity_rows(field, n)
        if n >= 2:
            t[0][1] = field.one
            gens.append(t)
            cyc = [[field.zero] * n for _ in range(n)]
            for i in range(n):
                cyc[i][(i + 1) % n] = field.one
            gens.append(cyc)
        if field.order > 2:
            d = linalg.identity_rows(field, n)
            d[0][0] = field.element_from_index(2)  # a generator candidate
            gens.append(d)
            # ensure a primitive scaling is present for odd p
            for idx in range(2, field.order):
                d2 = linalg.identity_rows(field, n)
                d2[0][0] = field.element_from_index(idx)
                gens.append(d2)
    start = canon_table(field, table)
    seen = {key(start): start}
    frontier = [start]
    while frontier:
        tab = frontier.pop()
        for g in gens:
            g_inv = linalg.invert_rows(field, g)
            new = transform(tab, g, g_inv)
            k = key(new)
            if k not in seen:
                if len(seen) >= cap:
                    raise BudgetError("orbit walk exceeded its cap")
                seen[k] = new
                frontier.append(new)
    return set(seen)


# ---------------------------------------------------------------------------
# partial isomorphisms and the back-and-forth audit


@dataclass(frozen=True)
class PartialIso:
    """A partial isomorphism between finite stages.

    The vector pairs span bracket-closed subalgebras on both sides and the
    induced linear map is an isomorphism of filtered algebras between them;
    the field part is a global Frobenius power (the identity on prime
    fields).  The paired tuples are kept spanning: extending by a vector first
    extends by all brackets it drags in.
    """

    source: LLA
    target: LLA
    frobenius: int = 0
    pairs: tuple = ()  # ((src_coords, tgt_coords), ...)

    def src_rows(self) -> list:
        return [list(p[0]) for p in self.pairs]

    def tgt_rows(self) -> list:
        return [list(p[1]) for p in self.pairs]

    def inverted(self) -> "PartialIso":
        m = self.source.field.m
        inv_frob = (-self.frobenius) % m if m > 1 else 0
        return PartialIso(
            self.target,
            self.source,
            inv_frob,
            tuple((t, s) for s, t in self.pairs),
        )

    def field_map(self, value):
        return self.source.field.frobenius(value, self.frobenius)

    def independent_pairs(self) -> tuple[list, list]:
        """The subfamily of pairs whose sources form a basis of the span."""
        fld = self.source.field
        sb = linalg.SpanBuilder(fld, self.source.n)
        src, tgt = [], []
        for s_row, t_row in self.pairs:
            if sb.add(list(s_row)):
                src.append(list(s_row))
                tgt.append(list(t_row))
        return src, tgt

    def verify(self) -> bool:
        """Full well-definedness check (used by tests and audits)."""
        fld = self.source.field
        src, tgt = self.independent_pairs()
        if len(linalg.rref_rows(fld, tgt)[0]) != len(tgt):
            return False
        s_table = self.source.str_of([Vec(self.source, r) for r in src])
        t_table = self.target.str_of([Vec(self.target, r) for r in tgt])
        if s_table is None or t_table is None:
            return False
        mapped = {
            pair: {k: self.field_map(v) for k, v in col.items()}
            for pair, col in s_table.items()
        }
        if canon_table(fld, mapped) != canon_table(fld, t_table):
            return False
        for s_row, t_row in zip(src, tgt):
            if self.source.weight_of(s_row) != self.target.weight_of(t_row):
                return False
        # redundant pairs must agree with the linear map through the basis
        for s_row, t_row in self.pairs:
            sol = linalg.solve_rows(fld, src, list(s_row)) if src else (
                [] if linalg.vec_is_zero(fld, list(s_row)) else None
            )
            if sol is None:
                return False
            image = [fld.zero] * self.target.n
            for cval, base_t in zip(sol, tgt):
                image = linalg.vec_add(
                    fld, image, linalg.vec_scale(fld, self.field_map(cval), base_t)
                )
            if not linalg.vec_eq(fld, image, list(t_row)):
                return False
        return True


@dataclass(frozen=True)
class ExtensionGap:
    """A (base-table, extension-table) pair the target stage cannot realize."""

    base_table: tuple
    demand_table: tuple
    weights: tuple
    confirmed: bool


def _extend(
    pi: PartialIso, coords: Sequence, branch_cap: int = 64
) -> tuple[Optional[PartialIso], Optional[ExtensionGap]]:
    src_alg, tgt_alg = pi.source, pi.target
    fld = src_alg.field
    coords = [fld.canonical(x) for x in coords]
    src, tgt = pi.independent_pairs()
    # Case 2: inside the span -- extend by linearity through the coordinates
    if src:
        sol = linalg.solve_rows(fld, src, coords)
    else:
        sol = [] if linalg.vec_is_zero(fld, coords) else None
    if sol is not None:
        image = [fld.zero] * tgt_alg.n
        for cval, t_row in zip(sol, tgt):
            mapped = pi.field_map(cval)
            image = linalg.vec_add(fld, image, linalg.vec_scale(fld, mapped, t_row))
        new_pairs = pi.pairs + ((tuple(coords), tuple(image)),)
        return PartialIso(src_alg, tgt_alg, pi.frobenius, new_pairs), None

    # Case 3: genuinely new; first absorb the brackets it drags in (they sit
    # strictly deeper in the filtration, so this recursion terminates)
    while True:
        src, tgt = pi.independent_pairs()
        span_rows, span_piv = linalg.rref_rows(fld, src) if src else ([], [])
        missing = None
        for row in src:
            br = src_alg.bracket_coords(coords, row)
            if not linalg.in_span(fld, br, span_rows, span_piv):
                missing = br
                break
        if missing is None:
            break
        pi2, gap = _extend(pi, missing, branch_cap)
        if pi2 is None:
            return None, gap
        pi = pi2

    src, tgt = pi.independent_pairs()
    tuple_vecs = [Vec(src_alg, r) for r in src] + [Vec(src_alg, coords)]
    table = src_alg.str_of(tuple_vecs)
    assert table is not None, "span closure failed to make a subalgebra"
    mapped = {
        pair: {k: pi.field_map(v) for k, v in col.items()} for pair, col in table.items()
    }
    weights = [src_alg.weight_of(r) for r in src] + [src_alg.weight_of(coords)]
    res = realize_search(
        tgt_alg, tgt, len(src) + 1, mapped, weights, branch_cap
    )
    base_table = tuple(
        (i, j, k, fld.format(v))
        for i, j, k, v in table_entries(canon_table(fld, {
            p: c for p, c in mapped.items() if p[0] < len(src) and p[1] < len(src)
        }))
    )
    demand_entries = tuple(
        (i, j, k, fld.format(v)) for i, j, k, v in table_entries(canon_table(fld, mapped))
    )
    if res.status != "found":
        return None, ExtensionGap(base_table, demand_entries, tuple(weights), res.status == "none")
    b = res.rows[0]
    new_pairs = pi.pairs + ((tuple(coords), tuple(b)),)
    return PartialIso(src_alg, tgt_alg, pi.frobenius, new_pairs), None


def extend_partial_iso(pi: PartialIso, a, branch_cap: int = 64) -> Optional[PartialIso]:
    """Extend a partial isomorphism by one element of the source stage.

    Field elements ride along the global Frobenius twist and need no search;
    a vector inside the matched span extends by linearity; a new vector has
    its generated substructure matched in the target, returning None when the
    finite target lacks the required extension (budget semantics)."""
    if isinstance(a, Scalar):
        if a.field != pi.source.field:
            raise PreconditionError("scalar from the wrong field")
        return pi  # the global Frobenius form already covers it
    if isinstance(a, Vec):
        if a.parent != pi.source:
            raise PreconditionError("vector is not in the source stage")
        a = list(a.coords)
    new_pi, _ = _extend(pi, a, branch_cap)
    return new_pi


@dataclass(frozen=True)
class GameRecord:
    game: int
    rounds_completed: int
    failed: bool
    direction: str = ""
    gap: Optional[ExtensionGap] = None


@dataclass(frozen=True)
class BnfReport:
    depth: int
    games: int
    completed: int
    failures: tuple

    @property
    def unexplained(self) -> tuple:
        return tuple(f for f in self.failures if f.gap is None or not f.gap.confirmed)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "games": self.games,
            "completed": self.completed,
            "failures": len(self.failures),
            "unexplained": len(self.unexplained),
        }


def _realizer_choices(pi: PartialIso, coords: list, branch_cap: int):
    """All ways to extend pi by the given source vector.

    Returns (options, gap, capped): the extended partial isomorphisms (the
    brackets a new vector drags in are backtracked over as well, so the list
    is exhaustive up to the cap), a witnessing gap when there are none, and
    whether any enumeration on the way was cut off by the cap.
    """
    src_alg, tgt_alg = pi.source, pi.target
    fld = src_alg.field
    src, tgt = pi.independent_pairs()
    if src:
        sol = linalg.solve_rows(fld, src, coords)
    else:
        sol = [] if linalg.vec_is_zero(fld, coords) else None
    if sol is not None:
        image = [fld.zero] * tgt_alg.n
        for cval, t_row in zip(sol, tgt):
            image = linalg.vec_add(fld, image, linalg.vec_scale(fld, pi.field_map(cval), t_row))
        only = PartialIso(src_alg, tgt_alg, pi.frobenius, pi.pairs + ((tuple(coords), tuple(image)),))
        return [only], None, False

    # a bracket the new vector drags in must be matched first; enumerate its
    # realizers too (a greedy choice here can dead-end a matchable move)
    span_rows, span_piv = linalg.rref_rows(fld, src) if src else ([], [])
    for row in src:
        br = src_alg.bracket_coords(coords, row)
        if not linalg.in_span(fld, br, span_rows, span_piv):
            sub_options, gap, capped = _realizer_choices(pi, br, branch_cap)
            out = []
            last_gap = gap
            for sub_pi in sub_options:
                opts2, gap2, capped2 = _realizer_choices(sub_pi, coords, branch_cap)
                capped = capped or capped2
                if gap2 is not None:
                    last_gap = gap2
                out.extend(opts2)
                if len(out) >= branch_cap:
                    capped = True
                    break
            if not out:
                return [], last_gap, capped
            return out[:branch_cap], None, capped

    table = src_alg.str_of([Vec(src_alg, r) for r in src] + [Vec(src_alg, coords)])
    assert table is not None
    mapped = {
        pair: {k: pi.field_map(v) for k, v in col.items()} for pair, col in table.items()
    }
    weights = [src_alg.weight_of(r) for r in src] + [src_alg.weight_of(coords)]
    from .generic import _single_vector_solutions, _enumerate_affine

    got = _single_vector_solutions(tgt_alg, tgt, len(src), mapped, weights[-1])
    entries = tuple(
        (i, j, k, fld.format(v)) for i, j, k, v in table_entries(canon_table(fld, mapped))
    )
    base_entries = tuple(
        t for t in entries if t[0] < len(src) and t[1] < len(src) and t[2] < len(src)
    )
    if got is None:
        return [], ExtensionGap(base_entries, entries, tuple(weights), True), False
    x0, kernel, s1, s2 = got
    exhaustive = fld.order ** len(kernel) <= branch_cap
    out = []
    for cand in _enumerate_affine(fld, x0, kernel, branch_cap):
        if linalg.in_span(fld, cand, s1[0], s1[1]) or linalg.in_span(fld, cand, s2[0], s2[1]):
            continue
        out.append(
            PartialIso(
                src_alg, tgt_alg, pi.frobenius, pi.pairs + ((tuple(coords), tuple(cand)),)
            )
        )
        if len(out) >= branch_cap:
            break
    if not out:
        return [], ExtensionGap(base_entries, entries, tuple(weights), exhaustive), not exhaustive
    return out, None, not exhaustive and len(out) < branch_cap


def back_and_forth_audit(
    M: ModelStage,
    N: ModelStage,
    depth: int,
    games: int = 20,
    seed: int = 0,
    branch_cap: int = 64,
    frobenius: int = 0,
    node_cap: int = 4000,
) -> BnfReport:
    """Play alternating extension games between two stages.

    Each game draws its forth/back elements up front (seeded, with an
    adversarial weight-1 bias in alternating games), then searches over
    realizer choices with backtracking: the game succeeds when *some*
    strategy matches all chosen elements, so two copies of the same stage
    succeed at every depth via the identity strategy.  A failed game reports
    the deepest witnessing (base, extension) gap; the gap is *confirmed* when
    every branch died on an exactly-exhausted realizer search, making the
    failure a budget fact about the finite stages rather than an engine
    artifact.
    """
    if M.field != N.field or M.c != N.c:
        raise PreconditionError("stages must share field and class")
    rng = random.Random(f"bnf|{seed}|{depth}|{games}")
    failures = []
    completed = 0
    for game in range(games):
        adversarial = game % 2 == 0

        def draw(L: LLA) -> list:
            for _ in range(30):
                v = [L.field.random(rng) for _ in range(L.n)]
                if linalg.vec_is_zero(L.field, v):
                    continue
                if adversarial and L.weight_of(v) != 1 and rng.random() < 0.8:
                    continue
                return v
            return [L.field.one] + [L.field.zero] * (L.n - 1) if L.n else []

        forth_moves = [draw(M.lla) for _ in range(depth)]
        back_moves = [draw(N.lla) for _ in range(depth)]
        nodes = 0
        deepest_gap: list = [None]
        capped: list = [False]

        def play(pi: PartialIso, rnd: int) -> bool:
            nonlocal nodes
            if rnd == depth:
                return True
            moves = [(forth_moves[rnd], False), (back_moves[rnd], True)]

            def try_move(pi2: PartialIso, idx: int) -> bool:
                nonlocal nodes
                if idx == len(moves):
                    return play(pi2, rnd + 1)
                coords, backward = moves[idx]
                probe = pi2.inverted() if backward else pi2
                options, gap, was_capped = _realizer_choices(probe, list(coords), branch_cap)
                if gap is not None:
                    deepest_gap[0] = gap
                    capped[0] = capped[0] or was_capped or not gap.confirmed
                    return False
                for opt in options:
                    nodes += 1
                    if nodes > node_cap:
                        capped[0] = True
                        return False
                    nxt = opt.inverted() if backward else opt
                    if try_move(nxt, idx + 1):
                        return True
                return False

            return try_move(pi, 0)

        if M.lla.n == 0 and N.lla.n == 0:
            completed += 1
            continue
        if play(PartialIso(M.lla, N.lla, frobenius), 0):
            completed += 1
        else:
            gap = deepest_gap[0]
            if gap is not None and capped[0]:
                gap = ExtensionGap(gap.base_table, gap.demand_table, gap.weights, False)
            failures.append(GameRecord(game, depth, True, "game", gap))
    return BnfReport(depth, games, completed, tuple(failures))
