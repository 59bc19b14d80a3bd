"""Free amalgamation of filtered nilpotent Lie algebras.

Given strong embeddings ``C -> A`` and ``C -> B`` over one field, the free
amalgam is built the concrete way: pick a basis of C, extend it inside A and
inside B, form the free nilpotent algebra on the union of those basis vectors
(weighted by filtration depth), impose every bracket relation that already
holds inside A or inside B, close the relations to an ideal and take the
quotient.  No relation ties an A-only generator to a B-only one, which is
what makes the result free.

The construction machine-checks its own postconditions: the two induced maps
are strong embeddings agreeing on C, their images generate, and they
intersect exactly in the image of C.  The universal property is exercised by
:func:`check_freeness`, which solves for the mediating homomorphism by
forced closure, and underlies both the independence predicate
:func:`otimes_independent` and the axiom suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

from . import linalg
from .errors import NilcaError, PreconditionError
from .fields import Field, Raw
from .freelie import DEFAULT_DIM_CAP, WeightedGenerators, free_lla
from .lla import (
    LLA,
    Morphism,
    Subspace,
    Vec,
    ideal_closure,
    quotient_by_ideal,
    subalgebra_as_lla,
)


@dataclass(frozen=True)
class Span:
    """An amalgamation diagram A <- C -> B of same-class algebras."""

    A: LLA
    B: LLA
    C: LLA
    f0: Morphism  # C -> A
    g0: Morphism  # C -> B

    def validate(self) -> None:
        if not (self.A.field == self.B.field == self.C.field):
            raise PreconditionError("diagram algebras live over different fields")
        if not (self.A.profile.c == self.B.profile.c == self.C.profile.c):
            raise PreconditionError("diagram algebras have different class bounds")
        if self.f0.src != self.C or self.f0.dst != self.A:
            raise PreconditionError("f0 must map C into A")
        if self.g0.src != self.C or self.g0.dst != self.B:
            raise PreconditionError("g0 must map C into B")
        for name, emb in (("f0", self.f0), ("g0", self.g0)):
            if not emb.is_strong_embedding():
                raise PreconditionError(f"{name} is not a strong filtered embedding")

    @staticmethod
    def over_zero(A: LLA, B: LLA) -> "Span":
        C = LLA.zero(A.field, A.profile.c)
        return Span(A, B, C, Morphism.zero_map(C, A), Morphism.zero_map(C, B))


@dataclass(frozen=True)
class AmalgamResult:
    S: LLA
    f1: Morphism  # A -> S
    g1: Morphism  # B -> S
    diagram: Span
    labels: tuple = ()

    def c_image(self) -> Subspace:
        return self.f0_composed().image()

    def f0_composed(self) -> Morphism:
        return self.diagram.f0.compose(self.f1)


def _extend_basis_in(
    target: LLA, start_rows: list, rng=None
) -> tuple[list, list[int]]:
    """Greedily extend given rows to a basis of target by standard basis
    vectors (descending weight via the index order, optionally shuffled).
    Returns (extension rows, their weights)."""
    sb = linalg.SpanBuilder(target.field, target.n)
    for r in start_rows:
        if not sb.add(list(r)):
            raise PreconditionError("embedded basis is dependent")
    order = list(range(target.n))
    if rng is not None:
        rng.shuffle(order)
    ext_rows, ext_weights = [], []
    for i in order:
        e = [target.field.zero] * target.n
        e[i] = target.field.one
        if sb.add(e):
            ext_rows.append(e)
            ext_weights.append(target.profile.weight(i))
    return ext_rows, ext_weights


def free_amalgam(
    diagram: Span,
    dim_cap: int = DEFAULT_DIM_CAP,
    shuffle=None,
) -> AmalgamResult:
    """Construct the free amalgam of the diagram.

    ``shuffle`` (a random.Random) randomizes the interior basis choices; the
    result must then be isomorphic over A and B to the unshuffled one, which
    is how stationarity is exercised.
    """
    diagram.validate()
    A, B, C, f0, g0 = diagram.A, diagram.B, diagram.C, diagram.f0, diagram.g0
    fld: Field = A.field
    c = A.profile.c

    c_weights = [C.profile.weight(i) for i in range(C.n)]
    a_rows, a_weights = _extend_basis_in(A, [list(r) for r in f0.rows], shuffle)
    b_rows, b_weights = _extend_basis_in(B, [list(r) for r in g0.rows], shuffle)

    pad = len(str(max(1, C.n + len(a_rows) + len(b_rows)))) + 1
    names = (
        [f"c{i:0{pad}d}" for i in range(C.n)]
        + [f"a{i:0{pad}d}" for i in range(len(a_rows))]
        + [f"b{i:0{pad}d}" for i in range(len(b_rows))]
    )
    weights = c_weights + a_weights + b_weights
    gens = WeightedGenerators(tuple(names), tuple(weights))
    free = free_lla(gens, fld, c, dim_cap=dim_cap)
    F = free.lla

    # generator basis positions, per family
    c_pos = [free.gen_position[f"c{i:0{pad}d}"] for i in range(C.n)]
    a_pos = [free.gen_position[f"a{i:0{pad}d}"] for i in range(len(a_rows))]
    b_pos = [free.gen_position[f"b{i:0{pad}d}"] for i in range(len(b_rows))]

    def unit(pos: int) -> list:
        e = [fld.zero] * F.n
        e[pos] = fld.one
        return e

    def family_relations(
        alg: LLA, vec_rows: list, positions: list[int], skip_shared: int = 0
    ) -> list:
        rels = []
        for x in range(len(vec_rows)):
            for y in range(x + 1, len(vec_rows)):
                if y < skip_shared:
                    continue  # C x C pair already contributed by the A side
                bracket = alg.bracket_coords(vec_rows[x], vec_rows[y])
                coords = linalg.solve_rows(fld, vec_rows, bracket)
                assert coords is not None
                rel = F.bracket_coords(unit(positions[x]), unit(positions[y]))
                for k, cval in zip(positions, coords):
                    rel[k] = fld.sub(rel[k], cval)
                rels.append(rel)
        return rels

    a_family_rows = [list(r) for r in f0.rows] + a_rows
    b_family_rows = [list(r) for r in g0.rows] + b_rows
    relations = family_relations(A, a_family_rows, c_pos + a_pos)
    relations += family_relations(B, b_family_rows, c_pos + b_pos, skip_shared=C.n)

    ideal = ideal_closure(F, relations)
    S, proj = quotient_by_ideal(F, ideal, check_ideal=False)

    gen_images = [proj.rows[p] for p in range(F.n)]

    def induced_embedding(alg: LLA, family_rows: list, positions: list[int]) -> Morphism:
        inv = linalg.invert_rows(fld, family_rows)
        img = [list(gen_images[p]) for p in positions]
        return Morphism(alg, S, linalg.mat_mul(fld, inv, img))

    f1 = induced_embedding(A, a_family_rows, c_pos + a_pos)
    g1 = induced_embedding(B, b_family_rows, c_pos + b_pos)

    result = AmalgamResult(S, f1, g1, diagram, labels=free.labels)
    _verify_amalgam(result)
    return result


def _verify_amalgam(result: AmalgamResult) -> None:
    S, f1, g1, d = result.S, result.f1, result.g1, result.diagram
    if not f1.is_strong_embedding():
        raise NilcaError("amalgam check failed: A does not embed strongly")
    if not g1.is_strong_embedding():
        raise NilcaError("amalgam check failed: B does not embed strongly")
    if d.f0.compose(f1) != d.g0.compose(g1):
        raise NilcaError("amalgam check failed: square does not commute")
    if S.n < d.A.n + d.B.n - d.C.n:
        raise NilcaError("amalgam check failed: dimension below the strongness bound")
    gens = [S.vec(r) for r in f1.rows] + [S.vec(r) for r in g1.rows]
    if S.generate_subalgebra(gens).dim != S.n:
        raise NilcaError("amalgam check failed: images do not generate")
    inter = f1.image().intersect(g1.image())
    if inter != d.f0.compose(f1).image():
        raise NilcaError("amalgam check failed: strongness (A' ∩ B' != C')")


# ---------------------------------------------------------------------------
# the universal property


class _PairedSpan:
    """Span accumulator over S-coordinates carrying target images along.

    Pivots live in the S part; a vector whose S part reduces to zero must
    come with the matching image, otherwise the pairing is inconsistent.
    """

    def __init__(self, fld: Field, n_src: int, n_dst: int):
        self.fld = fld
        self.n_src = n_src
        self.n_dst = n_dst
        self.rows: list[list] = []  # width n_src + n_dst
        self.pivots: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def _reduce(self, vec: list) -> list:
        fld = self.fld
        for row, piv in zip(self.rows, self.pivots):
            cval = vec[piv]
            if not fld.is_zero(cval):
                for j in range(len(vec)):
                    if not fld.is_zero(row[j]):
                        vec[j] = fld.sub(vec[j], fld.mul(cval, row[j]))
        return vec

    def add(self, s_coords: Sequence[Raw], d_coords: Sequence[Raw]) -> Optional[bool]:
        """True if span grew, False if consistent duplicate, None on conflict."""
        fld = self.fld
        vec = self._reduce(list(s_coords) + list(d_coords))
        piv = next(
            (j for j in range(self.n_src) if not fld.is_zero(vec[j])), None
        )
        if piv is None:
            if any(not fld.is_zero(x) for x in vec[self.n_src :]):
                return None
            return False
        inv = fld.inv(vec[piv])
        vec = [fld.mul(inv, x) for x in vec]
        for row in self.rows:
            cval = row[piv]
            if not fld.is_zero(cval):
                for j in range(len(row)):
                    if not fld.is_zero(vec[j]):
                        row[j] = fld.sub(row[j], fld.mul(cval, vec[j]))
        at = 0
        while at < len(self.pivots) and self.pivots[at] < piv:
            at += 1
        self.rows.insert(at, vec)
        self.pivots.insert(at, piv)
        return True

    def image_of(self, s_coords: Sequence[Raw]) -> Optional[list]:
        fld = self.fld
        vec = list(s_coords) + [fld.zero] * self.n_dst
        acc = [fld.zero] * self.n_dst
        for row, piv in zip(self.rows, self.pivots):
            cval = vec[piv]
            if not fld.is_zero(cval):
                for j in range(self.n_src):
                    if not fld.is_zero(row[j]):
                        vec[j] = fld.sub(vec[j], fld.mul(cval, row[j]))
                for j in range(self.n_dst):
                    acc[j] = fld.add(acc[j], fld.mul(cval, row[self.n_src + j]))
        if any(not fld.is_zero(x) for x in vec[: self.n_src]):
            return None
        return acc


def check_freeness(
    result: AmalgamResult, D: LLA, f: Morphism, g: Morphism
) -> Optional[Morphism]:
    """Solve for the unique h: S -> D with h∘f1 = f and h∘g1 = g.

    The pair (f, g) must be Lie homomorphisms into an algebra of class at
    most c agreeing on C.  h is forced: it is known on the images of A and B
    and extends along brackets until it covers S; any conflict on the way, or
    a failure to reach all of S, returns None (a genuine amalgam never does).
    """
    d = result.diagram
    if f.src != d.A or g.src != d.B or f.dst != D or g.dst != D:
        raise PreconditionError("maps must go A -> D and B -> D")
    if D.field != d.A.field:
        raise PreconditionError("target lives over a different field")
    if D.n and D.nilpotency_class() > d.A.profile.c:
        raise PreconditionError("target exceeds the class bound")
    if not f.is_lie_hom() or not g.is_lie_hom():
        raise PreconditionError("f and g must be Lie homomorphisms")
    if not f.is_filtration_preserving() or not g.is_filtration_preserving():
        raise PreconditionError("f and g must respect the filtrations")
    if d.f0.compose(f) != d.g0.compose(g):
        raise PreconditionError("f and g disagree on C")

    fld = result.S.field
    c = d.A.profile.c
    span = _PairedSpan(fld, result.S.n, D.n)
    # (weight, S-coords, D-coords); pairs of combined weight > c bracket to 0
    # on both sides since f, g respect the filtrations, so they are skipped.
    frontier: list[tuple[int, list, list]] = []
    for src_rows, dst_rows in ((result.f1.rows, f.rows), (result.g1.rows, g.rows)):
        for s_row, d_row in zip(src_rows, dst_rows):
            got = span.add(list(s_row), list(d_row))
            if got is None:
                return None
            if got:
                frontier.append((result.S.weight_of(s_row), list(s_row), list(d_row)))
    known = list(frontier)
    while frontier:
        w1, s1, d1 = frontier.pop()
        for w2, s2, d2 in list(known):
            if w1 + w2 > c:
                continue
            s_br = result.S.bracket_coords(s1, s2)
            d_br = D.bracket_coords(d1, d2)
            got = span.add(s_br, d_br)
            if got is None:
                return None
            if got:
                entry = (w1 + w2, s_br, d_br)
                frontier.append(entry)
                known.append(entry)
    if span.dim != result.S.n:
        return None
    rows = []
    for i in range(result.S.n):
        e = [fld.zero] * result.S.n
        e[i] = fld.one
        img = span.image_of(e)
        assert img is not None
        rows.append(img)
    h = Morphism(result.S, D, rows)
    assert h.is_lie_hom(), "mediating map is not a homomorphism"
    assert result.f1.compose(h) == f and result.g1.compose(h) == g
    return h


# ---------------------------------------------------------------------------
# the independence predicate


def inclusion_morphism(sub_emb: Morphism, sup_emb: Morphism) -> Morphism:
    """Given abstract presentations sub -> M and sup -> M with sub ⊆ sup,
    return the factoring map sub -> sup."""
    fld = sub_emb.src.field
    rows = []
    for r in sub_emb.rows:
        coords = linalg.solve_rows(fld, [list(x) for x in sup_emb.rows], list(r))
        if coords is None:
            raise PreconditionError("claimed subalgebra is not contained in the larger one")
        rows.append(coords)
    return Morphism(sub_emb.src, sup_emb.src, rows)


def amalgams_isomorphic_over_images(r1: AmalgamResult, r2: AmalgamResult) -> bool:
    """Whether two amalgams of one diagram are isomorphic compatibly with the
    A- and B-embeddings, via the universal property in both directions."""
    h = check_freeness(r1, r2.S, r2.f1, r2.g1)
    k = check_freeness(r2, r1.S, r1.f1, r1.g1)
    if h is None or k is None:
        return False
    return h.compose(k) == Morphism.identity(r1.S) and k.compose(h) == Morphism.identity(r2.S)


def otimes_independent(
    M: LLA,
    a_vecs: Sequence[Vec],
    b_vecs: Sequence[Vec],
    c_vecs: Sequence[Vec],
    dim_cap: int = DEFAULT_DIM_CAP,
) -> bool:
    """Whether <A C> and <B C> sit freely amalgamated over <C> inside M.

    True iff the mediating map from the abstract free amalgam onto the
    subalgebra generated by A, B and C is bijective.
    """
    c_span = M.subspace(c_vecs)
    if not c_span.is_bracket_closed():
        raise PreconditionError("the base tuple must span a subalgebra")
    ac = M.generate_subalgebra(list(a_vecs) + list(c_vecs))
    bc = M.generate_subalgebra(list(b_vecs) + list(c_vecs))
    abc = M.generate_subalgebra(list(a_vecs) + list(b_vecs) + list(c_vecs))

    c_abs, c_emb = subalgebra_as_lla(M, c_span)
    ac_abs, ac_emb = subalgebra_as_lla(M, ac)
    bc_abs, bc_emb = subalgebra_as_lla(M, bc)
    abc_abs, abc_emb = subalgebra_as_lla(M, abc)

    diagram = Span(
        ac_abs,
        bc_abs,
        c_abs,
        inclusion_morphism(c_emb, ac_emb),
        inclusion_morphism(c_emb, bc_emb),
    )
    amalgam = free_amalgam(diagram, dim_cap=dim_cap)
    h = check_freeness(
        amalgam,
        abc_abs,
        inclusion_morphism(ac_emb, abc_emb),
        inclusion_morphism(bc_emb, abc_emb),
    )
    if h is None:
        return False
    return amalgam.S.n == abc_abs.n and h.rank() == abc_abs.n
