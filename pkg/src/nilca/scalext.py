"""Extension of scalars for LLAs along finite-field embeddings.

Extending F_{p^m} -> F_{p^m'} keeps the basis, the dimension and the
filtration profile and pushes every structure constant through the embedding;
vectors of the small model include coordinate-wise.  The closure check
verifies, on finite models, that the two-sorted substructure generated by the
big field together with the small model's vectors fills the whole extended
space: it runs the actual generation process (zero, sums, differences,
scalar action, brackets) to a fixpoint and compares element sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError
from .fields import Field, FieldEmbedding
from .lla import LLA, Vec, canon_table, table_entries


@dataclass(frozen=True)
class ScalarExtension:
    small: LLA
    big: LLA
    embedding: FieldEmbedding

    def include_vec(self, v: Vec) -> Vec:
        """The coordinate-preserving inclusion of the small model's vectors."""
        if v.parent != self.small:
            raise PreconditionError("vector does not belong to the small model")
        return Vec(self.big, [self.embedding.apply(c) for c in v.coords])


def extend_scalars(small: LLA, emb: FieldEmbedding) -> ScalarExtension:
    """Extension of scalars along a validated field embedding."""
    if emb.small != small.field:
        raise PreconditionError(
            f"embedding starts at {emb.small}, algebra lives over {small.field}"
        )
    entries = [
        (i, j, k, emb.apply(v)) for i, j, k, v in table_entries(small.table)
    ]
    big = LLA(
        emb.big,
        small.n,
        canon_table(emb.big, entries),
        small.profile,
        _trust="fast",
    )
    return ScalarExtension(small, big, emb)


def closure_equals_tensor(small: LLA, emb: FieldEmbedding, max_elements: int = 200_000) -> bool:
    """Generate the substructure of (K', V) inside the extended model and
    compare with the full extended space, element by element.

    Only finite fields are supported (the closure is a finite fixpoint).  The
    field sort starts as all of K' and never grows: every field operation
    stays inside it and the coordinate functions take values there.  The
    vector sort starts as the small model's point set.
    """
    if small.field.p == 0:
        raise PreconditionError("closure comparison needs a finite field")
    ext = extend_scalars(small, emb)
    big_field: Field = ext.big.field
    n = small.n
    total = big_field.order**n
    if total > max_elements:
        raise PreconditionError(
            f"extended model has {total} vectors, above the cap {max_elements}"
        )

    small_field = small.field
    points: set[tuple] = set()
    # all K-rational points, coordinate-wise through the embedding
    def rec(prefix: list, depth: int):
        if depth == n:
            points.add(tuple(prefix))
            return
        for a in small_field.elements():
            rec(prefix + [emb.apply(a)], depth + 1)

    rec([], 0)
    scalars = list(big_field.elements())

    frontier = set(points)
    while frontier and len(points) < total:
        new: set[tuple] = set()

        def consider(t: tuple):
            if t not in points:
                new.add(t)

        for u in frontier:
            for lam in scalars:
                consider(tuple(big_field.mul(lam, x) for x in u))
            for v in points:
                consider(tuple(big_field.add(a, b) for a, b in zip(u, v)))
                consider(tuple(big_field.sub(a, b) for a, b in zip(u, v)))
                consider(tuple(big_field.sub(b, a) for a, b in zip(u, v)))
                consider(tuple(ext.big.bracket_coords(list(u), list(v))))
            if len(points) + len(new) >= total:
                break
        points |= new
        frontier = new
    return len(points) == total
