"""Free nilpotent Lie algebras on weighted generators, via Hall bases.

Generators carry filtration weights in ``1..c``; a Hall monomial's weight is
the sum of the weights of its leaves, and monomials heavier than ``c`` are
truncated away.  The Hall order is weight-first (ties broken by construction
index), which is compatible with the grading, so the retained monomials form
a basis of the truncated algebra.

Structure constants are computed by the classical rewriting

    [[x, y], v] = [[x, v], y] + [x, [y, v]]      (when y > v),

memoized per index pair, over the integers; a field is only chosen when the
algebra is materialized as an :class:`~nilca.lla.LLA`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .errors import DimensionCapError, PreconditionError
from .fields import Field
from .lla import LLA, Morphism, Profile, Vec, canon_table

DEFAULT_DIM_CAP = 64


@dataclass(frozen=True)
class WeightedGenerators:
    """Generator labels with filtration weights in 1..c."""

    names: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise ValueError("names/weights length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")
        if any(w < 1 for w in self.weights):
            raise ValueError("generator weights start at 1")

    @staticmethod
    def parse(spec: str) -> "WeightedGenerators":
        """Parse "x:1,y:1,z:2" (weight defaults to 1)."""
        names, weights = [], []
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                name, w = part.split(":", 1)
                names.append(name.strip())
                weights.append(int(w))
            else:
                names.append(part)
                weights.append(1)
        return WeightedGenerators(tuple(names), tuple(weights))

    def sorted_by_hall_order(self) -> "WeightedGenerators":
        order = sorted(range(len(self.names)), key=lambda i: (self.weights[i], self.names[i]))
        return WeightedGenerators(
            tuple(self.names[i] for i in order), tuple(self.weights[i] for i in order)
        )


class HallBasis:
    """Hall monomials of weight <= c on weighted generator slots.

    Element arrays are indexed in construction order: generators first, then
    pairs by increasing weight.  ``left[i] == -1`` marks a generator.
    """

    def __init__(self, weights: Sequence[int], c: int, dim_cap: int = DEFAULT_DIM_CAP):
        if any(w > c for w in weights):
            raise ValueError("generator weight exceeds the class bound")
        self.c = c
        self.gen_count = len(weights)
        self.weight: list[int] = list(weights)
        self.left: list[int] = [-1] * len(weights)
        self.right: list[int] = [-1] * len(weights)
        self.pair_index: dict[tuple[int, int], int] = {}
        for w in range(2, c + 1):
            for u in range(len(self.weight)):
                for v in range(u):
                    if self.weight[u] + self.weight[v] != w:
                        continue
                    if self.left[u] != -1 and self.right[u] > v:
                        continue
                    self.pair_index[(u, v)] = len(self.weight)
                    self.weight.append(w)
                    self.left.append(u)
                    self.right.append(v)
                    if len(self.weight) > dim_cap:
                        raise DimensionCapError(
                            f"free algebra exceeds the dimension cap {dim_cap}"
                        )
        self.dim = len(self.weight)
        self._memo: dict[tuple[int, int], dict[int, int]] = {}

    def label(self, i: int, names: Sequence[str]) -> str:
        if self.left[i] == -1:
            return names[i]
        return f"[{self.label(self.left[i], names)},{self.label(self.right[i], names)}]"

    # -- integer rewriting ---------------------------------------------------

    def z_bracket(self, i: int, j: int) -> dict[int, int]:
        """[e_i, e_j] as an integer combination of Hall monomials."""
        if self.weight[i] + self.weight[j] > self.c:
            return {}
        if i == j:
            return {}
        if i < j:
            return {k: -v for k, v in self.z_bracket(j, i).items()}
        key = (i, j)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if (i, j) in self.pair_index:
            result = {self.pair_index[(i, j)]: 1}
        else:
            # i = [x, y] with y > j: Jacobi rewrite [[x,y],j] = [[x,j],y] + [x,[y,j]]
            x, y = self.left[i], self.right[i]
            result = _combo_add(
                self._combo_bracket(self.z_bracket(x, j), {y: 1}),
                self._combo_bracket({x: 1}, self.z_bracket(y, j)),
            )
        self._memo[key] = result
        return result

    def _combo_bracket(self, a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, ci in a.items():
            for j, cj in b.items():
                for k, v in self.z_bracket(i, j).items():
                    acc = out.get(k, 0) + ci * cj * v
                    if acc:
                        out[k] = acc
                    elif k in out:
                        del out[k]
        return out


def _combo_add(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out = dict(a)
    for k, v in b.items():
        acc = out.get(k, 0) + v
        if acc:
            out[k] = acc
        elif k in out:
            del out[k]
    return out


@lru_cache(maxsize=None)
def hall_basis(weights: tuple[int, ...], c: int, dim_cap: int = DEFAULT_DIM_CAP) -> HallBasis:
    return HallBasis(weights, c, dim_cap)


@dataclass(frozen=True)
class FreeLLA:
    """A free nilpotent algebra materialized over a field.

    The LLA basis is the Hall basis sorted by descending weight; ``labels``
    names each basis vector, ``gen_position`` locates each generator.
    """

    lla: LLA
    gens: WeightedGenerators
    labels: tuple[str, ...]
    gen_position: dict
    basis_order: tuple[int, ...]  # LLA position -> Hall construction index
    hall: HallBasis

    def generator_vec(self, name: str) -> Vec:
        return self.lla.basis_vector(self.gen_position[name])


def free_lla(
    gens: WeightedGenerators,
    field: Field,
    c: int,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> FreeLLA:
    """The free c-nilpotent LLA on the given weighted generators."""
    if c < 1:
        raise ValueError("class bound must be >= 1")
    gens = gens.sorted_by_hall_order()
    hall = hall_basis(gens.weights, c, dim_cap)
    order = sorted(range(hall.dim), key=lambda i: (-hall.weight[i], i))
    pos = {orig: p for p, orig in enumerate(order)}
    entries = []
    for a, orig_a in enumerate(order):
        for orig_b in order:
            if orig_a == orig_b:
                continue
            combo = hall.z_bracket(orig_a, orig_b)
            for orig_k, z in combo.items():
                entries.append((a, pos[orig_b], pos[orig_k], field.from_int(z)))
    profile = Profile.from_weights(c, [hall.weight[i] for i in order])
    algebra = LLA(field, hall.dim, canon_table(field, entries), profile, _trust="fast")
    labels = tuple(hall.label(i, gens.names) for i in order)
    gen_position = {name: pos[i] for i, name in enumerate(gens.names)}
    return FreeLLA(algebra, gens, labels, gen_position, tuple(order), hall)


# ---------------------------------------------------------------------------
# bracket words and induced homomorphisms


def parse_word(text: str):
    """Parse a bracket word: a generator name or ``[w1,w2]`` recursively."""
    text = text.strip()
    if not text.startswith("["):
        if not text or "," in text or "]" in text:
            raise ValueError(f"bad bracket word {text!r}")
        return text
    if not text.endswith("]"):
        raise ValueError(f"unbalanced brackets in {text!r}")
    inner = text[1:-1]
    depth = 0
    for idx, ch in enumerate(inner):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            return (parse_word(inner[:idx]), parse_word(inner[idx + 1 :]))
    raise ValueError(f"missing top-level comma in {text!r}")


def eval_word(word, env: dict) -> Vec:
    """Evaluate a bracket word under an assignment of generators to vectors."""
    if isinstance(word, str):
        word = parse_word(word)
    if isinstance(word, tuple) and len(word) == 2 and not isinstance(word[0], int):
        lhs = eval_word(word[0], env)
        rhs = eval_word(word[1], env)
        return lhs.bracket(rhs)
    try:
        return env[word]
    except KeyError:
        raise PreconditionError(f"word uses unbound generator {word!r}") from None


def induced_hom(free: FreeLLA, targets: Sequence[Vec]) -> Morphism:
    """The unique homomorphism sending the generators to the targets.

    Targets follow the order of ``free.gens`` (Hall order).  Each weight-w
    generator must land in the w-th filtration term of the target algebra,
    and the target must be nilpotent of class at most c; the result is
    checked to commute with brackets on every Hall basis pair.
    """
    gens = free.gens
    if len(targets) != len(gens.names):
        raise PreconditionError("one target per generator required")
    parents = {id(t.parent) for t in targets}
    if len(parents) != 1:
        raise PreconditionError("targets must share one parent algebra")
    target_alg = targets[0].parent
    c = free.hall.c
    if target_alg.n and target_alg.nilpotency_class() > c:
        raise PreconditionError("target algebra exceeds the class bound")
    for name, w, t in zip(gens.names, gens.weights, targets):
        if not target_alg.filtration_subspace(min(w, target_alg.profile.c + 1)).contains(t):
            raise PreconditionError(
                f"target of weight-{w} generator {name!r} is not in filtration level {w}"
            )
    hall = free.hall
    images: list[Optional[Vec]] = [None] * hall.dim
    for i in range(hall.dim):
        if hall.left[i] == -1:
            images[i] = targets[i]
        else:
            images[i] = images[hall.left[i]].bracket(images[hall.right[i]])
    rows = [list(images[orig].coords) for orig in free.basis_order]
    hom = Morphism(free.lla, target_alg, rows)
    assert hom.is_lie_hom(), "induced map failed the homomorphism check"
    return hom


def witt_dimension(num_gens: int, weight: int) -> int:
    """Dimension of the weight-w layer of the free Lie algebra on unweighted
    generators (necklace formula)."""

    def mobius(n: int) -> int:
        result, d = 1, 2
        while d * d <= n:
            if n % d == 0:
                n //= d
                if n % d == 0:
                    return 0
                result = -result
            d += 1
        if n > 1:
            result = -result
        return result

    total = 0
    for d in range(1, weight + 1):
        if weight % d == 0:
            total += mobius(d) * num_gens ** (weight // d)
    return total // weight
