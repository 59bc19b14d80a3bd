"""Seeded random generation of algebras, subalgebras and amalgam diagrams.

Random tables rarely satisfy the Jacobi identity, so random algebras are
produced the structural way: quotients of free nilpotent algebras by random
ideals, and random subalgebras of those.  Every function is deterministic in
the passed random.Random instance.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .amalgam import Span, inclusion_morphism
from .errors import DimensionCapError
from .freelie import WeightedGenerators, free_lla
from .lla import LLA, Subspace, Vec, ideal_closure, quotient_by_ideal, subalgebra_as_lla


def random_free_base(rng: random.Random, field, c: int, max_gens: int = 3) -> LLA:
    g = rng.randint(1, max_gens)
    weights = [rng.randint(1, max(1, c - 1)) if rng.random() < 0.25 else 1 for _ in range(g)]
    gens = WeightedGenerators(
        tuple(f"g{i}" for i in range(g)), tuple(min(w, c) for w in weights)
    )
    return free_lla(gens, field, c).lla


def random_lla(
    rng: random.Random,
    field,
    c: int,
    max_dim: int = 4,
    max_gens: int = 3,
) -> LLA:
    """A random valid LLA of dimension <= max_dim (possibly zero)."""
    for _ in range(40):
        try:
            base = random_free_base(rng, field, c, max_gens)
        except DimensionCapError:
            continue
        # quotient by a random ideal until the dimension fits
        current = base
        guard = 0
        while current.n > max_dim and guard < 12:
            guard += 1
            seeds = [[field.random(rng) for _ in range(current.n)] for _ in range(rng.randint(1, 2))]
            ideal = ideal_closure(current, seeds)
            if ideal.dim == current.n:
                break  # quotient would be zero; retry with new seeds
            if ideal.dim == 0:
                continue
            current, _ = quotient_by_ideal(current, ideal, check_ideal=False)
        if current.n <= max_dim:
            if rng.random() < 0.3 and current.n > 1:
                sub = random_subalgebra(rng, current, max_dim)
                current, _ = subalgebra_as_lla(current, sub)
            return current
    return LLA.abelian(field, rng.randint(0, max_dim), c)


def random_subalgebra(
    rng: random.Random,
    parent: LLA,
    max_dim: int,
    include: Sequence[Vec] = (),
) -> Subspace:
    """A random bracket-closed subspace of dimension <= max_dim containing
    the given vectors (whose generated algebra must already fit)."""
    base = parent.generate_subalgebra(list(include))
    if base.dim > max_dim:
        raise ValueError("included vectors already exceed the dimension bound")
    current = base
    for _ in range(8):
        v = parent.random_vec(rng)
        cand = parent.generate_subalgebra(current.vectors() + [v])
        if cand.dim <= max_dim:
            current = cand
        if current.dim == max_dim or rng.random() < 0.3:
            break
    return current


def random_diagram(
    rng: random.Random,
    field,
    c: int,
    max_dim: int = 4,
    ambient_dim: int = 6,
    gen_budget: int = 8,
) -> Span:
    """A random amalgamation diagram with dim A, dim B <= max_dim.

    A and B are random subalgebras of a random ambient algebra and C is their
    intersection, so the two embeddings are honest inclusions.  gen_budget
    caps dim A + dim B - dim C to keep the later free construction within its
    dimension cap (relevant mostly for c = 3).
    """
    for _ in range(60):
        ambient = random_lla(rng, field, c, max_dim=ambient_dim, max_gens=3)
        if ambient.n == 0:
            continue
        shared: list[Vec] = []
        if rng.random() < 0.6:
            shared = [ambient.random_vec(rng)]
        try:
            a_sub = random_subalgebra(rng, ambient, max_dim, include=shared)
            b_sub = random_subalgebra(rng, ambient, max_dim, include=shared)
        except ValueError:
            continue
        c_sub = a_sub.intersect(b_sub)
        if a_sub.dim + b_sub.dim - c_sub.dim > gen_budget:
            continue
        a_abs, a_emb = subalgebra_as_lla(ambient, a_sub)
        b_abs, b_emb = subalgebra_as_lla(ambient, b_sub)
        c_abs, c_emb = subalgebra_as_lla(ambient, c_sub)
        return Span(
            a_abs,
            b_abs,
            c_abs,
            inclusion_morphism(c_emb, a_emb),
            inclusion_morphism(c_emb, b_emb),
        )
    # fallback: a pair of abelian lines over a trivial base
    one = LLA.abelian(field, 1, c)
    return Span.over_zero(one, one)


def random_ideal(rng: random.Random, parent: LLA, max_seeds: int = 2) -> Subspace:
    seeds = [
        [parent.field.random(rng) for _ in range(parent.n)]
        for _ in range(rng.randint(0, max_seeds))
    ]
    return ideal_closure(parent, seeds)


def random_quotient_maps(rng: random.Random, source: LLA, tries: int = 6):
    """Random proper quotient projections of a given algebra."""
    out = []
    for _ in range(tries):
        ideal = random_ideal(rng, source)
        quo, proj = quotient_by_ideal(source, ideal, check_ideal=False)
        out.append((quo, proj))
    return out
