import itertools
import random

import pytest

from nilca.errors import DimensionCapError, PreconditionError
from nilca.fields import GF, QQ
from nilca.freelie import (
    WeightedGenerators,
    eval_word,
    free_lla,
    hall_basis,
    induced_hom,
    parse_word,
    witt_dimension,
)
from nilca.lla import LLA, Morphism
from nilca.randgen import random_lla

F2, F5 = GF(2), GF(5)


# -- independent oracle: span of formal bracket trees modulo the Lie relations


def tree_rank_dimension(field, weights, c):
    """Dimension of the free c-nilpotent algebra on weighted generators, by
    brute force: take all bracket trees of weighted degree <= c as formal
    symbols, span the alternativity/antisymmetry/Jacobi instances, close the
    span under bracketing with every tree, and subtract the rank."""
    gens = list(range(len(weights)))
    trees = [("g", g) for g in gens]
    degree = {("g", g): weights[g] for g in gens}
    # grow all trees of degree <= c
    grown = True
    while grown:
        grown = False
        snapshot = list(trees)
        for t1 in snapshot:
            for t2 in snapshot:
                d = degree[t1] + degree[t2]
                if d > c:
                    continue
                node = ("b", t1, t2)
                if node not in degree:
                    trees.append(node)
                    degree[node] = d
                    grown = True
    index = {t: i for i, t in enumerate(trees)}
    dim = len(trees)

    def bracket_vec(u_vec, v_vec):
        out = [field.zero] * dim
        for i, ci in enumerate(u_vec):
            if field.is_zero(ci):
                continue
            for j, cj in enumerate(v_vec):
                if field.is_zero(cj):
                    continue
                d = degree[trees[i]] + degree[trees[j]]
                if d > c:
                    continue
                node = ("b", trees[i], trees[j])
                out[index[node]] = field.add(out[index[node]], field.mul(ci, cj))
        return out

    def unit(t):
        v = [field.zero] * dim
        v[index[t]] = field.one
        return v

    relations = []
    for t1 in trees:
        for t2 in trees:
            if degree[t1] + degree[t2] <= c:
                # antisymmetry [t1,t2] + [t2,t1]
                v = bracket_vec(unit(t1), unit(t2))
                w = bracket_vec(unit(t2), unit(t1))
                relations.append([field.add(a, b) for a, b in zip(v, w)])
        if 2 * degree[t1] <= c:
            relations.append(bracket_vec(unit(t1), unit(t1)))
    for t1, t2, t3 in itertools.product(trees, repeat=3):
        if degree[t1] + degree[t2] + degree[t3] <= c:
            v1 = bracket_vec(unit(t1), bracket_vec(unit(t2), unit(t3)))
            v2 = bracket_vec(unit(t2), bracket_vec(unit(t3), unit(t1)))
            v3 = bracket_vec(unit(t3), bracket_vec(unit(t1), unit(t2)))
            relations.append([field.add(a, field.add(b, cc)) for a, b, cc in zip(v1, v2, v3)])

    from nilca.linalg import SpanBuilder

    span = SpanBuilder(field, dim)
    work = []
    for r in relations:
        if span.add(r):
            work.append(r)
    while work:
        r = work.pop()
        for t in trees:
            br = bracket_vec(r, unit(t))
            if span.add(br):
                work.append(br)
            br2 = bracket_vec(unit(t), r)
            if span.add(br2):
                work.append(br2)
    return dim - span.dim


@pytest.mark.parametrize(
    "g,c,expect",
    [(1, 2, 1), (1, 3, 1), (2, 2, 3), (2, 3, 5), (3, 2, 6), (3, 3, 14)],
)
def test_free_dims_match_oracle_unweighted(g, c, expect):
    gens = WeightedGenerators.parse(",".join(f"g{i}" for i in range(g)))
    for field in (F2, F5):
        built = free_lla(gens, field, c)
        oracle = tree_rank_dimension(field, [1] * g, c)
        assert built.lla.n == oracle == expect


@pytest.mark.parametrize(
    "weights,c",
    [((1, 2), 3), ((1, 1, 2), 3), ((2,), 3), ((1, 2), 2), ((1, 1, 2), 2), ((1, 3), 4)],
)
def test_free_dims_match_oracle_weighted(weights, c):
    gens = WeightedGenerators(tuple(f"g{i}" for i in range(len(weights))), weights)
    for field in (F2, F5):
        built = free_lla(gens, field, c)
        oracle = tree_rank_dimension(field, list(weights), c)
        assert built.lla.n == oracle


def test_witt_formula_cross_check():
    for g in (1, 2, 3):
        for c in (2, 3):
            total = sum(witt_dimension(g, w) for w in range(1, c + 1))
            built = free_lla(
                WeightedGenerators.parse(",".join(f"g{i}" for i in range(g))), F2, c
            )
            assert built.lla.n == total


def test_single_generator_is_abelian_line():
    built = free_lla(WeightedGenerators.parse("x"), F5, 3)
    assert built.lla.n == 1 and built.lla.table == {}


def test_free_algebra_validates_and_grades():
    built = free_lla(WeightedGenerators.parse("x,y,z:2"), F2, 3)
    L = built.lla
    assert L.lazard_check()
    # weight-1 layer has exactly the weight-1 generators
    k2 = L.profile.dims[1]
    assert L.n - k2 == 2


def test_dimension_cap():
    gens = WeightedGenerators.parse(",".join(f"g{i}" for i in range(6)))
    with pytest.raises(DimensionCapError):
        free_lla(gens, F2, 3, dim_cap=64)


def test_hall_condition_holds():
    hall = hall_basis((1, 1, 1), 3)
    for (u, v), idx in hall.pair_index.items():
        assert u > v
        if hall.left[u] != -1:
            assert hall.right[u] <= v
        assert hall.weight[idx] == hall.weight[u] + hall.weight[v]


# -- words and induced homomorphisms -------------------------------------------


def test_parse_word():
    assert parse_word("x") == "x"
    assert parse_word("[x,y]") == ("x", "y")
    assert parse_word("[[x,y],z]") == (("x", "y"), "z")
    with pytest.raises(ValueError):
        parse_word("[x,y")


def test_eval_word_examples():
    H = LLA.heisenberg(F2)
    z, x, y = H.basis()
    env = {"x": x, "y": y}
    assert eval_word("[x,y]", env) == z
    assert eval_word("x", env) == x
    assert eval_word("[[x,y],x]", env).is_zero()


def test_eval_word_matches_direct_brackets_random():
    rng = random.Random(17)
    for _ in range(20):
        L = random_lla(rng, GF(rng.choice([2, 3, 5])), 3, max_dim=5)
        if L.n == 0:
            continue
        u, v = L.random_vec(rng), L.random_vec(rng)
        env = {"x": u, "y": v}
        direct = L.bracket(L.bracket(u, v), u)
        assert eval_word("[[x,y],x]", env) == direct


def test_induced_hom_identity_and_zero():
    built = free_lla(WeightedGenerators.parse("x,y"), F5, 2)
    L = built.lla
    gens = [built.generator_vec(n) for n in built.gens.names]
    ident = induced_hom(built, gens)
    assert ident == Morphism.identity(L)
    zero = induced_hom(built, [L.zero_vec(), L.zero_vec()])
    assert zero == Morphism.zero_map(L, L)


def test_induced_hom_onto_heisenberg():
    built = free_lla(WeightedGenerators.parse("x,y"), F5, 2)
    H = LLA.heisenberg(F5)
    hom = induced_hom(built, [H.basis_vector(1), H.basis_vector(2)])
    assert hom.rank() == 3
    # the Hall pair [y,x] maps onto -z
    pair_pos = built.labels.index("[y,x]")
    assert list(hom.rows[pair_pos]) == [F5.neg(F5.one), F5.zero, F5.zero]


def test_induced_hom_weight_violation():
    built = free_lla(WeightedGenerators.parse("x,y:2"), F5, 2)
    H = LLA.heisenberg(F5)
    with pytest.raises(PreconditionError):
        induced_hom(built, [H.basis_vector(1), H.basis_vector(2)])  # y target has weight 1


def test_universal_property_existence_and_uniqueness():
    rng = random.Random(23)
    checked = 0
    while checked < 15:
        field = GF(rng.choice([2, 3, 5]))
        c = rng.choice([2, 3])
        target = random_lla(rng, field, c, max_dim=6)
        if target.n == 0:
            continue
        built = free_lla(WeightedGenerators.parse("x,y"), field, c)
        targets = [target.random_vec(rng), target.random_vec(rng)]
        hom = induced_hom(built, targets)  # existence + bracket check inside
        assert hom.is_lie_hom()
        # uniqueness: any homomorphism agreeing on the generators equals it
        other_rows = [list(r) for r in hom.rows]
        for name in built.gens.names:
            pos = built.gen_position[name]
            assert list(hom.rows[pos]) == list(other_rows[pos])
        hall = built.hall
        for lla_pos, orig in enumerate(built.basis_order):
            if hall.left[orig] == -1:
                continue
            left_pos = built.basis_order.index(hall.left[orig])
            right_pos = built.basis_order.index(hall.right[orig])
            forced = target.bracket_coords(list(hom.rows[left_pos]), list(hom.rows[right_pos]))
            assert list(hom.rows[lla_pos]) == forced
        checked += 1
