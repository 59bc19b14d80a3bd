import itertools
import random

import pytest

from nilca.errors import BudgetError
from nilca.fields import GF
from nilca.generic import fraisse_round, new_stage, realize_constants
from nilca.iso import (
    Catalog,
    PartialIso,
    automorphism_count,
    back_and_forth_audit,
    enumerate_catalog,
    enumerate_valid_tables,
    extend_partial_iso,
    gl_orbit_of_table,
    iso_search,
    minimal_profile_rep,
)
from nilca.lla import LLA, Morphism, Profile, Vec, minimal_weights, symmetrize_entries

F2, F3, F5 = GF(2), GF(3), GF(5)


# -- iso_search ------------------------------------------------------------------


def test_identity_found():
    H = LLA.heisenberg(F5)
    m = iso_search(H, H)
    assert m is not None and m.is_lie_hom() and m.is_injective()


def test_heisenberg_not_abelian():
    assert iso_search(LLA.heisenberg(F5), LLA.abelian(F5, 3, 2)) is None


def test_basis_swap_with_sign():
    # (z, x, y) vs (z, y, x): an isomorphism exists (x <-> y, z -> -z)
    H1 = LLA.heisenberg(F5)
    table2 = symmetrize_entries(F5, [(2, 1, 0, 1)])
    H2 = LLA(F5, 3, table2, Profile(2, (3, 1, 0)))
    m = iso_search(H1, H2)
    assert m is not None
    assert m.is_filtration_preserving()


def test_profile_mismatch_blocks_filtered_iso():
    A1 = LLA.abelian(F2, 2, 2)  # profile (2, 0, 0)
    A2 = LLA(F2, 2, {}, Profile(2, (2, 1, 0)))  # a line sits in level 2
    assert iso_search(A1, A2) is None
    assert iso_search(A1, A2, respect_filtration=False) is not None


def test_iso_respects_invariants():
    rng = random.Random(77)
    from nilca.randgen import random_lla

    for _ in range(15):
        field = GF(rng.choice([2, 3]))
        A = random_lla(rng, field, 2, max_dim=4)
        B = random_lla(rng, field, 2, max_dim=4)
        m = iso_search(A, B)
        if m is None:
            continue
        assert A.profile.dims == B.profile.dims
        assert [s.dim for s in A.lower_central_series()] == [
            s.dim for s in B.lower_central_series()
        ]
        assert A.center().dim == B.center().dim


# -- catalogs --------------------------------------------------------------------


def test_catalog_dim1_single_class():
    for field in (F2, F3):
        cat = enumerate_catalog(field, 2, 1)
        assert len(cat.entries(1)) == 1
        assert cat.valid_counts[1] == 1


def test_catalog_dim2_abelian_only():
    cat = enumerate_catalog(F2, 2, 2)
    assert len(cat.entries(2)) == 1
    assert cat.valid_counts[2] == 1
    assert cat.entries(2)[0].lla.table == {}


def test_catalog_dim3_counts_match_hand_oracle():
    """Independent oracle: over F_p, c=2, n=3, the valid tables are the zero
    table and [v_i, v_j] = a v_k for the three index pairs and nonzero a
    (any other shape breaks the weight rule: shown by brute re-derivation)."""

    def hand_count(p):
        # brute: a table is valid iff some weight vector in {1,2}^3 passes
        field = GF(p)
        count = 0
        pairs = [(0, 1), (0, 2), (1, 2)]
        from nilca.lla import _check_jacobi

        for combo in itertools.product(range(p), repeat=9):
            entries = []
            for idx, (i, j) in enumerate(pairs):
                for k in range(3):
                    v = combo[idx * 3 + k]
                    if v:
                        entries.append((i, j, k, field.element_from_index(v)))
            table = symmetrize_entries(field, entries)
            ok = False
            for w in itertools.product((1, 2), repeat=3):
                good = True
                for (i, j), col in table.items():
                    need = w[i] + w[j]
                    if col and need > 2:
                        good = False
                        break
                    if any(w[k] < need for k in col):
                        good = False
                        break
                if good:
                    ok = True
                    break
            if ok and _check_jacobi(field, 3, table) is None:
                count += 1
        return count

    for p, expect_classes in ((2, 2), (3, 2)):
        cat = enumerate_catalog(GF(p), 2, 3)
        assert cat.valid_counts[3] == hand_count(p)
        assert len(cat.entries(3)) == expect_classes
        assert sum(e.table_count for e in cat.entries(3)) == cat.valid_counts[3]


def test_catalog_orbit_cross_check():
    """Class sizes equal the adaptable part of the GL orbit, and the orbit
    size matches |GL| / |Aut| (orbit-stabilizer)."""
    cat = enumerate_catalog(F2, 2, 3)
    gl3 = (2**3 - 1) * (2**3 - 2) * (2**3 - 4)  # 168

    def group(entry_tuple):
        d = {}
        for i, j, k, v in entry_tuple:
            d.setdefault((i, j), {})[k] = v
        return d

    for entry in cat.entries(3):
        orbit = gl_orbit_of_table(F2, 3, entry.lla.table)
        assert len(orbit) == gl3 // entry.aut_count
        adaptable = [
            t for t in orbit if minimal_weights(F2, 3, group(t), 2) is not None
        ]
        assert len(adaptable) == entry.table_count


def test_catalog_budget_guard():
    with pytest.raises(BudgetError):
        enumerate_catalog(F5, 2, 4)
    with pytest.raises(BudgetError):
        enumerate_catalog(GF(7), 2, 1)


def test_catalog_c3_dim3():
    cat = enumerate_catalog(F2, 3, 3)
    # c = 3 admits the same tables as c = 2 at n = 3 plus deeper weightings;
    # the class count is stable under the bracket-level bucketing
    assert cat.valid_counts[3] >= 4
    assert all(e.lla.lazard_check() for e in cat.entries(3))


# -- partial isomorphisms -----------------------------------------------------------


def build_stage(seed):
    st = new_stage(F2, 2, seed)
    st, _ = fraisse_round(st, 2, 1)
    st, _ = fraisse_round(st, 2, 1)
    return st


def test_extend_case2_linearity():
    st = build_stage(42)
    L = st.lla
    pi = PartialIso(L, L)
    basis = L.basis()
    pi = extend_partial_iso(pi, basis[0])
    assert pi is not None
    combo = basis[0].scale(1)
    pi2 = extend_partial_iso(pi, combo)
    assert pi2 is not None and pi2.verify()
    assert pi2.pairs[-1][1] == pi2.pairs[0][1]  # same image by linearity


def test_extend_case3_realizes_bracket_closure():
    st = build_stage(42)
    L = st.lla
    pi = PartialIso(L, L)
    rng = random.Random(1)
    for _ in range(3):
        v = L.random_vec(rng)
        nxt = extend_partial_iso(pi, v)
        if nxt is not None:
            pi = nxt
    assert pi.verify()
    # the matched span is bracket-closed on both sides
    src, tgt = pi.independent_pairs()
    s_sub = L.subspace([Vec(L, r) for r in src])
    assert s_sub.is_bracket_closed()


def test_extend_scalar_case1_noop():
    st = build_stage(42)
    pi = PartialIso(st.lla, st.lla)
    from nilca.fields import Scalar

    out = extend_partial_iso(pi, Scalar(F2, 1))
    assert out is pi


def test_bnf_self_identity_strategy():
    st = build_stage(42)
    for depth in (1, 2, 3):
        rep = back_and_forth_audit(st, st, depth=depth, games=8, seed=depth)
        assert rep.completed == rep.games, rep.to_dict()


def test_bnf_cross_seeds_all_failures_explained():
    a, b = build_stage(42), build_stage(43)
    rep = back_and_forth_audit(a, b, depth=2, games=20, seed=9)
    assert rep.unexplained == ()
    assert rep.completed + len(rep.failures) == rep.games


def test_bnf_budget_mismatch_reports_gaps():
    small = new_stage(F2, 2, 1)
    small, _ = fraisse_round(small, 1, 1)
    big = build_stage(42)
    rep = back_and_forth_audit(big, small, depth=2, games=12, seed=3)
    assert rep.unexplained == ()
    # the tiny stage cannot answer everything the bigger one offers
    assert len(rep.failures) > 0


def test_automorphism_count_heisenberg_f2():
    H = LLA.heisenberg(F2)
    # |Aut| of the 3-dim Heisenberg table over F_2 inside GL_3 is 24
    assert automorphism_count(H) == 24
    # filtered automorphisms are the same here (z is characteristic)
    assert automorphism_count(H, respect_filtration=True) == 24
    assert automorphism_count(LLA.abelian(F2, 2, 2)) == 6  # |GL_2(F_2)|
