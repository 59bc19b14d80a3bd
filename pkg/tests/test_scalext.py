import random

import pytest

from nilca.errors import PreconditionError
from nilca.fields import GF, find_embedding
from nilca.lla import LLA, validate_ordered
from nilca.randgen import random_lla
from nilca.scalext import closure_equals_tensor, extend_scalars

F2, F3 = GF(2), GF(3)
F4, F9 = GF(2, 2), GF(3, 2)


def test_heisenberg_f2_to_f4_same_table():
    H = LLA.heisenberg(F2)
    ext = extend_scalars(H, find_embedding(F2, F4))
    assert ext.big.n == 3
    assert ext.big.profile == H.profile
    # constants in the prime field: same table, embedded entry-wise
    assert ext.big.bracket_basis(1, 2) == {0: F4.one}


def test_extension_preserves_dimension_profile_validity():
    rng = random.Random(6)
    for _ in range(12):
        small_field, big_field = rng.choice([(F2, F4), (F3, F9)])
        L = random_lla(rng, small_field, rng.choice([2, 3]), max_dim=4)
        emb = find_embedding(small_field, big_field)
        ext = extend_scalars(L, emb)
        assert ext.big.n == L.n
        assert ext.big.profile == L.profile
        assert validate_ordered(big_field, L.n, ext.big.table, L.profile).ok


def test_embedded_bracket_matches_bracket_of_embeddings():
    rng = random.Random(8)
    for _ in range(10):
        L = random_lla(rng, F3, 2, max_dim=4)
        if L.n == 0:
            continue
        emb = find_embedding(F3, F9)
        ext = extend_scalars(L, emb)
        u, v = L.random_vec(rng), L.random_vec(rng)
        direct = ext.include_vec(L.bracket(u, v))
        lifted = ext.big.bracket(ext.include_vec(u), ext.include_vec(v))
        assert direct == lifted


def test_theta_preserved_under_extension():
    rng = random.Random(12)
    for _ in range(12):
        L = random_lla(rng, F2, 2, max_dim=4)
        if L.n == 0:
            continue
        ext = extend_scalars(L, find_embedding(F2, F4))
        vecs = [L.random_vec(rng) for _ in range(rng.randint(1, 3))]
        lifted = [ext.include_vec(v) for v in vecs]
        assert L.theta(vecs) == ext.big.theta(lifted)


def test_functoriality_of_towers():
    F16 = GF(2, 4)
    e1 = find_embedding(F2, F4)
    e2 = find_embedding(F4, F16)
    H = LLA.heisenberg(F2)
    two_step = extend_scalars(extend_scalars(H, e1).big, e2).big
    one_step = extend_scalars(H, e1.compose(e2)).big
    assert two_step == one_step


def test_pi_probe_formula():
    # pi applied to K'-scaled vectors of V: pi(b1 w1, ..., b_{n+1} w_{n+1})
    # equals a_i b_i / b_{n+1} whenever b_{n+1} w_{n+1} = sum a_i (b_i w_i)
    rng = random.Random(3)
    H = LLA.heisenberg(F2)
    ext = extend_scalars(H, find_embedding(F2, F4))
    big = ext.big
    for _ in range(40):
        w1, w2 = H.random_vec(rng), H.random_vec(rng)
        if not H.theta([w1, w2]):
            continue
        b1, b2 = F4.random_nonzero(rng), F4.random_nonzero(rng)
        a1, a2 = F4.random(rng), F4.random(rng)
        v1 = ext.include_vec(w1).scale(b1)
        v2 = ext.include_vec(w2).scale(b2)
        w = v1.scale(a1) + v2.scale(a2)
        assert big.pi([v1, v2], w, 1).value == a1
        assert big.pi([v1, v2], w, 2).value == a2
        # and the unscaled tuple sees the twisted coordinates a_i b_i
        u1, u2 = ext.include_vec(w1), ext.include_vec(w2)
        assert big.pi([u1, u2], w, 1).value == F4.mul(a1, b1)


def test_closure_identity_extension():
    H = LLA.heisenberg(F2)
    assert closure_equals_tensor(H, find_embedding(F2, F2))


def test_closure_f2_to_f4_and_f3_to_f9():
    rng = random.Random(9)
    for small, big in ((F2, F4), (F3, F9)):
        emb = find_embedding(small, big)
        for _ in range(4):
            L = random_lla(rng, small, 2, max_dim=3)
            assert closure_equals_tensor(L, emb)
        assert closure_equals_tensor(LLA.heisenberg(small), emb)


def test_closure_rejects_rationals():
    from nilca.fields import QQ, FieldEmbedding

    L = LLA.abelian(QQ, 1, 2)
    with pytest.raises(PreconditionError):
        closure_equals_tensor(L, FieldEmbedding(QQ, QQ))


def test_closure_cap():
    L = LLA.abelian(F3, 5, 2)
    with pytest.raises(PreconditionError):
        closure_equals_tensor(L, find_embedding(F3, F9), max_elements=1000)
