import random

import pytest
from hypothesis import given, settings, strategies as st

from nilca.fields import GF, QQ
from nilca import linalg
from nilca.linalg import Matrix, PresolvedSystem, SpanBuilder

F2, F5, F7 = GF(2), GF(5), GF(7)
F4 = GF(2, 2)


def random_matrix(rng, field, rows, cols):
    return [[field.random(rng) for _ in range(cols)] for _ in range(rows)]


def test_zero_matrix_rank():
    m = Matrix.from_rows(F5, [[0, 0], [0, 0], [0, 0]])
    _, pivots, rank = m.rref()
    assert rank == 0 and pivots == ()


def test_identity_rref_is_itself():
    m = Matrix.identity(F5, 3)
    red, pivots, rank = m.rref()
    assert rank == 3 and red == m and pivots == (0, 1, 2)


def test_f2_ones_matrix_rank_one():
    m = Matrix.from_rows(F2, [[1, 1], [1, 1]])
    red, pivots, rank = m.rref()
    assert rank == 1
    assert red.rows == ((1, 1), (0, 0))


def test_solve_identity_returns_b():
    m = Matrix.identity(F7, 4)
    assert m.solve([1, 2, 3, 4]) == [1, 2, 3, 4]


def test_solve_outside_span_is_none():
    m = Matrix.from_rows(F5, [[1, 2], [0, 0], [0, 0]])  # columns span the e1-line
    assert m.solve([0, 1, 0]) is None
    assert m.solve([3, 0, 0]) is not None


def test_solve_recovers_preimage_multiply_back():
    # random invertible 4x4 over F_7; b = M x0 must recover x0 exactly
    rng = random.Random(7)
    for _ in range(25):
        while True:
            rows = random_matrix(rng, F7, 4, 4)
            m = Matrix.from_rows(F7, rows)
            if m.rank() == 4:
                break
        x0 = [F7.random(rng) for _ in range(4)]
        b = m.mul_vec(x0)
        got = m.solve(b)
        assert got == x0  # unique solution for invertible M
        assert m.mul_vec(got) == b


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_rank_equals_transpose_rank(data):
    field = data.draw(st.sampled_from([F2, F5, F4, QQ]))
    rows = data.draw(st.integers(1, 4))
    cols = data.draw(st.integers(1, 4))
    seed = data.draw(st.integers(0, 10**6))
    rng = random.Random(seed)
    m = Matrix.from_rows(field, random_matrix(rng, field, rows, cols))
    assert m.rank() == m.transpose().rank()


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_solve_multiply_back_random(data):
    field = data.draw(st.sampled_from([F2, F5, F4, QQ]))
    rows = data.draw(st.integers(1, 4))
    cols = data.draw(st.integers(1, 4))
    seed = data.draw(st.integers(0, 10**6))
    rng = random.Random(seed)
    mat = random_matrix(rng, field, rows, cols)
    b = [field.random(rng) for _ in range(cols)]
    x = linalg.solve_rows(field, mat, b)
    if x is not None:
        assert linalg.row_times_mat(field, x, mat) == b


def test_left_kernel_annihilates():
    rng = random.Random(3)
    for field in (F2, F5, QQ):
        mat = random_matrix(rng, field, 4, 3)
        kern = linalg.left_kernel(field, mat)
        for row in kern:
            assert linalg.vec_is_zero(field, linalg.row_times_mat(field, row, mat))
        rank = len(linalg.rref_rows(field, mat)[0])
        assert len(kern) == 4 - rank


def test_intersection_dimension_formula():
    rng = random.Random(11)
    for _ in range(20):
        field = rng.choice([F2, F5])
        a = random_matrix(rng, field, 2, 4)
        b = random_matrix(rng, field, 2, 4)
        ra = len(linalg.rref_rows(field, a)[0])
        rb = len(linalg.rref_rows(field, b)[0])
        rsum = len(linalg.rref_rows(field, a + b)[0])
        inter = linalg.intersect_spans(field, a, b)
        assert len(inter) == ra + rb - rsum
        for row in inter:
            assert linalg.in_span(field, row, *linalg.rref_rows(field, a))
            assert linalg.in_span(field, row, *linalg.rref_rows(field, b))


def test_span_builder_matches_batch_rref():
    rng = random.Random(5)
    for field in (F2, F7, F4):
        vectors = random_matrix(rng, field, 6, 5)
        sb = SpanBuilder(field, 5)
        for v in vectors:
            sb.add(list(v))
        batch_rows, batch_piv = linalg.rref_rows(field, vectors)
        assert [list(r) for r in sb.rows] == batch_rows
        assert sb.pivots == batch_piv


def test_presolved_system_agrees_with_solve_rows():
    rng = random.Random(9)
    for field in (F2, F5, F4, QQ):
        mat = random_matrix(rng, field, 4, 6)
        sys_ = PresolvedSystem(field, mat)
        for _ in range(10):
            b = [field.random(rng) for _ in range(6)]
            assert sys_.solve(b) == linalg.solve_rows(field, mat, b)
            inside = linalg.row_times_mat(field, [field.random(rng) for _ in range(4)], mat)
            assert sys_.solve(inside) is not None


def test_invert_rows():
    rng = random.Random(13)
    for field in (F2, F5, QQ):
        while True:
            mat = random_matrix(rng, field, 4, 4)
            if len(linalg.rref_rows(field, mat)[0]) == 4:
                break
        inv = linalg.invert_rows(field, mat)
        assert linalg.mat_mul(field, inv, mat) == linalg.identity_rows(field, 4)
    with pytest.raises(ValueError):
        linalg.invert_rows(F2, [[F2.one, F2.one], [F2.one, F2.one]])
