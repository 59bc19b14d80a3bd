from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nilca.errors import EmbeddingError, FieldMismatchError
from nilca.fields import (
    GF,
    QQ,
    Field,
    FieldEmbedding,
    Scalar,
    default_modulus,
    find_embedding,
    poly_is_irreducible,
)

F2, F3, F5, F7 = GF(2), GF(3), GF(5), GF(7)
F4 = GF(2, 2)
F9 = GF(3, 2)

ALL_FIELDS = [F2, F5, F4, F9, QQ]


def elements_strategy(field):
    if field.p == 0:
        return st.fractions(min_value=-50, max_value=50, max_denominator=50)
    return st.integers(min_value=0, max_value=field.order - 1).map(field.element_from_index)


# -- worked examples ---------------------------------------------------------


def test_prime_field_product():
    assert (F5.scalar(3) * F5.scalar(4)).value == 2  # 12 mod 5


def test_f4_generator_square():
    # F_4 = F_2[t]/(t^2 + t + 1): t * t = t + 1
    assert F4.modulus == (1, 1, 1)
    t = F4.gen
    assert F4.mul(t, t) == (1, 1)


def test_rational_sum():
    a = QQ.scalar("2/3") + QQ.scalar("1/6")
    assert a.value == Fraction(5, 6)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        F5.inv(0)
    with pytest.raises(ZeroDivisionError):
        F4.inv(F4.zero)


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatchError):
        F5.scalar(1) + F7.scalar(1)


def test_field_identity_includes_modulus():
    other = GF(2, 2, (1, 1, 1))
    assert other == F4
    f16a = GF(2, 4)
    f16b = GF(2, 4, (1, 0, 0, 1, 1))
    assert f16a.modulus != f16b.modulus and f16a != f16b


def test_bad_moduli_rejected():
    with pytest.raises(ValueError):
        GF(2, 2, (1, 0, 1))  # t^2 + 1 = (t+1)^2 over F_2
    with pytest.raises(ValueError):
        GF(4)
    with pytest.raises(ValueError):
        Field(0, 2)


def test_default_modulus_is_irreducible():
    for p, m in [(2, 2), (2, 3), (2, 4), (3, 2), (5, 2)]:
        mod = default_modulus(p, m)
        assert len(mod) == m + 1 and mod[-1] == 1
        assert poly_is_irreducible(list(mod), p)


# -- algebraic laws, randomized over each supported field --------------------


@pytest.mark.parametrize("field", ALL_FIELDS, ids=str)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_inverse_and_negation(field, data):
    a = data.draw(elements_strategy(field))
    assert field.add(a, field.neg(a)) == field.zero
    if not field.is_zero(a):
        assert field.mul(a, field.inv(a)) == field.one


@pytest.mark.parametrize("field", ALL_FIELDS, ids=str)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_ring_laws(field, data):
    a = data.draw(elements_strategy(field))
    b = data.draw(elements_strategy(field))
    c = data.draw(elements_strategy(field))
    assert field.add(a, b) == field.add(b, a)
    assert field.mul(a, b) == field.mul(b, a)
    assert field.mul(a, field.add(b, c)) == field.add(field.mul(a, b), field.mul(a, c))
    assert field.sub(a, b) == field.add(a, field.neg(b))


@pytest.mark.parametrize("field", ALL_FIELDS, ids=str)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_text_round_trip(field, data):
    a = data.draw(elements_strategy(field))
    assert field.parse(field.format(a)) == a


def test_extension_multiplication_against_polynomial_oracle():
    # brute-force oracle: multiply as polynomials, reduce by trial subtraction
    from nilca.fields import poly_mod, poly_mul

    for field in (F4, F9, GF(2, 3)):
        p, m = field.p, field.m
        for i in range(field.order):
            for j in range(field.order):
                a = field.element_from_index(i)
                b = field.element_from_index(j)
                raw = poly_mod(poly_mul(list(a), list(b), p), list(field.modulus), p)
                expect = tuple(raw) + (0,) * (m - len(raw))
                assert field.mul(a, b) == expect


def test_frobenius_is_field_automorphism():
    for field in (F4, F9):
        for i in range(field.order):
            a = field.element_from_index(i)
            for j in range(field.order):
                b = field.element_from_index(j)
                assert field.frobenius(field.add(a, b)) == field.add(
                    field.frobenius(a), field.frobenius(b)
                )
                assert field.frobenius(field.mul(a, b)) == field.mul(
                    field.frobenius(a), field.frobenius(b)
                )


# -- embeddings ---------------------------------------------------------------


def test_prime_subfield_embedding():
    e = find_embedding(F2, F4)
    assert e.apply(1) == F4.one
    assert e.apply(0) == F4.zero


def test_extension_embedding_is_homomorphism():
    F16 = GF(2, 4)
    e = find_embedding(F4, F16)
    for i in range(4):
        for j in range(4):
            a, b = F4.element_from_index(i), F4.element_from_index(j)
            assert e.apply(F4.mul(a, b)) == F16.mul(e.apply(a), e.apply(b))
            assert e.apply(F4.add(a, b)) == F16.add(e.apply(a), e.apply(b))


def test_embedding_rejects_bad_generator_image():
    F16 = GF(2, 4)
    with pytest.raises(EmbeddingError):
        FieldEmbedding(F4, F16, F16.one)  # 1 is not a root of t^2+t+1


def test_no_embedding_when_degree_does_not_divide():
    with pytest.raises(EmbeddingError):
        find_embedding(F4, GF(2, 3))
    with pytest.raises(EmbeddingError):
        find_embedding(F2, F9)


def test_embedding_composition():
    F16 = GF(2, 4)
    e1 = find_embedding(F2, F4)
    e2 = find_embedding(F4, F16)
    comp = e1.compose(e2)
    assert comp.small == F2 and comp.big == F16
    assert comp.apply(1) == F16.one


def test_scalar_operators():
    s = F7.scalar(3)
    assert (s / F7.scalar(5)).value == F7.mul(3, F7.inv(5))
    assert (-s).value == 4
    assert s.inverse().value == 5  # 3 * 5 = 15 = 1 mod 7
    assert str(F4.scalar(F4.gen)) == "[0,1]"
