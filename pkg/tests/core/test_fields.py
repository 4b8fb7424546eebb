from fractions import Fraction

import pytest

from homascend.core.errors import FieldArithmeticError, InvariantViolation, ReducibleModulusError
from homascend.core.fields import QQ, FieldOp, PrimeField, SimpleExtension, field_arith, parse_scalar


def test_rational_addition():
    assert field_arith(Fraction(1, 3), Fraction(1, 6), FieldOp.ADD) == Fraction(1, 2)


def test_prime_field_inverse(gf5):
    assert field_arith(gf5.coerce(2), None, "inv") == 3


def test_extension_inverse(qi):
    a = qi.coerce([1, 1])
    inv = field_arith(a, None, FieldOp.INV)
    assert inv == qi.coerce([Fraction(1, 2), Fraction(-1, 2)])
    assert a * inv == qi.one


def test_division_by_zero_is_rejected(gf5, qi):
    with pytest.raises(FieldArithmeticError):
        field_arith(QQ.zero, None, "inv")
    with pytest.raises(FieldArithmeticError):
        gf5.zero.inverse()
    with pytest.raises(FieldArithmeticError):
        qi.zero.inverse()


def test_composite_modulus_is_rejected():
    with pytest.raises(InvariantViolation):
        PrimeField(4)


def test_reducible_minimal_polynomial_is_rejected():
    with pytest.raises(ReducibleModulusError):
        SimpleExtension(QQ, [-1, 0, 1])
    # x² + 1 = (x + 2)(x + 3) over GF(5)
    with pytest.raises(ReducibleModulusError):
        SimpleExtension(PrimeField(5), [1, 0, 1])


def test_irreducible_over_gf3():
    F9 = SimpleExtension(PrimeField(3), [1, 0, 1])
    assert F9.order == 9
    assert len(list(F9.elements())) == 9
    assert all(a * a.inverse() == F9.one for a in F9.elements() if a)


def test_eq_op(qi):
    assert field_arith(qi.gen * qi.gen, qi.coerce(-1), FieldOp.EQ) is True


@pytest.mark.parametrize("make", [
    lambda: QQ,
    lambda: PrimeField(7),
    lambda: SimpleExtension(QQ, [1, 0, 1], gen_name="i"),
    lambda: SimpleExtension(QQ, [-2, 0, 0, 1]),
])
def test_field_axioms_on_random_triples(make, rng):
    F = make()
    for _ in range(50):
        a, b, c = (F.random_element(rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + F.zero == a
        assert a * F.one == a
        if a:
            assert a * (F.one / a) == F.one


def test_parse_scalar(qi):
    assert parse_scalar(qi, "1+i") == qi.coerce([1, 1])
    assert parse_scalar(qi, "i^2") == qi.coerce(-1)
    assert parse_scalar(QQ, "3/4") == Fraction(3, 4)
    assert parse_scalar(PrimeField(5), "1/2") == 3
