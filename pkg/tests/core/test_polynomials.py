import pytest

from homascend.core.errors import FieldArithmeticError
from homascend.core.fields import PrimeField, SimpleExtension
from homascend.core.polynomials import Poly


@pytest.fixture
def gf4():
    """GF(4) = GF(2)[t]/(t² + t + 1)."""
    return SimpleExtension(PrimeField(2), [1, 1, 1], gen_name="t")


def _linear(field, a):
    return Poly(field, [a, field.one])


def _product(parts):
    field = parts[0][0].field
    total = Poly.const(field, field.one)
    for g, m in parts:
        total = total * g ** m
    return total


def test_multiplicity_divisible_by_characteristic(gf4):
    t, one = gf4.gen, gf4.one
    f = _linear(gf4, one) ** 2 * _linear(gf4, t) ** 3
    assert f.squarefree_decomposition() == [(_linear(gf4, one), 2), (_linear(gf4, t), 3)]


def test_pure_pth_powers(gf4):
    t = gf4.gen
    assert (_linear(gf4, t) ** 4).squarefree_decomposition() == [(_linear(gf4, t), 4)]
    # x² + t = (x + t²)² since t⁴ = t
    f = Poly(gf4, [t, gf4.zero, gf4.one])
    assert f.squarefree_decomposition() == [(_linear(gf4, t * t), 2)]


def test_parts_multiply_back(gf4, rng):
    elements = list(gf4.elements())
    for _ in range(20):
        f = Poly.const(gf4, gf4.one)
        for _ in range(rng.randint(1, 3)):
            f = f * _linear(gf4, rng.choice(elements)) ** rng.randint(1, 5)
        parts = f.squarefree_decomposition()
        assert _product(parts) == f.monic()
        assert [m for _, m in parts] == sorted({m for _, m in parts})
        for g, _ in parts:
            assert g.gcd(g.derivative()).degree == 0


def test_pth_root_needs_a_pth_power(gf4):
    with pytest.raises(FieldArithmeticError):
        _linear(gf4, gf4.gen).pth_root()
