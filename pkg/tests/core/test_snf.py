from itertools import permutations

import pytest

from homascend.core.fields import QQ, PrimeField
from homascend.core.polynomials import Poly, PolyMat
from homascend.core.snf import snf_localized


def _x(*coeffs):
    return Poly(QQ, coeffs)


def _check_smith(A, result):
    D = result.U @ A @ result.V
    assert D == result.D
    assert D.is_diagonal()
    assert result.U.evaluate(0).det() != 0
    assert result.V.evaluate(0).det() != 0
    for t, (e, u) in enumerate(zip(result.exponents, result.units)):
        assert D[t, t] == Poly.monomial(A.field, e) * u
        assert u.is_unit_local()
    assert list(result.exponents) == sorted(result.exponents)
    for t in range(result.rank, min(A.rows, A.cols)):
        assert not D[t, t]
    assert result.free_defect == A.cols - result.rank


def test_single_x():
    A = PolyMat(QQ, 1, 1, [[_x(0, 1)]])
    result = snf_localized(A)
    assert result.exponents == (1,)
    assert result.free_defect == 0
    _check_smith(A, result)


def test_identity_has_trivial_cokernel():
    A = PolyMat.identity(QQ, 3)
    result = snf_localized(A)
    assert result.exponents == (0, 0, 0)
    assert result.free_defect == 0


def test_rank_one_matrix():
    A = PolyMat(QQ, 2, 2, [[_x(0, 1), _x(0, 0, 1)], [_x(0, 0, 1), _x(0, 0, 0, 1)]])
    result = snf_localized(A)
    assert result.exponents == (1,)
    assert result.free_defect == 1
    _check_smith(A, result)


def test_units_are_absorbed():
    # 1 + x is a unit of k[x]_(x)
    A = PolyMat(QQ, 1, 2, [[_x(0, 1, 1), _x(0, 0, 1)]])
    result = snf_localized(A)
    assert result.exponents == (1,)
    _check_smith(A, result)


@pytest.mark.parametrize("field", [QQ, PrimeField(3)])
def test_random_matrices(field, rng):
    for _ in range(30):
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        entries = [
            [Poly(field, [field.random_element(rng, bound=2) for _ in range(rng.randint(0, 5))]) for _ in range(cols)]
            for _ in range(rows)
        ]
        A = PolyMat(field, rows, cols, entries)
        _check_smith(A, snf_localized(A))


def _det(A):
    n = A.rows
    total = Poly(A.field)
    for perm in permutations(range(n)):
        sign = (-1) ** sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = Poly.const(A.field, A.field.one)
        for i, j in enumerate(perm):
            term = term * A[i, j]
        total = total + term if sign > 0 else total - term
    return total


@pytest.mark.slow
@pytest.mark.parametrize("field", [QQ, PrimeField(3)])
def test_square_matrices_against_minors(field, rng):
    for _ in range(100):
        entries = [
            [Poly(field, [field.random_element(rng, bound=3) for _ in range(rng.randint(0, 5))]) for _ in range(4)]
            for _ in range(4)
        ]
        A = PolyMat(field, 4, 4, entries)
        result = snf_localized(A)
        _check_smith(A, result)
        valuations = [A[i, j].valuation for i in range(4) for j in range(4) if A[i, j]]
        if valuations:
            # the first invariant factor is the gcd of the 1×1 minors
            assert result.exponents[0] == min(valuations)
        det = _det(A)
        if det:
            assert result.rank == 4
            assert sum(result.exponents) == det.valuation
        else:
            assert result.rank < 4
