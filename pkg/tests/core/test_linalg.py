from fractions import Fraction

import pytest

from homascend.core.errors import FieldArithmeticError, InvariantViolation
from homascend.core.fields import QQ, PrimeField
from homascend.core.linalg import Mat, QuotientMap, in_span, intersect, span_basis


def _random_mat(field, rng, rows, cols):
    return Mat(field, [[field.random_element(rng, bound=3) for _ in range(cols)] for _ in range(rows)])


def test_rref_identity():
    I = Mat.identity(QQ, 3)
    R, pivots, rank = I.rref()
    assert R == I
    assert pivots == [0, 1, 2]
    assert rank == 3


def test_rref_zero():
    Z = Mat.zeros(QQ, 2, 4)
    R, pivots, rank = Z.rref()
    assert R.is_zero()
    assert pivots == []
    assert rank == 0


def test_rref_dependent_rows():
    A = Mat(QQ, [[1, 2], [2, 4]])
    R, pivots, rank = A.rref()
    assert R == Mat(QQ, [[1, 2], [0, 0]])
    assert rank == 1


def test_kernel_examples():
    assert Mat.identity(QQ, 3).kernel().cols == 0
    assert Mat.zeros(QQ, 3, 3).kernel().rank() == 3
    K = Mat(QQ, [[1, 2], [2, 4]]).kernel()
    assert K.cols == 1
    v = K.column(0)
    assert v[0] * Fraction(-1) == v[1] * 2


def test_zero_row_matrix_kernel_is_everything():
    K = Mat.zeros(QQ, 0, 3).kernel()
    assert K.cols == 3


@pytest.mark.parametrize("field", [QQ, PrimeField(3)])
def test_rank_nullity_and_transpose(field, rng):
    for _ in range(25):
        A = _random_mat(field, rng, rng.randint(1, 5), rng.randint(1, 5))
        R, _, rank = A.rref()
        assert R.rref()[0] == R
        assert rank == A.T.rank()
        K = A.kernel()
        assert K.cols + rank == A.cols
        assert (A @ K).is_zero()


def test_solve_and_inverse(rng):
    A = Mat(QQ, [[2, 1], [1, 1]])
    assert A.solve([3, 2]) == (Fraction(1), Fraction(1))
    assert (A @ A.inverse()).is_identity()
    assert A.det() == 1
    assert Mat(QQ, [[1, 1], [1, 1]]).solve([1, 0]) is None
    with pytest.raises(FieldArithmeticError):
        Mat(QQ, [[1, 1], [1, 1]]).inverse()


def test_shape_mismatch_is_rejected():
    with pytest.raises(InvariantViolation):
        Mat(QQ, [[1, 2], [3]])
    with pytest.raises(InvariantViolation):
        Mat.from_flat(QQ, 2, 2, [1, 2, 3])


def test_kron_indexing():
    A = Mat(QQ, [[1, 2], [3, 4]])
    B = Mat(QQ, [[0, 1], [1, 0]])
    C = A.kron(B)
    assert (C.rows, C.cols) == (4, 4)
    assert C[1 * 2 + 0, 0 * 2 + 1] == A[1, 0] * B[0, 1]


def test_span_helpers():
    basis = span_basis(QQ, 3, [(1, 0, 0), (2, 0, 0), (0, 1, 0)])
    assert basis.cols == 2
    assert in_span(basis, (3, 5, 0))
    assert not in_span(basis, (0, 0, 1))
    other = span_basis(QQ, 3, [(0, 1, 0), (0, 0, 1)])
    assert intersect(basis, other).cols == 1


def test_quotient_map():
    q = QuotientMap(QQ, 3, [(1, 1, 0)])
    assert q.dim == 2
    assert (q.project @ q.lift).is_identity()
    assert q.project.apply((1, 1, 0)) == (QQ.zero, QQ.zero)
