import pytest

from homascend.core.fields import PrimeField
from homascend.core.linalg import Mat
from homascend.services.algebra_service import algebra_from_presentation
from homascend.services.decomposition import (
    Certificate,
    complement_pieces,
    divides,
    is_indecomposable,
    is_isomorphic,
    krs_decompose,
    match_multisets,
    verify_isomorphism,
)
from homascend.services.module_service import (
    cyclic_module,
    direct_sum,
    free_module,
    module_from_generator_actions,
    permuted,
    radical_module,
    regular_module,
    residue_module,
    zero_module,
)


def test_isomorphic_to_itself(planar):
    M = direct_sum(regular_module(planar), residue_module(planar))
    result = is_isomorphic(M, M)
    assert result
    assert verify_isomorphism(M, M, result.witness)


def test_semisimple_versus_dual_numbers(truncated):
    D = truncated(2)
    k = residue_module(D)
    result = is_isomorphic(direct_sum(k, k), regular_module(D))
    assert not result
    assert result.exact


def test_zero_modules_are_isomorphic(planar):
    assert is_isomorphic(zero_module(planar), zero_module(planar))


def test_permuted_copies(planar, rng):
    M = direct_sum(regular_module(planar), residue_module(planar))
    for _ in range(5):
        perm = list(range(M.dim))
        rng.shuffle(perm)
        P = permuted(M, perm)
        result = is_isomorphic(M, P)
        assert result
        assert verify_isomorphism(M, P, result.witness)


def test_krs_of_regular_plus_residue(planar):
    M = direct_sum(regular_module(planar), residue_module(planar))
    decomposition = krs_decompose(M)
    assert decomposition.dims == (1, 3)
    assert decomposition.iso.is_invertible()
    assert is_isomorphic(decomposition.pieces[0], residue_module(planar))
    assert is_isomorphic(decomposition.pieces[1], regular_module(planar))


def test_krs_of_radical(planar):
    assert krs_decompose(radical_module(planar)).dims == (1, 1)


def test_krs_of_free_module(planar):
    decomposition = krs_decompose(free_module(planar, 3))
    assert decomposition.dims == (3, 3, 3)
    assert all(c == Certificate.SIMPLE_TOP for c in decomposition.certificates)


def test_krs_is_idempotent(planar):
    M = direct_sum(regular_module(planar), residue_module(planar), radical_module(planar))
    for piece in krs_decompose(M).pieces:
        again = krs_decompose(piece)
        assert again.dims == (piece.dim,)


def test_krs_multiset_survives_permutation(truncated, rng):
    A = truncated(3)
    M = direct_sum(regular_module(A), cyclic_module(A, [A.element("x^2")]), residue_module(A))
    reference = krs_decompose(M).pieces
    for _ in range(10):
        perm = list(range(M.dim))
        rng.shuffle(perm)
        pieces = krs_decompose(permuted(M, perm)).pieces
        assert len(pieces) == len(reference)
        _, left, right = match_multisets(reference, pieces)
        assert not left and not right


def test_indecomposability_certificates(planar, truncated):
    assert is_indecomposable(regular_module(planar)).certificate == Certificate.SIMPLE_TOP
    assert not is_indecomposable(zero_module(planar))
    k = residue_module(truncated(2))
    split = is_indecomposable(direct_sum(k, k))
    assert not split
    assert split.certificate == Certificate.SPLIT


def test_exhaustive_idempotent_search_over_gf2():
    # string module e1 -x-> f1 <-y- e2 -x-> f2: top and socle both two-dimensional
    F = PrimeField(2)
    A = algebra_from_presentation(F, ["x", "y"], [], 2)
    X = Mat(F, [[0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0]])
    Y = Mat(F, [[0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0]])
    M = module_from_generator_actions(A, [X, Y], 4)
    result = is_indecomposable(M)
    assert result.indecomposable
    assert result.certificate == Certificate.EXHAUSTIVE_IDEMPOTENTS


def test_divides_and_complement(planar):
    k = residue_module(planar)
    A = regular_module(planar)
    M = direct_sum(A, k, k)
    assert divides(k, M)
    assert divides(direct_sum(A, k), M)
    assert not divides(direct_sum(A, A), M)
    rest = complement_pieces(direct_sum(A, k), M)
    assert [P.dim for P in rest] == [1]
