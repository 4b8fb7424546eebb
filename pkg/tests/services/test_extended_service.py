import pytest

from homascend.core.errors import BoundsExceeded, HypothesisViolation, ResourceLimitExceeded
from homascend.core.fields import PrimeField
from homascend.services.algebra_service import algebra_from_presentation, algebra_map_from_images, field_algebra
from homascend.services import decomposition
from homascend.services.decomposition import IsoResult, is_isomorphic
from homascend.services.extended_service import (
    brute_force_extended,
    example37_extension,
    example37_module,
    finite_extension,
    guralnick_levels,
    is_extended,
    matrix_equiv_1x1,
    prop32_finite,
    restricted_base_change_is_power,
    separability_idempotent,
    summand_of_extended,
    two_of_three_sum,
    witness_for,
)
from homascend.services.module_service import (
    base_change,
    direct_sum,
    regular_module,
    residue_module,
    zero_module,
)

RATIONAL = [0, 1, -2]
GAUSSIAN = ["i", "1+i"]


@pytest.fixture(scope="module")
def gaussian():
    return example37_extension()


def _extended_witness(E, M):
    return witness_for(E, M, base_change(E.phi, M).module)


@pytest.mark.parametrize("c", RATIONAL + GAUSSIAN)
def test_linear_quotients(gaussian, c):
    N = example37_module(gaussian, c)
    assert N.dim == 4
    witness = is_extended(gaussian, N)
    assert (witness is not None) == (c in RATIONAL)
    assert matrix_equiv_1x1(gaussian, c).equivalent == (c in RATIONAL)
    if witness is not None:
        assert witness.module.dim == 2


@pytest.mark.slow
@pytest.mark.parametrize("c", RATIONAL + GAUSSIAN)
def test_brute_force_agrees(gaussian, c):
    N = example37_module(gaussian, c)
    assert (brute_force_extended(gaussian, N) is None) == (is_extended(gaussian, N) is None)


def test_brute_force_respects_dimension_cap(gaussian):
    N = direct_sum(*[regular_module(gaussian.target)] * 2)
    with pytest.raises(BoundsExceeded):
        brute_force_extended(gaussian, N)


def test_matrix_equivalence_factorization(gaussian):
    result = matrix_equiv_1x1(gaussian, -2)
    assert result.entry == gaussian.source.element("X - 2*Y")


def test_zero_and_residue_modules(gaussian):
    assert is_extended(gaussian, zero_module(gaussian.target)) is not None
    assert is_extended(gaussian, residue_module(gaussian.target)) is not None


def test_restricted_base_change_is_power(gaussian):
    R = gaussian.source
    for M in (residue_module(R), regular_module(R)):
        assert restricted_base_change_is_power(gaussian, M)


@pytest.fixture(scope="module")
def frobenius():
    """GF(2)[y]/(y²) → GF(2)[x]/(x⁴), y ↦ x², free of rank 2."""
    F = PrimeField(2)
    R = algebra_from_presentation(F, ["y"], [], 2, name="R")
    S = algebra_from_presentation(F, ["x"], [], 4, name="S")
    return finite_extension(algebra_map_from_images(R, S, ["x^2"], name="frobenius"))


@pytest.mark.slow
@pytest.mark.parametrize("which", ["gaussian", "frobenius"])
def test_restricted_base_change_is_power_on_random_modules(which, request, random_module):
    E = request.getfixturevalue(which)
    R = E.source
    k, A = residue_module(R), regular_module(R)
    for M in (k, A, direct_sum(k, A)):
        assert restricted_base_change_is_power(E, M)
    for _ in range(20):
        assert restricted_base_change_is_power(E, random_module(R))


def test_separability_idempotent(gaussian):
    sep = separability_idempotent(gaussian)
    assert sep is not None
    assert sep.unique
    assert len(sep.lifted) == gaussian.target.dim ** 2


def test_inseparable_extension_has_no_idempotent():
    for p in (2, 3):
        F = PrimeField(p)
        S = algebra_from_presentation(F, ["x"], [], p, name="S")
        E = finite_extension(algebra_map_from_images(field_algebra(F), S, []))
        assert E.rank == p
        assert separability_idempotent(E) is None
        with pytest.raises(HypothesisViolation):
            summand_of_extended(E, regular_module(S))


@pytest.mark.parametrize("c", GAUSSIAN)
def test_every_module_is_a_summand_of_an_extended_one(gaussian, c):
    N = example37_module(gaussian, c)
    split = summand_of_extended(gaussian, N)
    assert (split.pi @ split.j).is_identity()
    assert split.change.module.dim == gaussian.rank * N.dim


def test_two_of_three(gaussian):
    R = gaussian.source
    M1, M2 = residue_module(R), regular_module(R)
    w1, w2 = _extended_witness(gaussian, M1), _extended_witness(gaussian, M2)
    N1, N2 = w1.target, w2.target

    total = two_of_three_sum(gaussian, N1, N2, w1=w1, w2=w2)
    assert total.derived == "N"

    w_sum = witness_for(gaussian, direct_sum(M1, M2), direct_sum(N1, N2))
    derived = two_of_three_sum(gaussian, N1, N2, w1=w1, w=w_sum)
    assert derived.derived == "N2"
    assert is_isomorphic(derived.witness.module, M2)

    with pytest.raises(HypothesisViolation):
        two_of_three_sum(gaussian, N1, N2, w1=w1)


def test_guralnick_levels(planar):
    k, A = residue_module(planar), regular_module(planar)
    assert guralnick_levels(k, direct_sum(A, k)) == {1: True, 2: True}
    assert guralnick_levels(A, direct_sum(k, k, k)) == {1: True, 2: False}
    with pytest.raises(BoundsExceeded):
        guralnick_levels(k, k, levels=3)


def test_split_extension_descends(gaussian):
    k = residue_module(gaussian.source)
    w = _extended_witness(gaussian, k)
    result = prop32_finite(gaussian, 1, w1=w, w2=w)
    assert result.status == "extended"
    assert result.details["beta_iso"]
    assert result.witness.module.dim == 2


def test_kernel_and_cokernel_descend(gaussian):
    R = gaussian.source
    w = _extended_witness(gaussian, regular_module(R))
    N = w.target
    g = N.act(gaussian.target.generators[1])
    kernel = prop32_finite(gaussian, 2, w=w, w2=w, g=g)
    assert kernel.status == "extended"
    assert kernel.details["dim"] == 4
    cokernel = prop32_finite(gaussian, 3, w=w, w2=w, g=g)
    assert cokernel.status == "extended"
    assert cokernel.details["dim"] == 4


def test_unknown_descent_case(gaussian):
    with pytest.raises(BoundsExceeded):
        prop32_finite(gaussian, 4)


@pytest.mark.slow
def test_two_of_three_on_random_modules(gaussian, random_module):
    R = gaussian.source
    for _ in range(8):
        M1, M2 = random_module(R), random_module(R)
        w1, w2 = _extended_witness(gaussian, M1), _extended_witness(gaussian, M2)
        N1, N2 = w1.target, w2.target
        w = witness_for(gaussian, direct_sum(M1, M2), direct_sum(N1, N2))
        assert w is not None

        total = two_of_three_sum(gaussian, N1, N2, w1=w1, w2=w2)
        assert total.derived == "N" and total.witness.module.dim == M1.dim + M2.dim
        second = two_of_three_sum(gaussian, N1, N2, w1=w1, w=w)
        assert second.derived == "N2" and is_isomorphic(second.witness.module, M2)
        first = two_of_three_sum(gaussian, N1, N2, w2=w2, w=w)
        assert first.derived == "N1" and is_isomorphic(first.witness.module, M1)


def test_sum_with_a_non_extended_module_is_not_extended(gaussian):
    S = gaussian.target
    N = direct_sum(regular_module(S), example37_module(gaussian, "i"))
    assert is_extended(gaussian, N) is None
    assert is_extended(gaussian, direct_sum(regular_module(S), example37_module(gaussian, -2))) is not None


def test_sampled_negative_is_not_a_decision(gaussian, monkeypatch):
    k = residue_module(gaussian.source)
    kS = base_change(gaussian.phi, k).module
    monkeypatch.setattr(
        decomposition, "is_isomorphic", lambda M, N, seed=None, token=None: IsoResult(False, exact=False, reason="random-trials")
    )
    with pytest.raises(ResourceLimitExceeded):
        witness_for(gaussian, k, kS)
    with pytest.raises(ResourceLimitExceeded):
        restricted_base_change_is_power(gaussian, k)
    with pytest.raises(ResourceLimitExceeded):
        is_extended(gaussian, direct_sum(kS, kS))
