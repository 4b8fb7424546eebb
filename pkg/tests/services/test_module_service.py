import pytest

from homascend.core.fields import QQ
from homascend.core.linalg import Mat, same_span
from homascend.services.algebra_service import algebra_tensor_extension, field_algebra, identity_map
from homascend.services.decomposition import is_isomorphic
from homascend.services.module_service import (
    ann_supp,
    base_change,
    cyclic_module,
    direct_sum,
    ext_dim,
    ext_dims,
    free_module,
    hom_space,
    is_module_map,
    minimal_resolution,
    present_module,
    radical_filtration,
    radical_module,
    regular_module,
    residue_module,
    restrict,
    tensor_modules,
    zero_module,
)


@pytest.fixture
def dual(truncated):
    return truncated(2, name="D")


@pytest.fixture
def quartic(truncated):
    return truncated(4, name="R")


def test_hom_residue_into_dual_numbers(dual):
    H = hom_space(residue_module(dual), regular_module(dual))
    assert H.dim == 1
    image = H.basis[0].column(0)
    assert image[0] == 0 and image[1] != 0


def test_hom_from_regular_is_module(planar):
    M = direct_sum(residue_module(planar), regular_module(planar))
    assert hom_space(regular_module(planar), M).dim == M.dim


def test_hom_equality_along_surjection(surjection):
    S = surjection.target
    over_S = hom_space(regular_module(S), regular_module(S))
    over_R = hom_space(regular_module(S), regular_module(S), along=surjection)
    assert over_S.dim == over_R.dim == 2
    assert same_span(over_S.subspace, over_R.subspace)


def test_hom_with_zero_module(planar):
    assert hom_space(zero_module(planar), regular_module(planar)).dim == 0
    assert hom_space(regular_module(planar), zero_module(planar)).dim == 0


def test_base_change_of_regular_along_surjection(surjection):
    R, S = surjection.source, surjection.target
    bc = base_change(surjection, regular_module(R))
    assert bc.module.dim == S.dim
    assert bc.iota.rank() == S.dim


def test_base_change_collapses(surjection):
    R = surjection.source
    M = cyclic_module(R, [R.element("x^3")])
    module, iota = base_change(surjection, M)
    assert module.dim == 2
    assert iota.rank() < M.dim


def test_base_change_along_field_extension(qi):
    k = field_algebra(QQ)
    L, inclusion = algebra_tensor_extension(qi, k)
    module, iota = base_change(inclusion, free_module(k, 2))
    assert module.dim == 4
    assert iota.rank() == 2


def test_iota_is_natural(surjection):
    R = surjection.source
    M = cyclic_module(R, [R.element("x^3")])
    bc = base_change(surjection, M)
    restricted = restrict(surjection, bc.module)
    assert is_module_map(M, restricted, bc.iota)


def test_restrict_along_identity(planar):
    M = residue_module(planar)
    N = restrict(identity_map(planar), M)
    assert N.dim == M.dim
    assert all(a == b for a, b in zip(N.action, M.action))


def test_restricted_base_change_is_power(qi, planar):
    S, inclusion = algebra_tensor_extension(qi, planar)
    for M in (residue_module(planar), regular_module(planar), radical_module(planar)):
        back = restrict(inclusion, base_change(inclusion, M).module)
        assert is_isomorphic(back, direct_sum(M, M))
    assert restrict(inclusion, regular_module(S)).dim == 6


def test_resolution_of_free_module(planar):
    res = minimal_resolution(free_module(planar, 2), 2)
    assert res.betti == (2, 0, 0)
    res.verify()


def test_periodic_resolution(quartic):
    M = cyclic_module(quartic, [quartic.element("x^2")])
    res = minimal_resolution(M, 4)
    assert res.betti == (1, 1, 1, 1, 1)
    res.verify()
    assert res.is_minimal()


def test_resolution_of_residue_field(dual):
    res = minimal_resolution(residue_module(dual), 5)
    assert res.betti == (1,) * 6
    res.verify()


def test_gorenstein_ext_vanishing(truncated):
    for n in (2, 3, 4):
        A = truncated(n)
        assert ext_dims(residue_module(A), regular_module(A), 5) == (1, 0, 0, 0, 0, 0)


def test_self_ext_of_cyclic(quartic):
    M = cyclic_module(quartic, [quartic.element("x^2")])
    assert ext_dims(M, M, 4) == (2, 2, 2, 2, 2)


def test_ext_zero_is_hom(planar):
    M = present_module(planar, 2, [[planar.element("X"), planar.element("Y")]])
    N = residue_module(planar)
    assert ext_dim(M, N, 0).dim == hom_space(M, N).dim


def test_ext_representatives_have_the_right_shape(dual):
    k = residue_module(dual)
    result = ext_dim(k, k, 2)
    assert result.dim == 1
    assert all((rep.rows, rep.cols) == (k.dim, 1) for rep in result.representatives)


def test_annihilators(quartic):
    ann, supported = ann_supp(regular_module(quartic))
    assert ann.cols == 0 and supported
    assert ann_supp(residue_module(quartic))[0].cols == 3
    M = cyclic_module(quartic, [quartic.element("x^2")])
    ann = ann_supp(M)[0]
    assert same_span(ann, Mat.from_columns(QQ, 4, [quartic.element("x^2"), quartic.element("x^3")]))
    assert ann_supp(zero_module(quartic))[1] is False


def test_radical_filtrations(truncated, planar):
    assert [W.cols for W in radical_filtration(regular_module(truncated(3)))] == [3, 2, 1, 0]
    assert [W.cols for W in radical_filtration(free_module(truncated(3), 1))][-1] == 0
    k = residue_module(planar)
    assert [W.cols for W in radical_filtration(direct_sum(k, k, k))] == [3, 0]
    assert [W.cols for W in radical_filtration(regular_module(planar))] == [3, 2, 0]


def test_tensor_with_regular(planar):
    M = residue_module(planar)
    T, _ = tensor_modules(M, regular_module(planar))
    assert T.dim == M.dim
