import pytest

from homascend.core.config import settings
from homascend.core.errors import HypothesisViolation
from homascend.core.fields import QQ, PrimeField
from homascend.core.linalg import Mat, span_basis
from homascend.services.algebra_service import (
    algebra_from_presentation,
    algebra_map_from_images,
    field_algebra,
    identity_map,
    quotient_algebra,
)
from homascend.services.ascent_service import (
    Condition,
    compatibility_report,
    compatible_structure,
    is_compatible_extension,
    lemma112_property,
    prop110_retraction,
    prop16_check,
    retract_to_structure,
    ring_retract,
    short_exact_from_submodule,
    structure_to_retract,
    vmax,
)
from homascend.services.module_service import (
    annihilates,
    cyclic_module,
    direct_sum,
    generated_submodule,
    radical_module,
    regular_module,
    residue_module,
    restrict,
)


def _core(report):
    return [report.conditions[c] for c in (Condition.COMPATIBLE, Condition.IOTA, Condition.EPSILON)]


def test_regular_module_has_no_structure_along_surjection(surjection):
    report = compatibility_report(surjection, regular_module(surjection.source))
    assert _core(report) == [False, False, False]
    assert "structure" not in report.witnesses


def test_killed_modules_have_structure(surjection):
    R = surjection.source
    for M in (residue_module(R), cyclic_module(R, [R.element("x^2")])):
        report = compatibility_report(surjection, M)
        assert _core(report) == [True, True, True]
        N = report.witnesses["structure"]
        assert is_compatible_extension(surjection, M, N)


def test_compatible_structure_is_unique(surjection):
    R = surjection.source
    M = cyclic_module(R, [R.element("x^2")])
    N = compatible_structure(surjection, M)
    assert compatible_structure(surjection, M, other=N) is not None


def test_flat_map_reports_ext_conditions(truncated):
    A = truncated(3)
    report = compatibility_report(identity_map(A), residue_module(A), L=3)
    assert _core(report) == [True, True, True]
    assert [report.conditions[Condition.ext(i)] for i in (1, 2, 3)] == [True, True, True]


def test_non_flat_map_skips_ext(surjection):
    report = compatibility_report(surjection, residue_module(surjection.source), L=2)
    assert Condition.ext(1) not in report.conditions
    assert any("not flat" in note for note in report.notes)


def test_vmax_of_stable_submodules(surjection):
    S = surjection.target
    N = regular_module(S)
    assert vmax(surjection, N, S.radical).dim == 1
    assert vmax(surjection, N, Mat.zeros(QQ, S.dim, 0)).dim == 0
    assert vmax(surjection, N, Mat.identity(QQ, S.dim)).dim == S.dim


def test_vmax_rejects_unstable_subspace(surjection):
    S = surjection.target
    with pytest.raises(HypothesisViolation):
        vmax(surjection, regular_module(S), Mat.from_columns(QQ, S.dim, [S.unit]))


def test_vmax_inside_a_sum(surjection):
    S = surjection.target
    N = direct_sum(regular_module(S), residue_module(S))
    M = Mat.from_columns(QQ, N.dim, [(0, 1, 0), (0, 0, 1)])
    assert vmax(surjection, N, M).dim == 2


def test_hom_into_vmax(surjection):
    S = surjection.target
    assert prop16_check(surjection, residue_module(S), regular_module(S), S.radical)


def test_bijective_map_is_its_own_retract(truncated):
    A = truncated(3)
    result = ring_retract(identity_map(A))
    assert result.exists
    assert result.method == "inverse"


def test_retract_of_residue_extension():
    # k → k[x]/(x^2) splits by x ↦ 0
    for field in (QQ, PrimeField(2)):
        k = field_algebra(field)
        B = algebra_from_presentation(field, ["x"], [], 2, name="B")
        phi = algebra_map_from_images(k, B, [])
        result = ring_retract(phi)
        assert result.exists
        assert (result.psi.matrix @ phi.matrix).is_identity()


def test_no_retract_of_frobenius_over_gf2(gf2):
    R = algebra_from_presentation(gf2, ["y"], [], 2, name="R")
    S = algebra_from_presentation(gf2, ["x"], [], 4, name="S")
    result = ring_retract(algebra_map_from_images(R, S, ["x^2"]))
    assert result.status == "none"
    assert result.method == "exhaustive"


def test_no_retract_of_surjection(surjection):
    assert ring_retract(surjection).exists is False


def test_exhaustive_retract_search_is_capped_by_candidate_count(gf2, monkeypatch):
    R = algebra_from_presentation(gf2, ["y"], [], 2, name="R")
    S = algebra_from_presentation(gf2, ["x"], [], 4, name="S")
    phi = algebra_map_from_images(R, S, ["x^2"])
    monkeypatch.setattr(settings, "EXHAUSTIVE_LIMIT", 1)
    capped = ring_retract(phi)
    assert (capped.status, capped.method) == ("undecided", "search-bound")
    assert capped.exists is None
    monkeypatch.setattr(settings, "EXHAUSTIVE_LIMIT", 2)
    assert ring_retract(phi).status == "none"


def _plane_over_line():
    # k[x]/(x²) → k[x, y]/(x, y)²: any y ↦ c·x retracts
    A = algebra_from_presentation(QQ, ["x"], [], 2, name="A")
    B = algebra_from_presentation(QQ, ["x", "y"], [], 2, name="B")
    return algebra_map_from_images(A, B, ["x"])


def test_parametric_retract_family_is_specialized():
    phi = _plane_over_line()
    result = ring_retract(phi)
    assert (result.status, result.method) == ("found", "sympy")
    assert (result.psi.matrix @ phi.matrix).is_identity()


def test_parametric_family_without_a_tried_point_is_undecided(monkeypatch):
    monkeypatch.setattr(settings, "SCALAR_GRID", [])
    result = ring_retract(_plane_over_line())
    assert (result.status, result.method) == ("undecided", "sympy-parametric")


def test_retract_and_structure_correspond():
    k = field_algebra(QQ)
    B = algebra_from_presentation(QQ, ["x"], [], 2, name="B")
    phi = algebra_map_from_images(k, B, [])
    psi = ring_retract(phi).psi
    structure = retract_to_structure(phi, psi)
    assert structure_to_retract(phi, structure).matrix == psi.matrix


def test_retraction_from_free_basis(truncated):
    A = truncated(3)
    phi = identity_map(A)
    pi = prop110_retraction(phi)
    assert (pi @ phi.matrix).is_identity()


def test_retraction_needs_flatness(surjection):
    with pytest.raises(HypothesisViolation) as err:
        prop110_retraction(surjection)
    assert err.value.clause == "flat"


def test_two_out_of_three_on_sequences(truncated):
    A = truncated(3)
    M = regular_module(A)
    sub, quot, inc, proj = short_exact_from_submodule(M, A.radical)
    flags = lemma112_property(identity_map(A), sub, M, quot, inc, proj)
    assert flags == {"M_sub": True, "M": True, "M_quot": True}


def test_radical_of_planar_descends_along_quotient(planar):
    S, phi = quotient_algebra(planar, [planar.element("X")], name="S")
    report = compatibility_report(phi, radical_module(planar))
    # X acts as zero on m = (X, Y) since m² = 0
    assert _core(report) == [True, True, True]


def _surjections():
    quartic = algebra_from_presentation(QQ, ["x"], [], 4, name="R")
    planar3 = algebra_from_presentation(QQ, ["X", "Y"], [], 3, name="P3")
    cross = algebra_from_presentation(PrimeField(5), ["x", "y"], ["x*y"], 3, name="G")
    return {
        "quartic": quotient_algebra(quartic, [quartic.element("x^2")], name="S")[1],
        "planar": quotient_algebra(planar3, [planar3.element("X")], name="S")[1],
        "gf5": quotient_algebra(cross, [cross.element("y"), cross.element("x^2")], name="S")[1],
    }


@pytest.mark.slow
@pytest.mark.parametrize("case", ["quartic", "planar", "gf5"])
def test_compatibility_conditions_agree_on_random_modules(case, random_module):
    phi = _surjections()[case]
    R = phi.source
    kernel = phi.kernel()
    assert _core(compatibility_report(phi, residue_module(R))) == [True, True, True]
    assert _core(compatibility_report(phi, regular_module(R))) == [False, False, False]
    for _ in range(25):
        M = random_module(R)
        core = _core(compatibility_report(phi, M))
        assert len(set(core)) == 1
        # along a surjection the structure exists exactly when ker φ kills M
        assert core[0] == annihilates(M, kernel)


@pytest.mark.slow
def test_vmax_computations_agree_on_random_submodules(rng):
    count = 0
    for phi in _surjections().values():
        S = phi.target
        targets = [
            regular_module(S),
            direct_sum(regular_module(S), residue_module(S)),
            direct_sum(regular_module(S), regular_module(S)),
        ]
        for _ in range(20):
            N = rng.choice(targets)
            vectors = [tuple(S.field.random_element(rng, bound=3) for _ in range(N.dim)) for _ in range(rng.randint(1, 2))]
            M = generated_submodule(restrict(phi, N), vectors)
            V = vmax(phi, N, M)
            assert span_basis(S.field, N.dim, M.columns() + V.basis.columns()).cols == M.cols
            # R-submodules along a surjection are already S-submodules
            assert V.dim == M.cols
            assert vmax(phi, N, V.basis).dim == V.dim
            count += 1
    assert count >= 50
