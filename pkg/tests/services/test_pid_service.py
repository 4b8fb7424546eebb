import pytest

from homascend.core.errors import HypothesisViolation, InsufficientPrecisionError, InvariantViolation
from homascend.core.fields import QQ
from homascend.core.polynomials import Poly
from homascend.services.ascent_service import Condition
from homascend.services.pid_service import (
    PIDElement,
    PIDModule,
    Side,
    base_change_pid,
    classify,
    classify_jordan,
    completion_ascent,
    ext_pid,
    ext_pid_truncated,
    extend_pid,
    jordan_matrix,
    middle_formula,
    presentation_of_pid,
    prop32_case1_pid,
    thm113_decision,
    vmax_pid,
)


def _random_pid(rng, max_free=2, max_summands=3, max_exp=4):
    return PIDModule(
        rng.randint(0, max_free),
        tuple(rng.randint(1, max_exp) for _ in range(rng.randint(0, max_summands))),
    )


def test_regular_element_ext():
    quotient, R = PIDModule(0, (1,)), PIDModule(1)
    assert ext_pid(quotient, R, 0).is_zero
    assert ext_pid(quotient, R, 1) == PIDModule(0, (1,))
    assert ext_pid(quotient, R, 2).is_zero


def test_exponents_are_sorted():
    assert PIDModule(0, (3, 1, 2)).exponents == (1, 2, 3)
    assert (PIDModule(1, (2,)) + PIDModule(0, (1,))).invariants == (1, (1, 2))


def test_invalid_invariants():
    with pytest.raises(InvariantViolation):
        PIDModule(-1)
    with pytest.raises(InvariantViolation):
        PIDModule(0, (0,))
    with pytest.raises(InvariantViolation):
        PIDModule(0, side=Side.OVER_R) + PIDModule(0, side=Side.OVER_S)


def test_format():
    assert PIDModule(2, (1, 3)).format() == "R^2 ⊕ R/(x^1) ⊕ R/(x^3)"
    assert PIDModule(0).format() == "0"


def test_presentation_round_trip(rng):
    for _ in range(20):
        M = _random_pid(rng)
        assert classify(presentation_of_pid(M)) == M


def test_jordan_round_trip(rng):
    for _ in range(20):
        M = PIDModule(0, _random_pid(rng).exponents)
        assert classify_jordan(jordan_matrix(M)) == M


def test_jordan_matrix_needs_torsion():
    with pytest.raises(HypothesisViolation):
        jordan_matrix(PIDModule(1))


def test_completion_ascent_matches_prime_decision(rng):
    for _ in range(100):
        M = _random_pid(rng)
        report = completion_ascent(M)
        decision = thm113_decision(M)
        assert report.conditions[Condition.COMPATIBLE] == decision.decision == M.is_torsion
        assert report.provenance[Condition.ext(1)] == "asserted-by-theorem"


def test_prime_decision_lists_minimal_primes():
    assert thm113_decision(PIDModule(1, (2,))).minimal_primes == ("(0)",)
    assert thm113_decision(PIDModule(0, (2,))).minimal_primes == ("(x)",)
    assert thm113_decision(PIDModule(0)).minimal_primes == ()
    assert thm113_decision(PIDModule(0)).decision


def test_completion_ascent_needs_r_module():
    with pytest.raises(HypothesisViolation):
        completion_ascent(PIDModule(1, side=Side.OVER_S))


def test_every_completed_module_is_extended(rng):
    for _ in range(20):
        M = _random_pid(rng)
        N = base_change_pid(M)
        assert N.side == Side.OVER_S
        assert extend_pid(N) == M


def test_ext_vanishes_above_one(rng):
    for _ in range(10):
        assert ext_pid(_random_pid(rng), _random_pid(rng), 2).is_zero


def test_ext_of_free_modules():
    assert ext_pid(PIDModule(2), PIDModule(3), 0) == PIDModule(6)
    assert ext_pid(PIDModule(2), PIDModule(3), 1).is_zero
    assert ext_pid(PIDModule(1), PIDModule(0, (2,)), 0) == PIDModule(0, (2,))


@pytest.mark.parametrize("i", [0, 1])
def test_truncated_ext_matches_model(i):
    for a, b in [((1,), (1,)), ((2,), (1, 3)), ((1, 2), (2,))]:
        M, N = PIDModule(0, a), PIDModule(0, b)
        assert ext_pid_truncated(M, N, i) == sum(ext_pid(M, N, i).exponents)


def test_truncated_ext_precision_guard():
    with pytest.raises(InsufficientPrecisionError):
        ext_pid_truncated(PIDModule(0, (2,)), PIDModule(0, (3,)), 1, precision=4)


def test_extensions_of_cyclic_modules():
    for a in range(1, 6):
        for b in range(1, 7 - a):
            for c in list(range(0, min(a, b) + 1)) + [None]:
                result = prop32_case1_pid(PIDModule(0, (a,)), PIDModule(0, (b,)), c)
                expected = middle_formula(a, b, min(a, b) if c is None else c)
                assert result.middle == expected == result.oracle
                assert result.witness == result.middle
                assert result.base_changed.side == Side.OVER_S


def test_extension_needs_torsion():
    with pytest.raises(HypothesisViolation):
        prop32_case1_pid(PIDModule(1), PIDModule(0, (1,)))


def test_vmax_of_torsion_generator():
    N = PIDModule(0, (3,), Side.OVER_S)
    x = Poly(QQ, (0, 1))
    assert vmax_pid(N, [PIDElement((), (x,))], precision=6) == PIDModule(0, (2,), Side.OVER_S)


def test_vmax_keeps_only_torsion():
    N = PIDModule(1, (2,), Side.OVER_S)
    one, zero, x = Poly(QQ, (1,)), Poly(QQ), Poly(QQ, (0, 1))
    both = [PIDElement((one,), (zero,)), PIDElement((zero,), (one,))]
    assert vmax_pid(N, both, precision=6) == PIDModule(0, (2,), Side.OVER_S)
    mixed = [PIDElement((x,), (one,))]
    assert vmax_pid(N, mixed, precision=6).is_zero


def test_vmax_of_the_unit_in_a_free_module():
    # M = R·1 inside S: no nonzero S-submodule fits in M
    N = PIDModule(1, (), Side.OVER_S)
    one = Poly(QQ, (1,))
    assert vmax_pid(N, [PIDElement((one,), ())]) == PIDModule(0, (), Side.OVER_S)
    assert vmax_pid(N, [PIDElement((one,), ())], precision=2).is_zero


def test_vmax_needs_s_module():
    with pytest.raises(HypothesisViolation):
        vmax_pid(PIDModule(0, (1,)), [])
