"""
Shared pytest fixtures: fields, the small local algebras the suites reuse and
a seeded random generator.
"""
import random

import pytest

from homascend.core.fields import QQ, PrimeField, SimpleExtension
from homascend.services.algebra_service import algebra_from_presentation, quotient_algebra
from homascend.services.module_service import (
    cyclic_module,
    direct_sum,
    generated_submodule,
    quotient_module,
    regular_module,
    residue_module,
    submodule,
)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def gf2():
    return PrimeField(2)


@pytest.fixture
def gf5():
    return PrimeField(5)


@pytest.fixture
def qi():
    """ℚ(i) = ℚ[i]/(i² + 1)."""
    return SimpleExtension(QQ, [1, 0, 1], gen_name="i")


@pytest.fixture
def truncated():
    """Factory for k[x]/(x^n)."""
    def make(n, field=QQ, name=None):
        return algebra_from_presentation(field, ["x"], [], n, name=name or f"k[x]/(x^{n})")
    return make


@pytest.fixture
def surjection(truncated):
    """k[x]/(x⁴) ↠ k[x]/(x²)."""
    R = truncated(4, name="R")
    S, phi = quotient_algebra(R, [R.element("x^2")], name="S")
    return phi


@pytest.fixture
def planar():
    """ℚ[X,Y]/(X,Y)²."""
    return algebra_from_presentation(QQ, ["X", "Y"], [], 2, name="R")


@pytest.fixture
def random_module(rng):
    """Factory for a random nonzero module: a cyclic quotient, or a submodule or quotient of R ⊕ R or R ⊕ k."""
    def vector(field, n):
        return tuple(field.random_element(rng, bound=3) for _ in range(n))

    def make(A):
        kind = rng.randrange(4)
        if kind == 0:
            return cyclic_module(A, [A.radical.apply(vector(A.field, A.radical.cols))])
        F = direct_sum(regular_module(A), regular_module(A) if kind < 3 else residue_module(A))
        W = generated_submodule(F, [vector(A.field, F.dim) for _ in range(rng.randint(1, 2))])
        if kind == 1 and W.cols:
            return submodule(F, W)
        if W.cols < F.dim:
            return quotient_module(F, W).module
        return residue_module(A)
    return make
