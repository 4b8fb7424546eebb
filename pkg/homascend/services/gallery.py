"""
Counterexample Gallery.

Finite reproductions of the four examples showing that the hypotheses of the
ascent theorems cannot be dropped. Each item recomputes its values and
cross-checks the stated claims.
"""
import logging
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Dict, Optional

import sympy

from homascend.core.cancellation import CancellationToken
from homascend.core.config import settings
from homascend.core.errors import BoundsExceeded, EquivalenceViolation
from homascend.core.fields import QQ, PrimeField, SimpleExtension
from homascend.services.algebra_service import (
    algebra_from_presentation,
    algebra_map_from_images,
    algebra_tensor_extension,
    check_dagger,
    field_algebra,
    is_flat,
    quotient_algebra,
)
from homascend.services.ascent_service import ring_retract
from homascend.services.module_service import ext_dims, regular_module, residue_module, restrict
from homascend.services.pid_service import PIDModule, ext_pid

logger = logging.getLogger(__name__)

GALLERY_ITEMS = ("2.8", "2.9", "2.10", "2.11")


@dataclass
class GalleryReport:
    item: str
    params: Dict[str, Any] = dc_field(default_factory=dict)
    values: Dict[str, Any] = dc_field(default_factory=dict)
    provenance: Dict[str, str] = dc_field(default_factory=dict)

    def put(self, key: str, value: Any, provenance: str = "computed") -> None:
        self.values[key] = value
        self.provenance[key] = provenance

    def expect(self, key: str, expected: Any) -> None:
        if self.values[key] != expected:
            raise EquivalenceViolation(
                f"gallery {self.item}: {key} = {self.values[key]!r}, expected {expected!r}",
                {"item": self.item, "key": key},
            )

    def as_dict(self) -> Dict[str, Any]:
        return {"item": self.item, "params": dict(self.params), "values": dict(self.values), "provenance": dict(self.provenance)}


def _ext_vector(phi, L: int, token: Optional[CancellationToken]) -> list:
    """dim Ext^i_R(S, R) for i = 0..L."""
    S_R = restrict(phi, regular_module(phi.target))
    return list(ext_dims(S_R, regular_module(phi.source), L, token=token))


def _check_prime(p: int) -> None:
    if not sympy.isprime(p) or p > settings.GALLERY_MAX_PRIME:
        raise BoundsExceeded(f"p = {p} must be a prime ≤ {settings.GALLERY_MAX_PRIME}")


def _check_truncation(N: int) -> None:
    # N = 1 collapses R to the residue field, where a retract exists
    if not 2 <= N <= settings.GALLERY_MAX_TRUNCATION:
        raise BoundsExceeded(f"truncation N = {N} must lie in 2..{settings.GALLERY_MAX_TRUNCATION}")


# =========================================================================
# ITEMS
# =========================================================================

def gallery_field_extension(L: Optional[int] = None, token: Optional[CancellationToken] = None) -> GalleryReport:
    """ℚ → ℚ(i): free and Ext-acyclic, but the residue map is not onto and ℚ is no ring retract."""
    L = settings.EXT_RANGE if L is None else L
    K = SimpleExtension(QQ, [1, 0, 1], gen_name="i")
    R = field_algebra(QQ, name="Q")
    S, phi = algebra_tensor_extension(K, R, name="Q(i)")
    report = GalleryReport("2.8", params={"L": L})

    flat = is_flat(phi)
    dagger = check_dagger(phi)
    report.put("flat", flat.flat)
    report.put("free_rank", flat.rank)
    report.put("dagger", dagger.dagger)
    report.put("residue_iso", dagger.residue_iso)
    report.put("ext", _ext_vector(phi, L, token)[1:])
    retract = ring_retract(phi, token=token)
    report.put("retract", retract.status)
    report.put("compatible", retract.exists)

    report.expect("flat", True)
    report.expect("residue_iso", False)
    report.expect("ext", [0] * L)
    report.expect("compatible", False)
    return report


def gallery_frobenius(p: int = 2, N: int = 2, L: Optional[int] = None, token: Optional[CancellationToken] = None) -> GalleryReport:
    """GF(p)[x^p]/(x^{pN}) → GF(p)[x]/(x^{pN}): free of rank p with no ring retract."""
    _check_prime(p)
    _check_truncation(N)
    L = settings.EXT_RANGE if L is None else L
    k = PrimeField(p)
    R = algebra_from_presentation(k, ["y"], [], N, name=f"GF({p})[x^{p}]")
    S = algebra_from_presentation(k, ["x"], [], p * N, name=f"GF({p})[x]")
    phi = algebra_map_from_images(R, S, [f"x^{p}"], name="frobenius")
    report = GalleryReport("2.9", params={"p": p, "N": N, "L": L})

    flat = is_flat(phi)
    report.put("flat", flat.flat)
    report.put("free_rank", flat.rank)
    report.put("dagger", check_dagger(phi).dagger)
    report.put("ext", _ext_vector(phi, L, token)[1:])
    retract = ring_retract(phi, token=token)
    if retract.status == "undecided":
        raise BoundsExceeded(f"retract search for p = {p}, N = {N} exceeds the configured candidate limit")
    report.put("retract", retract.status)

    report.expect("flat", True)
    report.expect("free_rank", p)
    report.expect("ext", [0] * L)
    report.expect("retract", "none")
    return report


def gallery_regular_element(token: Optional[CancellationToken] = None) -> GalleryReport:
    """R → R/(x) for x regular, in the local PID model: Ext^1(R/(x), R) ≅ R/(x)."""
    report = GalleryReport("2.10", params={})
    quotient = PIDModule(0, (1,))
    R = PIDModule(1)
    for i in range(3):
        report.put(f"ext{i}", ext_pid(quotient, R, i).as_dict())
    report.expect("ext0", PIDModule(0).as_dict())
    report.expect("ext1", PIDModule(0, (1,)).as_dict())
    report.expect("ext2", PIDModule(0).as_dict())
    return report


def gallery_gorenstein(n: int = 2, L: Optional[int] = None, token: Optional[CancellationToken] = None) -> GalleryReport:
    """R = ℚ[x]/(x^n) → k: Ext^i_R(k, R) vanishes for i ≥ 1 and yet R is no retract of k."""
    _check_truncation(n)
    L = settings.EXT_RANGE if L is None else L
    R = algebra_from_presentation(QQ, ["x"], [], n, name=f"Q[x]/(x^{n})")
    k, phi = quotient_algebra(R, [R.element("x")], name="k")
    report = GalleryReport("2.11", params={"n": n, "L": L})

    report.put("ext", list(ext_dims(residue_module(R), regular_module(R), L, token=token)))
    retract = ring_retract(phi, token=token)
    report.put("retract", retract.status)
    report.put("retract_exists", retract.exists)

    report.expect("ext", [1] + [0] * L)
    report.expect("retract_exists", False)
    return report


_BUILDERS: Dict[str, Callable[..., GalleryReport]] = {
    "2.8": gallery_field_extension,
    "2.9": gallery_frobenius,
    "2.10": gallery_regular_element,
    "2.11": gallery_gorenstein,
}


def gallery(which: str, token: Optional[CancellationToken] = None, **params: Any) -> GalleryReport:
    """Run one gallery item with keyword parameters (p, N, n, L)."""
    builder = _BUILDERS.get(which)
    if builder is None:
        raise BoundsExceeded(f"unknown gallery item {which!r}; choose from {', '.join(GALLERY_ITEMS)}")
    logger.info(f"Gallery {which} with {params or 'defaults'}")
    return builder(token=token, **params)
