"""
PID Model Service.

Finitely generated modules over R = k[x]_(x) and over its completion
S = k[[x]], carried by their invariants (free rank, torsion exponents).
The completion itself is never materialized; where elements are needed they
are polynomials or series truncated at an explicit precision.
"""
import logging
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

from homascend.core.config import settings
from homascend.core.errors import (
    EquivalenceViolation,
    HypothesisViolation,
    InsufficientPrecisionError,
    InvariantViolation,
)
from homascend.core.fields import QQ, FieldDesc
from homascend.core.linalg import Mat, span_basis
from homascend.core.polynomials import Poly, PolyMat
from homascend.core.snf import snf_localized
from homascend.services.algebra_service import algebra_from_presentation
from homascend.services.ascent_service import AscentReport, Condition
from homascend.services.module_service import ext_dim, module_from_generator_actions

logger = logging.getLogger(__name__)


class Side(str, Enum):
    OVER_R = "over-R"
    OVER_S = "over-S"


@dataclass(frozen=True)
class PIDModule:
    """R^a ⊕ ⊕ R/(x^e) over the local PID or over its completion."""
    free_rank: int
    exponents: Tuple[int, ...] = ()
    side: Side = Side.OVER_R
    note: str = dc_field(default="", compare=False)

    def __post_init__(self):
        if self.free_rank < 0 or any(e <= 0 for e in self.exponents):
            raise InvariantViolation("free rank must be ≥ 0 and exponents positive")
        object.__setattr__(self, "exponents", tuple(sorted(self.exponents)))

    @property
    def is_torsion(self) -> bool:
        return self.free_rank == 0

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.exponents

    @property
    def length(self) -> Optional[int]:
        """k-dimension, None when there is a free part."""
        return sum(self.exponents) if self.is_torsion else None

    @property
    def invariants(self) -> Tuple[int, Tuple[int, ...]]:
        return self.free_rank, self.exponents

    def __add__(self, other: "PIDModule") -> "PIDModule":
        if self.side != other.side:
            raise InvariantViolation("direct sum of modules over different rings")
        return PIDModule(self.free_rank + other.free_rank, self.exponents + other.exponents, self.side)

    def format(self) -> str:
        ring = "R" if self.side == Side.OVER_R else "S"
        parts = [f"{ring}^{self.free_rank}"] if self.free_rank else []
        parts += [f"{ring}/(x^{e})" for e in self.exponents]
        return " ⊕ ".join(parts) or "0"

    def as_dict(self) -> Dict:
        return {"free_rank": self.free_rank, "exponents": list(self.exponents), "side": self.side.value}


def zero_pid(side: Side = Side.OVER_R) -> PIDModule:
    return PIDModule(0, (), side)


@dataclass(frozen=True)
class PIDPresentation:
    """Cokernel of the relation rows acting on ``generators`` free generators."""
    generators: int
    relations: PolyMat

    def __post_init__(self):
        if self.relations.cols != self.generators:
            raise InvariantViolation(
                f"relations have {self.relations.cols} columns for {self.generators} generators"
            )


# =========================================================================
# CLASSIFICATION
# =========================================================================

def classify(P: PIDPresentation, side: Side = Side.OVER_R) -> PIDModule:
    """Invariants from the Smith normal form over k[x]_(x); unit factors drop out."""
    snf = snf_localized(P.relations)
    exps = tuple(e for e in snf.exponents if e > 0)
    return PIDModule(snf.free_defect, exps, side)


def presentation_of_pid(M: PIDModule, field: FieldDesc = QQ) -> PIDPresentation:
    n = M.free_rank + len(M.exponents)
    rows = []
    for j, e in enumerate(M.exponents):
        row = [Poly(field)] * n
        row[M.free_rank + j] = Poly.monomial(field, e)
        rows.append(row)
    return PIDPresentation(n, PolyMat(field, len(rows), n, rows))


def classify_jordan(T: Mat) -> PIDModule:
    """
    Invariants of the finite-length k[x]-module (k^n, x ↦ T) from the ranks
    of the powers of the nilpotent matrix T.
    """
    n = T.rows
    ranks = [n]
    P = Mat.identity(T.field, n)
    while ranks[-1] > 0:
        P = P @ T
        ranks.append(P.rank())
        if len(ranks) > n + 1:
            raise InvariantViolation("x does not act nilpotently")
    # blocks of size ≥ k: ranks[k−1] − ranks[k]
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    exps: List[int] = []
    for k, count in enumerate(at_least, start=1):
        nxt = at_least[k] if k < len(at_least) else 0
        exps += [k] * (count - nxt)
    return PIDModule(0, tuple(exps))


def jordan_matrix(M: PIDModule, field: FieldDesc = QQ) -> Mat:
    """Action of x on ⊕ k[x]/(x^e) in the basis x^t·g_j."""
    if not M.is_torsion:
        raise HypothesisViolation("only finite-length modules have a finite matrix model", clause="torsion")
    n = sum(M.exponents)
    T = Mat.zeros(field, n, n).tolist()
    offset = 0
    for e in M.exponents:
        for t in range(e - 1):
            T[offset + t + 1][offset + t] = field.one
        offset += e
    return Mat(field, T, n, n)


# =========================================================================
# ASCENT ALONG R → R̂
# =========================================================================

def _iota_cokernel_rank(M: PIDModule) -> int:
    return sum(1 for e in _cyclic_summands(M) if e is None)


def completion_ascent(M: PIDModule) -> AscentReport:
    """
    Compatible k[[x]]-structure, ι: M → S⊗M and finiteness of S⊗M over R,
    each decided from its own description of M.
    """
    if M.side != Side.OVER_R:
        raise HypothesisViolation("completion_ascent takes a module over R", clause="side = over-R")
    report = AscentReport()

    # ι is the identity on each R/(x^e) ≅ S/(x^e); its cokernel is (S/R)^a.
    iota = _iota_cokernel_rank(M) == 0
    report.record(Condition.IOTA, iota)

    # S-structures exist exactly on finite-length modules.
    compatible = M.length is not None
    report.record(Condition.COMPATIBLE, compatible)

    # S⊗M = S^a ⊕ torsion: finitely generated over R iff a = 0.
    tensor_fg = base_change_pid(M).free_rank == 0
    report.record(Condition.TENSOR_FG, tensor_fg)

    for i in range(1, settings.EXT_RANGE + 1):
        report.record(Condition.ext(i), compatible, provenance="asserted-by-theorem")
    report.notes.append("Ext^i_R(S, M) is not computed: S has no finite presentation over R")

    if not (iota == compatible == tensor_fg):
        raise EquivalenceViolation(
            "completion ascent conditions disagree",
            {"module": M.format(), "iota": iota, "compatible": compatible, "tensor_fg": tensor_fg},
        )
    return report


@dataclass(frozen=True)
class PrimeReport:
    minimal_primes: Tuple[str, ...]
    per_prime: Dict[str, bool]
    decision: bool

    def as_dict(self) -> Dict:
        return {"minimal_primes": list(self.minimal_primes), "per_prime": dict(self.per_prime), "decision": self.decision}


# S = R + P·S holds for P = (x) since R/(x) = k is complete, and fails for P = (0).
_PRIME_CONDITION = {"(0)": False, "(x)": True}


def thm113_decision(M: PIDModule) -> PrimeReport:
    """Compatible structure decided prime by prime over Min_R(M)."""
    if M.side != Side.OVER_R:
        raise HypothesisViolation("thm113_decision takes a module over R", clause="side = over-R")
    if M.free_rank > 0:
        minimal = ("(0)",)
    elif M.exponents:
        minimal = ("(x)",)
    else:
        minimal = ()
    per_prime = {P: _PRIME_CONDITION[P] for P in minimal}
    decision = all(per_prime.values())
    expected = completion_ascent(M).conditions[Condition.COMPATIBLE]
    if decision != expected:
        raise EquivalenceViolation("prime-wise decision disagrees with completion ascent", {"module": M.format()})
    return PrimeReport(minimal, per_prime, decision)


def base_change_pid(M: PIDModule) -> PIDModule:
    """S⊗_R M keeps the invariants (x ↦ x, flat)."""
    return PIDModule(M.free_rank, M.exponents, Side.OVER_S)


def extend_pid(N: PIDModule) -> PIDModule:
    """The R-module M with S⊗_R M ≅ N; every f.g. S-module is extended."""
    if N.side != Side.OVER_S:
        raise HypothesisViolation("extend_pid takes a module over S", clause="side = over-S")
    M = PIDModule(N.free_rank, N.exponents, Side.OVER_R)
    if base_change_pid(M) != N:
        raise EquivalenceViolation("base change of the descended module differs", {"module": N.format()})
    return M


# =========================================================================
# EXT
# =========================================================================

def _cyclic_summands(M: PIDModule) -> List[Optional[int]]:
    """None stands for a free summand, e for R/(x^e)."""
    return [None] * M.free_rank + list(M.exponents)


def _ext_cyclic(e: Optional[int], f: Optional[int], i: int) -> Tuple[int, Tuple[int, ...]]:
    if e is None:
        if i == 0:
            return (1, ()) if f is None else (0, (f,))
        return 0, ()
    if f is None:
        return (0, ()) if i == 0 else (0, (e,))
    return 0, (min(e, f),)


def ext_pid(M: PIDModule, N: PIDModule, i: int) -> PIDModule:
    """Ext^i(M, N) from the length-one resolutions of the cyclic summands."""
    if M.side != N.side:
        raise InvariantViolation("Ext between modules over different rings")
    if i < 0:
        raise HypothesisViolation("Ext degree must be non-negative", clause="i ≥ 0")
    if i >= 2:
        return PIDModule(0, (), M.side, note="gldim 1")
    free = 0
    exps: List[int] = []
    for e in _cyclic_summands(M):
        for f in _cyclic_summands(N):
            a, t = _ext_cyclic(e, f, i)
            free += a
            exps += t
    return PIDModule(free, tuple(exps), M.side)


def ext_pid_truncated(M: PIDModule, N: PIDModule, i: int, precision: Optional[int] = None, field: FieldDesc = QQ) -> int:
    """
    dim_k Ext^i for finite-length M, N (i ≤ 1) computed over k[x]/(x^p) with
    p ≥ max exponent sum, where both Hom and Ext¹ agree with the local PID.
    """
    if not (M.is_torsion and N.is_torsion):
        raise HypothesisViolation("truncated Ext needs finite-length modules", clause="torsion")
    if i > 1:
        return 0
    bound = max(M.exponents, default=0) + max(N.exponents, default=0)
    p = max(bound, 1) if precision is None else precision
    if p < bound:
        raise InsufficientPrecisionError(f"precision {p} below exponent sum {bound}")
    A = algebra_from_presentation(field, ["x"], [], p, name=f"k[x]/(x^{p})")
    X = module_from_generator_actions(A, [jordan_matrix(M, field)], sum(M.exponents), name="M")
    Y = module_from_generator_actions(A, [jordan_matrix(N, field)], sum(N.exponents), name="N")
    return ext_dim(X, Y, i).dim


# =========================================================================
# EXTENSIONS (case 1 of the descent of extensions)
# =========================================================================

ClassData = Union[None, int, Sequence[Sequence[Optional[int]]]]


def _class_matrix(cls: ClassData, rows: int, cols: int) -> List[List[Optional[int]]]:
    if cls is None:
        return [[None] * cols for _ in range(rows)]
    if isinstance(cls, int):
        if (rows, cols) != (1, 1):
            raise InvariantViolation("an integer class is only meaningful for cyclic modules")
        return [[cls]]
    out = [list(r) for r in cls]
    if len(out) != rows or any(len(r) != cols for r in out):
        raise InvariantViolation(f"extension class must be {rows}×{cols}")
    return out


def extension_presentation(M1: PIDModule, M2: PIDModule, cls: ClassData, field: FieldDesc = QQ) -> PIDPresentation:
    """
    Middle term of 0 → M1 → E → M2 → 0 for the class whose (i, j) entry c
    sends the generator of the i-th summand of M2 to x^c times the j-th of
    M1 (None for zero): relation rows [[diag x^a, 0], [−x^c, diag x^b]].
    """
    a, b = M1.exponents, M2.exponents
    C = _class_matrix(cls, len(b), len(a))
    n = len(a) + len(b)
    zero = Poly(field)
    rows: List[List[Poly]] = []
    for j, e in enumerate(a):
        row = [zero] * n
        row[j] = Poly.monomial(field, e)
        rows.append(row)
    for i, e in enumerate(b):
        row = [zero] * n
        for j, c in enumerate(C[i]):
            if c is not None:
                row[j] = -Poly.monomial(field, c)
        row[len(a) + i] = Poly.monomial(field, e)
        rows.append(row)
    return PIDPresentation(n, PolyMat(field, n, n, rows))


def extension_matrix(M1: PIDModule, M2: PIDModule, cls: ClassData, field: FieldDesc = QQ) -> Mat:
    """Action of x on the middle term in the basis x^t·g1_j, then x^t·g2_i."""
    a, b = M1.exponents, M2.exponents
    C = _class_matrix(cls, len(b), len(a))
    n = sum(a) + sum(b)
    T = Mat.zeros(field, n, n).tolist()
    starts_a = [sum(a[:j]) for j in range(len(a))]
    offset = sum(a)
    for j, e in enumerate(a):
        for t in range(e - 1):
            T[starts_a[j] + t + 1][starts_a[j] + t] = field.one
    for i, e in enumerate(b):
        for t in range(e - 1):
            T[offset + t + 1][offset + t] = field.one
        # x·x^{e−1}g2_i = Σ_j x^{c_ij} g1_j
        top = offset + e - 1
        for j, c in enumerate(C[i]):
            if c is not None and c < a[j]:
                T[starts_a[j] + c][top] = field.one
        offset += e
    return Mat(field, T, n, n)


@dataclass(frozen=True)
class PIDExtension:
    middle: PIDModule
    base_changed: PIDModule
    witness: PIDModule
    oracle: PIDModule

    def as_dict(self) -> Dict:
        return {
            "middle": self.middle.as_dict(),
            "base_changed": self.base_changed.as_dict(),
            "witness": self.witness.as_dict(),
        }


def prop32_case1_pid(M1: PIDModule, M2: PIDModule, cls: ClassData = None, field: FieldDesc = QQ) -> PIDExtension:
    """
    Realize an extension class of torsion modules over R, base-change it and
    descend the middle term again; the Jordan form of the explicit middle
    term is the independent oracle.
    """
    if not (M1.is_torsion and M2.is_torsion):
        raise HypothesisViolation("extension data must be torsion", clause="torsion")
    middle = classify(extension_presentation(M1, M2, cls, field))
    oracle = classify_jordan(extension_matrix(M1, M2, cls, field))
    if middle != oracle:
        raise EquivalenceViolation(
            "SNF and Jordan classifications of the middle term differ",
            {"snf": middle.format(), "jordan": oracle.format()},
        )
    N = base_change_pid(middle)
    witness = extend_pid(N)
    logger.debug(f"extension of {M2.format()} by {M1.format()}: middle {middle.format()}")
    return PIDExtension(middle, N, witness, oracle)


def middle_formula(a: int, b: int, c: int) -> PIDModule:
    """Middle term of the class x^c in Ext¹(R/x^b, R/x^a); c ≥ min(a, b) is split."""
    c = min(c, a, b)
    exps = tuple(e for e in (a + b - c, c) if e > 0)
    return PIDModule(0, exps)


# =========================================================================
# V(M) INSIDE S-MODULES
# =========================================================================

@dataclass(frozen=True)
class PIDElement:
    """Element of S^a ⊕ ⊕ S/(x^e): series truncated at ``precision`` plus torsion residues."""
    free: Tuple[Poly, ...]
    torsion: Tuple[Poly, ...]


def _torsion_of_span(N: PIDModule, gens: Sequence[PIDElement], precision: int, field: FieldDesc) -> PIDModule:
    a, exps = N.free_rank, N.exponents
    m = len(gens)
    total = sum(exps)
    if total == 0 or m == 0:
        return PIDModule(0, (), Side.OVER_S)
    zero = Poly(field)
    if a:
        F = PolyMat(field, a, m, [[g.free[r].truncate(precision) for g in gens] for r in range(a)])
        snf = snf_localized(F)
        kernel_cols = list(range(snf.rank, m))
        V = snf.V
        kernel = [[V[i, j] for i in range(m)] for j in kernel_cols]
    else:
        kernel = [[Poly.const(field, field.one) if i == j else zero for i in range(m)] for j in range(m)]
    # images in ⊕ k[x]/(x^e), flattened in the basis x^t·g_j
    starts = [sum(exps[:j]) for j in range(len(exps))]

    def flatten(polys: Sequence[Poly]) -> List:
        vec = [field.zero] * total
        for j, (p, e) in enumerate(zip(polys, exps)):
            for t in range(e):
                vec[starts[j] + t] = p.coeff(t)
        return vec

    T = jordan_matrix(PIDModule(0, exps), field)
    vectors = []
    for r in kernel:
        image = [sum((r[i] * gens[i].torsion[j] for i in range(m)), zero) for j in range(len(exps))]
        v = flatten(image)
        for _ in range(max(exps)):
            vectors.append(v)
            v = T.apply(v)
    W = span_basis(field, total, vectors)
    if W.cols == 0:
        return PIDModule(0, (), Side.OVER_S)
    restricted = W.solve_matrix(T @ W)
    return PIDModule(0, classify_jordan(restricted).exponents, Side.OVER_S)


def vmax_pid(
    N: PIDModule,
    gens: Sequence[PIDElement],
    precision: Optional[int] = None,
    field: FieldDesc = QQ,
) -> PIDModule:
    """
    V(M) for the R-submodule M of N generated by ``gens``: the torsion
    submodule of M, stable between precision p and p + 1.
    """
    if N.side != Side.OVER_S:
        raise HypothesisViolation("N must be an S-module", clause="side = over-S")
    p = settings.PID_PRECISION if precision is None else precision
    for g in gens:
        if len(g.free) != N.free_rank or len(g.torsion) != len(N.exponents):
            raise InvariantViolation("generator shape does not match N")
    first = _torsion_of_span(N, gens, p, field)
    second = _torsion_of_span(N, gens, p + 1, field)
    if first != second:
        raise InsufficientPrecisionError(f"V(M) changes between precision {p} and {p + 1}")
    return first
