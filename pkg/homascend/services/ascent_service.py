"""
Ascent Service.

Decisions about S-module structures on R-modules along a local map φ: R → S:
the compatible-structure / ι / ε equivalence, the largest S-submodule V(M)
inside an R-submodule, ring retracts in both directions, and the
retraction π built from a free basis.
"""
import logging
from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy

from homascend.core.cancellation import CancellationToken, checkpoint
from homascend.core.config import settings
from homascend.core.errors import EquivalenceViolation, HypothesisViolation, InvariantViolation
from homascend.core.fields import FieldKind
from homascend.core.linalg import (
    Mat,
    QuotientMap,
    same_span,
    span_basis,
)
from homascend.services.algebra_service import (
    AlgebraMap,
    algebra_map_from_images,
    is_flat,
    require_dagger,
)
from homascend.services.module_service import (
    FModule,
    base_change,
    ext_dims,
    hom_space,
    is_stable,
    module_from_actions,
    quotient_module,
    regular_module,
    restrict,
    submodule,
)

logger = logging.getLogger(__name__)


class Condition:
    """Labels of the conditions collected in an AscentReport."""
    COMPATIBLE = "compatible-structure"
    IOTA = "iota-bijective"
    EPSILON = "epsilon-bijective"
    TENSOR_FG = "tensor-fg"

    @staticmethod
    def ext(i: int) -> str:
        return f"ext-vanishing({i})"


@dataclass
class AscentReport:
    """Independently computed conditions with optional witnesses and notes."""
    conditions: Dict[str, bool] = dc_field(default_factory=dict)
    witnesses: Dict[str, Any] = dc_field(default_factory=dict)
    provenance: Dict[str, str] = dc_field(default_factory=dict)
    notes: List[str] = dc_field(default_factory=list)

    def record(self, label: str, value: bool, provenance: str = "computed") -> None:
        self.conditions[label] = value
        self.provenance[label] = provenance

    def as_dict(self) -> Dict[str, Any]:
        return {
            "conditions": dict(self.conditions),
            "provenance": dict(self.provenance),
            "notes": list(self.notes),
        }


# =========================================================================
# COMPATIBLE STRUCTURES
# =========================================================================

def _preimages(phi: AlgebraMap) -> List[Tuple]:
    """r_j with φ(r_j) = s_j for every basis element of a surjective φ."""
    S = phi.target
    out = []
    for j in range(S.dim):
        r = phi.matrix.solve(S.basis_vector(j))
        if r is None:
            raise HypothesisViolation(f"{phi.name} is not surjective", clause="surjective")
        out.append(r)
    return out


def compatible_structure(phi: AlgebraMap, M: FModule, other: Optional[FModule] = None) -> Optional[FModule]:
    """
    The compatible S-module structure on the R-module M, or None.

    For surjective φ with kernel I it exists exactly when I·M = 0 and is
    s·x = r·x for any preimage r of s. A supplied ``other`` structure is
    checked to coincide with it.
    """
    R, S = phi.source, phi.target
    if M.algebra is not R:
        raise InvariantViolation(f"{M.name} is not an {R.name}-module")
    if not phi.is_surjective():
        raise HypothesisViolation(
            "compatible structures are decided for surjective maps; use ring_retract for the regular module",
            clause="surjective",
        )
    kernel = phi.kernel()
    if not all(M.act(r).is_zero() for r in kernel.columns()):
        return None
    action = [M.act(r) for r in _preimages(phi)]
    N = module_from_actions(S, action, name=f"{M.name}@{S.name}")
    if other is not None:
        if other.algebra is not S or other.dim != M.dim:
            raise InvariantViolation("supplied structure lives on a different space")
        if any(a != b for a, b in zip(other.action, N.action)):
            raise EquivalenceViolation("two compatible structures differ", {"module": M.name})
    return N


def is_compatible_extension(phi: AlgebraMap, M: FModule, N: FModule) -> bool:
    """N is an S-structure on M's space restricting to M's R-structure."""
    restricted = restrict(phi, N)
    return all(a == b for a, b in zip(restricted.action, M.action))


def iota_bijective(phi: AlgebraMap, M: FModule) -> Tuple[bool, Mat]:
    bc = base_change(phi, M)
    return bc.iota.is_invertible(), bc.iota


def epsilon_map(phi: AlgebraMap, M: FModule) -> Mat:
    """ε: Hom_R(S, M) → M, f ↦ f(1), in the coordinates of the Hom-space basis."""
    S = phi.target
    S_R = restrict(phi, regular_module(S))
    H = hom_space(S_R, M)
    return Mat.from_columns(M.field, M.dim, [f.column(S.unit_index) for f in H.basis])


def compatibility_report(
    phi: AlgebraMap,
    M: FModule,
    L: Optional[int] = None,
    token: Optional[CancellationToken] = None,
) -> AscentReport:
    """
    Conditions (compatible structure, ι bijective, ε bijective) computed
    independently and required to agree; Ext^i_R(S, M) for i = 1..L when φ is
    flat.
    """
    require_dagger(phi)
    L = settings.EXT_RANGE if L is None else L
    report = AscentReport()

    # (†) maps of finite dimension are surjective by Nakayama.
    structure = compatible_structure(phi, M)
    compatible = structure is not None
    if structure is not None:
        report.witnesses["structure"] = structure
    report.record(Condition.COMPATIBLE, compatible)

    iota_ok, iota = iota_bijective(phi, M)
    report.record(Condition.IOTA, iota_ok)
    if iota_ok:
        report.witnesses["iota_inverse"] = iota.inverse()

    eps = epsilon_map(phi, M)
    eps_ok = eps.rows == eps.cols and eps.is_invertible()
    report.record(Condition.EPSILON, eps_ok)

    report.record(Condition.TENSOR_FG, True)
    report.notes.append("tensor-fg holds for every module at finite dimension")

    if not (compatible == iota_ok == eps_ok):
        raise EquivalenceViolation(
            "compatible structure, ι and ε disagree",
            {"map": phi.name, "module": M.name, "compatible": compatible, "iota": iota_ok, "epsilon": eps_ok},
        )

    if is_flat(phi).flat:
        S_R = restrict(phi, regular_module(phi.target))
        dims = ext_dims(S_R, M, L, token=token)
        for i in range(1, L + 1):
            report.record(Condition.ext(i), dims[i] == 0)
        report.notes.append("flat (†) maps of finite dimension are bijective; Ext conditions are reported only")
    else:
        report.notes.append("φ is not flat; Ext conditions not evaluated")
    return report


# =========================================================================
# V(M)
# =========================================================================

def _largest_stable(gens: Sequence[Mat], W: Mat) -> Mat:
    field, n = W.field, W.rows
    current = W
    while True:
        nxt = current
        for G in gens:
            if nxt.cols == 0:
                break
            # {x ∈ nxt : G x ∈ current}
            q = QuotientMap(field, n, current.columns())
            K = (q.project @ G @ nxt).kernel()
            nxt = span_basis(field, n, [nxt.apply(c) for c in K.columns()])
        if nxt.cols == current.cols:
            return current
        current = nxt


@dataclass(frozen=True)
class VmaxResult:
    definitional: Mat
    saturation: Mat
    epsilon_image: Mat

    @property
    def basis(self) -> Mat:
        return self.definitional

    @property
    def dim(self) -> int:
        return self.definitional.cols


def vmax(phi: AlgebraMap, N: FModule, M: Mat) -> VmaxResult:
    """
    V(M) = {x ∈ N : S·x ⊆ M} for an R-submodule M (basis columns) of the
    S-module N, computed three ways that must agree.
    """
    require_dagger(phi)
    S = phi.target
    field = S.field
    N_R = restrict(phi, N)
    M = span_basis(field, N.dim, M.columns())
    if not is_stable(N_R, M):
        raise HypothesisViolation("M is not an R-submodule of N", clause="R-stable")

    q = QuotientMap(field, N.dim, M.columns())
    stacked = Mat.vstack(field, N.dim, [q.project @ L for L in N.action])
    definitional = span_basis(field, N.dim, stacked.kernel().columns())

    saturation = _largest_stable(N.generator_actions, M)

    M_R = submodule(N_R, M) if M.cols else None
    if M_R is None:
        eps_image = Mat.zeros(field, N.dim, 0)
    else:
        eps_local = epsilon_map(phi, M_R)
        eps_image = span_basis(field, N.dim, [M.apply(c) for c in eps_local.columns()])

    if not (same_span(definitional, saturation) and same_span(definitional, eps_image)):
        raise EquivalenceViolation(
            "V(M) computations disagree",
            {"definitional": definitional.cols, "saturation": saturation.cols, "epsilon_image": eps_image.cols},
        )
    if not is_stable(N, definitional):
        raise EquivalenceViolation("V(M) is not an S-submodule", {"dim": definitional.cols})
    return VmaxResult(definitional, saturation, eps_image)


def prop16_check(phi: AlgebraMap, L: FModule, N: FModule, M: Mat) -> bool:
    """Hom_R(L, V(M)) → Hom_R(L, M) is an isomorphism (L, N over S)."""
    V = vmax(phi, N, M).basis
    field = N.field
    M = span_basis(field, N.dim, M.columns())
    L_R, N_R = restrict(phi, L), restrict(phi, N)
    if L.dim == 0:
        return True
    H_M = hom_space(L_R, submodule(N_R, M)) if M.cols else None
    H_V = hom_space(L_R, submodule(N_R, V)) if V.cols else None
    dim_M = H_M.dim if H_M else 0
    dim_V = H_V.dim if H_V else 0
    if dim_M != dim_V:
        return False
    if dim_V == 0:
        return True
    # Push Hom(L, V) into N-coordinates and compare with Hom(L, M).
    pushed = span_basis(field, N.dim * L.dim, [(V @ f).flatten() for f in H_V.basis])
    direct = span_basis(field, N.dim * L.dim, [(M @ f).flatten() for f in H_M.basis])
    return same_span(pushed, direct)


# =========================================================================
# RING RETRACTS
# =========================================================================

@dataclass(frozen=True)
class RetractResult:
    status: str  # "found", "none" or "undecided"
    psi: Optional[AlgebraMap] = None
    method: str = ""

    @property
    def exists(self) -> Optional[bool]:
        return {"found": True, "none": False}.get(self.status)


def _try_images(phi: AlgebraMap, images: Sequence[Tuple]) -> Optional[AlgebraMap]:
    B, A = phi.target, phi.source
    try:
        psi = algebra_map_from_images(B, A, list(images), name="psi")
    except InvariantViolation:
        return None
    if not (psi.matrix @ phi.matrix).is_identity():
        return None
    return psi


def _image_spaces(phi: AlgebraMap) -> List[Mat]:
    """Allowed images of each generator of B: m_A for radical generators, else all of A."""
    A, B = phi.source, phi.target
    spaces = []
    for g in B.generators:
        spaces.append(A.radical if B.in_radical(g) else Mat.identity(A.field, A.dim))
    return spaces


def _symbolic_retract(phi: AlgebraMap) -> RetractResult:
    """Solve the polynomial system for generator images over ℚ with sympy; keep rational solutions."""
    A, B = phi.source, phi.target
    spaces = _image_spaces(phi)
    unknowns = []
    images = []
    for v, W in enumerate(spaces):
        coeffs = sympy.symbols(f"c{v}_0:{W.cols}") if W.cols else ()
        unknowns.extend(coeffs)
        images.append([sum((c * _sym(W[k, j]) for j, c in enumerate(coeffs)), sympy.Integer(0)) for k in range(A.dim)])

    def mul(a, b):
        acc = [sympy.Integer(0)] * A.dim
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y == 0:
                    continue
                for k, c in enumerate(A.table[i][j]):
                    if c:
                        acc[k] += x * y * _sym(c)
        return [sympy.expand(e) for e in acc]

    unit = [_sym(c) for c in A.unit]
    psi_cols = []
    for exps in B.monomials:
        value = unit
        for img, e in zip(images, exps):
            for _ in range(e):
                value = mul(value, img)
        psi_cols.append(value)

    equations = []
    for i in range(B.dim):
        for j in range(i, B.dim):
            lhs = [sum((_sym(c) * psi_cols[k][r] for k, c in enumerate(B.table[i][j]) if c), sympy.Integer(0)) for r in range(A.dim)]
            rhs = mul(psi_cols[i], psi_cols[j])
            equations.extend(sympy.expand(l - r) for l, r in zip(lhs, rhs))
    for a in range(A.dim):
        image = phi.matrix.column(a)
        value = [sum((_sym(c) * psi_cols[k][r] for k, c in enumerate(image) if c), sympy.Integer(0)) for r in range(A.dim)]
        target = [_sym(c) for c in A.basis_vector(a)]
        equations.extend(sympy.expand(v - t) for v, t in zip(value, target))

    equations = [e for e in equations if e != 0]
    if any(e.is_number for e in equations):
        return RetractResult("none", method="sympy-inconsistent")
    if not equations:
        solutions = [{}]
    else:
        try:
            solutions = sympy.solve(equations, unknowns, dict=True)
        except NotImplementedError:
            return RetractResult("undecided", method="sympy-unsupported")
    parametric = False
    for sol in solutions:
        exprs = [sympy.sympify(sol.get(u, u)) for u in unknowns]
        free = sorted(set().union(*(e.free_symbols for e in exprs)), key=str)
        grid = settings.SCALAR_GRID if len(settings.SCALAR_GRID) ** len(free) <= settings.EXHAUSTIVE_LIMIT else [0]
        # a solution family is tried at the grid points of its free parameters
        for point in product(grid, repeat=len(free)):
            values = [e.subs(dict(zip(free, point))) for e in exprs]
            if not all(val.is_Rational for val in values):
                continue
            subs = dict(zip(unknowns, values))
            imgs = [tuple(A.field.coerce(sympy.sympify(e).subs(subs)) for e in img) for img in images]
            psi = _try_images(phi, imgs)
            if psi is not None:
                return RetractResult("found", psi, method="sympy")
        parametric = parametric or bool(free)
    if parametric:
        return RetractResult("undecided", method="sympy-parametric")
    return RetractResult("none", method="sympy")


def _sym(c: Any) -> sympy.Rational:
    return sympy.Rational(c.numerator, c.denominator)


def _enumerate_retract(phi: AlgebraMap, token: Optional[CancellationToken]) -> RetractResult:
    A = phi.source
    field = A.field
    spaces = _image_spaces(phi)
    elements = list(field.elements())
    for coeff_lists in product(*[list(product(elements, repeat=W.cols)) for W in spaces]):
        checkpoint(token)
        images = [W.apply(c) if W.cols else A.zero_element() for W, c in zip(spaces, coeff_lists)]
        psi = _try_images(phi, images)
        if psi is not None:
            return RetractResult("found", psi, method="exhaustive")
    return RetractResult("none", method="exhaustive")


def ring_retract(
    phi: AlgebraMap,
    structure: Optional[FModule] = None,
    token: Optional[CancellationToken] = None,
) -> RetractResult:
    """ψ: B → A with ψ∘φ = id, when one exists."""
    A, B = phi.source, phi.target
    if phi.is_bijective():
        psi = AlgebraMap(B, A, phi.matrix.inverse(), name="psi")
        psi.verify()
        return RetractResult("found", psi, method="inverse")
    if structure is not None:
        return RetractResult("found", structure_to_retract(phi, structure), method="compatible-structure")
    if not B.monomials:
        return RetractResult("undecided", method="no-monomial-basis")
    search_dim = sum(W.cols for W in _image_spaces(phi))
    field = A.field
    if field.is_finite:
        if search_dim > settings.SEARCH_DIM_CAP or field.order ** search_dim > settings.EXHAUSTIVE_LIMIT:
            logger.info(f"Retract search for {phi.name}: {field.order}^{search_dim} candidates exceed the configured limits")
            return RetractResult("undecided", method="search-bound")
        return _enumerate_retract(phi, token)
    if field.kind == FieldKind.RATIONALS:
        return _symbolic_retract(phi)
    return RetractResult("undecided", method="field-unsupported")


def structure_to_retract(phi: AlgebraMap, structure: FModule) -> AlgebraMap:
    """ψ(b) = b∘1_A for a compatible B-structure on A."""
    A, B = phi.source, phi.target
    if structure.algebra is not B or structure.dim != A.dim:
        raise InvariantViolation("structure must be a B-module on the underlying space of A")
    if not is_compatible_extension(phi, regular_module(A), structure):
        raise InvariantViolation("structure is not compatible with A's own action")
    cols = [structure.action[j].apply(A.unit) for j in range(B.dim)]
    psi = AlgebraMap(B, A, Mat.from_columns(A.field, A.dim, cols), name="psi")
    psi.verify()
    if not (psi.matrix @ phi.matrix).is_identity():
        raise EquivalenceViolation("b∘1 does not retract φ", {"map": phi.name})
    return psi


def retract_to_structure(phi: AlgebraMap, psi: AlgebraMap) -> FModule:
    """The B-structure b∘a := ψ(b·φ(a)) = ψ(b)·a on A."""
    A, B = phi.source, phi.target
    if not (psi.matrix @ phi.matrix).is_identity():
        raise InvariantViolation("ψ∘φ ≠ id")
    action = [A.left_mult(psi.apply(B.basis_vector(j))) for j in range(B.dim)]
    structure = module_from_actions(B, action, name=f"{A.name}@{B.name}")
    if not is_compatible_extension(phi, regular_module(A), structure):
        raise EquivalenceViolation("ψ-structure does not restrict to A's action", {"map": phi.name})
    return structure


# =========================================================================
# FLAT (†) MAPS
# =========================================================================

def prop110_retraction(phi: AlgebraMap) -> Mat:
    """
    R-linear π: S → R with π∘φ = id built from a free basis, for flat (†) φ.
    The map φ is then verified to be bijective.
    """
    require_dagger(phi)
    flat = is_flat(phi)
    if not flat.flat:
        raise HypothesisViolation(f"{phi.name} is not flat", clause="flat")
    R, S = phi.source, phi.target
    field = R.field
    cols = [S.left_mult(phi.apply(R.basis_vector(k))).apply(b) for b in flat.basis for k in range(R.dim)]
    C = Mat.from_columns(field, S.dim, cols)
    coords = C.inverse()
    one = coords.apply(S.unit)
    chosen = None
    for i in range(flat.rank):
        r_i = one[i * R.dim:(i + 1) * R.dim]
        if R.is_unit_element(r_i):
            chosen = (i, R.inverse_element(r_i))
            break
    if chosen is None:
        raise EquivalenceViolation("no unit coefficient in the expansion of 1", {"map": phi.name})
    i, u_inv = chosen
    block = coords.submatrix(range(i * R.dim, (i + 1) * R.dim), range(S.dim))
    pi = R.left_mult(u_inv) @ block
    if not (pi @ phi.matrix).is_identity():
        raise EquivalenceViolation("π∘φ ≠ id", {"map": phi.name})
    if not phi.is_bijective():
        raise EquivalenceViolation("flat (†) map of finite dimension is not bijective", {"map": phi.name})
    return pi


# =========================================================================
# SHORT EXACT SEQUENCES
# =========================================================================

def is_short_exact(Mp: FModule, M: FModule, Mpp: FModule, inc: Mat, proj: Mat) -> bool:
    return (
        inc.rank() == Mp.dim
        and proj.rank() == Mpp.dim
        and (proj @ inc).is_zero()
        and Mp.dim + Mpp.dim == M.dim
    )


def lemma112_property(phi: AlgebraMap, Mp: FModule, M: FModule, Mpp: FModule, inc: Mat, proj: Mat) -> Dict[str, bool]:
    """For flat (†) φ: M has a compatible structure iff M′ and M″ have."""
    require_dagger(phi)
    if not is_flat(phi).flat:
        raise HypothesisViolation(f"{phi.name} is not flat", clause="flat")
    if not is_short_exact(Mp, M, Mpp, inc, proj):
        raise InvariantViolation("sequence is not short exact")
    flags = {
        "M_sub": compatibility_report(phi, Mp, L=0).conditions[Condition.COMPATIBLE],
        "M": compatibility_report(phi, M, L=0).conditions[Condition.COMPATIBLE],
        "M_quot": compatibility_report(phi, Mpp, L=0).conditions[Condition.COMPATIBLE],
    }
    if flags["M"] != (flags["M_sub"] and flags["M_quot"]):
        raise EquivalenceViolation("compatibility is not two-out-of-three on the sequence", flags)
    return flags


def short_exact_from_submodule(M: FModule, W: Mat) -> Tuple[FModule, FModule, Mat, Mat]:
    """0 → W → M → M/W → 0 with inclusion and projection."""
    W = span_basis(M.field, M.dim, W.columns())
    sub = submodule(M, W, name=f"{M.name}'")
    quot = quotient_module(M, W, name=f"{M.name}''")
    return sub, quot.module, W, quot.projection
