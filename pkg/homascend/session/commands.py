"""
Command Registry.

Every session command is a handler in COMMANDS together with the kinds of
its positional arguments, so the parser can check a command line before
anything runs. Handlers return an Outcome of plain JSON-ready values.
"""
import logging
import random
from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from homascend.core.cancellation import CancellationToken
from homascend.core.config import settings
from homascend.core.errors import EquivalenceViolation, HypothesisViolation, InvariantViolation
from homascend.core.fields import QQ, ExtElem, GFElem
from homascend.core.linalg import Mat
from homascend.services.algebra_service import check_dagger, is_flat
from homascend.services.ascent_service import compatibility_report, prop16_check, ring_retract, vmax
from homascend.services.complex_service import (
    combine_morphisms,
    homology_dims,
    is_quasi_iso,
    morphism_space,
    omega_report,
    prop24_harness,
)
from homascend.services.decomposition import is_isomorphic, krs_decompose
from homascend.services.extended_service import (
    FiniteExtension,
    brute_force_extended,
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
)
from homascend.services.gallery import gallery
from homascend.services.module_service import (
    ann_supp,
    direct_sum,
    ext_dims,
    generated_submodule,
    hom_space,
    radical_filtration,
    restrict,
    socle,
    tensor_modules,
)
from homascend.services.pid_service import (
    PIDElement,
    base_change_pid,
    classify,
    classify_jordan,
    completion_ascent,
    ext_pid,
    extend_pid,
    jordan_matrix,
    middle_formula,
    presentation_of_pid,
    prop32_case1_pid,
    thm113_decision,
    vmax_pid,
)
from homascend.session.lexer import optional_ints, parse_matrix, parse_polys, parse_scalars, parse_vectors, split_list
from homascend.session.state import Command, Declaration, DeclKind, Session, lookup

logger = logging.getLogger(__name__)


class ArgKind(str, Enum):
    FIELD = "field"
    ALGEBRA = "algebra"
    MAP = "map"
    MODULE = "module"
    COMPLEX = "complex"
    PID = "pid"
    INT = "int"
    TEXT = "text"

    @property
    def decl_kind(self) -> Optional[DeclKind]:
        try:
            return DeclKind(self.value)
        except ValueError:
            return None


@dataclass
class Outcome:
    result: Dict[str, Any]
    provenance: Dict[str, str] = dc_field(default_factory=dict)


Handler = Callable[[List[Any], Dict[str, str], Optional[CancellationToken]], Outcome]


@dataclass(frozen=True)
class CommandSpec:
    handler: Handler
    params: Tuple[ArgKind, ...]
    optional: Tuple[ArgKind, ...] = ()
    options: Tuple[str, ...] = ()
    summary: str = ""


# =========================================================================
# HELPERS
# =========================================================================

def plain(value: Any) -> Any:
    """JSON-ready copy: exact scalars become int or "p/q" strings, matrices nested lists."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, GFElem):
        return value.value
    if isinstance(value, ExtElem):
        return str(value)
    if isinstance(value, Mat):
        return [[plain(c) for c in row] for row in value.tolist()]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if hasattr(value, "as_dict"):
        return plain(value.as_dict())
    return str(value)


def _extension(decl: Declaration) -> FiniteExtension:
    return finite_extension(decl.value, scalars=decl.extra.get("scalars"))


def _int_option(options: Dict[str, str], key: str) -> Optional[int]:
    if key not in options:
        return None
    try:
        return int(options[key])
    except ValueError:
        raise InvariantViolation(f"option {key} needs an integer, got {options[key]!r}")


def _columns(M: Mat) -> List[List[Any]]:
    return [list(c) for c in M.columns()]


def _computed(result: Dict[str, Any]) -> Outcome:
    return Outcome(plain(result), {key: "computed" for key in result})


# =========================================================================
# MODULES AND COMPLEXES
# =========================================================================

def cmd_ext(args, options, token) -> Outcome:
    M, N = args[0].value, args[1].value
    L = args[2] if len(args) > 2 else settings.EXT_RANGE
    return _computed({"dims": list(ext_dims(M, N, L, token=token))})


def cmd_hom(args, options, token) -> Outcome:
    return _computed({"dim": hom_space(args[0].value, args[1].value).dim})


def cmd_decompose(args, options, token) -> Outcome:
    krs = krs_decompose(args[0].value, token=token)
    return _computed({"dims": list(krs.dims), "certificates": [c.value for c in krs.certificates]})


def cmd_isomorphic(args, options, token) -> Outcome:
    result = is_isomorphic(args[0].value, args[1].value, token=token)
    return _computed({"isomorphic": result.isomorphic, "exact": result.exact, "reason": result.reason})


def cmd_homology(args, options, token) -> Outcome:
    return _computed({"dims": homology_dims(args[0].value)})


def cmd_annihilator(args, options, token) -> Outcome:
    ann, supported = ann_supp(args[0].value)
    return _computed({"dim": ann.cols, "basis": _columns(ann), "faithful": ann.cols == 0, "support_is_maximal_ideal": supported})


def cmd_socle(args, options, token) -> Outcome:
    soc = socle(args[0].value)
    return _computed({"dim": soc.cols, "basis": _columns(soc)})


def cmd_filtration(args, options, token) -> Outcome:
    chain = radical_filtration(args[0].value)
    return _computed({"dims": [c.cols for c in chain], "loewy_length": len(chain) - 1})


def cmd_tensor(args, options, token) -> Outcome:
    T, _ = tensor_modules(args[0].value, args[1].value)
    return _computed({"dim": T.dim, "pieces": list(krs_decompose(T, token=token).dims) if T.dim else []})


def _chain_map(X, Y, args, position: int):
    """Chain map X → Y from coefficients on the morphism_space basis; seeded random when omitted."""
    basis = morphism_space(X, Y)
    if len(args) > position:
        coeffs = parse_scalars(X.algebra.field, args[position])
    else:
        rng = random.Random(settings.SEED)
        coeffs = [rng.randint(-2, 2) for _ in basis]
    return combine_morphisms(X, Y, basis, coeffs), len(basis), coeffs


def cmd_quasi_iso(args, options, token) -> Outcome:
    alpha, dim, coeffs = _chain_map(args[0].value, args[1].value, args, 2)
    return _computed({"morphism_space_dim": dim, "coefficients": coeffs, "quasi_iso": is_quasi_iso(alpha)})


def cmd_hom_qis(args, options, token) -> Outcome:
    """Hom(P, α) quasi-isomorphism ⇒ α quasi-isomorphism, for α: X → Y."""
    P = args[0].value
    alpha, dim, coeffs = _chain_map(args[1].value, args[2].value, args, 3)
    result = prop24_harness(alpha, P).as_dict()
    result.update({"morphism_space_dim": dim, "coefficients": coeffs})
    return _computed(result)


# =========================================================================
# MAPS AND ASCENT
# =========================================================================

def cmd_dagger(args, options, token) -> Outcome:
    return _computed(check_dagger(args[0].value).as_dict())


def cmd_flat(args, options, token) -> Outcome:
    report = is_flat(args[0].value)
    return _computed({"flat": report.flat, "rank": report.rank, "syzygy_dim": report.syzygy_dim})


def cmd_ascend(args, options, token) -> Outcome:
    L = args[2] if len(args) > 2 else None
    report = compatibility_report(args[0].value, args[1].value, L=L, token=token)
    result = report.as_dict()
    return Outcome(plain({"conditions": result["conditions"], "notes": result["notes"]}), dict(report.provenance))


def cmd_retract(args, options, token) -> Outcome:
    result = ring_retract(args[0].value, token=token)
    return _computed({"status": result.status, "method": result.method, "exists": result.exists})


def cmd_omega(args, options, token) -> Outcome:
    return _computed(omega_report(args[0].value, args[1].value).as_dict())


def _submodule_over_source(phi, N, text: str) -> Mat:
    """R-submodule of the S-module N generated by the listed coordinate vectors."""
    vectors = parse_vectors(N.field, text, N.dim)
    return generated_submodule(restrict(phi, N), vectors)


def cmd_vmax(args, options, token) -> Outcome:
    phi, N = args[0].value, args[1].value
    M = _submodule_over_source(phi, N, args[2])
    V = vmax(phi, N, M)
    return _computed({"submodule_dim": M.cols, "dim": V.dim, "basis": _columns(V.basis)})


def cmd_hom_into_vmax(args, options, token) -> Outcome:
    phi, L, N = args[0].value, args[1].value, args[2].value
    M = _submodule_over_source(phi, N, args[3])
    if not prop16_check(phi, L, N, M):
        raise EquivalenceViolation("Hom_R(L, V(M)) → Hom_R(L, M) is not bijective", {"L": L.name, "N": N.name})
    return _computed({"bijective": True, "vmax_dim": vmax(phi, N, M).dim})


# =========================================================================
# EXTENDED MODULES
# =========================================================================

def cmd_extended(args, options, token) -> Outcome:
    """Extendedness; a non-extended N over a separable extension also gets its summand splitting."""
    E, N = _extension(args[0]), args[1].value
    witness = is_extended(E, N, token=token)
    result: Dict[str, Any] = {"status": "extended" if witness is not None else "not extended", "extended": witness is not None}
    if witness is not None:
        result["module_dim"] = witness.module.dim
        result["module_pieces"] = list(krs_decompose(witness.module, token=token).dims)
    elif separability_idempotent(E) is not None:
        split = summand_of_extended(E, N)
        result["summand"] = {"module_dim": split.module.dim, "extended_dim": split.change.module.dim, "verified": True}
    return _computed(result)


def cmd_brute_extended(args, options, token) -> Outcome:
    E, N = _extension(args[0]), args[1].value
    oracle = brute_force_extended(E, N, token=token) is not None
    search = is_extended(E, N, token=token) is not None
    if oracle != search:
        raise EquivalenceViolation("KRS search and brute-force oracle disagree", {"module": N.name, "oracle": oracle, "search": search})
    return _computed({"extended": search, "oracle": oracle})


def cmd_matrix_equiv(args, options, token) -> Outcome:
    E, c = _extension(args[0]), args[1]
    verdict = matrix_equiv_1x1(E, c).equivalent
    extended = is_extended(E, example37_module(E, c), token=token) is not None
    if verdict != extended:
        raise EquivalenceViolation("1×1 matrix criterion disagrees with is_extended", {"c": c, "matrix": verdict, "extended": extended})
    return _computed({"c": c, "equivalent": verdict, "extended": extended})


def cmd_separable(args, options, token) -> Outcome:
    sep = separability_idempotent(_extension(args[0]))
    if sep is None:
        return _computed({"separable": False})
    return _computed({"separable": True, "unique": sep.unique, "idempotent": list(sep.lifted)})


def cmd_two_of_three(args, options, token) -> Outcome:
    E, N1, N2 = _extension(args[0]), args[1].value, args[2].value
    N = direct_sum(N1, N2, name=f"{N1.name}⊕{N2.name}")
    w1, w2, w = (is_extended(E, X, token=token) for X in (N1, N2, N))
    status = {"N1": w1 is not None, "N2": w2 is not None, "N": w is not None}
    result: Dict[str, Any] = {"extended": status}
    if sum(status.values()) >= 2:
        derived = two_of_three_sum(E, N1, N2, w1, w2, w, token=token)
        result["derived"] = derived.derived
        result["derived_dim"] = derived.witness.module.dim
    elif status["N"]:
        raise EquivalenceViolation("N1 ⊕ N2 extended while neither summand is", {"N1": N1.name, "N2": N2.name})
    return _computed(result)


def cmd_levels(args, options, token) -> Outcome:
    t = args[2] if len(args) > 2 else None
    return _computed({"levels": guralnick_levels(args[0].value, args[1].value, t, token=token)})


def cmd_restrict_power(args, options, token) -> Outcome:
    E, M = _extension(args[0]), args[1].value
    if not restricted_base_change_is_power(E, M, token=token):
        raise EquivalenceViolation("restrict(S ⊗ M) is not M^r", {"module": M.name, "rank": E.rank})
    return _computed({"holds": True, "rank": E.rank})


def _witness(E: FiniteExtension, N, token):
    w = is_extended(E, N, token=token)
    if w is None:
        raise HypothesisViolation(f"{N.name} is not extended", clause="extended")
    return w


def cmd_descend_extension(args, options, token) -> Outcome:
    E, N1, N2 = _extension(args[0]), args[1].value, args[2].value
    coeffs = parse_scalars(E.target.field, args[3]) if len(args) > 3 else None
    result = prop32_finite(E, 1, token=token, w1=_witness(E, N1, token), w2=_witness(E, N2, token), coefficients=coeffs)
    return _computed(result.as_dict())


def _descend_map(case: int, args, token) -> Outcome:
    E, N, N2 = _extension(args[0]), args[1].value, args[2].value
    g = parse_matrix(E.target.field, args[3], cols=N.dim)
    if (g.rows, g.cols) != (N2.dim, N.dim):
        raise InvariantViolation(f"g must be {N2.dim}×{N.dim}, got {g.rows}×{g.cols}")
    result = prop32_finite(E, case, token=token, w=_witness(E, N, token), w2=_witness(E, N2, token), g=g)
    return _computed(result.as_dict())


def cmd_descend_kernel(args, options, token) -> Outcome:
    return _descend_map(2, args, token)


def cmd_descend_cokernel(args, options, token) -> Outcome:
    return _descend_map(3, args, token)


# =========================================================================
# PID MODEL AND GALLERY
# =========================================================================

def cmd_pid_ascent(args, options, token) -> Outcome:
    M = args[0].value
    report = completion_ascent(M)
    decision = thm113_decision(M)
    result = report.as_dict()
    provenance = dict(report.provenance)
    provenance["per_prime"] = "computed"
    return Outcome(plain({"conditions": result["conditions"], "per_prime": decision.per_prime}), provenance)


def cmd_pid_ext(args, options, token) -> Outcome:
    return _computed({"ext": ext_pid(args[0].value, args[1].value, args[2]).as_dict()})


def cmd_pid_classify(args, options, token) -> Outcome:
    """Invariants of a declared module, with the presentation and Jordan round trips."""
    decl = args[0]
    M = decl.value
    presentation = decl.extra.get("presentation") or presentation_of_pid(M)
    again = classify(presentation_of_pid(M))
    if classify(presentation) != M or again != M:
        raise EquivalenceViolation("presentation round trip changed the invariants", {"module": M.format(), "again": again.format()})
    if M.is_torsion and classify_jordan(jordan_matrix(M)) != M:
        raise EquivalenceViolation("Jordan classification differs", {"module": M.format()})
    return _computed({"module": M.as_dict(), "format": M.format(), "relation_rows": presentation.relations.rows, "generators": presentation.generators})


def cmd_pid_extend(args, options, token) -> Outcome:
    N = base_change_pid(args[0].value)
    return _computed({"over_s": N.as_dict(), "descended": extend_pid(N).as_dict()})


def _extension_class(text: str):
    try:
        return int(text)
    except ValueError:
        return [optional_ints(split_list(row)) for row in split_list(text)]


def cmd_pid_extension(args, options, token) -> Outcome:
    M1, M2 = args[0].value, args[1].value
    cls = _extension_class(args[2]) if len(args) > 2 else None
    result = prop32_case1_pid(M1, M2, cls)
    out = result.as_dict()
    if len(M1.exponents) == 1 and len(M2.exponents) == 1 and not isinstance(cls, list):
        a, b = M1.exponents[0], M2.exponents[0]
        expected = middle_formula(a, b, min(a, b) if cls is None else cls)
        if expected != result.middle:
            raise EquivalenceViolation("middle term differs from the cyclic formula", {"formula": expected.format(), "middle": result.middle.format()})
        out["formula"] = expected.as_dict()
    return _computed(out)


def cmd_pid_vmax(args, options, token) -> Outcome:
    """V(M) for the R-submodule of S⊗N generated by elements listed as [free..., torsion...] series."""
    N = base_change_pid(args[0].value)
    gens = []
    for item in split_list(args[1]):
        polys = parse_polys(QQ, item)
        if len(polys) != N.free_rank + len(N.exponents):
            raise InvariantViolation(f"element {item} needs {N.free_rank + len(N.exponents)} coordinates")
        gens.append(PIDElement(tuple(polys[: N.free_rank]), tuple(polys[N.free_rank:])))
    V = vmax_pid(N, gens, settings.PID_PRECISION)
    return _computed({"vmax": V.as_dict(), "format": V.format(), "precision": settings.PID_PRECISION})


_GALLERY_OPTIONS = ("p", "N", "n", "L")


def cmd_gallery(args, options, token) -> Outcome:
    params = {key: _int_option(options, key) for key in _GALLERY_OPTIONS if key in options}
    report = gallery(args[0], token=token, **params)
    return Outcome(plain({"item": report.item, "params": report.params, "values": report.values}), dict(report.provenance))


COMMANDS: Dict[str, CommandSpec] = {
    "ext": CommandSpec(cmd_ext, (ArgKind.MODULE, ArgKind.MODULE), (ArgKind.INT,), summary="dim Ext^i(M, N), i = 0..L"),
    "hom": CommandSpec(cmd_hom, (ArgKind.MODULE, ArgKind.MODULE), summary="dim Hom(M, N)"),
    "decompose": CommandSpec(cmd_decompose, (ArgKind.MODULE,), summary="KRS piece dimensions"),
    "isomorphic": CommandSpec(cmd_isomorphic, (ArgKind.MODULE, ArgKind.MODULE), summary="M ≅ N"),
    "homology": CommandSpec(cmd_homology, (ArgKind.COMPLEX,), summary="dim H_n per degree"),
    "annihilator": CommandSpec(cmd_annihilator, (ArgKind.MODULE,), summary="Ann(M) and support"),
    "socle": CommandSpec(cmd_socle, (ArgKind.MODULE,), summary="socle of M"),
    "filtration": CommandSpec(cmd_filtration, (ArgKind.MODULE,), summary="radical filtration dimensions"),
    "tensor": CommandSpec(cmd_tensor, (ArgKind.MODULE, ArgKind.MODULE), summary="M ⊗ N"),
    "quasi_iso": CommandSpec(cmd_quasi_iso, (ArgKind.COMPLEX, ArgKind.COMPLEX), (ArgKind.TEXT,), summary="is the chain map X → Y a quasi-isomorphism"),
    "hom_qis": CommandSpec(cmd_hom_qis, (ArgKind.COMPLEX, ArgKind.COMPLEX, ArgKind.COMPLEX), (ArgKind.TEXT,), summary="Hom(P, α) qis ⇒ α qis"),
    "dagger": CommandSpec(cmd_dagger, (ArgKind.MAP,), summary="condition (†)"),
    "flat": CommandSpec(cmd_flat, (ArgKind.MAP,), summary="freeness and rank"),
    "ascend": CommandSpec(cmd_ascend, (ArgKind.MAP, ArgKind.MODULE), (ArgKind.INT,), summary="ascent conditions"),
    "retract": CommandSpec(cmd_retract, (ArgKind.MAP,), summary="ring retract of φ"),
    "omega": CommandSpec(cmd_omega, (ArgKind.MAP, ArgKind.COMPLEX), summary="ω: X → S⊗X"),
    "vmax": CommandSpec(cmd_vmax, (ArgKind.MAP, ArgKind.MODULE, ArgKind.TEXT), summary="V(M) inside an S-module"),
    "hom_into_vmax": CommandSpec(cmd_hom_into_vmax, (ArgKind.MAP, ArgKind.MODULE, ArgKind.MODULE, ArgKind.TEXT), summary="Hom(L, V(M)) ≅ Hom(L, M)"),
    "extended": CommandSpec(cmd_extended, (ArgKind.MAP, ArgKind.MODULE), summary="is N extended"),
    "brute_extended": CommandSpec(cmd_brute_extended, (ArgKind.MAP, ArgKind.MODULE), summary="oracle cross-check"),
    "matrix_equiv": CommandSpec(cmd_matrix_equiv, (ArgKind.MAP, ArgKind.TEXT), summary="X + cY over the base"),
    "separable": CommandSpec(cmd_separable, (ArgKind.MAP,), summary="separability idempotent"),
    "two_of_three": CommandSpec(cmd_two_of_three, (ArgKind.MAP, ArgKind.MODULE, ArgKind.MODULE), summary="two out of three"),
    "levels": CommandSpec(cmd_levels, (ArgKind.MODULE, ArgKind.MODULE), (ArgKind.INT,), summary="M1 ∣ M modulo m^t"),
    "restrict_power": CommandSpec(cmd_restrict_power, (ArgKind.MAP, ArgKind.MODULE), summary="restrict(S⊗M) ≅ M^r"),
    "descend_extension": CommandSpec(cmd_descend_extension, (ArgKind.MAP, ArgKind.MODULE, ArgKind.MODULE), (ArgKind.TEXT,), summary="descent of an extension class"),
    "descend_kernel": CommandSpec(cmd_descend_kernel, (ArgKind.MAP, ArgKind.MODULE, ArgKind.MODULE, ArgKind.TEXT), summary="descent of ker g"),
    "descend_cokernel": CommandSpec(cmd_descend_cokernel, (ArgKind.MAP, ArgKind.MODULE, ArgKind.MODULE, ArgKind.TEXT), summary="descent of coker g"),
    "pid_ascent": CommandSpec(cmd_pid_ascent, (ArgKind.PID,), summary="ascent along R → R̂"),
    "pid_ext": CommandSpec(cmd_pid_ext, (ArgKind.PID, ArgKind.PID, ArgKind.INT), summary="Ext^i over the local PID"),
    "pid_classify": CommandSpec(cmd_pid_classify, (ArgKind.PID,), summary="invariants with round trips"),
    "pid_extend": CommandSpec(cmd_pid_extend, (ArgKind.PID,), summary="descend S⊗P back to R"),
    "pid_extension": CommandSpec(cmd_pid_extension, (ArgKind.PID, ArgKind.PID), (ArgKind.TEXT,), summary="middle term of an extension"),
    "pid_vmax": CommandSpec(cmd_pid_vmax, (ArgKind.PID, ArgKind.TEXT), summary="V(M) in S⊗N"),
    "gallery": CommandSpec(cmd_gallery, (ArgKind.TEXT,), options=_GALLERY_OPTIONS, summary="counterexample gallery"),
}


def resolve_args(session: Session, spec: CommandSpec, command: Command) -> List[Any]:
    """Declarations for identifier arguments, ints and raw text otherwise."""
    kinds = spec.params + spec.optional[: max(0, len(command.args) - len(spec.params))]
    if not len(spec.params) <= len(command.args) <= len(spec.params) + len(spec.optional):
        raise InvariantViolation(
            f"{command.name} takes {len(spec.params)}"
            + (f"..{len(spec.params) + len(spec.optional)}" if spec.optional else "")
            + f" arguments, got {len(command.args)}"
        )
    unknown = [k for k, _ in command.options if k not in spec.options]
    if unknown:
        raise InvariantViolation(f"{command.name} has no option {unknown[0]!r}")
    out: List[Any] = []
    for kind, text in zip(kinds, command.args):
        if kind.decl_kind is not None:
            out.append(lookup(session, text, kind.decl_kind))
        elif kind == ArgKind.INT:
            try:
                out.append(int(text))
            except ValueError:
                raise InvariantViolation(f"{command.name} expects an integer, got {text!r}")
        else:
            out.append(text)
    return out


def execute(session: Session, command: Command, token: Optional[CancellationToken] = None) -> Outcome:
    spec = COMMANDS.get(command.name)
    if spec is None:
        raise HypothesisViolation(f"unknown command {command.name!r}")
    args = resolve_args(session, spec, command)
    logger.info(f"Running [{command.index}] {command.text}")
    return spec.handler(args, dict(command.options), token)


def command_names() -> Sequence[str]:
    return sorted(COMMANDS)
