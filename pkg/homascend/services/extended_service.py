"""
Extended Modules Service.

For a module-finite free extension φ: R → S decides whether an S-module
is S ⊗_R M, derives the third term of extended sums and short exact
sequences, and builds the splitting that makes every module a summand of an
extended one when S is separable over R.
"""
import logging
from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from homascend.core.cancellation import CancellationToken, checkpoint
from homascend.core.config import settings
from homascend.core.errors import (
    BoundsExceeded,
    EquivalenceViolation,
    HypothesisViolation,
    InvariantViolation,
)
from homascend.core.fields import QQ, ExtElem, SimpleExtension, parse_scalar
from homascend.core.linalg import Mat, Vector, span_basis, unit_vector
from homascend.services.algebra_service import (
    AlgebraMap,
    LocalAlgebra,
    algebra_from_presentation,
    algebra_tensor_extension,
    is_flat,
    quotient_algebra,
    radical_power,
)
from homascend.services.ascent_service import compatible_structure
from homascend.services.decomposition import (
    complement_pieces,
    decide_isomorphic,
    divides,
    krs_decompose,
    verify_isomorphism,
)
from homascend.services.module_service import (
    BaseChange,
    FModule,
    Resolution,
    base_change,
    base_change_map,
    cover_matrix,
    cyclic_module,
    direct_sum,
    ext_from_resolution,
    free_module,
    generated_submodule,
    hom_cochain,
    hom_space,
    is_module_map,
    minimal_resolution,
    module_from_generator_actions,
    quotient_module,
    regular_module,
    restrict,
    submodule,
    zero_module,
)

logger = logging.getLogger(__name__)


# =========================================================================
# EXTENSIONS AND WITNESSES
# =========================================================================

@dataclass(frozen=True, eq=False)
class FiniteExtension:
    """Flat module-finite φ: R → S with a free R-basis of S."""
    phi: AlgebraMap
    basis: Tuple[Vector, ...]
    scalars: Optional[SimpleExtension] = None

    @property
    def source(self) -> LocalAlgebra:
        return self.phi.source

    @property
    def target(self) -> LocalAlgebra:
        return self.phi.target

    @property
    def rank(self) -> int:
        return len(self.basis)


def finite_extension(phi: AlgebraMap, scalars: Optional[SimpleExtension] = None) -> FiniteExtension:
    flat = is_flat(phi)
    if not flat.flat:
        raise HypothesisViolation(f"{phi.name} is not free over its source", clause="flat")
    return FiniteExtension(phi, flat.basis, scalars)


def tensor_extension(K: SimpleExtension, R: LocalAlgebra, name: str = "S") -> FiniteExtension:
    """R → K ⊗_k R, free of rank deg K."""
    _, phi = algebra_tensor_extension(K, R, name=name)
    return finite_extension(phi, scalars=K)


@dataclass(frozen=True, eq=False)
class ExtendedWitness:
    """M over R with an S-linear isomorphism ``iso``: S ⊗_R M → target."""
    module: FModule
    change: BaseChange
    iso: Mat
    target: FModule

    def verify(self) -> None:
        if not verify_isomorphism(self.change.module, self.target, self.iso):
            raise InvariantViolation(f"witness for {self.target.name} is not an S-isomorphism")

    def as_dict(self) -> Dict[str, Any]:
        return {"module": self.module.name, "dim": self.module.dim, "target": self.target.name}


def witness_for(E: FiniteExtension, M: FModule, N: FModule, token: Optional[CancellationToken] = None) -> Optional[ExtendedWitness]:
    """Witness S ⊗_R M ≅ N, or None."""
    change = base_change(E.phi, M)
    result = decide_isomorphic(change.module, N, token=token)
    if not result:
        return None
    witness = ExtendedWitness(M, change, result.witness, N)
    witness.verify()
    return witness


def restricted_base_change_is_power(E: FiniteExtension, M: FModule, token: Optional[CancellationToken] = None) -> bool:
    """restrict(S ⊗_R M) ≅ M^r."""
    restricted = restrict(E.phi, base_change(E.phi, M).module)
    power = direct_sum(*([M] * E.rank)) if M.dim else zero_module(M.algebra)
    return bool(decide_isomorphic(restricted, power, token=token))


def _isotypes(pieces: Sequence[FModule], token: Optional[CancellationToken]) -> List[Tuple[FModule, int]]:
    groups: List[Tuple[FModule, int]] = []
    for P in pieces:
        for g, (rep, count) in enumerate(groups):
            if decide_isomorphic(rep, P, token=token):
                groups[g] = (rep, count + 1)
                break
        else:
            groups.append((P, 1))
    return groups


def is_extended(E: FiniteExtension, N: FModule, token: Optional[CancellationToken] = None) -> Optional[ExtendedWitness]:
    """
    Decide whether N ≅ S ⊗_R M.

    If so, restrict(N) ≅ M^r, so by Krull–Remak–Schmidt every isotype among
    the indecomposable pieces of restrict(N) has multiplicity divisible by r
    and M is forced to be the r-th part of that multiset. The single
    candidate is then tested.
    """
    if N.algebra is not E.target:
        raise InvariantViolation(f"{N.name} is not a module over {E.target.name}")
    R = E.source
    if N.dim == 0:
        return witness_for(E, zero_module(R), N, token)
    if N.dim % E.rank:
        return None
    pieces = krs_decompose(restrict(E.phi, N), token=token).pieces
    chosen: List[FModule] = []
    for rep, count in _isotypes(pieces, token):
        if count % E.rank:
            logger.debug(f"{N.name}: isotype of dim {rep.dim} occurs {count} times, rank {E.rank}")
            return None
        chosen += [rep] * (count // E.rank)
    M = direct_sum(*chosen, name=f"M({N.name})")
    return witness_for(E, M, N, token)


def brute_force_extended(E: FiniteExtension, N: FModule, token: Optional[CancellationToken] = None) -> Optional[ExtendedWitness]:
    """
    Independent oracle: every R-module of dimension dim N / r whose generator
    actions are strictly upper triangular with entries from the scalar grid
    (all of a finite field) is base-changed and compared with N.
    """
    R = E.source
    if N.dim > settings.BRUTE_FORCE_DIM_CAP:
        raise BoundsExceeded(f"brute force is capped at dimension {settings.BRUTE_FORCE_DIM_CAP}")
    if N.dim % E.rank:
        return None
    n = N.dim // E.rank
    field = R.field
    grid = list(field.elements()) if field.is_finite else [field.coerce(v) for v in settings.SCALAR_GRID]
    slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    nvars = len(R.variables)
    if len(grid) ** (len(slots) * nvars) > settings.BRUTE_FORCE_CANDIDATES:
        raise BoundsExceeded(f"{len(grid)}^{len(slots) * nvars} candidates exceed the configured cap")
    tried = 0
    for entries in product(grid, repeat=len(slots) * nvars):
        checkpoint(token)
        mats = []
        for v in range(nvars):
            data = [[field.zero] * n for _ in range(n)]
            for (i, j), c in zip(slots, entries[v * len(slots):(v + 1) * len(slots)]):
                data[i][j] = c
            mats.append(Mat(field, data, n, n))
        try:
            M = module_from_generator_actions(R, mats, n, name="M")
        except InvariantViolation:
            continue
        tried += 1
        witness = witness_for(E, M, N, token)
        if witness is not None:
            return witness
    logger.debug(f"brute force: {tried} valid candidates, none extends to {N.name}")
    return None


# =========================================================================
# THE (X, Y)² TRUNCATION OVER A QUADRATIC FIELD
# =========================================================================

def example37_extension(K: Optional[SimpleExtension] = None) -> FiniteExtension:
    """R = k[X,Y]/(X,Y)² → S = K ⊗_k R (default K = ℚ(i))."""
    if K is None:
        K = SimpleExtension(QQ, [1, 0, 1], gen_name="i")
    R = algebra_from_presentation(K.base, ["X", "Y"], [], 2, name="R")
    return tensor_extension(K, R, name="S")


def _scalar(E: FiniteExtension, c: Union[str, int, ExtElem]) -> ExtElem:
    if E.scalars is None:
        raise HypothesisViolation("needs an extension of scalars", clause="tensor extension")
    return c if isinstance(c, ExtElem) else parse_scalar(E.scalars, c)


def linear_form(E: FiniteExtension, c: Union[str, int, ExtElem]) -> Vector:
    """X + c·Y in S."""
    S = E.target
    c = _scalar(E, c)
    t, X, Y = S.generators[0], S.generators[1], S.generators[2]
    acc = X
    for j, coeff in enumerate(c.coeffs):
        if coeff:
            term = S.mul(S.power(t, j), Y)
            acc = tuple(a + coeff * b for a, b in zip(acc, term))
    return acc


def example37_module(E: FiniteExtension, c: Union[str, int, ExtElem]) -> FModule:
    """S/(X + cY)."""
    return cyclic_module(E.target, [linear_form(E, c)], name=f"S/(X+({c})Y)")


@dataclass(frozen=True)
class MatrixEquivalence:
    equivalent: bool
    unit: Optional[Vector] = None
    entry: Optional[Vector] = None


def matrix_equiv_1x1(E: FiniteExtension, c: Union[str, int, ExtElem]) -> MatrixEquivalence:
    """
    Is the 1×1 matrix X + cY equivalent to r + sX + tY with r, s, t in the
    base field? Comparing coefficients in u·(r + sX + tY) = X + cY: the
    constant term forces r = 0, the X-coefficient gives u₀ = 1/s in the base
    field, and then c = t/s.
    """
    R, S = E.source, E.target
    if len(R.variables) != 2 or R.nilpotency != 2:
        raise HypothesisViolation("needs R = k[X,Y]/(X,Y)²", clause="(X,Y)² truncation")
    c = _scalar(E, c)
    if any(c.coeffs[1:]):
        return MatrixEquivalence(False)
    t = c.coeffs[0]
    entry = tuple(a + t * b for a, b in zip(R.generators[0], R.generators[1]))
    unit = S.unit
    if S.mul(unit, E.phi.apply(entry)) != linear_form(E, c):
        raise EquivalenceViolation("coefficient comparison produced a wrong factorization", {"c": str(c)})
    return MatrixEquivalence(True, unit, entry)


# =========================================================================
# TWO OUT OF THREE
# =========================================================================

@dataclass(frozen=True)
class TwoOfThree:
    derived: str  # "N", "N1" or "N2"
    witness: ExtendedWitness


def two_of_three_sum(
    E: FiniteExtension,
    N1: FModule,
    N2: FModule,
    w1: Optional[ExtendedWitness] = None,
    w2: Optional[ExtendedWitness] = None,
    w: Optional[ExtendedWitness] = None,
    token: Optional[CancellationToken] = None,
) -> TwoOfThree:
    """
    Given witnesses for two of N1, N2, N = N1 ⊕ N2, produce one for the third.
    The complement case uses KRS over R: M1 ∣ M, then M2 is what remains.
    """
    supplied = [x for x in (w1, w2, w) if x is not None]
    if len(supplied) < 2:
        raise HypothesisViolation("two of the three witnesses are required", clause="two of three")
    for x in supplied:
        x.verify()
    if w1 is not None and w2 is not None:
        N = direct_sum(N1, N2, name=f"{N1.name}⊕{N2.name}")
        witness = witness_for(E, direct_sum(w1.module, w2.module), N, token)
        if witness is None:
            raise EquivalenceViolation("S⊗(M1 ⊕ M2) is not isomorphic to N1 ⊕ N2", {"N1": N1.name, "N2": N2.name})
        return TwoOfThree("N", witness)
    if w.target.dim != N1.dim + N2.dim:
        raise InvariantViolation("witness for N does not match N1 ⊕ N2")
    known, other, derived = (w1, N2, "N2") if w1 is not None else (w2, N1, "N1")
    rest = complement_pieces(known.module, w.module, token=token)
    if rest is None:
        raise EquivalenceViolation("known summand does not divide M over R", {"summand": known.module.name})
    M_other = direct_sum(*rest, name="M'") if rest else zero_module(E.source)
    witness = witness_for(E, M_other, other, token)
    if witness is None:
        raise EquivalenceViolation(f"complement over R does not base-change to {other.name}", {"derived": derived})
    return TwoOfThree(derived, witness)


# =========================================================================
# LEVELS R/m^t
# =========================================================================

def _reduce_to_level(M: FModule, projection: AlgebraMap, t: int) -> FModule:
    R = M.algebra
    ideal = radical_power(R, t)
    W = span_basis(M.field, M.dim, [col for r in ideal.columns() for col in M.act(r).columns()])
    Q = quotient_module(M, W, name=f"{M.name}/m^{t}").module
    reduced = compatible_structure(projection, Q)
    if reduced is None:
        raise EquivalenceViolation("m^t does not annihilate M/m^t M", {"level": t})
    return reduced


def guralnick_levels(M1: FModule, M: FModule, levels: Optional[int] = None, token: Optional[CancellationToken] = None) -> Dict[int, bool]:
    """M1/m^t M1 ∣ M/m^t M over R/m^t for t = 1..levels."""
    R = M.algebra
    if M1.algebra is not R:
        raise InvariantViolation("modules over different algebras")
    top = R.nilpotency
    levels = top if levels is None else levels
    if not 1 <= levels <= top:
        raise BoundsExceeded(f"levels must lie in 1..{top}")
    out: Dict[int, bool] = {}
    for t in range(1, levels + 1):
        _, projection = quotient_algebra(R, radical_power(R, t).columns(), name=f"{R.name}/m^{t}")
        out[t] = divides(_reduce_to_level(M1, projection, t), _reduce_to_level(M, projection, t), token=token)
    if levels == top and out[top] != divides(M1, M, token=token):
        raise EquivalenceViolation("top level disagrees with divisibility over R", {"level": top})
    return out


# =========================================================================
# SEPARABILITY
# =========================================================================

@dataclass(frozen=True, eq=False)
class SeparabilityIdempotent:
    """e ∈ S ⊗_R S with μ(e) = 1 and (s⊗1 − 1⊗s)e = 0; ``tensor`` holds the quotient coordinates."""
    element: Vector
    tensor: BaseChange
    unique: bool

    @property
    def lifted(self) -> Vector:
        """Coordinates in S ⊗_k S (index a·dim S + b)."""
        return self.tensor.quotient.lift.apply(self.element)


def _tensor_left_mult(S: LocalAlgebra, x: Sequence[Any]) -> Mat:
    n = S.dim
    out = Mat.zeros(S.field, n * n, n * n)
    for a in range(n):
        for b in range(n):
            c = x[a * n + b]
            if c:
                out = out + S.mult_matrices[a].kron(S.mult_matrices[b]).scale(c)
    return out


def separability_idempotent(E: FiniteExtension) -> Optional[SeparabilityIdempotent]:
    """Solve the linear system for e; None when S is not separable over R."""
    phi, S = E.phi, E.target
    field, n = S.field, S.dim
    T = base_change(phi, restrict(phi, regular_module(S)), name=f"{S.name}⊗{S.name}")
    q = T.quotient
    I = Mat.identity(field, n)
    mu = Mat.from_columns(field, n, [S.table[a][b] for a in range(n) for b in range(n)]) @ q.lift
    blocks = [mu]
    rhs = list(S.unit)
    for g in S.generators or tuple(S.basis_vector(i) for i in range(n)):
        L = S.left_mult(g)
        blocks.append(q.induced(L.kron(I)) - q.induced(I.kron(L)))
        rhs += [field.zero] * q.dim
    system = Mat.vstack(field, q.dim, blocks)
    e = system.solve(rhs)
    if e is None:
        logger.info(f"{S.name} is not separable over {E.source.name}")
        return None
    lifted = q.lift.apply(e)
    square = q.project.apply(_tensor_left_mult(S, lifted).apply(lifted))
    if tuple(square) != tuple(e):
        raise EquivalenceViolation("separability idempotent is not idempotent", {"extension": phi.name})
    return SeparabilityIdempotent(tuple(e), T, unique=system.kernel().cols == 0)


@dataclass(frozen=True, eq=False)
class SummandSplitting:
    """N → S ⊗_R M → N with M = restrict(N); ``pi @ j`` is the identity."""
    module: FModule
    change: BaseChange
    j: Mat
    pi: Mat


def summand_of_extended(E: FiniteExtension, N: FModule) -> SummandSplitting:
    """Split injection j(x) = Σ a_i ⊗ b_i·x from e = Σ a_i ⊗ b_i, retraction s ⊗ x ↦ s·x."""
    sep = separability_idempotent(E)
    if sep is None:
        raise HypothesisViolation(f"{E.target.name} is not separable over {E.source.name}", clause="separable")
    phi, S = E.phi, E.target
    field, n, d = S.field, S.dim, N.dim
    M = restrict(phi, N, name=f"{N.name}|R")
    change = base_change(phi, M)
    e = sep.lifted
    cols = []
    for m in range(d):
        v = [field.zero] * (n * d)
        for a in range(n):
            for b in range(n):
                c = e[a * n + b]
                if not c:
                    continue
                w = N.action[b].apply(unit_vector(field, d, m))
                for k in range(d):
                    v[a * d + k] = v[a * d + k] + c * w[k]
        cols.append(v)
    j = change.quotient.project @ Mat.from_columns(field, n * d, cols)
    pi = Mat.hstack(field, d, list(N.action)) @ change.quotient.lift
    if d and not (pi @ j).is_identity():
        raise EquivalenceViolation("π∘j ≠ id", {"module": N.name})
    for g in S.generators:
        if change.module.act(g) @ j != j @ N.act(g) or pi @ change.module.act(g) != N.act(g) @ pi:
            raise EquivalenceViolation("splitting maps are not S-linear", {"module": N.name})
    return SummandSplitting(M, change, j, pi)


# =========================================================================
# DESCENT OF EXTENSIONS, KERNELS, COKERNELS
# =========================================================================

@dataclass
class DescentResult:
    status: str  # "extended" or "descent-obstruction"
    witness: Optional[ExtendedWitness] = None
    details: Dict[str, Any] = dc_field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        out = {"status": self.status, "details": dict(self.details)}
        if self.witness is not None:
            out["witness"] = self.witness.as_dict()
        return out


def base_change_resolution(res: Resolution, change: BaseChange) -> Resolution:
    """S ⊗_R P for a free resolution P of M; exact because S is flat."""
    phi = change.phi
    S = phi.target
    images = [tuple(change.iota.apply(g) for g in res.generator_images[0])]
    for i in range(1, len(res.betti)):
        imgs = []
        for l in range(res.betti[i]):
            v: List[Any] = []
            for m in range(res.betti[i - 1]):
                v.extend(phi.apply(res.coefficient(i - 1, m, l)))
            imgs.append(tuple(v))
        images.append(tuple(imgs))
    augmentation = cover_matrix(change.module, images[0])
    differentials = tuple(
        cover_matrix(free_module(S, res.betti[i]), images[i + 1]) for i in range(len(res.betti) - 1)
    )
    out = Resolution(change.module, res.betti, augmentation, differentials, tuple(images))
    out.verify()
    return out


def _cochain_vector(z: Mat) -> Vector:
    """Columns f(e_l) stacked block by block."""
    return z.T.flatten()


def extension_middle(res: Resolution, z: Mat, M1: FModule, name: str = "E") -> FModule:
    """(M1 ⊕ P0) / {(−z(y), d(y)) : y ∈ P1} for a 1-cocycle z: P1 → M1."""
    A = M1.algebra
    total = direct_sum(M1, free_module(A, res.betti[0]), name=name)
    vectors = [
        tuple(-a for a in z.column(l)) + tuple(res.generator_images[1][l])
        for l in range(res.betti[1])
    ]
    return quotient_module(total, generated_submodule(total, vectors), name=name).module


def prop32_extension(
    E: FiniteExtension,
    w1: ExtendedWitness,
    w2: ExtendedWitness,
    coefficients: Optional[Sequence[Any]] = None,
    token: Optional[CancellationToken] = None,
) -> DescentResult:
    """
    Middle term of the S-extension of N2 by N1 whose class has the given
    coordinates on the Ext¹_S basis; descended to R when the class lies in
    the image of α: Ext¹_R(M2, M1) → Ext¹_S(S⊗M2, N1).
    """
    w1.verify()
    w2.verify()
    S = E.target
    M1, M2, N1 = w1.module, w2.module, w1.target
    field = S.field
    res = minimal_resolution(M2, 2, token=token)
    res_S = base_change_resolution(res, w2.change)
    ext_R = ext_from_resolution(res, M1, 1)
    ext_S = ext_from_resolution(res_S, N1, 1)
    length = res.betti[1] * N1.dim

    carry = w1.iso @ w1.change.iota
    alpha = [carry @ z for z in ext_R.representatives]
    boundaries = hom_cochain(res_S, N1, 0).columns()
    cycles = hom_cochain(res_S, N1, 1).kernel()
    s_span = [_cochain_vector(N1.act(S.basis_vector(a)) @ z) for z in alpha for a in range(S.dim)]
    surjective = span_basis(field, length, boundaries + s_span).cols == span_basis(field, length, boundaries + cycles.columns()).cols
    beta_iso = surjective and ext_S.dim == E.rank * ext_R.dim
    if not beta_iso:
        raise EquivalenceViolation(
            "β: S⊗Ext¹_R → Ext¹_S is not an isomorphism for a flat map",
            {"ext_R": ext_R.dim, "ext_S": ext_S.dim, "rank": E.rank},
        )

    c = Mat.zeros(field, N1.dim, res.betti[1])
    for coeff, rep in zip(coefficients or (), ext_S.representatives):
        coeff = parse_scalar(field, coeff)
        if coeff:
            c = c + rep.scale(coeff)
    middle_S = extension_middle(res_S, c, N1, name="N")
    details = {"ext_R": ext_R.dim, "ext_S": ext_S.dim, "beta_iso": beta_iso}

    alpha_vecs = [_cochain_vector(z) for z in alpha]
    system = Mat.from_columns(field, length, alpha_vecs + boundaries)
    sol = system.solve(_cochain_vector(c))
    if sol is None:
        image = span_basis(field, length, boundaries + alpha_vecs).cols - span_basis(field, length, boundaries).cols
        details["alpha_cokernel_dim"] = ext_S.dim - image
        return DescentResult("descent-obstruction", None, details)

    z = Mat.zeros(field, M1.dim, res.betti[1])
    for coeff, rep in zip(sol, ext_R.representatives):
        if coeff:
            z = z + rep.scale(coeff)
    middle_R = extension_middle(res, z, M1, name="M")
    witness = witness_for(E, middle_R, middle_S, token)
    if witness is None:
        raise EquivalenceViolation("descended extension does not base-change to the middle term", details)
    return DescentResult("extended", witness, details)


def descend_map(w_src: ExtendedWitness, w_tgt: ExtendedWitness, g: Mat) -> Optional[Mat]:
    """R-linear f: M → M2 with S⊗f matching g under the witnesses, or None."""
    field = g.field
    H = hom_space(w_src.module, w_tgt.module)
    g_local = w_tgt.iso.inverse() @ g @ w_src.iso
    if H.dim == 0:
        return Mat.zeros(field, w_tgt.module.dim, w_src.module.dim) if g_local.is_zero() else None
    images = [base_change_map(w_src.change, w_tgt.change, f).flatten() for f in H.basis]
    sol = Mat.from_columns(field, len(images[0]), images).solve(g_local.flatten())
    return None if sol is None else H.combine(sol)


def _check_map(w: ExtendedWitness, w2: ExtendedWitness, g: Mat) -> None:
    w.verify()
    w2.verify()
    if not is_module_map(w.target, w2.target, g):
        raise InvariantViolation("g is not S-linear")


def descend_kernel(E: FiniteExtension, w: ExtendedWitness, w2: ExtendedWitness, g: Mat, token: Optional[CancellationToken] = None) -> DescentResult:
    """ker g for g: N → N2 between extended modules, via ker f over R."""
    _check_map(w, w2, g)
    f = descend_map(w, w2, g)
    if f is None:
        return DescentResult("descent-obstruction", None, {"reason": "g is not in the image of Hom_R"})
    M, N = w.module, w.target
    ker_R = submodule(M, span_basis(M.field, M.dim, f.kernel().columns()), name="ker f")
    ker_S = submodule(N, span_basis(N.field, N.dim, g.kernel().columns()), name="ker g")
    witness = witness_for(E, ker_R, ker_S, token)
    if witness is None:
        raise EquivalenceViolation("S⊗ker f is not isomorphic to ker g", {"dim_R": ker_R.dim, "dim_S": ker_S.dim})
    return DescentResult("extended", witness, {"dim": ker_S.dim})


def descend_cokernel(E: FiniteExtension, w: ExtendedWitness, w2: ExtendedWitness, g: Mat, token: Optional[CancellationToken] = None) -> DescentResult:
    """coker g for g: N → N2 between extended modules, via coker f over R."""
    _check_map(w, w2, g)
    f = descend_map(w, w2, g)
    if f is None:
        return DescentResult("descent-obstruction", None, {"reason": "g is not in the image of Hom_R"})
    M2, N2 = w2.module, w2.target
    coker_R = quotient_module(M2, span_basis(M2.field, M2.dim, f.columns()), name="coker f").module
    coker_S = quotient_module(N2, span_basis(N2.field, N2.dim, g.columns()), name="coker g").module
    witness = witness_for(E, coker_R, coker_S, token)
    if witness is None:
        raise EquivalenceViolation("S⊗coker f is not isomorphic to coker g", {"dim_R": coker_R.dim, "dim_S": coker_S.dim})
    return DescentResult("extended", witness, {"dim": coker_S.dim})


def prop32_finite(E: FiniteExtension, case: int, token: Optional[CancellationToken] = None, **data: Any) -> DescentResult:
    """Case 1: middle of an extension; case 2: kernel; case 3: cokernel."""
    if case == 1:
        return prop32_extension(E, data["w1"], data["w2"], data.get("coefficients"), token=token)
    if case == 2:
        return descend_kernel(E, data["w"], data["w2"], data["g"], token=token)
    if case == 3:
        return descend_cokernel(E, data["w"], data["w2"], data["g"], token=token)
    raise BoundsExceeded(f"case must be 1, 2 or 3, got {case}")
