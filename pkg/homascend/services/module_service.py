"""
Module Service.

Finitely generated modules over a LocalAlgebra, stored as one k-matrix per
algebra basis element. Provides the constructions (free, residue, cyclic,
presented, sums, sub- and quotient modules), Hom spaces, base change and
restriction along an AlgebraMap, tensor products, minimal resolutions and Ext,
annihilators and the radical filtration.
"""
import logging
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Any, List, Optional, Sequence, Tuple

from homascend.core.cancellation import CancellationToken, checkpoint
from homascend.core.errors import InvariantViolation
from homascend.core.linalg import (
    Mat,
    QuotientMap,
    Vector,
    in_span,
    left_inverse,
    span_basis,
    span_contains,
    unit_vector,
)
from homascend.services.algebra_service import AlgebraMap, LocalAlgebra

logger = logging.getLogger(__name__)


# =========================================================================
# MODULES
# =========================================================================

@dataclass(frozen=True, eq=False)
class FModule:
    """
    Module over ``algebra`` on k^dim; ``action[i]`` is the matrix of the
    algebra basis element b_i.
    """
    algebra: LocalAlgebra
    dim: int
    action: Tuple[Mat, ...]
    name: str = dc_field(default="M", compare=False)

    @property
    def field(self):
        return self.algebra.field

    def act(self, a: Sequence[Any]) -> Mat:
        """Matrix of the element a = Σ a_i b_i."""
        out = Mat.zeros(self.field, self.dim, self.dim)
        for c, L in zip(a, self.action):
            if c:
                out = out + L.scale(c)
        return out

    @cached_property
    def generator_actions(self) -> Tuple[Mat, ...]:
        """Actions of the algebra generators (all basis elements if none are recorded)."""
        if self.algebra.generators:
            return tuple(self.act(g) for g in self.algebra.generators)
        return self.action

    @cached_property
    def radical_actions(self) -> Tuple[Mat, ...]:
        return tuple(self.act(r) for r in self.algebra.radical.columns())

    def is_zero(self) -> bool:
        return self.dim == 0

    def verify(self) -> None:
        """Raise InvariantViolation unless this is a unital module."""
        A = self.algebra
        if len(self.action) != A.dim:
            raise InvariantViolation(f"module needs {A.dim} action matrices, got {len(self.action)}")
        if any((L.rows, L.cols) != (self.dim, self.dim) for L in self.action):
            raise InvariantViolation(f"action matrices must be {self.dim}×{self.dim}")
        if not self.action[A.unit_index].is_identity() and self.dim:
            raise InvariantViolation("unit does not act as the identity")
        for i in range(A.dim):
            for j in range(i, A.dim):
                lhs = self.action[i] @ self.action[j]
                if lhs != self.act(A.table[i][j]):
                    raise InvariantViolation(
                        f"action not multiplicative on ({A.labels[i]}, {A.labels[j]})", {"pair": (i, j)}
                    )
                if i != j and lhs != self.action[j] @ self.action[i]:
                    raise InvariantViolation("actions do not commute", {"pair": (i, j)})

    def __repr__(self):
        return f"FModule({self.name}, dim={self.dim}, over {self.algebra.name})"


def module_from_actions(A: LocalAlgebra, action: Sequence[Mat], name: str = "M") -> FModule:
    dim = action[0].rows if action else 0
    M = FModule(A, dim, tuple(action), name=name)
    M.verify()
    return M


def module_from_generator_actions(A: LocalAlgebra, gen_actions: Sequence[Mat], dim: int, name: str = "M") -> FModule:
    """Module determined by the matrices of the algebra generators."""
    if len(gen_actions) != len(A.variables):
        raise InvariantViolation(f"{A.name} has {len(A.variables)} generators, got {len(gen_actions)} matrices")
    if not A.monomials:
        raise InvariantViolation(f"{A.name} has no monomial basis to expand generator actions")
    action = []
    for exps in A.monomials:
        L = Mat.identity(A.field, dim)
        for G, e in zip(gen_actions, exps):
            if e:
                L = L @ G.power(e)
        action.append(L)
    return module_from_actions(A, action, name=name)


def regular_module(A: LocalAlgebra, name: Optional[str] = None) -> FModule:
    return FModule(A, A.dim, A.mult_matrices, name=name or A.name)


def free_module(A: LocalAlgebra, n: int, name: Optional[str] = None) -> FModule:
    """A^n with basis index c·dim A + i."""
    action = tuple(Mat.block_diag(A.field, [L] * n) if n else Mat.zeros(A.field, 0, 0) for L in A.mult_matrices)
    return FModule(A, n * A.dim, action, name=name or f"{A.name}^{n}")


def zero_module(A: LocalAlgebra) -> FModule:
    return free_module(A, 0, name="0")


def direct_sum(*modules: FModule, name: Optional[str] = None) -> FModule:
    if not modules:
        raise InvariantViolation("direct sum of no modules needs an algebra; use zero_module")
    A = modules[0].algebra
    if any(M.algebra is not A for M in modules):
        raise InvariantViolation("direct summands live over different algebras")
    action = tuple(Mat.block_diag(A.field, [M.action[i] for M in modules]) for i in range(A.dim))
    return FModule(A, sum(M.dim for M in modules), action, name=name or " ⊕ ".join(M.name for M in modules))


def submodule(M: FModule, W: Mat, name: Optional[str] = None) -> FModule:
    """The submodule spanned by the columns of W (which must be independent and A-stable)."""
    if W.cols == 0:
        return FModule(M.algebra, 0, tuple(Mat.zeros(M.field, 0, 0) for _ in M.action), name=name or "0")
    if not is_stable(M, W):
        raise InvariantViolation(f"subspace of {M.name} is not a submodule")
    Linv = left_inverse(W)
    action = tuple(Linv @ L @ W for L in M.action)
    return FModule(M.algebra, W.cols, action, name=name or f"sub({M.name})")


def is_stable(M: FModule, W: Mat) -> bool:
    return all(span_contains(W, G @ W) for G in M.generator_actions)


def generated_submodule(M: FModule, vectors: Sequence[Vector]) -> Mat:
    """Canonical basis of A·{vectors}."""
    return span_basis(M.field, M.dim, [L.apply(v) for v in vectors for L in M.action])


@dataclass(frozen=True, eq=False)
class Quotient:
    module: FModule
    projection: Mat
    lift: Mat


def quotient_module(M: FModule, W: Mat, name: Optional[str] = None) -> Quotient:
    """M / span(W) for an A-stable subspace W, with projection and a k-linear lift."""
    if W.cols and not is_stable(M, W):
        raise InvariantViolation(f"subspace of {M.name} is not a submodule")
    q = QuotientMap(M.field, M.dim, W.columns())
    action = tuple(q.induced(L) for L in M.action)
    Q = FModule(M.algebra, q.dim, action, name=name or f"{M.name}/W")
    return Quotient(module=Q, projection=q.project, lift=q.lift)


def cyclic_module(A: LocalAlgebra, ideal_generators: Sequence[Vector], name: Optional[str] = None) -> FModule:
    """A/I for the ideal generated by the given elements."""
    R = regular_module(A)
    return quotient_module(R, generated_submodule(R, ideal_generators), name=name or f"{A.name}/I").module


def residue_module(A: LocalAlgebra, name: Optional[str] = None) -> FModule:
    """The residue field A/m."""
    return quotient_module(regular_module(A), A.radical, name=name or "k").module


def present_module(A: LocalAlgebra, cols: int, relations: Sequence[Sequence[Vector]], name: Optional[str] = None) -> FModule:
    """Cokernel of the relations: A^cols modulo the submodule generated by the relation rows."""
    F = free_module(A, cols)
    vectors = []
    for row in relations:
        if len(row) != cols:
            raise InvariantViolation(f"relation has {len(row)} entries, expected {cols}")
        vectors.append(tuple(c for a in row for c in a))
    return quotient_module(F, generated_submodule(F, vectors), name=name or "coker").module


def ideal_module(A: LocalAlgebra, ideal_generators: Sequence[Vector], name: Optional[str] = None) -> FModule:
    """The ideal I ⊆ A as a module."""
    R = regular_module(A)
    return submodule(R, generated_submodule(R, ideal_generators), name=name or "I")


def radical_module(A: LocalAlgebra) -> FModule:
    return submodule(regular_module(A), A.radical, name="m")


def permuted(M: FModule, perm: Sequence[int]) -> FModule:
    """Same module on a permuted k-basis (e_i ↦ e_perm[i])."""
    P = Mat.from_columns(M.field, M.dim, [unit_vector(M.field, M.dim, p) for p in perm])
    Pinv = P.inverse()
    return FModule(M.algebra, M.dim, tuple(Pinv @ L @ P for L in M.action), name=f"{M.name}'")


def conjugate(M: FModule, P: Mat) -> FModule:
    """Transport of structure along the change of basis P."""
    Pinv = P.inverse()
    return FModule(M.algebra, M.dim, tuple(Pinv @ L @ P for L in M.action), name=M.name)


# =========================================================================
# HOM SPACES
# =========================================================================

@dataclass(frozen=True, eq=False)
class HomSpace:
    """Basis of Hom_A(source, target) as dim(target) × dim(source) matrices."""
    source: FModule
    target: FModule
    basis: Tuple[Mat, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def combine(self, coeffs: Sequence[Any]) -> Mat:
        out = Mat.zeros(self.source.field, self.target.dim, self.source.dim)
        for c, f in zip(coeffs, self.basis):
            if c:
                out = out + f.scale(c)
        return out

    @cached_property
    def subspace(self) -> Mat:
        """The Hom space as a subspace of k^{dim N · dim M} (row-major flattening)."""
        n = self.target.dim * self.source.dim
        return span_basis(self.source.field, n, [f.flatten() for f in self.basis])

    def contains(self, f: Mat) -> bool:
        return in_span(self.subspace, f.flatten())


def linear_constraints(M: FModule, N: FModule, gen_pairs: Sequence[Tuple[Mat, Mat]]) -> Mat:
    """Stacked system N_g f − f M_g = 0 on row-major vec(f)."""
    field = M.field
    Im, In = Mat.identity(field, M.dim), Mat.identity(field, N.dim)
    n = N.dim * M.dim
    blocks = [Ng.kron(Im) - In.kron(Mg.T) for Mg, Ng in gen_pairs]
    if not blocks:
        return Mat.zeros(field, 0, n)
    return Mat.vstack(field, n, blocks)


def hom_space(M: FModule, N: FModule, along: Optional[AlgebraMap] = None) -> HomSpace:
    """
    Hom_A(M, N). With ``along = φ: R → S`` (M, N over S) the maps are only
    required to commute with the R-action through φ.
    """
    if along is not None:
        M, N = restrict(along, M), restrict(along, N)
    if M.algebra is not N.algebra:
        raise InvariantViolation("Hom between modules over different algebras")
    field = M.field
    if M.dim == 0 or N.dim == 0:
        return HomSpace(M, N, ())
    system = linear_constraints(M, N, list(zip(M.generator_actions, N.generator_actions)))
    K = system.kernel() if system.rows else Mat.identity(field, N.dim * M.dim)
    basis = tuple(Mat.from_flat(field, N.dim, M.dim, K.column(j)) for j in range(K.cols))
    return HomSpace(M, N, basis)


def is_module_map(M: FModule, N: FModule, f: Mat) -> bool:
    return all(Ng @ f == f @ Mg for Mg, Ng in zip(M.generator_actions, N.generator_actions))


def end_algebra(M: FModule) -> HomSpace:
    return hom_space(M, M)


# =========================================================================
# BASE CHANGE, RESTRICTION, TENSOR
# =========================================================================

@dataclass(frozen=True, eq=False)
class BaseChange:
    """S ⊗_R M as a quotient of S ⊗_k M (basis index s·dim M + m)."""
    phi: AlgebraMap
    source: FModule
    module: FModule
    iota: Mat
    quotient: QuotientMap

    def __iter__(self):
        return iter((self.module, self.iota))


def _balanced_quotient(field, left_gens: Sequence[Mat], right_gens: Sequence[Mat], n_left: int, n_right: int) -> QuotientMap:
    I_left, I_right = Mat.identity(field, n_left), Mat.identity(field, n_right)
    relations = []
    for Lg, Rg in zip(left_gens, right_gens):
        relations.extend((Lg.kron(I_right) - I_left.kron(Rg)).columns())
    return QuotientMap(field, n_left * n_right, [v for v in relations if any(v)])


def base_change(phi: AlgebraMap, M: FModule, name: Optional[str] = None) -> BaseChange:
    """S ⊗_R M with the S-action on the left factor and ι: x ↦ 1 ⊗ x."""
    R, S = phi.source, phi.target
    if M.algebra is not R:
        raise InvariantViolation(f"{M.name} is not a module over {R.name}")
    field = R.field
    gens = R.generators or tuple(R.basis_vector(i) for i in range(R.dim))
    q = _balanced_quotient(
        field,
        [S.left_mult(phi.apply(g)) for g in gens],
        [M.act(g) for g in gens],
        S.dim,
        M.dim,
    )
    I_M = Mat.identity(field, M.dim)
    action = tuple(q.induced(L.kron(I_M)) for L in S.mult_matrices)
    module = FModule(S, q.dim, action, name=name or f"{S.name}⊗{M.name}")
    unit_block = Mat.from_columns(field, S.dim * M.dim, [
        unit_vector(field, S.dim * M.dim, S.unit_index * M.dim + m) for m in range(M.dim)
    ])
    iota = q.project @ unit_block
    logger.debug(f"Base change of {M.name} along {phi.name}: dim {module.dim}")
    return BaseChange(phi=phi, source=M, module=module, iota=iota, quotient=q)


def base_change_map(bc_source: BaseChange, bc_target: BaseChange, f: Mat) -> Mat:
    """S ⊗ f : S⊗M → S⊗N for an R-linear f: M → N."""
    S = bc_source.phi.target
    lifted = Mat.identity(S.field, S.dim).kron(f)
    return bc_target.quotient.project @ lifted @ bc_source.quotient.lift


def restrict(phi: AlgebraMap, N: FModule, name: Optional[str] = None) -> FModule:
    """N as an R-module through φ."""
    if N.algebra is not phi.target:
        raise InvariantViolation(f"{N.name} is not a module over {phi.target.name}")
    R = phi.source
    action = tuple(N.act(phi.apply(R.basis_vector(i))) for i in range(R.dim))
    return FModule(R, N.dim, action, name=name or f"{N.name}|{R.name}")


def tensor_modules(M: FModule, N: FModule, name: Optional[str] = None) -> Tuple[FModule, QuotientMap]:
    """M ⊗_A N with the action on the left factor."""
    A = M.algebra
    if N.algebra is not A:
        raise InvariantViolation("tensor product of modules over different algebras")
    q = _balanced_quotient(A.field, M.generator_actions, N.generator_actions, M.dim, N.dim)
    I_N = Mat.identity(A.field, N.dim)
    action = tuple(q.induced(L.kron(I_N)) for L in M.action)
    return FModule(A, q.dim, action, name=name or f"{M.name}⊗{N.name}"), q


# =========================================================================
# GENERATORS, RESOLUTIONS, EXT
# =========================================================================

def radical_submodule(M: FModule) -> Mat:
    """Basis of m·M."""
    return span_basis(M.field, M.dim, [L.apply(v) for L in M.radical_actions for v in Mat.identity(M.field, M.dim).columns()])


def minimal_generators(M: FModule, candidates: Optional[Sequence[Vector]] = None) -> List[Vector]:
    """
    Minimal generating set by Nakayama: greedily pick vectors outside
    m·M + A·(picked so far).
    """
    field = M.field
    W = radical_submodule(M)
    picked: List[Vector] = []
    pool = candidates if candidates is not None else [unit_vector(field, M.dim, j) for j in range(M.dim)]
    for v in pool:
        if W.cols == M.dim:
            break
        if in_span(W, v):
            continue
        picked.append(tuple(v))
        W = span_basis(field, M.dim, W.columns() + [L.apply(v) for L in M.action])
    if W.cols != M.dim:
        raise InvariantViolation("candidate vectors do not generate the module")
    return picked


def number_of_generators(M: FModule) -> int:
    """μ(M) = dim over the residue field of M/mM."""
    return (M.dim - radical_submodule(M).cols) // M.algebra.residue_degree


def cover_matrix(M: FModule, generators: Sequence[Vector]) -> Mat:
    """k-matrix of A^g → M, e_j ↦ generators[j]; column index j·dim A + i."""
    A = M.algebra
    cols = [M.action[i].apply(g) for g in generators for i in range(A.dim)]
    return Mat.from_columns(M.field, M.dim, cols)


@dataclass(frozen=True, eq=False)
class Resolution:
    """
    Minimal free resolution … → A^{β_1} → A^{β_0} → M → 0.

    ``generator_images[i]`` lists the images in A^{β_{i−1}} (in M for i = 0)
    of the basis vectors of A^{β_i}; ``differentials[i]`` is the k-matrix of
    A^{β_{i+1}} → A^{β_i} and ``augmentation`` is A^{β_0} → M.
    """
    module: FModule
    betti: Tuple[int, ...]
    augmentation: Mat
    differentials: Tuple[Mat, ...]
    generator_images: Tuple[Tuple[Vector, ...], ...]

    @property
    def length(self) -> int:
        return len(self.betti) - 1

    def coefficient(self, i: int, m: int, l: int) -> Vector:
        """A-coefficient a_ml of d_{i+1}(e_l) = Σ_m a_ml e_m."""
        d = self.module.algebra.dim
        return self.generator_images[i + 1][l][m * d:(m + 1) * d]

    def is_minimal(self) -> bool:
        A = self.module.algebra
        return all(
            in_span(A.radical, self.coefficient(i, m, l))
            for i in range(self.length)
            for l in range(self.betti[i + 1])
            for m in range(self.betti[i])
        )

    def verify(self) -> None:
        maps = [self.augmentation] + list(self.differentials)
        for i in range(len(maps) - 1):
            if not (maps[i] @ maps[i + 1]).is_zero():
                raise InvariantViolation(f"resolution differentials do not compose to zero at step {i}")
        for i in range(len(maps) - 1):
            if maps[i + 1].rank() != maps[i].cols - maps[i].rank():
                raise InvariantViolation(f"resolution not exact at step {i}")
        if not self.is_minimal():
            raise InvariantViolation("resolution differential has a unit entry")


def minimal_resolution(M: FModule, length: int, token: Optional[CancellationToken] = None) -> Resolution:
    """Minimal free resolution of M with free modules F_0..F_length."""
    if length < 0:
        raise InvariantViolation("resolution length must be ≥ 0")
    A = M.algebra
    field = A.field
    gens = minimal_generators(M)
    eps = cover_matrix(M, gens)
    betti = [len(gens)]
    images = [tuple(gens)]
    differentials: List[Mat] = []
    current_map = eps
    current_free = free_module(A, betti[0])
    for _ in range(length):
        checkpoint(token)
        K = current_map.kernel()
        if K.cols == 0:
            betti.append(0)
            images.append(())
            zero = Mat.zeros(field, current_free.dim, 0)
            differentials.append(zero)
            current_map = zero
            current_free = free_module(A, 0)
            continue
        Kbasis = span_basis(field, current_free.dim, K.columns())
        Kmod = submodule(current_free, Kbasis)
        local_gens = minimal_generators(Kmod)
        ambient = [Kbasis.apply(g) for g in local_gens]
        d = cover_matrix(current_free, ambient)
        betti.append(len(ambient))
        images.append(tuple(ambient))
        differentials.append(d)
        current_map = d
        current_free = free_module(A, len(ambient))
    logger.debug(f"Minimal resolution of {M.name}: betti {betti}")
    return Resolution(
        module=M,
        betti=tuple(betti),
        augmentation=eps,
        differentials=tuple(differentials),
        generator_images=tuple(images),
    )


def hom_cochain(res: Resolution, N: FModule, i: int) -> Mat:
    """δ^i: N^{β_i} → N^{β_{i+1}}, block (l, m) = ρ_N(a_ml)."""
    field = N.field
    b_i, b_next = res.betti[i], res.betti[i + 1]
    rows, cols = b_next * N.dim, b_i * N.dim
    if rows == 0 or cols == 0:
        return Mat.zeros(field, rows, cols)
    blocks = [[N.act(res.coefficient(i, m, l)) for m in range(b_i)] for l in range(b_next)]
    data = []
    for l in range(b_next):
        for r in range(N.dim):
            row = []
            for m in range(b_i):
                row.extend(blocks[l][m].row(r))
            data.append(row)
    return Mat(field, data, rows, cols)


@dataclass(frozen=True)
class ExtResult:
    degree: int
    dim: int
    representatives: Tuple[Mat, ...]


def ext_from_resolution(res: Resolution, N: FModule, i: int) -> ExtResult:
    """Ext^i(M, N) = ker δ^i / im δ^{i−1} from a resolution of length ≥ i+1."""
    if res.length < i + 1:
        raise InvariantViolation(f"resolution of length {res.length} cannot compute Ext^{i}")
    field = N.field
    n_i = res.betti[i] * N.dim
    delta = hom_cochain(res, N, i)
    Z = delta.kernel() if delta.rows else Mat.identity(field, n_i)
    if i == 0:
        B = Mat.zeros(field, n_i, 0)
    else:
        B = span_basis(field, n_i, hom_cochain(res, N, i - 1).columns())
    reps: List[Mat] = []
    span = B
    for z in Z.columns():
        if in_span(span, z):
            continue
        span = span_basis(field, n_i, span.columns() + [z])
        reps.append(Mat.from_columns(field, N.dim, [z[m * N.dim:(m + 1) * N.dim] for m in range(res.betti[i])]))
    return ExtResult(degree=i, dim=Z.cols - B.cols, representatives=tuple(reps))


def ext_dim(M: FModule, N: FModule, i: int, token: Optional[CancellationToken] = None) -> ExtResult:
    """dim_k Ext^i_A(M, N) with representative cocycles (columns f(e_m))."""
    if i < 0:
        raise InvariantViolation("Ext degree must be ≥ 0")
    res = minimal_resolution(M, i + 1, token=token)
    return ext_from_resolution(res, N, i)


def ext_dims(M: FModule, N: FModule, L: int, token: Optional[CancellationToken] = None) -> Tuple[int, ...]:
    """(dim Ext^0, …, dim Ext^L) from a single resolution."""
    res = minimal_resolution(M, L + 1, token=token)
    return tuple(ext_from_resolution(res, N, i).dim for i in range(L + 1))


# =========================================================================
# ANNIHILATOR AND FILTRATION
# =========================================================================

def ann_supp(M: FModule) -> Tuple[Mat, bool]:
    """Basis of Ann_A(M) and the support flag (M ≠ 0; Supp = {m} then)."""
    A = M.algebra
    if M.dim == 0:
        return Mat.identity(A.field, A.dim), False
    system = Mat.from_columns(A.field, M.dim * M.dim, [L.flatten() for L in M.action])
    return span_basis(A.field, A.dim, system.kernel().columns()), True


def annihilates(M: FModule, ideal: Mat) -> bool:
    return all(M.act(a).is_zero() for a in ideal.columns())


def radical_filtration(M: FModule) -> List[Mat]:
    """Bases of M ⊇ mM ⊇ m²M ⊇ … ⊇ 0."""
    field = M.field
    chain = [Mat.identity(field, M.dim)]
    current = chain[0]
    while current.cols:
        current = span_basis(field, M.dim, [L.apply(v) for L in M.radical_actions for v in current.columns()])
        chain.append(current)
    return chain


def socle(M: FModule) -> Mat:
    """Basis of {x ∈ M : m·x = 0}."""
    field = M.field
    if not M.radical_actions or M.dim == 0:
        return Mat.identity(field, M.dim)
    stacked = Mat.vstack(field, M.dim, list(M.radical_actions))
    return span_basis(field, M.dim, stacked.kernel().columns())


def is_faithful(M: FModule) -> bool:
    return ann_supp(M)[0].cols == 0
