"""
Local Algebra Service.

Finite-dimensional commutative local k-algebras given by structure constants,
local homomorphisms between them, and the decisions made on a single map:
condition (†), flatness (freeness), radical powers and the constructive
witnesses for a (†) map.
"""
import logging
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from homascend.core.errors import EquivalenceViolation, HypothesisViolation, InvariantViolation
from homascend.core.fields import FieldDesc, SimpleExtension, parse_scalar
from homascend.core.linalg import (
    Mat,
    QuotientMap,
    Vector,
    in_span,
    same_span,
    span_basis,
    span_contains,
    unit_vector,
    zero_vector,
)
from homascend.core.sympy_bridge import polynomial_terms

logger = logging.getLogger(__name__)

MultiPoly = Dict[Tuple[int, ...], Any]


# =========================================================================
# LOCAL ALGEBRAS
# =========================================================================

@dataclass(frozen=True, eq=False)
class LocalAlgebra:
    """
    Commutative local k-algebra with basis b_0 … b_{d−1}.

    ``table[i][j]`` is the coordinate vector of b_i·b_j. Every basis element
    is a monomial in ``variables`` (exponents in ``monomials``) and
    ``generators`` holds the images of the variables. The radical m is given
    by the columns of ``radical``; ``residue_degree`` is dim_k(A/m).
    """
    field: FieldDesc
    labels: Tuple[str, ...]
    table: Tuple[Tuple[Vector, ...], ...]
    unit_index: int
    radical: Mat
    nilpotency: int
    residue_degree: int = 1
    variables: Tuple[str, ...] = ()
    generators: Tuple[Vector, ...] = ()
    monomials: Tuple[Tuple[int, ...], ...] = ()
    name: str = dc_field(default="A", compare=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @cached_property
    def mult_matrices(self) -> Tuple[Mat, ...]:
        """L_i = matrix of multiplication by b_i."""
        return tuple(Mat.from_columns(self.field, self.dim, self.table[i]) for i in range(self.dim))

    @cached_property
    def unit(self) -> Vector:
        return unit_vector(self.field, self.dim, self.unit_index)

    def basis_vector(self, i: int) -> Vector:
        return unit_vector(self.field, self.dim, i)

    def zero_element(self) -> Vector:
        return zero_vector(self.field, self.dim)

    def left_mult(self, a: Sequence[Any]) -> Mat:
        """Matrix of multiplication by the element a."""
        out = Mat.zeros(self.field, self.dim, self.dim)
        for i, c in enumerate(a):
            if c:
                out = out + self.mult_matrices[i].scale(c)
        return out

    def mul(self, a: Sequence[Any], b: Sequence[Any]) -> Vector:
        acc = [self.field.zero] * self.dim
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if not y:
                    continue
                c = x * y
                for k, v in enumerate(self.table[i][j]):
                    if v:
                        acc[k] = acc[k] + c * v
        return tuple(acc)

    def power(self, a: Sequence[Any], n: int) -> Vector:
        result = self.unit
        for _ in range(n):
            result = self.mul(result, a)
        return result

    def monomial_element(self, exponents: Sequence[int], images: Sequence[Vector]) -> Vector:
        """Product of images[v]^exponents[v] in this algebra."""
        result = self.unit
        for img, e in zip(images, exponents):
            for _ in range(e):
                result = self.mul(result, img)
        return result

    def in_radical(self, a: Sequence[Any]) -> bool:
        return in_span(self.radical, a)

    def is_unit_element(self, a: Sequence[Any]) -> bool:
        return not self.in_radical(a)

    def inverse_element(self, a: Sequence[Any]) -> Vector:
        x = self.left_mult(a).solve(self.unit)
        if x is None:
            raise InvariantViolation("element is not a unit")
        return x

    def element(self, spec: Union[str, Sequence[Any], MultiPoly]) -> Vector:
        """Element from a polynomial in the variables (text or exponent dict) or coordinates."""
        if isinstance(spec, (list, tuple)):
            if len(spec) != self.dim:
                raise InvariantViolation(f"element needs {self.dim} coordinates")
            return tuple(self.field.coerce(c) for c in spec)
        terms = _as_multipoly(spec, self.variables, self.field)
        acc = [self.field.zero] * self.dim
        for exps, coeff in terms.items():
            v = self.monomial_element(exps, self.generators)
            acc = [a + coeff * b for a, b in zip(acc, v)]
        return tuple(acc)

    def format_element(self, a: Sequence[Any]) -> str:
        terms = []
        for c, label in zip(a, self.labels):
            if not c:
                continue
            text = self.field.format(c)
            if label == "1":
                terms.append(text)
            elif c == self.field.one:
                terms.append(label)
            else:
                terms.append(f"({text})*{label}")
        return " + ".join(terms) if terms else "0"

    def verify(self) -> None:
        """Raise InvariantViolation on the first failing algebra axiom."""
        d = self.dim
        for i in range(d):
            for j in range(i + 1, d):
                if self.table[i][j] != self.table[j][i]:
                    raise InvariantViolation(
                        f"structure constants not commutative at ({self.labels[i]}, {self.labels[j]})",
                        {"pair": (i, j)},
                    )
        if any(self.table[self.unit_index][i] != self.basis_vector(i) for i in range(d)):
            raise InvariantViolation("unit law fails")
        L = self.mult_matrices
        for i, j, l in product(range(d), repeat=3):
            left = L[l].apply(self.table[i][j])
            right = L[i].apply(self.table[j][l])
            if left != right:
                raise InvariantViolation(
                    f"associativity fails on ({self.labels[i]}, {self.labels[j]}, {self.labels[l]})",
                    {"triple": (i, j, l)},
                )
        products = [L[i].apply(r) for i in range(d) for r in self.radical.columns()]
        if not all(in_span(self.radical, p) for p in products):
            raise InvariantViolation("radical basis does not span an ideal")
        if d - self.radical.cols != self.residue_degree:
            raise InvariantViolation(
                f"not local: dim(A/m) = {d - self.radical.cols}, expected {self.residue_degree}"
            )
        if radical_power(self, self.nilpotency).cols != 0:
            raise InvariantViolation("radical is not nilpotent of the recorded degree")

    def __repr__(self):
        return f"LocalAlgebra({self.name}, dim={self.dim}, field={self.field!r})"


def radical_power(A: LocalAlgebra, t: int) -> Mat:
    """Canonical basis of m^t (m^0 = A)."""
    if t <= 0:
        return Mat.identity(A.field, A.dim)
    radical_ops = [A.left_mult(r) for r in A.radical.columns()]
    current = A.radical
    for _ in range(t - 1):
        if current.cols == 0:
            break
        current = span_basis(A.field, A.dim, [L.apply(v) for L in radical_ops for v in current.columns()])
    return span_basis(A.field, A.dim, current.columns())


def _nilpotency(A: LocalAlgebra) -> int:
    t = 0
    current = Mat.identity(A.field, A.dim)
    while current.cols:
        t += 1
        current = radical_power(A, t)
        if t > A.dim + 1:
            raise InvariantViolation("radical is not nilpotent")
    return t


# =========================================================================
# CONSTRUCTION
# =========================================================================

def _as_multipoly(spec: Any, variables: Sequence[str], field: FieldDesc) -> MultiPoly:
    if isinstance(spec, dict):
        return {tuple(k): field.coerce(v) for k, v in spec.items() if v}
    extra = [field.gen_name] if isinstance(field, SimpleExtension) else []
    terms = polynomial_terms(spec, variables, extra)
    out = {}
    for exps, coeff in terms.items():
        value = parse_scalar(field, coeff)
        if value:
            out[exps] = value
    return out


def _monomials(nvars: int, N: int) -> List[Tuple[int, ...]]:
    """Exponent tuples of total degree < N, by degree then lexicographically descending."""
    out = []
    for d in range(N):
        out.extend(_compositions(d, nvars))
    return out


def _compositions(d: int, n: int) -> List[Tuple[int, ...]]:
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        out.extend((first,) + rest for rest in _compositions(d - first, n - 1))
    return out


def _monomial_label(variables: Sequence[str], exps: Sequence[int]) -> str:
    parts = []
    for v, e in zip(variables, exps):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts) if parts else "1"


def _low_degree_quotient(field: FieldDesc, n: int, relations: List[Vector]) -> Tuple[List[int], Mat]:
    """
    Quotient of k^n (coordinates ordered by increasing degree) by the span of
    ``relations``, keeping low-degree coordinates as the quotient basis.

    Returns the kept coordinates (ascending) and the projection matrix.
    """
    flip = [n - 1 - k for k in range(n)]
    q = QuotientMap(field, n, [[v[flip[k]] for k in range(n)] for v in relations])
    kept = sorted(flip[k] for k in q.kept)
    row_of = {flip[k]: r for r, k in enumerate(q.kept)}
    data = [[q.project[row_of[orig], flip[j]] for j in range(n)] for orig in kept]
    return kept, Mat(field, data, len(kept), n)


def algebra_from_presentation(
    field: FieldDesc,
    variables: Sequence[str],
    relations: Sequence[Union[str, MultiPoly]],
    N: int,
    name: str = "A",
) -> LocalAlgebra:
    """
    k[x_1..x_n]/(I + (x)^N) on the monomial basis of degree < N.

    Relation multiples m·g are truncated in degree N before spanning.
    """
    if N < 1:
        raise InvariantViolation("truncation degree N must be ≥ 1")
    variables = tuple(variables)
    nv = len(variables)
    monos = _monomials(nv, N)
    index = {m: i for i, m in enumerate(monos)}
    n = len(monos)
    rels = [_as_multipoly(g, variables, field) for g in relations]

    vectors = []
    for g in rels:
        for m in monos:
            v = [field.zero] * n
            for exps, c in g.items():
                prod_exps = tuple(a + b for a, b in zip(m, exps))
                if prod_exps in index:
                    v[index[prod_exps]] = v[index[prod_exps]] + c
            if any(v):
                vectors.append(tuple(v))

    kept, proj = _low_degree_quotient(field, n, vectors)
    if 0 not in kept:
        raise InvariantViolation("relations generate the unit ideal (zero algebra)")

    def image(exps: Tuple[int, ...]) -> Vector:
        if exps in index:
            return proj.column(index[exps])
        return zero_vector(field, len(kept))

    table = tuple(
        tuple(image(tuple(a + b for a, b in zip(monos[i], monos[j]))) for j in kept)
        for i in kept
    )
    dim = len(kept)
    radical_cols = [unit_vector(field, dim, r) for r, orig in enumerate(kept) if sum(monos[orig]) > 0]
    generators = tuple(image(tuple(1 if k == v else 0 for k in range(nv))) for v in range(nv))

    algebra = LocalAlgebra(
        field=field,
        labels=tuple(_monomial_label(variables, monos[i]) for i in kept),
        table=table,
        unit_index=0,
        radical=Mat.from_columns(field, dim, radical_cols),
        nilpotency=N,
        residue_degree=1,
        variables=variables,
        generators=generators,
        monomials=tuple(monos[i] for i in kept),
        name=name,
    )
    algebra = _with_exact_nilpotency(algebra)
    algebra.verify()
    logger.debug(f"Presented {name}: dim {dim}, nilpotency {algebra.nilpotency}")
    return algebra


def _with_exact_nilpotency(A: LocalAlgebra) -> LocalAlgebra:
    t = _nilpotency(A)
    if t == A.nilpotency:
        return A
    return LocalAlgebra(
        field=A.field, labels=A.labels, table=A.table, unit_index=A.unit_index, radical=A.radical,
        nilpotency=t, residue_degree=A.residue_degree, variables=A.variables, generators=A.generators,
        monomials=A.monomials, name=A.name,
    )


def field_algebra(field: FieldDesc, name: str = "k") -> LocalAlgebra:
    """The field itself as a one-dimensional local algebra."""
    return algebra_from_presentation(field, [], [], 1, name=name)


def algebra_from_table(
    field: FieldDesc,
    table: Sequence[Sequence[Vector]],
    unit_index: int,
    radical: Mat,
    labels: Optional[Sequence[str]] = None,
    name: str = "A",
) -> LocalAlgebra:
    """Algebra given by raw structure constants; every axiom is verified."""
    d = len(table)
    if any(len(row) != d or any(len(v) != d for v in row) for row in table):
        raise InvariantViolation(f"structure constants must form a {d}×{d} table of {d}-vectors")
    if not 0 <= unit_index < d:
        raise InvariantViolation(f"unit index {unit_index} out of range")
    labels = tuple(labels) if labels else tuple("1" if i == unit_index else f"b{i}" for i in range(d))
    algebra = LocalAlgebra(
        field=field,
        labels=labels,
        table=tuple(tuple(tuple(field.coerce(c) for c in v) for v in row) for row in table),
        unit_index=unit_index,
        radical=radical,
        nilpotency=d,
        residue_degree=d - radical.cols,
        name=name,
    )
    algebra.verify()
    return _with_exact_nilpotency(algebra)


def algebra_tensor_extension(K: FieldDesc, A: LocalAlgebra, name: str = "S") -> Tuple[LocalAlgebra, "AlgebraMap"]:
    """
    S = K ⊗_k A as a k-algebra with basis t^j ⊗ b_l (index j·dim A + l).

    S is local with residue field K; the inclusion a ↦ 1⊗a makes S free over A
    of rank deg(K).
    """
    if not isinstance(K, SimpleExtension) or K.base != A.field:
        raise InvariantViolation(f"{K!r} is not a simple extension of {A.field!r}")
    k = A.field
    d, n = K.d, A.dim
    dim = d * n
    powers = [(K.gen ** e).coeffs for e in range(2 * d - 1)]

    def idx(j: int, l: int) -> int:
        return j * n + l

    table = []
    for j1, l1 in product(range(d), range(n)):
        row = []
        for j2, l2 in product(range(d), range(n)):
            v = [k.zero] * dim
            t_coords = powers[j1 + j2]
            a_coords = A.table[l1][l2]
            for c, kappa in enumerate(t_coords):
                if not kappa:
                    continue
                for s, alpha in enumerate(a_coords):
                    if alpha:
                        v[idx(c, s)] = v[idx(c, s)] + kappa * alpha
            row.append(tuple(v))
        table.append(tuple(row))

    g = K.gen_name

    def label(j: int, lab: str) -> str:
        if j == 0:
            return lab
        power = g if j == 1 else f"{g}^{j}"
        return power if lab == "1" else f"{power}*{lab}"

    labels = tuple(label(j, lab) for j in range(d) for lab in A.labels)
    radical_cols = []
    for j in range(d):
        for r in A.radical.columns():
            v = [k.zero] * dim
            for s, alpha in enumerate(r):
                v[idx(j, s)] = alpha
            radical_cols.append(tuple(v))

    def embed(a: Vector, j: int = 0) -> Vector:
        v = [k.zero] * dim
        for s, alpha in enumerate(a):
            v[idx(j, s)] = alpha
        return tuple(v)

    t_vec = tuple(
        sum((embed(A.unit, j)[i] * c for j, c in enumerate(K.gen.coeffs)), k.zero) for i in range(dim)
    )
    S = LocalAlgebra(
        field=k,
        labels=labels,
        table=tuple(table),
        unit_index=idx(0, A.unit_index),
        radical=Mat.from_columns(k, dim, radical_cols),
        nilpotency=A.nilpotency,
        residue_degree=d * A.residue_degree,
        variables=(g,) + A.variables,
        generators=(t_vec,) + tuple(embed(x) for x in A.generators),
        monomials=tuple((j,) + A.monomials[l] for j in range(d) for l in range(n)),
        name=name,
    )
    S.verify()
    inclusion = AlgebraMap(A, S, Mat.from_columns(k, dim, [embed(A.basis_vector(l)) for l in range(n)]))
    inclusion.verify()
    logger.debug(f"Tensor extension {name} = {K!r} ⊗ {A.name}: dim {dim}")
    return S, inclusion


def quotient_algebra(A: LocalAlgebra, ideal_generators: Sequence[Vector], name: str = "B") -> Tuple[LocalAlgebra, "AlgebraMap"]:
    """A/I for the ideal generated by the given elements, with the projection A ↠ A/I."""
    field = A.field
    vectors = [A.left_mult(g).apply(A.basis_vector(i)) for g in ideal_generators for i in range(A.dim)]
    kept, proj = _low_degree_quotient(field, A.dim, [v for v in vectors if any(v)])
    if A.unit_index not in kept:
        raise InvariantViolation("ideal contains a unit (zero algebra)")
    dim = len(kept)
    table = tuple(tuple(proj.apply(A.table[i][j]) for j in kept) for i in kept)
    radical = span_basis(field, dim, [proj.apply(r) for r in A.radical.columns()])
    B = LocalAlgebra(
        field=field,
        labels=tuple(A.labels[i] for i in kept),
        table=table,
        unit_index=kept.index(A.unit_index),
        radical=radical,
        nilpotency=A.nilpotency,
        residue_degree=A.residue_degree,
        variables=A.variables,
        generators=tuple(proj.apply(g) for g in A.generators),
        monomials=tuple(A.monomials[i] for i in kept) if A.monomials else (),
        name=name,
    )
    B = _with_exact_nilpotency(B)
    B.verify()
    projection = AlgebraMap(A, B, proj)
    projection.verify()
    return B, projection


# =========================================================================
# ALGEBRA MAPS
# =========================================================================

@dataclass(frozen=True, eq=False)
class AlgebraMap:
    """Local homomorphism φ: source → target given on the source basis."""
    source: LocalAlgebra
    target: LocalAlgebra
    matrix: Mat
    name: str = dc_field(default="phi", compare=False)

    def apply(self, a: Sequence[Any]) -> Vector:
        return self.matrix.apply(a)

    def verify(self) -> None:
        S, T, F = self.source, self.target, self.matrix
        if S.field != T.field:
            raise InvariantViolation("source and target are over different fields")
        if (F.rows, F.cols) != (T.dim, S.dim):
            raise InvariantViolation(f"map matrix must be {T.dim}×{S.dim}")
        if self.apply(S.unit) != T.unit:
            raise InvariantViolation("φ(1) ≠ 1", {"image_of_unit": T.format_element(self.apply(S.unit))})
        images = [F.column(i) for i in range(S.dim)]
        for i in range(S.dim):
            for j in range(i, S.dim):
                if self.apply(S.table[i][j]) != T.mul(images[i], images[j]):
                    raise InvariantViolation(
                        f"φ not multiplicative on ({S.labels[i]}, {S.labels[j]})", {"pair": (i, j)}
                    )
        if not span_contains(T.radical, F @ S.radical):
            raise InvariantViolation("φ is not local: φ(m) ⊄ n")

    @cached_property
    def rank(self) -> int:
        return self.matrix.rank()

    def is_surjective(self) -> bool:
        return self.rank == self.target.dim

    def is_injective(self) -> bool:
        return self.rank == self.source.dim

    def is_bijective(self) -> bool:
        return self.is_surjective() and self.is_injective()

    def kernel(self) -> Mat:
        return self.matrix.kernel()

    def __repr__(self):
        return f"AlgebraMap({self.name}: {self.source.name} → {self.target.name})"


def identity_map(A: LocalAlgebra) -> AlgebraMap:
    return AlgebraMap(A, A, Mat.identity(A.field, A.dim), name=f"id_{A.name}")


def compose(psi: AlgebraMap, phi: AlgebraMap) -> AlgebraMap:
    """ψ∘φ."""
    if phi.target is not psi.source:
        raise InvariantViolation("maps are not composable")
    out = AlgebraMap(phi.source, psi.target, psi.matrix @ phi.matrix, name=f"{psi.name}∘{phi.name}")
    out.verify()
    return out


def algebra_map_from_images(source: LocalAlgebra, target: LocalAlgebra, images: Sequence[Any], name: str = "phi") -> AlgebraMap:
    """Map determined by images of the source variables (elements or polynomial text)."""
    if len(images) != len(source.variables):
        raise InvariantViolation(f"{source.name} has {len(source.variables)} variables, got {len(images)} images")
    imgs = [target.element(img) for img in images]
    cols = [target.monomial_element(source.monomials[i], imgs) for i in range(source.dim)]
    phi = AlgebraMap(source, target, Mat.from_columns(source.field, target.dim, cols), name=name)
    phi.verify()
    return phi


# =========================================================================
# CONDITION (†) AND FLATNESS
# =========================================================================

@dataclass(frozen=True)
class DaggerReport:
    mS_equals_n: bool
    residue_iso: bool

    @property
    def dagger(self) -> bool:
        return self.mS_equals_n and self.residue_iso

    def as_dict(self) -> Dict[str, bool]:
        return {"mS_equals_n": self.mS_equals_n, "residue_iso": self.residue_iso, "dagger": self.dagger}


def extended_ideal(phi: AlgebraMap, ideal: Mat) -> Mat:
    """Basis of φ(I)·S for an ideal I of the source."""
    S = phi.target
    vectors = [S.left_mult(phi.apply(r)).apply(S.basis_vector(j)) for r in ideal.columns() for j in range(S.dim)]
    return span_basis(S.field, S.dim, vectors)


def check_dagger(phi: AlgebraMap) -> DaggerReport:
    """(i) m·S = n and (ii) φ(R) + n = S."""
    S = phi.target
    mS = extended_ideal(phi, phi.source.radical)
    residue = Mat.hstack(S.field, S.dim, [phi.matrix, S.radical]).rank() == S.dim
    return DaggerReport(mS_equals_n=same_span(mS, S.radical), residue_iso=residue)


def require_dagger(phi: AlgebraMap) -> DaggerReport:
    report = check_dagger(phi)
    if not report.mS_equals_n:
        raise HypothesisViolation(f"{phi.name} violates (†)(i): m·S ≠ n", clause="mS = n")
    if not report.residue_iso:
        raise HypothesisViolation(f"{phi.name} violates (†)(ii): φ(R) + n ≠ S", clause="phi(R) + n = S")
    return report


@dataclass(frozen=True)
class FlatnessReport:
    flat: bool
    rank: int
    basis: Tuple[Vector, ...]
    syzygy_dim: int


def is_flat(phi: AlgebraMap) -> FlatnessReport:
    """
    Freeness of S over R: lift a basis of S/m_R·S greedily to minimal
    generators, then compare dim S with rank·dim R.
    """
    R, S = phi.source, phi.target
    W = extended_ideal(phi, R.radical)
    picked: List[Vector] = []
    for j in range(S.dim):
        e = S.basis_vector(j)
        if in_span(W, e):
            continue
        picked.append(e)
        orbit = [S.left_mult(phi.apply(R.basis_vector(i))).apply(e) for i in range(R.dim)]
        W = span_basis(S.field, S.dim, W.columns() + orbit)
        if W.cols == S.dim:
            break
    rank = len(picked)
    syzygy = rank * R.dim - S.dim
    flat = syzygy == 0
    logger.debug(f"{phi.name}: {rank} generators over {R.name}, free = {flat}")
    return FlatnessReport(flat=flat, rank=rank, basis=tuple(picked) if flat else (), syzygy_dim=syzygy)


def lemma11_witness(phi: AlgebraMap, t: int) -> List[Vector]:
    """
    For a (†) map: r_s with φ(r_s) − s ∈ n^t for every basis element s of S.
    """
    require_dagger(phi)
    S = phi.target
    nt = radical_power(S, t)
    system = Mat.hstack(S.field, S.dim, [phi.matrix, nt])
    out = []
    for j in range(S.dim):
        sol = system.solve(S.basis_vector(j))
        if sol is None:
            raise EquivalenceViolation(
                f"φ(R) + n^{t} ≠ S for a (†) map", {"map": phi.name, "t": t, "basis_element": S.labels[j]}
            )
        out.append(sol[: phi.source.dim])
    return out


def residue_extension_degree(phi: AlgebraMap) -> int:
    """dim_k(S/m_R·S) / dim_k(R/m_R): the fibre rank, 1 exactly when φ̄ is an isomorphism."""
    S = phi.target
    fibre = S.dim - extended_ideal(phi, phi.source.radical).cols
    return fibre // phi.source.residue_degree
