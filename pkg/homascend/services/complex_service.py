"""
Complex Service.

Bounded chain complexes of FModules (homological indexing, ∂_n: X_n → X_{n−1}),
chain morphisms, homology with induced maps, Hom and tensor complexes, Koszul
complexes, mapping cones and quasi-isomorphism tests.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

from homascend.core.errors import EquivalenceViolation, HypothesisViolation, InvariantViolation
from homascend.core.linalg import Mat, QuotientMap, Vector, left_inverse, span_basis
from homascend.services.algebra_service import AlgebraMap, LocalAlgebra, is_flat, residue_extension_degree
from homascend.services.module_service import (
    BaseChange,
    FModule,
    Resolution,
    base_change,
    base_change_map,
    direct_sum,
    free_module,
    hom_cochain,
    hom_space,
    is_module_map,
    number_of_generators,
    restrict,
    tensor_modules,
    zero_module,
)

logger = logging.getLogger(__name__)


# =========================================================================
# COMPLEXES AND MORPHISMS
# =========================================================================

@dataclass(frozen=True, eq=False)
class BoundedComplex:
    """
    X_lo … X_hi with ``differentials[n − lo]`` = ∂_n: X_n → X_{n−1}
    (∂_lo maps to zero).
    """
    algebra: LocalAlgebra
    lo: int
    hi: int
    modules: Tuple[FModule, ...]
    differentials: Tuple[Mat, ...]
    name: str = "X"

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def module(self, n: int) -> FModule:
        if self.lo <= n <= self.hi:
            return self.modules[n - self.lo]
        return zero_module(self.algebra)

    def dim(self, n: int) -> int:
        return self.module(n).dim if self.lo <= n <= self.hi else 0

    def d(self, n: int) -> Mat:
        """∂_n: X_n → X_{n−1}."""
        if self.lo < n <= self.hi:
            return self.differentials[n - self.lo]
        return Mat.zeros(self.algebra.field, self.dim(n - 1), self.dim(n))

    def verify(self) -> None:
        for n in range(self.lo + 1, self.hi + 1):
            D = self.d(n)
            if (D.rows, D.cols) != (self.dim(n - 1), self.dim(n)):
                raise InvariantViolation(f"∂_{n} has shape {D.rows}×{D.cols}")
            if not is_module_map(self.module(n), self.module(n - 1), D):
                raise InvariantViolation(f"∂_{n} is not A-linear", {"degree": n})
        for n in range(self.lo + 2, self.hi + 1):
            if not (self.d(n - 1) @ self.d(n)).is_zero():
                raise InvariantViolation(f"∂_{n - 1}∂_{n} ≠ 0", {"degree": n})

    def __repr__(self):
        return f"BoundedComplex({self.name}, [{self.lo}, {self.hi}])"


def make_complex(
    algebra: LocalAlgebra,
    lo: int,
    modules: Sequence[FModule],
    differentials: Dict[int, Mat],
    name: str = "X",
) -> BoundedComplex:
    """Complex with modules[i] in degree lo + i; missing differentials are zero."""
    hi = lo + len(modules) - 1
    field = algebra.field
    diffs = [Mat.zeros(field, 0, modules[0].dim)] if modules else []
    for n in range(lo + 1, hi + 1):
        src, tgt = modules[n - lo], modules[n - 1 - lo]
        diffs.append(differentials.get(n, Mat.zeros(field, tgt.dim, src.dim)))
    X = BoundedComplex(algebra, lo, hi, tuple(modules), tuple(diffs), name=name)
    X.verify()
    return X


def concentrated(M: FModule, degree: int = 0, name: Optional[str] = None) -> BoundedComplex:
    return make_complex(M.algebra, degree, [M], {}, name=name or M.name)


@dataclass(frozen=True, eq=False)
class ComplexMorphism:
    source: BoundedComplex
    target: BoundedComplex
    components: Dict[int, Mat]
    name: str = "alpha"

    def f(self, n: int) -> Mat:
        if n in self.components:
            return self.components[n]
        return Mat.zeros(self.source.algebra.field, self.target.dim(n), self.source.dim(n))

    def degrees(self) -> range:
        return range(min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi) + 1)

    def verify(self) -> None:
        X, Y = self.source, self.target
        for n in self.degrees():
            fn = self.f(n)
            if (fn.rows, fn.cols) != (Y.dim(n), X.dim(n)):
                raise InvariantViolation(f"component {n} has the wrong shape")
            if not is_module_map(X.module(n), Y.module(n), fn):
                raise InvariantViolation(f"component {n} is not A-linear")
            if Y.d(n) @ fn != self.f(n - 1) @ X.d(n):
                raise InvariantViolation(f"chain condition fails in degree {n}", {"degree": n})


def make_morphism(X: BoundedComplex, Y: BoundedComplex, components: Dict[int, Mat], name: str = "alpha") -> ComplexMorphism:
    alpha = ComplexMorphism(X, Y, dict(components), name=name)
    alpha.verify()
    return alpha


def identity_morphism(X: BoundedComplex) -> ComplexMorphism:
    field = X.algebra.field
    return ComplexMorphism(X, X, {n: Mat.identity(field, X.dim(n)) for n in X.degrees()}, name=f"id_{X.name}")


def compose_morphisms(beta: ComplexMorphism, alpha: ComplexMorphism) -> ComplexMorphism:
    degrees = set(alpha.degrees()) | set(beta.degrees())
    return make_morphism(alpha.source, beta.target, {n: beta.f(n) @ alpha.f(n) for n in degrees}, name=f"{beta.name}∘{alpha.name}")


# =========================================================================
# HOMOLOGY
# =========================================================================

@dataclass(frozen=True, eq=False)
class HomologyData:
    """H_n = Z/B with Z = ``cycles`` (columns in X_n), projection Z-coords → H and a lift back."""
    degree: int
    module: FModule
    cycles: Mat
    projection: Mat
    lift: Mat

    def representative(self, h: Sequence) -> Vector:
        return self.cycles.apply(self.lift.apply(h))


def homology_data(X: BoundedComplex, n: int) -> HomologyData:
    field = X.algebra.field
    dn = X.d(n)
    Z = dn.kernel() if dn.rows else Mat.identity(field, X.dim(n))
    Z = span_basis(field, X.dim(n), Z.columns())
    boundaries = X.d(n + 1).columns()
    # Boundaries in cycle coordinates.
    B_coords = [Z.solve(b) for b in boundaries if any(b)]
    q = QuotientMap(field, Z.cols, B_coords)
    if Z.cols:
        Zinv = left_inverse(Z)
        action = tuple(q.project @ Zinv @ L @ Z @ q.lift for L in X.module(n).action)
    else:
        action = tuple(Mat.zeros(field, 0, 0) for _ in range(X.algebra.dim))
    H = FModule(X.algebra, q.dim, action, name=f"H_{n}({X.name})")
    return HomologyData(degree=n, module=H, cycles=Z, projection=q.project, lift=q.lift)


def homology(X: BoundedComplex, n: int) -> FModule:
    """H_n(X) = Ker ∂_n / Im ∂_{n+1} with the induced A-action."""
    return homology_data(X, n).module


def homology_dims(X: BoundedComplex) -> Dict[int, int]:
    return {n: homology_dim(X, n) for n in X.degrees()}


def homology_dim(X: BoundedComplex, n: int) -> int:
    return X.dim(n) - X.d(n).rank() - X.d(n + 1).rank()


def is_exact(X: BoundedComplex) -> bool:
    return all(homology_dim(X, n) == 0 for n in X.degrees())


def induced_map(alpha: ComplexMorphism, n: int, hx: Optional[HomologyData] = None, hy: Optional[HomologyData] = None) -> Mat:
    """H_n(α): H_n(X) → H_n(Y)."""
    hx = hx or homology_data(alpha.source, n)
    hy = hy or homology_data(alpha.target, n)
    field = alpha.source.algebra.field
    cols = []
    for j in range(hx.module.dim):
        z = hx.representative(Mat.identity(field, hx.module.dim).column(j))
        image = alpha.f(n).apply(z)
        coords = hy.cycles.solve(image)
        if coords is None:
            raise InvariantViolation(f"image of a cycle is not a cycle in degree {n}")
        cols.append(hy.projection.apply(coords))
    return Mat.from_columns(field, hy.module.dim, cols)


# =========================================================================
# CONSTRUCTIONS
# =========================================================================

def _coordinates(space_basis: Sequence[Mat], f: Mat) -> Vector:
    field = f.field
    if not space_basis:
        if not f.is_zero():
            raise InvariantViolation("map is not in the zero Hom space")
        return ()
    B = Mat.from_columns(field, f.rows * f.cols, [b.flatten() for b in space_basis])
    c = B.solve(f.flatten())
    if c is None:
        raise InvariantViolation("map is not A-linear")
    return c


@dataclass(eq=False)
class HomComplex:
    """Hom(X, Y) with the Hom-space bases used for each component."""
    source: BoundedComplex
    target: BoundedComplex
    components: Dict[int, List[Tuple[int, Tuple[Mat, ...]]]]
    complex: Optional[BoundedComplex] = None

    def maps_of(self, n: int, coords: Sequence) -> Dict[int, Mat]:
        """Split a coordinate vector of degree n into its components f_p."""
        out, pos = {}, 0
        field = self.source.algebra.field
        for p, basis in self.components[n]:
            k = len(basis)
            f = Mat.zeros(field, self.target.dim(p + n), self.source.dim(p))
            for c, b in zip(coords[pos:pos + k], basis):
                if c:
                    f = f + b.scale(c)
            out[p] = f
            pos += k
        return out

    def coords_of(self, n: int, maps: Dict[int, Mat]) -> Vector:
        out: List = []
        field = self.source.algebra.field
        for p, basis in self.components[n]:
            f = maps.get(p)
            if f is None:
                out.extend([field.zero] * len(basis))
            else:
                out.extend(_coordinates(basis, f))
        return tuple(out)


def hom_complex_data(X: BoundedComplex, Y: BoundedComplex) -> HomComplex:
    """Hom(X, Y)_n = ⊕_p Hom_A(X_p, Y_{p+n}), ∂{f_p} = {∂^Y_{p+n} f_p − (−1)^n f_{p−1} ∂^X_p}."""
    if X.algebra is not Y.algebra:
        raise InvariantViolation("Hom complex across different algebras")
    A = X.algebra
    field = A.field
    lo, hi = Y.lo - X.hi, Y.hi - X.lo
    components: Dict[int, List[Tuple[int, Tuple[Mat, ...]]]] = {}
    for n in range(lo - 1, hi + 2):
        components[n] = [
            (p, hom_space(X.module(p), Y.module(p + n)).basis)
            for p in X.degrees()
            if Y.lo <= p + n <= Y.hi
        ]
    data = HomComplex(source=X, target=Y, components=components)

    modules = []
    for n in range(lo, hi + 1):
        dim_n = sum(len(b) for _, b in components[n])
        action = []
        for i in range(A.dim):
            cols = []
            for j in range(dim_n):
                maps = data.maps_of(n, Mat.identity(field, dim_n).column(j))
                acted = {p: Y.module(p + n).action[i] @ f for p, f in maps.items()}
                cols.append(data.coords_of(n, acted))
            action.append(Mat.from_columns(field, dim_n, cols))
        modules.append(FModule(A, dim_n, tuple(action), name=f"Hom({X.name},{Y.name})_{n}"))

    diffs: Dict[int, Mat] = {}
    for n in range(lo + 1, hi + 1):
        dim_n = modules[n - lo].dim
        sign = -1 if n % 2 else 1
        cols = []
        for j in range(dim_n):
            f = data.maps_of(n, Mat.identity(field, dim_n).column(j))
            out = {}
            for p, _ in components[n - 1]:
                acc = Mat.zeros(field, Y.dim(p + n - 1), X.dim(p))
                if p in f:
                    acc = acc + Y.d(p + n) @ f[p]
                if p - 1 in f:
                    acc = acc - (f[p - 1] @ X.d(p)).scale(sign)
                out[p] = acc
            cols.append(data.coords_of(n - 1, out))
        diffs[n] = Mat.from_columns(field, modules[n - 1 - lo].dim, cols)

    data.complex = make_complex(A, lo, modules, diffs, name=f"Hom({X.name},{Y.name})")
    return data


def hom_complex(X: BoundedComplex, Y: BoundedComplex) -> BoundedComplex:
    return hom_complex_data(X, Y).complex


def hom_morphism(P: BoundedComplex, alpha: ComplexMorphism) -> ComplexMorphism:
    """Hom(P, α): Hom(P, X) → Hom(P, Y), f ↦ α∘f."""
    src = hom_complex_data(P, alpha.source)
    tgt = hom_complex_data(P, alpha.target)
    field = P.algebra.field
    components = {}
    for n in src.complex.degrees():
        dim_n = src.complex.dim(n)
        cols = []
        for j in range(dim_n):
            maps = src.maps_of(n, Mat.identity(field, dim_n).column(j))
            pushed = {p: alpha.f(p + n) @ f for p, f in maps.items()}
            if tgt.complex.lo <= n <= tgt.complex.hi:
                cols.append(tgt.coords_of(n, pushed))
        if tgt.complex.lo <= n <= tgt.complex.hi:
            components[n] = Mat.from_columns(field, tgt.complex.dim(n), cols)
    return make_morphism(src.complex, tgt.complex, components, name=f"Hom({P.name},{alpha.name})")


def morphism_space(X: BoundedComplex, Y: BoundedComplex) -> List[ComplexMorphism]:
    """Basis of chain maps X → Y from the direct constraint system."""
    field = X.algebra.field
    degrees = [n for n in X.degrees() if Y.lo <= n <= Y.hi]
    offsets, total = {}, 0
    for n in degrees:
        offsets[n] = total
        total += Y.dim(n) * X.dim(n)
    rows: List[List] = []

    def blank():
        return [field.zero] * total

    for n in degrees:
        Xn, Yn = X.module(n), Y.module(n)
        for Mg, Ng in zip(Xn.generator_actions, Yn.generator_actions):
            for r in range(Yn.dim):
                for c in range(Xn.dim):
                    row = blank()
                    for k in range(Yn.dim):
                        row[offsets[n] + k * Xn.dim + c] = row[offsets[n] + k * Xn.dim + c] + Ng[r, k]
                    for k in range(Xn.dim):
                        row[offsets[n] + r * Xn.dim + k] = row[offsets[n] + r * Xn.dim + k] - Mg[k, c]
                    rows.append(row)
    for n in X.degrees():
        # ∂^Y_n f_n − f_{n−1} ∂^X_n = 0 as maps X_n → Y_{n−1}
        DY, DX = Y.d(n), X.d(n)
        for r in range(Y.dim(n - 1)):
            for c in range(X.dim(n)):
                row = blank()
                if n in offsets:
                    for k in range(Y.dim(n)):
                        row[offsets[n] + k * X.dim(n) + c] = row[offsets[n] + k * X.dim(n) + c] + DY[r, k]
                if n - 1 in offsets:
                    for k in range(X.dim(n - 1)):
                        idx = offsets[n - 1] + r * X.dim(n - 1) + k
                        row[idx] = row[idx] - DX[k, c]
                rows.append(row)
    if total == 0:
        return []
    K = Mat(field, rows, len(rows), total).kernel() if rows else Mat.identity(field, total)
    out = []
    for j in range(K.cols):
        v = K.column(j)
        comps = {n: Mat.from_flat(field, Y.dim(n), X.dim(n), v[offsets[n]:offsets[n] + Y.dim(n) * X.dim(n)]) for n in degrees}
        out.append(ComplexMorphism(X, Y, comps))
    return out


def combine_morphisms(
    X: BoundedComplex,
    Y: BoundedComplex,
    basis: Sequence[ComplexMorphism],
    coeffs: Sequence,
    name: str = "alpha",
) -> ComplexMorphism:
    """Σ cᵢ·αᵢ over a basis from morphism_space; missing coefficients are zero."""
    field = X.algebra.field
    if len(coeffs) > len(basis):
        raise InvariantViolation(f"{len(coeffs)} coefficients for a {len(basis)}-dimensional space of chain maps")
    comps = {}
    for n in X.degrees():
        if not Y.lo <= n <= Y.hi:
            continue
        total = Mat.zeros(field, Y.dim(n), X.dim(n))
        for c, b in zip(coeffs, basis):
            c = field.coerce(c)
            if c:
                total = total + b.f(n).scale(c)
        comps[n] = total
    return make_morphism(X, Y, comps, name=name)


def base_change_complex(X: BoundedComplex, phi: AlgebraMap, name: Optional[str] = None) -> Tuple[BoundedComplex, Dict[int, BaseChange]]:
    """S⊗_R X degreewise, with the per-degree base change data."""
    changes = {n: base_change(phi, X.module(n)) for n in X.degrees()}
    modules = [changes[n].module for n in X.degrees()]
    diffs = {n: base_change_map(changes[n], changes[n - 1], X.d(n)) for n in range(X.lo + 1, X.hi + 1)}
    complex_ = make_complex(phi.target, X.lo, modules, diffs, name=name or f"{phi.target.name}⊗{X.name}")
    return complex_, changes


def tensor_complex(X: BoundedComplex, other: Union[AlgebraMap, FModule], name: Optional[str] = None) -> BoundedComplex:
    """
    Degreewise S⊗_R X for an AlgebraMap, or X ⊗_A M for an FModule;
    differentials are ∂ ⊗ 1 without signs.
    """
    if isinstance(other, AlgebraMap):
        return base_change_complex(X, other, name=name)[0]
    field = X.algebra.field
    M = other
    parts = {n: tensor_modules(X.module(n), M) for n in X.degrees()}
    modules = [parts[n][0] for n in X.degrees()]
    I_M = Mat.identity(field, M.dim)
    diffs = {
        n: parts[n - 1][1].project @ X.d(n).kron(I_M) @ parts[n][1].lift
        for n in range(X.lo + 1, X.hi + 1)
    }
    return make_complex(X.algebra, X.lo, modules, diffs, name=name or f"{X.name}⊗{M.name}")


def koszul(A: LocalAlgebra, xs: Sequence[Vector], name: str = "K") -> BoundedComplex:
    """
    Koszul complex on x_1..x_m: K_i = A^{C(m,i)} on the wedges e_S (S in
    lexicographic order), ∂e_S = Σ_j (−1)^j x_{s_j} e_{S∖s_j}.
    """
    m = len(xs)
    for x in xs:
        if not A.in_radical(x):
            raise InvariantViolation("Koszul sequence must lie in the radical")
    field = A.field
    wedges = [list(combinations(range(m), i)) for i in range(m + 1)]
    modules = [free_module(A, len(w), name=f"K_{i}") for i, w in enumerate(wedges)]
    mults = [A.left_mult(x) for x in xs]
    diffs = {}
    for i in range(1, m + 1):
        index = {S: r for r, S in enumerate(wedges[i - 1])}
        rows, cols = len(wedges[i - 1]) * A.dim, len(wedges[i]) * A.dim
        data = [[field.zero] * cols for _ in range(rows)]
        for c, S in enumerate(wedges[i]):
            for j, s in enumerate(S):
                T = S[:j] + S[j + 1:]
                block = mults[s] if j % 2 == 0 else -mults[s]
                r0, c0 = index[T] * A.dim, c * A.dim
                for a in range(A.dim):
                    for b in range(A.dim):
                        data[r0 + a][c0 + b] = data[r0 + a][c0 + b] + block[a, b]
        diffs[i] = Mat(field, data, rows, cols)
    return make_complex(A, 0, modules, diffs, name=name)


def mapping_cone(alpha: ComplexMorphism, name: Optional[str] = None) -> BoundedComplex:
    """Cone_n = X_{n−1} ⊕ Y_n, ∂(x, y) = (−∂x, ∂y + f(x))."""
    X, Y = alpha.source, alpha.target
    A = X.algebra
    field = A.field
    lo, hi = min(X.lo + 1, Y.lo), max(X.hi + 1, Y.hi)
    modules = [direct_sum(X.module(n - 1), Y.module(n)) for n in range(lo, hi + 1)]
    diffs = {}
    for n in range(lo + 1, hi + 1):
        top = Mat.hstack(field, X.dim(n - 2), [-X.d(n - 1), Mat.zeros(field, X.dim(n - 2), Y.dim(n))])
        bottom = Mat.hstack(field, Y.dim(n - 1), [alpha.f(n - 1), Y.d(n)])
        diffs[n] = Mat.vstack(field, X.dim(n - 1) + Y.dim(n), [top, bottom])
    return make_complex(A, lo, modules, diffs, name=name or f"Cone({alpha.name})")


def direct_sum_complex(X: BoundedComplex, Y: BoundedComplex, name: Optional[str] = None) -> BoundedComplex:
    A = X.algebra
    lo, hi = min(X.lo, Y.lo), max(X.hi, Y.hi)
    modules = [direct_sum(X.module(n), Y.module(n)) for n in range(lo, hi + 1)]
    diffs = {n: Mat.block_diag(A.field, [X.d(n), Y.d(n)]) for n in range(lo + 1, hi + 1)}
    return make_complex(A, lo, modules, diffs, name=name or f"{X.name}⊕{Y.name}")


def projection_morphism(X: BoundedComplex, Y: BoundedComplex) -> ComplexMorphism:
    """X ⊕ Y → X."""
    S = direct_sum_complex(X, Y)
    field = X.algebra.field
    comps = {}
    for n in S.degrees():
        comps[n] = Mat.hstack(field, X.dim(n), [Mat.identity(field, X.dim(n)), Mat.zeros(field, X.dim(n), Y.dim(n))])
    return make_morphism(S, X, comps, name="pr")


def resolution_complex(res: Resolution, name: Optional[str] = None) -> BoundedComplex:
    """F_L → … → F_0 in degrees 0..L."""
    A = res.module.algebra
    modules = [free_module(A, b) for b in res.betti]
    diffs = {i + 1: res.differentials[i] for i in range(res.length)}
    return make_complex(A, 0, modules, diffs, name=name or f"P({res.module.name})")


def ext_complex(res: Resolution, N: FModule) -> BoundedComplex:
    """Hom(P, N) placed in degrees −L..0, with H_{−i} = Ext^i."""
    A = N.algebra
    L = res.length
    modules = []
    for i in range(L, -1, -1):
        b = res.betti[i]
        modules.append(direct_sum(*([N] * b), name=f"{N.name}^{b}") if b else zero_module(A))
    diffs = {-i: hom_cochain(res, N, i) for i in range(L)}
    return make_complex(A, -L, modules, diffs, name=f"Hom(P,{N.name})")


# =========================================================================
# QUASI-ISOMORPHISMS
# =========================================================================

def quasi_iso_by_homology(alpha: ComplexMorphism) -> bool:
    for n in alpha.degrees():
        hx, hy = homology_data(alpha.source, n), homology_data(alpha.target, n)
        if hx.module.dim != hy.module.dim:
            return False
        if hx.module.dim and not induced_map(alpha, n, hx, hy).is_invertible():
            return False
    return True


def is_quasi_iso(alpha: ComplexMorphism) -> bool:
    """Each H_n(α) bijective; cross-checked against exactness of the mapping cone."""
    by_homology = quasi_iso_by_homology(alpha)
    by_cone = is_exact(mapping_cone(alpha))
    if by_homology != by_cone:
        raise EquivalenceViolation(
            "homology test and cone exactness disagree",
            {"morphism": alpha.name, "homology": by_homology, "cone_exact": by_cone},
        )
    return by_homology


@dataclass(frozen=True)
class Prop24Report:
    hom_qis: bool
    alpha_qis: bool

    def as_dict(self):
        return {"hom_P_alpha_qis": self.hom_qis, "alpha_qis": self.alpha_qis}


def prop24_harness(alpha: ComplexMorphism, P: BoundedComplex) -> Prop24Report:
    """For P bounded, degreewise free and not exact: Hom(P, α) qis ⇒ α qis."""
    A = P.algebra
    for n in P.degrees():
        Pn = P.module(n)
        if Pn.dim != number_of_generators(Pn) * A.dim:
            raise HypothesisViolation(f"P is not free in degree {n}", clause="degreewise free")
    if is_exact(P):
        raise HypothesisViolation("P is exact", clause="P not quasi-isomorphic to 0")
    report = Prop24Report(hom_qis=is_quasi_iso(hom_morphism(P, alpha)), alpha_qis=is_quasi_iso(alpha))
    if report.hom_qis and not report.alpha_qis:
        raise EquivalenceViolation("Hom(P, α) is a quasi-isomorphism but α is not", report.as_dict())
    return report


# =========================================================================
# BASE CHANGE AND ω
# =========================================================================

def base_change_homology_map(X: BoundedComplex, phi: AlgebraMap, n: int) -> Tuple[Mat, FModule, FModule]:
    """
    S⊗_R H_n(X) → H_n(S⊗_R X), s⊗[z] ↦ [s⊗z]; returns the matrix with its
    source and target modules.
    """
    S = phi.target
    field = S.field
    hx = homology_data(X, n)
    bc_h = base_change(phi, hx.module)
    SX, changes = base_change_complex(X, phi)
    hs = homology_data(SX, n)
    q_n = changes[n].quotient
    dim_x = X.dim(n)
    cols = []
    for v in bc_h.quotient.lift.columns():
        # v lives in S ⊗_k H_n(X) with index s·dim H + h
        acc = [field.zero] * (S.dim * dim_x)
        for idx, c in enumerate(v):
            if not c:
                continue
            s, h = divmod(idx, hx.module.dim)
            z = hx.representative(Mat.identity(field, hx.module.dim).column(h))
            for m, zm in enumerate(z):
                if zm:
                    acc[s * dim_x + m] = acc[s * dim_x + m] + c * zm
        image = q_n.project.apply(acc)
        coords = hs.cycles.solve(image)
        if coords is None:
            raise InvariantViolation("s⊗z is not a cycle")
        cols.append(hs.projection.apply(coords))
    return Mat.from_columns(field, hs.module.dim, cols), bc_h.module, hs.module


def base_change_isomorphism_holds(X: BoundedComplex, phi: AlgebraMap) -> Dict[int, bool]:
    """Per degree: is S⊗H_n(X) → H_n(S⊗X) bijective."""
    out = {}
    for n in X.degrees():
        beta, src, tgt = base_change_homology_map(X, phi, n)
        out[n] = src.dim == tgt.dim and (src.dim == 0 or beta.is_invertible())
    return out


@dataclass(frozen=True)
class OmegaReport:
    degrees: Tuple[Tuple[int, int, int, int], ...]
    omega_qis: bool
    residue_iso: bool

    def as_dict(self):
        return {
            "degrees": [{"n": n, "dim_H": a, "dim_H_SX": b, "rank_H_omega": r} for n, a, b, r in self.degrees],
            "omega_qis": self.omega_qis,
            "residue_iso": self.residue_iso,
        }


def omega_report(phi: AlgebraMap, X: BoundedComplex) -> OmegaReport:
    """
    ω: X → S⊗_R X, x ↦ 1⊗x, as a morphism of R-complexes. For free φ and X
    with nonzero homology, ω is a quasi-isomorphism exactly when the residue
    map R/m → S/mS is bijective.
    """
    SX, changes = base_change_complex(X, phi)
    R = phi.source
    restricted = make_complex(
        R, SX.lo, [restrict(phi, SX.module(n)) for n in SX.degrees()],
        {n: SX.d(n) for n in range(SX.lo + 1, SX.hi + 1)}, name=f"{SX.name}|{R.name}",
    )
    omega = make_morphism(X, restricted, {n: changes[n].iota for n in X.degrees()}, name="omega")
    rows = []
    for n in X.degrees():
        hx, hy = homology_data(X, n), homology_data(restricted, n)
        rank = induced_map(omega, n, hx, hy).rank() if hx.module.dim and hy.module.dim else 0
        rows.append((n, hx.module.dim, hy.module.dim, rank))
    qis = is_quasi_iso(omega)
    residue_iso = residue_extension_degree(phi) == 1
    if is_flat(phi).flat and not is_exact(X) and qis != residue_iso:
        raise EquivalenceViolation("ω quasi-isomorphism disagrees with the residue map", {"omega_qis": qis, "residue_iso": residue_iso})
    return OmegaReport(degrees=tuple(rows), omega_qis=qis, residue_iso=residue_iso)
