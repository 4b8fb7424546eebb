"""
Decomposition Service.

Isomorphism testing and Krull–Remak–Schmidt decomposition of modules over a
local algebra. Splittings come from Fitting's lemma applied to a
deterministic sequence of endomorphisms; pieces that cannot be split carry an
indecomposability certificate.
"""
import logging
import random
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product
from typing import Any, Iterator, List, Optional, Sequence, Tuple

from homascend.core.cancellation import CancellationToken, checkpoint
from homascend.core.config import settings
from homascend.core.errors import FieldArithmeticError, InvariantViolation, ResourceLimitExceeded
from homascend.core.fields import FieldKind
from homascend.core.linalg import Mat, span_basis
from homascend.core.polynomials import Poly
from homascend.services.module_service import (
    FModule,
    HomSpace,
    ann_supp,
    end_algebra,
    hom_space,
    number_of_generators,
    radical_filtration,
    socle,
    submodule,
)

logger = logging.getLogger(__name__)


# =========================================================================
# INVARIANTS
# =========================================================================

def fingerprint(M: FModule) -> Tuple:
    """Basis-independent invariants used for filtering and ordering."""
    return (
        M.dim,
        tuple(W.cols for W in radical_filtration(M)),
        socle(M).cols,
        tuple(L.rank() for L in M.action),
        ann_supp(M)[0].cols,
    )


def minimal_polynomial(f: Mat) -> Poly:
    """Monic minimal polynomial of a square matrix, from the first dependency among its powers."""
    field, n = f.field, f.rows
    powers = [Mat.identity(field, n)]
    while True:
        candidate = powers[-1] @ f if len(powers) > 1 else f
        stacked = Mat.from_columns(field, n * n, [P.flatten() for P in powers])
        sol = stacked.solve(candidate.flatten())
        if sol is not None:
            return Poly(field, [-c for c in sol] + [field.one])
        powers.append(candidate)


def evaluate_at(p: Poly, f: Mat) -> Mat:
    field, n = f.field, f.rows
    acc = Mat.zeros(field, n, n)
    I = Mat.identity(field, n)
    for c in reversed(p.coeffs):
        acc = acc @ f + I.scale(c)
    return acc


def fitting_split(f: Mat) -> Optional[Tuple[Mat, Mat]]:
    """(im f^n, ker f^n) when both are nonzero, else None."""
    n = f.rows
    P = f.power(n)
    r = P.rank()
    if r == 0 or r == n:
        return None
    return P.image_basis(), P.kernel()


def _factor_candidates(f: Mat) -> List[Poly]:
    """Polynomials p with p(f) a candidate for a nontrivial Fitting split."""
    mp = minimal_polynomial(f)
    field = f.field
    if mp.degree <= 1:
        return []
    out: List[Poly] = []
    if field.kind in (FieldKind.RATIONALS, FieldKind.PRIME_FIELD):
        factors = mp.factor()
        if len(factors) > 1:
            out.extend(p ** e for p, e in factors)
        return out
    parts = mp.squarefree_decomposition()
    if len(parts) > 1:
        out.extend(p ** e for p, e in parts)
    try:
        out.extend(Poly(field, [-lam, field.one]) for lam in mp.roots())
    except FieldArithmeticError:
        logger.debug("Root search unavailable for this minimal polynomial")
    return out


# =========================================================================
# ISOMORPHISM
# =========================================================================

@dataclass(frozen=True)
class IsoResult:
    isomorphic: bool
    witness: Optional[Mat] = None
    exact: bool = True
    reason: str = ""

    def __bool__(self):
        return self.isomorphic


def _grid(field, size_needed: int) -> Optional[List[Any]]:
    if field.is_finite:
        return list(field.elements())
    return [field.coerce(v) for v in range(size_needed)]


def is_isomorphic(
    M: FModule,
    N: FModule,
    seed: Optional[int] = None,
    token: Optional[CancellationToken] = None,
) -> IsoResult:
    """
    Decide M ≅ N, returning an invertible A-linear witness M → N when true.

    Cheap invariants reject first; then basis elements and seeded random
    combinations of Hom(M, N) are tested for invertibility. A negative answer
    is exact when an exhaustive grid fits within EXHAUSTIVE_LIMIT (all of Hom
    over a finite field, or a grid larger than deg det over an infinite one).
    """
    if M.algebra is not N.algebra:
        raise InvariantViolation("isomorphism test across different algebras")
    if M.dim != N.dim:
        return IsoResult(False, reason="dimension")
    if M.dim == 0:
        return IsoResult(True, Mat.zeros(M.field, 0, 0), reason="zero")
    if fingerprint(M) != fingerprint(N):
        return IsoResult(False, reason="invariants")
    H = hom_space(M, N)
    if H.dim != end_algebra(M).dim or H.dim != end_algebra(N).dim or H.dim != hom_space(N, M).dim:
        return IsoResult(False, reason="hom-dimensions")

    for f in H.basis:
        if f.is_invertible():
            return IsoResult(True, f, reason="basis-element")

    rng = random.Random(settings.SEED if seed is None else seed)
    field = M.field
    for _ in range(settings.ISO_TRIALS):
        checkpoint(token)
        f = H.combine([field.random_element(rng, bound=4 * M.dim + 4) for _ in range(H.dim)])
        if f.is_invertible():
            return IsoResult(True, f, reason="random-combination")

    grid = _grid(field, M.dim + 1)
    if len(grid) ** H.dim <= settings.EXHAUSTIVE_LIMIT:
        for coeffs in product(grid, repeat=H.dim):
            checkpoint(token)
            f = H.combine(coeffs)
            if f.is_invertible():
                return IsoResult(True, f, reason="exhaustive")
        return IsoResult(False, exact=True, reason="exhaustive")

    logger.info(f"Isomorphism {M.name} ≅ {N.name} rejected after {settings.ISO_TRIALS} random trials")
    return IsoResult(False, exact=False, reason="random-trials")


def decide_isomorphic(M: FModule, N: FModule, token: Optional[CancellationToken] = None) -> IsoResult:
    """is_isomorphic for callers that branch on the answer; a sampled negative raises."""
    result = is_isomorphic(M, N, token=token)
    if not result and not result.exact:
        raise ResourceLimitExceeded(
            f"{M.name} ≅ {N.name} undecided: {settings.ISO_TRIALS} random trials failed and the grid exceeds EXHAUSTIVE_LIMIT"
        )
    return result


def verify_isomorphism(M: FModule, N: FModule, f: Mat) -> bool:
    if (f.rows, f.cols) != (N.dim, M.dim) or not f.is_invertible():
        return False
    return all(Ng @ f == f @ Mg for Mg, Ng in zip(M.generator_actions, N.generator_actions))


# =========================================================================
# KRULL–REMAK–SCHMIDT
# =========================================================================

class Certificate(str, Enum):
    """Why a module was declared indecomposable (or not)."""
    ZERO = "zero"
    SIMPLE_TOP = "simple-top"
    SIMPLE_SOCLE = "simple-socle"
    EXHAUSTIVE_IDEMPOTENTS = "exhaustive-idempotents"
    NO_FITTING_SPLIT = "no-fitting-split"
    SPLIT = "split"


@dataclass(frozen=True)
class IndecomposabilityResult:
    indecomposable: bool
    certificate: Certificate
    split: Optional[Tuple[Mat, Mat]] = None

    def __bool__(self):
        return self.indecomposable


def _endomorphism_sequence(E: HomSpace, rng: random.Random) -> Iterator[Mat]:
    """Basis elements, pairwise sums, then seeded random combinations."""
    yield from E.basis
    for f, g in combinations(E.basis, 2):
        yield f + g
    field = E.source.field
    for _ in range(settings.ISO_TRIALS):
        yield E.combine([field.random_element(rng, bound=3) for _ in range(E.dim)])


def find_split(M: FModule, seed: Optional[int] = None, token: Optional[CancellationToken] = None) -> Optional[Tuple[Mat, Mat]]:
    """Two complementary nonzero submodule bases from a Fitting splitting, if one is found."""
    E = end_algebra(M)
    rng = random.Random(settings.SEED if seed is None else seed)
    for f in _endomorphism_sequence(E, rng):
        checkpoint(token)
        split = fitting_split(f)
        if split is not None:
            return split
        for p in _factor_candidates(f):
            split = fitting_split(evaluate_at(p, f))
            if split is not None:
                return split
    return None


def _exhaustive_idempotent(M: FModule, E: HomSpace, token: Optional[CancellationToken]) -> Optional[Tuple[Mat, Mat]]:
    field = M.field
    I = Mat.identity(field, M.dim)
    for coeffs in product(list(field.elements()), repeat=E.dim):
        checkpoint(token)
        e = E.combine(coeffs)
        if e @ e == e and not e.is_zero() and e != I:
            return e.image_basis(), (I - e).image_basis()
    return None


def is_indecomposable(M: FModule, seed: Optional[int] = None, token: Optional[CancellationToken] = None) -> IndecomposabilityResult:
    if M.dim == 0:
        return IndecomposabilityResult(False, Certificate.ZERO)
    if number_of_generators(M) == 1:
        return IndecomposabilityResult(True, Certificate.SIMPLE_TOP)
    if socle(M).cols == M.algebra.residue_degree:
        return IndecomposabilityResult(True, Certificate.SIMPLE_SOCLE)
    split = find_split(M, seed=seed, token=token)
    if split is not None:
        return IndecomposabilityResult(False, Certificate.SPLIT, split)
    E = end_algebra(M)
    field = M.field
    if field.is_finite and M.dim <= settings.IDEMPOTENT_SEARCH_DIM and field.order ** E.dim <= settings.EXHAUSTIVE_LIMIT:
        split = _exhaustive_idempotent(M, E, token)
        if split is not None:
            return IndecomposabilityResult(False, Certificate.SPLIT, split)
        return IndecomposabilityResult(True, Certificate.EXHAUSTIVE_IDEMPOTENTS)
    return IndecomposabilityResult(True, Certificate.NO_FITTING_SPLIT)


@dataclass(frozen=True, eq=False)
class KRSDecomposition:
    """M ≅ ⊕ pieces; ``embeddings[i]`` has the basis of piece i as columns in M's coordinates."""
    module: FModule
    pieces: Tuple[FModule, ...]
    embeddings: Tuple[Mat, ...]
    certificates: Tuple[Certificate, ...]

    @property
    def iso(self) -> Mat:
        """Invertible A-linear ⊕ pieces → M."""
        return Mat.hstack(self.module.field, self.module.dim, list(self.embeddings))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(P.dim for P in self.pieces)

    def verify(self) -> None:
        if self.module.dim == 0:
            return
        if not self.iso.is_invertible():
            raise InvariantViolation("decomposition pieces do not span the module")
        for P, W in zip(self.pieces, self.embeddings):
            for Lp, Lm in zip(P.generator_actions, self.module.generator_actions):
                if Lm @ W != W @ Lp:
                    raise InvariantViolation("piece embedding is not A-linear")


def krs_decompose(M: FModule, seed: Optional[int] = None, token: Optional[CancellationToken] = None) -> KRSDecomposition:
    """Decompose M into indecomposables, sorted by (dimension, fingerprint)."""
    found: List[Tuple[FModule, Mat, Certificate]] = []
    stack: List[Tuple[FModule, Mat]] = [(M, Mat.identity(M.field, M.dim))]
    while stack:
        checkpoint(token)
        piece, embedding = stack.pop()
        if piece.dim == 0:
            continue
        result = is_indecomposable(piece, seed=seed, token=token)
        if result.indecomposable:
            found.append((piece, embedding, result.certificate))
            continue
        for W in result.split:
            W = span_basis(piece.field, piece.dim, W.columns())
            stack.append((submodule(piece, W, name=M.name), embedding @ W))

    keyed = sorted(((fingerprint(P), i) for i, (P, _, _) in enumerate(found)))
    ordered = [found[i] for _, i in keyed]
    pieces = tuple(
        FModule(P.algebra, P.dim, P.action, name=f"{M.name}[{j}]") for j, (P, _, _) in enumerate(ordered)
    )
    decomposition = KRSDecomposition(
        module=M,
        pieces=pieces,
        embeddings=tuple(W for _, W, _ in ordered),
        certificates=tuple(c for _, _, c in ordered),
    )
    decomposition.verify()
    logger.debug(f"KRS of {M.name}: piece dims {decomposition.dims}")
    return decomposition


def match_multisets(
    first: Sequence[FModule],
    second: Sequence[FModule],
    token: Optional[CancellationToken] = None,
) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    """
    Greedy isomorphism matching of two lists of indecomposables.

    Returns matched index pairs and the unmatched indices of each side.
    """
    unmatched_second = list(range(len(second)))
    pairs: List[Tuple[int, int]] = []
    unmatched_first: List[int] = []
    for i, P in enumerate(first):
        hit = None
        for j in unmatched_second:
            if decide_isomorphic(P, second[j], token=token):
                hit = j
                break
        if hit is None:
            unmatched_first.append(i)
        else:
            pairs.append((i, hit))
            unmatched_second.remove(hit)
    return pairs, unmatched_first, unmatched_second


def same_decomposition(M: FModule, N: FModule, token: Optional[CancellationToken] = None) -> bool:
    a, b = krs_decompose(M, token=token).pieces, krs_decompose(N, token=token).pieces
    if len(a) != len(b):
        return False
    _, left, right = match_multisets(a, b, token=token)
    return not left and not right


def divides(M1: FModule, M: FModule, token: Optional[CancellationToken] = None) -> bool:
    """M1 ∣ M: M1 is isomorphic to a direct summand of M."""
    if M1.dim > M.dim:
        return False
    pieces_1 = krs_decompose(M1, token=token).pieces
    pieces = krs_decompose(M, token=token).pieces
    _, left, _ = match_multisets(pieces_1, pieces, token=token)
    return not left


def complement_pieces(M1: FModule, M: FModule, token: Optional[CancellationToken] = None) -> Optional[List[FModule]]:
    """Indecomposable pieces of M left after removing those of M1, or None when M1 ∤ M."""
    pieces_1 = krs_decompose(M1, token=token).pieces
    pieces = krs_decompose(M, token=token).pieces
    _, left, rest = match_multisets(pieces_1, pieces, token=token)
    if left:
        return None
    return [pieces[j] for j in rest]
