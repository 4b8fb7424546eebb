"""
Dense Exact Linear Algebra.

Immutable matrices over a FieldDesc with reduced row-echelon form, kernels,
solving, inverses, and the subspace helpers (canonical bases, quotient maps,
coordinates) that every module computation is built on.
"""
import logging
from typing import Any, Iterable, List, Optional, Sequence, Tuple

from homascend.core.errors import FieldArithmeticError, InvariantViolation
from homascend.core.fields import FieldDesc

logger = logging.getLogger(__name__)

Vector = Tuple[Any, ...]


class Mat:
    """Immutable rows × cols matrix with entries in ``field``."""

    __slots__ = ("field", "rows", "cols", "_data")

    def __init__(self, field: FieldDesc, data: Sequence[Sequence[Any]], rows: Optional[int] = None, cols: Optional[int] = None):
        self.field = field
        self.rows = len(data) if rows is None else rows
        if cols is None:
            cols = len(data[0]) if data else 0
        self.cols = cols
        if len(data) != self.rows or any(len(r) != cols for r in data):
            raise InvariantViolation(f"entry count does not match a {self.rows}×{cols} matrix")
        self._data = tuple(tuple(field.coerce(v) for v in row) for row in data)

    @classmethod
    def _raw(cls, field: FieldDesc, data: List[List[Any]], rows: int, cols: int) -> "Mat":
        m = cls.__new__(cls)
        m.field = field
        m.rows = rows
        m.cols = cols
        m._data = tuple(tuple(r) for r in data)
        return m

    # =========================================================================
    # CONSTRUCTORS
    # =========================================================================

    @classmethod
    def zeros(cls, field: FieldDesc, rows: int, cols: int) -> "Mat":
        z = field.zero
        return cls._raw(field, [[z] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, field: FieldDesc, n: int) -> "Mat":
        z, o = field.zero, field.one
        return cls._raw(field, [[o if i == j else z for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, field: FieldDesc, rows: int, columns: Sequence[Sequence[Any]]) -> "Mat":
        columns = list(columns)
        data = [[field.coerce(c[i]) for c in columns] for i in range(rows)]
        return cls._raw(field, data, rows, len(columns))

    @classmethod
    def from_flat(cls, field: FieldDesc, rows: int, cols: int, entries: Sequence[Any]) -> "Mat":
        if len(entries) != rows * cols:
            raise InvariantViolation(f"entry count {len(entries)} ≠ {rows}×{cols}")
        return cls(field, [list(entries[i * cols:(i + 1) * cols]) for i in range(rows)], rows, cols)

    @classmethod
    def hstack(cls, field: FieldDesc, rows: int, blocks: Sequence["Mat"]) -> "Mat":
        data = [[] for _ in range(rows)]
        for b in blocks:
            if b.rows != rows:
                raise InvariantViolation("hstack row mismatch")
            for i in range(rows):
                data[i].extend(b._data[i])
        return cls._raw(field, data, rows, sum(b.cols for b in blocks))

    @classmethod
    def vstack(cls, field: FieldDesc, cols: int, blocks: Sequence["Mat"]) -> "Mat":
        data = []
        for b in blocks:
            if b.cols != cols:
                raise InvariantViolation("vstack column mismatch")
            data.extend(list(r) for r in b._data)
        return cls._raw(field, data, len(data), cols)

    @classmethod
    def block_diag(cls, field: FieldDesc, blocks: Sequence["Mat"]) -> "Mat":
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        data = [[field.zero] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                data[r0 + i][c0:c0 + b.cols] = b._data[i]
            r0 += b.rows
            c0 += b.cols
        return cls._raw(field, data, rows, cols)

    # =========================================================================
    # ACCESS
    # =========================================================================

    def __getitem__(self, idx: Tuple[int, int]) -> Any:
        i, j = idx
        return self._data[i][j]

    def row(self, i: int) -> Vector:
        return self._data[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self._data)

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> List[List[Any]]:
        return [list(r) for r in self._data]

    def flatten(self) -> Vector:
        return tuple(v for r in self._data for v in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Mat":
        return Mat._raw(self.field, [[self._data[i][j] for j in cols] for i in rows], len(rows), len(cols))

    # =========================================================================
    # ARITHMETIC
    # =========================================================================

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise InvariantViolation(f"cannot multiply {self.rows}×{self.cols} by {other.rows}×{other.cols}")
        zero = self.field.zero
        ocols = other.cols
        odata = other._data
        out = []
        for row in self._data:
            acc = [zero] * ocols
            for k, a in enumerate(row):
                if a:
                    orow = odata[k]
                    for j in range(ocols):
                        b = orow[j]
                        if b:
                            acc[j] = acc[j] + a * b
            out.append(acc)
        return Mat._raw(self.field, out, self.rows, ocols)

    def apply(self, v: Sequence[Any]) -> Vector:
        """Matrix–vector product."""
        zero = self.field.zero
        out = []
        for row in self._data:
            acc = zero
            for a, b in zip(row, v):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return tuple(out)

    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat._raw(self.field, [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)], self.rows, self.cols)

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat._raw(self.field, [[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)], self.rows, self.cols)

    def __neg__(self) -> "Mat":
        return Mat._raw(self.field, [[-a for a in r] for r in self._data], self.rows, self.cols)

    def scale(self, c: Any) -> "Mat":
        c = self.field.coerce(c)
        return Mat._raw(self.field, [[c * a for a in r] for r in self._data], self.rows, self.cols)

    def _same_shape(self, other: "Mat") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InvariantViolation("matrix shape mismatch")

    @property
    def T(self) -> "Mat":
        return Mat._raw(self.field, [list(c) for c in zip(*self._data)] if self.rows else [[] for _ in range(self.cols)], self.cols, self.rows)

    def kron(self, other: "Mat") -> "Mat":
        rows = self.rows * other.rows
        cols = self.cols * other.cols
        data = [[self.field.zero] * cols for _ in range(rows)]
        for i, r in enumerate(self._data):
            for j, a in enumerate(r):
                if not a:
                    continue
                for k, s in enumerate(other._data):
                    base = data[i * other.rows + k]
                    for l, b in enumerate(s):
                        if b:
                            base[j * other.cols + l] = a * b
        return Mat._raw(self.field, data, rows, cols)

    def power(self, n: int) -> "Mat":
        result = Mat.identity(self.field, self.rows)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    # =========================================================================
    # ELIMINATION
    # =========================================================================

    def rref(self) -> Tuple["Mat", List[int], int]:
        """Reduced row-echelon form, pivot columns and rank."""
        rows = [list(r) for r in self._data]
        one = self.field.one
        pivots: List[int] = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break
            piv = next((i for i in range(r, self.rows) if rows[i][c]), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = one / rows[r][c]
            pr = [inv * v if v else v for v in rows[r]]
            rows[r] = pr
            support = [j for j in range(c, self.cols) if pr[j]]
            for i in range(self.rows):
                if i == r:
                    continue
                f = rows[i][c]
                if f:
                    ri = rows[i]
                    for j in support:
                        ri[j] = ri[j] - f * pr[j]
            pivots.append(c)
            r += 1
        return Mat._raw(self.field, rows, self.rows, self.cols), pivots, len(pivots)

    def rank(self) -> int:
        return self.rref()[2]

    def kernel(self) -> "Mat":
        """Columns form a basis of the null space (cols − rank columns)."""
        R, pivots, rank = self.rref()
        free = [c for c in range(self.cols) if c not in set(pivots)]
        zero, one = self.field.zero, self.field.one
        basis = []
        for f in free:
            v = [zero] * self.cols
            v[f] = one
            for i, p in enumerate(pivots):
                v[p] = -R[i, f]
            basis.append(v)
        return Mat.from_columns(self.field, self.cols, basis)

    def image_basis(self) -> "Mat":
        """Columns of ``self`` at pivot positions: a basis of the column space."""
        _, pivots, _ = self.rref()
        return self.submatrix(range(self.rows), pivots)

    def solve(self, b: Sequence[Any]) -> Optional[Vector]:
        """A particular solution of self·x = b, or None when inconsistent."""
        aug = Mat._raw(self.field, [list(r) + [self.field.coerce(v)] for r, v in zip(self._data, b)], self.rows, self.cols + 1)
        R, pivots, _ = aug.rref()
        if pivots and pivots[-1] == self.cols:
            return None
        x = [self.field.zero] * self.cols
        for i, p in enumerate(pivots):
            x[p] = R[i, self.cols]
        return tuple(x)

    def solve_matrix(self, B: "Mat") -> Optional["Mat"]:
        """X with self·X = B, or None."""
        cols = []
        for j in range(B.cols):
            x = self.solve(B.column(j))
            if x is None:
                return None
            cols.append(x)
        return Mat.from_columns(self.field, self.cols, cols)

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise InvariantViolation("only square matrices are invertible")
        n = self.rows
        aug = Mat.hstack(self.field, n, [self, Mat.identity(self.field, n)])
        R, pivots, _ = aug.rref()
        if pivots[:n] != list(range(n)):
            raise FieldArithmeticError("matrix is singular")
        return R.submatrix(range(n), range(n, 2 * n))

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def det(self) -> Any:
        if self.rows != self.cols:
            raise InvariantViolation("determinant of a non-square matrix")
        rows = [list(r) for r in self._data]
        n = self.rows
        det = self.field.one
        for c in range(n):
            piv = next((i for i in range(c, n) if rows[i][c]), None)
            if piv is None:
                return self.field.zero
            if piv != c:
                rows[c], rows[piv] = rows[piv], rows[c]
                det = -det
            det = det * rows[c][c]
            inv = self.field.one / rows[c][c]
            for i in range(c + 1, n):
                f = rows[i][c] * inv
                if f:
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
        return det

    # =========================================================================
    # PREDICATES
    # =========================================================================

    def is_zero(self) -> bool:
        return not any(v for r in self._data for v in r)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == Mat.identity(self.field, self.rows)

    def __eq__(self, other):
        return isinstance(other, Mat) and self.rows == other.rows and self.cols == other.cols and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, self._data))

    def fingerprint(self) -> Tuple[str, ...]:
        return tuple(self.field.format(v) for v in self.flatten())

    def __repr__(self):
        body = "; ".join(", ".join(self.field.format(v) for v in r) for r in self._data)
        return f"Mat{self.rows}x{self.cols}[{body}]"


# =========================================================================
# VECTOR AND SUBSPACE HELPERS
# =========================================================================

def zero_vector(field: FieldDesc, n: int) -> Vector:
    return tuple([field.zero] * n)


def unit_vector(field: FieldDesc, n: int, i: int) -> Vector:
    v = [field.zero] * n
    v[i] = field.one
    return tuple(v)


def vec_add(u: Sequence[Any], v: Sequence[Any]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence[Any], v: Sequence[Any]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c: Any, v: Sequence[Any]) -> Vector:
    return tuple(c * a for a in v)


def span_basis(field: FieldDesc, n: int, vectors: Iterable[Sequence[Any]]) -> Mat:
    """
    Canonical basis of the span: the nonzero rows of the RREF of the vectors
    stacked as rows, returned as columns of an n × r matrix.
    """
    rows = [list(v) for v in vectors]
    if not rows:
        return Mat.zeros(field, n, 0)
    R, _, rank = Mat(field, rows, len(rows), n).rref()
    return Mat.from_columns(field, n, [R.row(i) for i in range(rank)])


def column_span(M: Mat) -> Mat:
    return span_basis(M.field, M.rows, M.columns())


def same_span(A: Mat, B: Mat) -> bool:
    return column_span(A) == column_span(B)


def in_span(basis: Mat, v: Sequence[Any]) -> bool:
    if basis.cols == 0:
        return not any(v)
    return basis.solve(v) is not None


def span_contains(big: Mat, small: Mat) -> bool:
    if small.cols == 0:
        return True
    stacked = Mat.hstack(big.field, big.rows, [big, small])
    return stacked.rank() == big.rank()


def span_sum(field: FieldDesc, n: int, *bases: Mat) -> Mat:
    return span_basis(field, n, [c for b in bases for c in b.columns()])


def intersect(A: Mat, B: Mat) -> Mat:
    """Basis of span(A) ∩ span(B)."""
    field, n = A.field, A.rows
    if A.cols == 0 or B.cols == 0:
        return Mat.zeros(field, n, 0)
    K = Mat.hstack(field, n, [A, -B]).kernel()
    return span_basis(field, n, [A.apply(K.column(j)[:A.cols]) for j in range(K.cols)])


def left_inverse(B: Mat) -> Mat:
    """L with L·B = I for B of full column rank."""
    field, n, d = B.field, B.rows, B.cols
    if d == 0:
        return Mat.zeros(field, 0, n)
    aug = Mat.hstack(field, n, [B, Mat.identity(field, n)])
    R, pivots, _ = aug.rref()
    if pivots[:d] != list(range(d)):
        raise InvariantViolation("columns are not linearly independent")
    return R.submatrix(range(d), range(d, d + n))


class QuotientMap:
    """
    Coordinates on V/W for a subspace W ⊆ V = k^n.

    The quotient basis is the set of non-pivot coordinates of W's RREF, so the
    surviving standard basis vectors of V give the lift.
    """

    def __init__(self, field: FieldDesc, n: int, w_vectors: Iterable[Sequence[Any]]):
        self.field = field
        self.n = n
        rows = [list(v) for v in w_vectors]
        if rows:
            R, pivots, rank = Mat(field, rows, len(rows), n).rref()
        else:
            R, pivots, rank = Mat.zeros(field, 0, n), [], 0
        self.pivots = pivots
        pivot_set = set(pivots)
        self.kept = [j for j in range(n) if j not in pivot_set]
        self.dim = len(self.kept)
        index = {j: i for i, j in enumerate(self.kept)}
        data = [[field.zero] * n for _ in range(self.dim)]
        for j in self.kept:
            data[index[j]][j] = field.one
        for r, p in enumerate(pivots):
            row = R.row(r)
            for j in self.kept:
                if row[j]:
                    data[index[j]][p] = -row[j]
        self.project = Mat._raw(field, data, self.dim, n)
        self.lift = Mat.from_columns(field, n, [unit_vector(field, n, j) for j in self.kept])
        self.subspace = Mat.from_columns(field, n, [R.row(i) for i in range(rank)])

    def induced(self, A: Mat) -> Mat:
        """Endomorphism of V/W induced by A (A must preserve W)."""
        return self.project @ A @ self.lift
