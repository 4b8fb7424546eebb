"""
Univariate Polynomials.

Dense polynomials in one variable over an exact field, and polynomial
matrices used as presentation matrices of modules over k[x] localized at (x).
Factorization over ℚ and GF(p) is delegated to sympy.
"""
import logging
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import sympy

from homascend.core.errors import FieldArithmeticError, InvariantViolation
from homascend.core.fields import FieldDesc, FieldKind, _poly_divmod, _trimmed

logger = logging.getLogger(__name__)


class Poly:
    """Immutable polynomial with coefficients stored low degree first."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FieldDesc, coeffs: Iterable[Any] = ()):
        self.field = field
        self.coeffs = tuple(_trimmed([field.coerce(c) for c in coeffs]))

    # ---------------------------------------------------------------------
    # Constructors
    # ---------------------------------------------------------------------

    @classmethod
    def const(cls, field: FieldDesc, c: Any) -> "Poly":
        return cls(field, [c])

    @classmethod
    def x(cls, field: FieldDesc) -> "Poly":
        return cls(field, [field.zero, field.one])

    @classmethod
    def monomial(cls, field: FieldDesc, e: int, c: Any = None) -> "Poly":
        c = field.one if c is None else c
        return cls(field, [field.zero] * e + [c])

    # ---------------------------------------------------------------------
    # Queries
    # ---------------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, −1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Any:
        return self.coeffs[-1] if self.coeffs else self.field.zero

    @property
    def valuation(self) -> Optional[int]:
        """x-adic valuation (index of the lowest nonzero coefficient), None for 0."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def coeff(self, i: int) -> Any:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.field.zero

    @property
    def constant_term(self) -> Any:
        return self.coeff(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_unit_local(self) -> bool:
        """True for units of k[x]_(x): nonzero constant term."""
        return bool(self.constant_term)

    def __bool__(self):
        return bool(self.coeffs)

    def __call__(self, a: Any) -> Any:
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * a + c
        return acc

    # ---------------------------------------------------------------------
    # Arithmetic
    # ---------------------------------------------------------------------

    def _lift(self, other: Any) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(self.field, other)

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.field, [self.coeff(i) + other.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.field, [self.coeff(i) - other.coeff(i) for i in range(n)])

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Poly(self.field, [-c for c in self.coeffs])

    def __mul__(self, other):
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            return Poly(self.field)
        out = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = out[i + j] + a * b
        return Poly(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = Poly.const(self.field, self.field.one)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if other.is_zero():
            raise FieldArithmeticError("polynomial division by zero")
        q, r = _poly_divmod(list(self.coeffs), list(other.coeffs), self.field)
        return Poly(self.field, q), Poly(self.field, r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def shift_down(self, e: int) -> "Poly":
        """Exact division by x^e; requires valuation ≥ e."""
        if self.coeffs and any(self.coeffs[:e]):
            raise InvariantViolation(f"polynomial not divisible by x^{e}")
        return Poly(self.field, self.coeffs[e:])

    def truncate(self, n: int) -> "Poly":
        """Reduction modulo x^n."""
        return Poly(self.field, self.coeffs[:n])

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        inv = self.field.one / self.lead
        return Poly(self.field, [c * inv for c in self.coeffs])

    def derivative(self) -> "Poly":
        return Poly(self.field, [c * i for i, c in enumerate(self.coeffs)][1:])

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        return self == self._lift(other)

    def __hash__(self):
        return hash(self.coeffs)

    # ---------------------------------------------------------------------
    # Factorization
    # ---------------------------------------------------------------------

    def squarefree_decomposition(self) -> List[Tuple["Poly", int]]:
        """
        Decomposition into pairwise coprime square-free parts.

        Over ℚ and GF(p) the parts come from sympy's factorization. Over
        finite extensions the parts whose multiplicity p divides survive in
        gcd(f, f') and are recovered from its p-th root; over extensions of ℚ
        Yun's algorithm is used.
        """
        if self.degree <= 0:
            return []
        if self.field.kind in (FieldKind.RATIONALS, FieldKind.PRIME_FIELD):
            parts = {}
            for factor, mult in self.factor():
                parts[mult] = parts.get(mult, Poly.const(self.field, self.field.one)) * factor
            return [(parts[m], m) for m in sorted(parts)]
        f = self.monic()
        if self.field.is_finite:
            return sorted(f._squarefree_finite(), key=lambda part: part[1])
        df = f.derivative()
        a = f.gcd(df)
        b = f // a
        d = (df // a) - b.derivative()
        out, i = [], 1
        while b.degree > 0:
            g = b.gcd(d)
            if g.degree > 0:
                out.append((g, i))
            b = b // g
            d = (d // g) - b.derivative()
            i += 1
        return out

    def pth_root(self) -> "Poly":
        """g with g^p = f for f in k[x^p], k finite of characteristic p."""
        p, q = self.field.characteristic, self.field.order
        if any(c for i, c in enumerate(self.coeffs) if i % p):
            raise FieldArithmeticError("polynomial is not a p-th power")
        return Poly(self.field, [c ** (q // p) for c in self.coeffs[::p]])

    def _squarefree_finite(self) -> List[Tuple["Poly", int]]:
        p = self.field.characteristic
        out: List[Tuple[Poly, int]] = []
        c = self.gcd(self.derivative())
        w = self // c
        i = 1
        while w.degree > 0:
            y = w.gcd(c)
            part = w // y
            if part.degree > 0:
                out.append((part, i))
            w, c = y, c // y
            i += 1
        if c.degree > 0:
            out += [(g, m * p) for g, m in c.pth_root()._squarefree_finite()]
        return out

    def factor(self) -> List[Tuple["Poly", int]]:
        """Monic irreducible factors with multiplicities (ℚ and GF(p) only)."""
        if self.degree <= 0:
            return []
        if self.field.kind not in (FieldKind.RATIONALS, FieldKind.PRIME_FIELD):
            raise FieldArithmeticError("factorization is only available over ℚ and GF(p)")
        x = sympy.Symbol("x")
        if self.field.kind == FieldKind.RATIONALS:
            coeffs = [sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)]
            poly = sympy.Poly(coeffs, x, domain="QQ")
        else:
            coeffs = [c.value for c in reversed(self.coeffs)]
            poly = sympy.Poly(coeffs, x, modulus=self.field.characteristic)
        out = []
        for factor, mult in poly.factor_list()[1]:
            raw = [int(c) if self.field.kind == FieldKind.PRIME_FIELD else c for c in factor.all_coeffs()]
            out.append((Poly(self.field, list(reversed(raw))).monic(), mult))
        out.sort(key=lambda fm: (fm[0].degree, [str(c) for c in fm[0].coeffs], fm[1]))
        return out

    def roots(self) -> List[Any]:
        return self.field.roots(self.coeffs)

    # ---------------------------------------------------------------------
    # Display
    # ---------------------------------------------------------------------

    def format(self, var: str = "x") -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            text = self.field.format(c)
            if not mono:
                terms.append(text)
            elif c == self.field.one:
                terms.append(mono)
            else:
                terms.append(f"({text})*{mono}")
        return " + ".join(terms)

    def __repr__(self):
        return f"Poly({self.format()})"


class PolyMat:
    """Matrix with univariate polynomial entries in the distinguished variable x."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: FieldDesc, rows: int, cols: int, entries: Sequence[Sequence[Any]]):
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise InvariantViolation(f"PolyMat shape mismatch: expected {rows}×{cols}")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.entries = tuple(
            tuple(e if isinstance(e, Poly) else Poly(field, e if isinstance(e, (list, tuple)) else [e]) for e in row)
            for row in entries
        )

    @classmethod
    def identity(cls, field: FieldDesc, n: int) -> "PolyMat":
        one, zero = Poly.const(field, field.one), Poly(field)
        return cls(field, n, n, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, field: FieldDesc, rows: int, cols: int) -> "PolyMat":
        zero = Poly(field)
        return cls(field, rows, cols, [[zero] * cols for _ in range(rows)])

    def __getitem__(self, idx: Tuple[int, int]) -> Poly:
        i, j = idx
        return self.entries[i][j]

    def __matmul__(self, other: "PolyMat") -> "PolyMat":
        if self.cols != other.rows:
            raise InvariantViolation("PolyMat product shape mismatch")
        zero = Poly(self.field)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a:
                        b = other.entries[k][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMat(self.field, self.rows, other.cols, out)

    def transpose(self) -> "PolyMat":
        return PolyMat(self.field, self.cols, self.rows, [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def evaluate(self, a: Any):
        """Entrywise evaluation, returned as an exact Mat."""
        from homascend.core.linalg import Mat

        return Mat(self.field, [[e(a) for e in row] for row in self.entries])

    def is_diagonal(self) -> bool:
        return all(not self.entries[i][j] for i in range(self.rows) for j in range(self.cols) if i != j)

    def max_degree(self) -> int:
        return max((e.degree for row in self.entries for e in row), default=-1)

    def __eq__(self, other):
        return isinstance(other, PolyMat) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        body = "; ".join(", ".join(e.format() for e in row) for row in self.entries)
        return f"PolyMat[{body}]"
