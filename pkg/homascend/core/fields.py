"""
Exact Fields.

Scalars of the engine: the rationals (``fractions.Fraction``), prime fields
GF(p) and simple extensions k[t]/(f). A FieldDesc describes a field and owns
coercion into it; elements support the ordinary arithmetic operators, so the
linear algebra layer never needs to know which field it runs over.
"""
import logging
import random
from abc import ABC, abstractmethod
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

import sympy

from homascend.core.errors import FieldArithmeticError, InvariantViolation, ReducibleModulusError

logger = logging.getLogger(__name__)

# Prime fields up to this order are searched exhaustively for roots.
EXHAUSTIVE_ROOT_ORDER = 1 << 16


class FieldKind(str, Enum):
    """Kinds of supported fields."""
    RATIONALS = "rationals"
    PRIME_FIELD = "prime-field"
    SIMPLE_EXTENSION = "simple-extension"


class FieldOp(str, Enum):
    """Operations accepted by field_arith."""
    ADD = "add"
    MUL = "mul"
    INV = "inv"
    NEG = "neg"
    EQ = "eq"


# =========================================================================
# ELEMENTS
# =========================================================================

class GFElem:
    """Element of the prime field GF(p)."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.value = value % p
        self.p = p

    def _other(self, other: Any) -> int:
        if isinstance(other, GFElem):
            if other.p != self.p:
                raise FieldArithmeticError(f"mixing GF({self.p}) and GF({other.p})")
            return other.value
        if isinstance(other, int):
            return other
        raise TypeError(f"cannot combine GF({self.p}) element with {type(other).__name__}")

    def __add__(self, other):
        return GFElem(self.value + self._other(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return GFElem(self.value - self._other(other), self.p)

    def __rsub__(self, other):
        return GFElem(self._other(other) - self.value, self.p)

    def __mul__(self, other):
        return GFElem(self.value * self._other(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return GFElem(-self.value, self.p)

    def inverse(self) -> "GFElem":
        if self.value == 0:
            raise FieldArithmeticError(f"division by zero in GF({self.p})")
        return GFElem(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * GFElem(self._other(other), self.p).inverse()

    def __rtruediv__(self, other):
        return GFElem(self._other(other), self.p) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return GFElem(pow(self.value, n, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, GFElem):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return (other - self.value) % self.p == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"GF{self.p}({self.value})"

    def __str__(self):
        return str(self.value)


class ExtElem:
    """Element of a simple extension, stored as coefficients over the base."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: "SimpleExtension", coeffs: Tuple[Any, ...]):
        self.field = field
        self.coeffs = coeffs

    def _other(self, other: Any) -> Tuple[Any, ...]:
        if isinstance(other, ExtElem):
            if other.field is not self.field and other.field != self.field:
                raise FieldArithmeticError("mixing elements of different extensions")
            return other.coeffs
        return self.field.coerce(other).coeffs

    def __add__(self, other):
        b = self._other(other)
        return ExtElem(self.field, tuple(x + y for x, y in zip(self.coeffs, b)))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return ExtElem(self.field, tuple(x - y for x, y in zip(self.coeffs, b)))

    def __rsub__(self, other):
        b = self._other(other)
        return ExtElem(self.field, tuple(y - x for x, y in zip(self.coeffs, b)))

    def __mul__(self, other):
        return ExtElem(self.field, self.field._mul(self.coeffs, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return ExtElem(self.field, tuple(-x for x in self.coeffs))

    def inverse(self) -> "ExtElem":
        return ExtElem(self.field, self.field._inv(self.coeffs))

    def __truediv__(self, other):
        return self * ExtElem(self.field, self._other(other)).inverse()

    def __rtruediv__(self, other):
        return ExtElem(self.field, self._other(other)) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, ExtElem):
            return self.coeffs == other.coeffs and (other.field is self.field or other.field == self.field)
        try:
            return self.coeffs == self.field.coerce(other).coeffs
        except (TypeError, FieldArithmeticError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        return f"ExtElem({self.field.format(self)})"

    def __str__(self):
        return self.field.format(self)


FieldElem = Union[Fraction, GFElem, ExtElem]


# =========================================================================
# FIELD DESCRIPTORS
# =========================================================================

class FieldDesc(ABC):
    """Description of an exact field; elements are created through ``coerce``."""

    kind: FieldKind
    characteristic: int

    @property
    @abstractmethod
    def zero(self) -> FieldElem:
        ...

    @property
    @abstractmethod
    def one(self) -> FieldElem:
        ...

    @abstractmethod
    def coerce(self, value: Any) -> FieldElem:
        ...

    @property
    @abstractmethod
    def degree(self) -> int:
        """Degree over the prime field (ℚ counts as degree 1)."""

    @property
    def is_finite(self) -> bool:
        return self.characteristic > 0

    @property
    def order(self) -> Optional[int]:
        if not self.is_finite:
            return None
        return self.characteristic ** self.degree

    @abstractmethod
    def elements(self) -> Iterator[FieldElem]:
        ...

    @abstractmethod
    def random_element(self, rng: random.Random, bound: int = 10) -> FieldElem:
        ...

    @abstractmethod
    def roots(self, coeffs: Sequence[FieldElem]) -> List[FieldElem]:
        """Roots in this field of the polynomial with coefficients low to high."""

    @abstractmethod
    def key(self) -> Tuple:
        ...

    def format(self, a: FieldElem) -> str:
        return str(a)

    def __eq__(self, other):
        return isinstance(other, FieldDesc) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


class RationalField(FieldDesc):
    """The field ℚ with arbitrary-precision Fraction elements."""

    kind = FieldKind.RATIONALS
    characteristic = 0

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    @property
    def degree(self) -> int:
        return 1

    def coerce(self, value: Any) -> Fraction:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, str)):
            return Fraction(value)
        if isinstance(value, sympy.Rational):
            return Fraction(int(value.p), int(value.q))
        raise FieldArithmeticError(f"cannot coerce {value!r} into ℚ")

    def elements(self) -> Iterator[Fraction]:
        raise FieldArithmeticError("ℚ is infinite")

    def random_element(self, rng: random.Random, bound: int = 10) -> Fraction:
        return Fraction(rng.randint(-bound, bound), rng.randint(1, 3))

    def roots(self, coeffs: Sequence[Fraction]) -> List[Fraction]:
        coeffs = _trimmed(list(coeffs))
        if len(coeffs) <= 1:
            return []
        x = sympy.Symbol("x")
        poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], x, domain="QQ")
        found = []
        for factor, _ in poly.factor_list()[1]:
            if factor.degree() == 1:
                a, b = factor.all_coeffs()
                root = -sympy.Rational(b) / sympy.Rational(a)
                found.append(Fraction(int(root.p), int(root.q)))
        return sorted(set(found))

    def key(self) -> Tuple:
        return ("Q",)

    def __repr__(self):
        return "QQ"


class PrimeField(FieldDesc):
    """The prime field GF(p)."""

    kind = FieldKind.PRIME_FIELD

    def __init__(self, p: int):
        if p < 2 or not sympy.isprime(p):
            raise InvariantViolation(f"GF(p) requires a prime, got {p}")
        self.p = p
        self.characteristic = p

    @property
    def zero(self) -> GFElem:
        return GFElem(0, self.p)

    @property
    def one(self) -> GFElem:
        return GFElem(1, self.p)

    @property
    def degree(self) -> int:
        return 1

    def coerce(self, value: Any) -> GFElem:
        if isinstance(value, GFElem):
            if value.p != self.p:
                raise FieldArithmeticError(f"element of GF({value.p}) is not in GF({self.p})")
            return value
        if isinstance(value, int):
            return GFElem(value, self.p)
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, sympy.Rational):
            value = Fraction(int(value.p), int(value.q))
        if isinstance(value, Fraction):
            return GFElem(value.numerator, self.p) / GFElem(value.denominator, self.p)
        raise FieldArithmeticError(f"cannot coerce {value!r} into GF({self.p})")

    def elements(self) -> Iterator[GFElem]:
        for v in range(self.p):
            yield GFElem(v, self.p)

    def random_element(self, rng: random.Random, bound: int = 10) -> GFElem:
        return GFElem(rng.randrange(self.p), self.p)

    def roots(self, coeffs: Sequence[GFElem]) -> List[GFElem]:
        coeffs = _trimmed(list(coeffs))
        if len(coeffs) <= 1:
            return []
        if self.p <= EXHAUSTIVE_ROOT_ORDER:
            return [a for a in self.elements() if not _horner(coeffs, a, self.zero)]
        x = sympy.Symbol("x")
        poly = sympy.Poly([c.value for c in reversed(coeffs)], x, modulus=self.p)
        found = []
        for factor, _ in poly.factor_list()[1]:
            if factor.degree() == 1:
                a, b = (int(c) for c in factor.all_coeffs())
                found.append(-GFElem(b, self.p) / GFElem(a, self.p))
        return sorted(set(found), key=lambda e: e.value)

    def key(self) -> Tuple:
        return ("GF", self.p)

    def __repr__(self):
        return f"GF({self.p})"


class SimpleExtension(FieldDesc):
    """
    Simple extension base[t]/(f) with f monic of degree ≥ 2.

    Irreducibility is verified by root search for degree ≤ 3; for higher
    degree a failed inversion raises ReducibleModulusError.
    """

    kind = FieldKind.SIMPLE_EXTENSION

    def __init__(self, base: FieldDesc, minpoly: Sequence[Any], gen_name: str = "t"):
        coeffs = [base.coerce(c) for c in minpoly]
        coeffs = _trimmed(coeffs)
        if len(coeffs) < 3:
            raise InvariantViolation("minimal polynomial must have degree ≥ 2")
        if coeffs[-1] != base.one:
            raise InvariantViolation("minimal polynomial must be monic")
        self.base = base
        self.minpoly = tuple(coeffs)
        self.d = len(coeffs) - 1
        self.gen_name = gen_name
        self.characteristic = base.characteristic
        if self.d <= 3:
            found = base.roots(self.minpoly)
            if found:
                raise ReducibleModulusError(
                    f"minimal polynomial has root {base.format(found[0])} in the base field"
                )
        else:
            logger.debug(f"Irreducibility of degree-{self.d} modulus is caller-asserted")

    @property
    def zero(self) -> ExtElem:
        return ExtElem(self, tuple([self.base.zero] * self.d))

    @property
    def one(self) -> ExtElem:
        return ExtElem(self, tuple([self.base.one] + [self.base.zero] * (self.d - 1)))

    @property
    def gen(self) -> ExtElem:
        coeffs = [self.base.zero] * self.d
        coeffs[1] = self.base.one
        return ExtElem(self, tuple(coeffs))

    @property
    def degree(self) -> int:
        return self.base.degree * self.d

    def coerce(self, value: Any) -> ExtElem:
        if isinstance(value, ExtElem):
            if value.field is not self and value.field != self:
                raise FieldArithmeticError("element belongs to a different extension")
            return value
        if isinstance(value, (tuple, list)):
            if len(value) > self.d:
                raise FieldArithmeticError(f"too many coordinates for a degree-{self.d} extension")
            coords = [self.base.coerce(v) for v in value] + [self.base.zero] * (self.d - len(value))
            return ExtElem(self, tuple(coords))
        return ExtElem(self, tuple([self.base.coerce(value)] + [self.base.zero] * (self.d - 1)))

    def vector(self, a: ExtElem) -> Tuple[Any, ...]:
        """Coordinates of ``a`` over the base in the power basis 1, t, …, t^{d−1}."""
        return self.coerce(a).coeffs

    def _mul(self, a: Tuple[Any, ...], b: Tuple[Any, ...]) -> Tuple[Any, ...]:
        zero = self.base.zero
        prod = [zero] * (2 * self.d - 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if y:
                    prod[i + j] = prod[i + j] + x * y
        for k in range(len(prod) - 1, self.d - 1, -1):
            c = prod[k]
            if c:
                shift = k - self.d
                for j in range(self.d):
                    prod[shift + j] = prod[shift + j] - c * self.minpoly[j]
                prod[k] = zero
        return tuple(prod[: self.d])

    def _inv(self, a: Tuple[Any, ...]) -> Tuple[Any, ...]:
        base = self.base
        if not any(a):
            raise FieldArithmeticError("division by zero in simple extension")
        r0, r1 = list(self.minpoly), _trimmed(list(a))
        s0, s1 = [base.zero], [base.one]
        while r1:
            q, r = _poly_divmod(r0, r1, base)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1, base), base)
        if len(r0) != 1:
            raise ReducibleModulusError("inversion failed: the minimal polynomial is reducible")
        scale = base.one / r0[0]
        _, rem = _poly_divmod([c * scale for c in s0], list(self.minpoly), base)
        return tuple(rem + [base.zero] * (self.d - len(rem)))

    def elements(self) -> Iterator[ExtElem]:
        for coords in product(list(self.base.elements()), repeat=self.d):
            yield ExtElem(self, tuple(coords))

    def random_element(self, rng: random.Random, bound: int = 10) -> ExtElem:
        return ExtElem(self, tuple(self.base.random_element(rng, bound) for _ in range(self.d)))

    def roots(self, coeffs: Sequence[ExtElem]) -> List[ExtElem]:
        coeffs = _trimmed([self.coerce(c) for c in coeffs])
        if len(coeffs) <= 1:
            return []
        if self.is_finite and self.order <= EXHAUSTIVE_ROOT_ORDER:
            return [a for a in self.elements() if not _horner(coeffs, a, self.zero)]
        # Roots lying in the base field only.
        if all(not any(c.coeffs[1:]) for c in coeffs):
            return [self.coerce(r) for r in self.base.roots([c.coeffs[0] for c in coeffs])]
        logger.debug("Root search over an infinite extension is restricted to base-field roots")
        return []

    def format(self, a: ExtElem) -> str:
        terms = []
        for j, c in enumerate(a.coeffs):
            if not c:
                continue
            if j == 0:
                terms.append(self.base.format(c))
            else:
                mono = self.gen_name if j == 1 else f"{self.gen_name}^{j}"
                terms.append(mono if c == self.base.one else f"({self.base.format(c)})*{mono}")
        return " + ".join(terms) if terms else "0"

    def key(self) -> Tuple:
        return ("EXT", self.base.key(), tuple(str(c) for c in self.minpoly))

    def __repr__(self):
        return f"{self.base!r}[{self.gen_name}]/({self.format_minpoly()})"

    def format_minpoly(self) -> str:
        parts = []
        for j, c in reversed(list(enumerate(self.minpoly))):
            if not c:
                continue
            mono = "1" if j == 0 else (self.gen_name if j == 1 else f"{self.gen_name}^{j}")
            parts.append(mono if c == self.base.one and j else f"{self.base.format(c)}*{mono}" if j else self.base.format(c))
        return " + ".join(parts)


QQ = RationalField()


def field_arith(a: FieldElem, b: Optional[FieldElem], op: Union[FieldOp, str]) -> Union[FieldElem, bool]:
    """Apply one field operation; ``inv`` and ``neg`` act on ``b`` and ``a`` respectively."""
    op = FieldOp(op)
    if op == FieldOp.ADD:
        return a + b
    if op == FieldOp.MUL:
        return a * b
    if op == FieldOp.NEG:
        return -a
    if op == FieldOp.INV:
        target = b if b is not None else a
        if not target:
            raise FieldArithmeticError("division by zero")
        return 1 / target if isinstance(target, Fraction) else target.inverse()
    return a == b


# =========================================================================
# COEFFICIENT-LIST HELPERS
# =========================================================================

def _trimmed(coeffs: List[Any]) -> List[Any]:
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return coeffs


def _horner(coeffs: Sequence[Any], a: Any, zero: Any) -> Any:
    acc = zero
    for c in reversed(coeffs):
        acc = acc * a + c
    return acc


def _poly_mul(a: List[Any], b: List[Any], base: FieldDesc) -> List[Any]:
    if not a or not b:
        return []
    out = [base.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    return _trimmed(out)


def _poly_sub(a: List[Any], b: List[Any], base: FieldDesc) -> List[Any]:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else base.zero) - (b[i] if i < len(b) else base.zero) for i in range(n)]
    return _trimmed(out)


def _poly_divmod(a: List[Any], b: List[Any], base: FieldDesc) -> Tuple[List[Any], List[Any]]:
    a = _trimmed(list(a))
    b = _trimmed(list(b))
    if not b:
        raise FieldArithmeticError("polynomial division by zero")
    q = [base.zero] * max(len(a) - len(b) + 1, 1)
    inv_lead = base.one / b[-1]
    while len(a) >= len(b):
        shift = len(a) - len(b)
        c = a[-1] * inv_lead
        q[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] = a[shift + j] - c * bj
        _trimmed(a)
    return _trimmed(q), a


# =========================================================================
# PARSING
# =========================================================================

def parse_scalar(field: FieldDesc, expr: Any) -> FieldElem:
    """
    Convert a sympy expression or string (``"1/2"``, ``"1+t"``) into ``field``.

    The generator of a simple extension is referenced by its ``gen_name``.
    """
    if isinstance(expr, (int, Fraction, GFElem, ExtElem)):
        return field.coerce(expr)
    if isinstance(expr, str):
        from homascend.core.sympy_bridge import parse_expression

        names = [field.gen_name] if isinstance(field, SimpleExtension) else []
        expr = parse_expression(expr, names)
    if isinstance(field, SimpleExtension):
        gen = sympy.Symbol(field.gen_name)
        poly = sympy.Poly(sympy.expand(expr), gen)
        acc = field.zero
        for (j,), coeff in poly.terms():
            acc = acc + parse_scalar(field.base, coeff) * (field.gen ** j)
        return acc
    if expr.free_symbols:
        raise FieldArithmeticError(f"unexpected symbols {sorted(map(str, expr.free_symbols))} in scalar")
    if not isinstance(expr, sympy.Rational):
        raise FieldArithmeticError(f"scalar {expr} is not an exact rational")
    return field.coerce(expr)
