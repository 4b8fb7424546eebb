"""
Sympy Bridge.

Parses polynomial text (``X+Y``, ``t^2+1``, ``x*y - 1/2*y^2``) into sympy
expressions with a restricted namespace, so names such as ``I``, ``E`` or
``S`` are plain symbols rather than sympy constants.
"""
from typing import Any, Dict, Sequence, Tuple

import sympy
from sympy.parsing.sympy_parser import auto_number, auto_symbol, convert_xor, parse_expr

from homascend.core.errors import InvariantViolation
from homascend.core.fields import FieldDesc, SimpleExtension, parse_scalar
from homascend.core.polynomials import Poly

_TRANSFORMATIONS = (auto_symbol, auto_number, convert_xor)
_GLOBALS = {
    "Integer": sympy.Integer,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
    "Float": sympy.Float,
}


def parse_expression(text: str, names: Sequence[str]) -> sympy.Expr:
    local: Dict[str, Any] = {name: sympy.Symbol(name) for name in names}
    try:
        expr = parse_expr(text, local_dict=local, global_dict=dict(_GLOBALS), transformations=_TRANSFORMATIONS)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as e:
        raise InvariantViolation(f"cannot parse expression {text!r}: {e}") from e
    unknown = {str(s) for s in expr.free_symbols} - set(names)
    if unknown:
        raise InvariantViolation(f"unknown names {sorted(unknown)} in {text!r}")
    if expr.has(sympy.Float):
        raise InvariantViolation(f"floating point literal in {text!r}; use exact fractions")
    return expr


def polynomial_terms(text_or_expr: Any, variables: Sequence[str], extra_names: Sequence[str] = ()) -> Dict[Tuple[int, ...], sympy.Expr]:
    """Monomial exponent tuples over ``variables`` mapped to sympy coefficients."""
    if isinstance(text_or_expr, str):
        expr = parse_expression(text_or_expr, list(variables) + list(extra_names))
    else:
        expr = sympy.sympify(text_or_expr)
    expr = sympy.expand(expr)
    if not variables:
        return {(): expr} if expr != 0 else {}
    poly = sympy.Poly(expr, *[sympy.Symbol(v) for v in variables])
    return {tuple(int(e) for e in monom): coeff for monom, coeff in poly.terms() if coeff != 0}


def univariate_poly(field: FieldDesc, text: str, var: str = "x") -> Poly:
    """Polynomial text in one variable with coefficients in ``field``."""
    extra = [field.gen_name] if isinstance(field, SimpleExtension) else []
    terms = polynomial_terms(text, [var], extra)
    if not terms:
        return Poly(field)
    coeffs = [field.zero] * (max(e for (e,) in terms) + 1)
    for (e,), c in terms.items():
        coeffs[e] = parse_scalar(field, c)
    return Poly(field, coeffs)
