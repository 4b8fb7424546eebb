"""
Session Lexer.

Tokens, bracketed lists and literal matrices shared by the declaration
parser and the command handlers.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

from homascend.core.errors import SessionParseError
from homascend.core.fields import FieldDesc, parse_scalar
from homascend.core.linalg import Mat, Vector
from homascend.core.polynomials import Poly
from homascend.core.sympy_bridge import univariate_poly


@dataclass(frozen=True)
class Token:
    text: str
    column: int


def tokenize(text: str, offset: int = 0) -> List[Token]:
    """Split on whitespace outside brackets; bracket groups stay single tokens."""
    tokens: List[Token] = []
    depth, start = 0, None
    for i, ch in enumerate(text):
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
            if depth < 0:
                raise SessionParseError("unbalanced bracket", column=offset + i + 1)
        if ch.isspace() and depth == 0:
            if start is not None:
                tokens.append(Token(text[start:i], offset + start + 1))
                start = None
        elif start is None:
            start = i
    if depth:
        raise SessionParseError("unclosed bracket", column=offset + len(text))
    if start is not None:
        tokens.append(Token(text[start:], offset + start + 1))
    return tokens


def split_list(text: str) -> List[str]:
    """Top-level items of ``[a, b, [c, d]]``."""
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise SessionParseError(f"expected a bracketed list, got {text!r}")
    body = text[1:-1]
    items, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        elif ch == "," and depth == 0:
            items.append(body[start:i].strip())
            start = i + 1
    last = body[start:].strip()
    if last or items:
        items.append(last)
    return items


def parse_matrix(field: FieldDesc, text: str, cols: Optional[int] = None) -> Mat:
    """Row-major ``[[a, b], [c, d]]``; ``cols`` fixes the width of an empty matrix."""
    rows = [[parse_scalar(field, c) for c in split_list(r)] for r in split_list(text)]
    width = len(rows[0]) if rows else (cols or 0)
    if any(len(r) != width for r in rows):
        raise SessionParseError(f"ragged matrix {text!r}")
    return Mat(field, rows, len(rows), width)


def parse_vectors(field: FieldDesc, text: str, length: int) -> List[Vector]:
    """``[[v1...], [v2...]]`` as coordinate vectors of the given length."""
    vectors = [tuple(parse_scalar(field, c) for c in split_list(v)) for v in split_list(text)]
    for v in vectors:
        if len(v) != length:
            raise SessionParseError(f"vector of length {len(v)} where {length} is needed")
    return vectors


def parse_polys(field: FieldDesc, text: str, var: str = "x") -> List[Poly]:
    return [univariate_poly(field, item, var) for item in split_list(text)]


def parse_scalars(field: FieldDesc, text: str) -> List:
    return [parse_scalar(field, c) for c in split_list(text)]


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(c) for c in split_list(text)]
    except ValueError:
        raise SessionParseError(f"expected a list of integers, got {text!r}")


def optional_ints(items: Sequence[str]) -> List[Optional[int]]:
    """Integers, with ``-`` standing for an absent entry."""
    out: List[Optional[int]] = []
    for item in items:
        if item == "-":
            out.append(None)
            continue
        try:
            out.append(int(item))
        except ValueError:
            raise SessionParseError(f"expected an integer or '-', got {item!r}")
    return out
