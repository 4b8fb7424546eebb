"""
Session Parser.

Line-oriented session documents (grammar in docs/grammar.ebnf). Every
declared object is built through the service constructors, which verify its
invariants, so a parsed session only holds checked objects. Errors carry the
line and column of the offending token.
"""
import logging
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from homascend.core.errors import HomascendError, SessionParseError
from homascend.core.fields import QQ, FieldDesc, PrimeField, SimpleExtension, parse_scalar
from homascend.core.linalg import Mat, Vector
from homascend.core.polynomials import PolyMat
from homascend.core.sympy_bridge import polynomial_terms
from homascend.services.algebra_service import (
    AlgebraMap,
    LocalAlgebra,
    algebra_from_presentation,
    algebra_from_table,
    algebra_map_from_images,
    algebra_tensor_extension,
    field_algebra,
    identity_map,
    quotient_algebra,
)
from homascend.services.complex_service import (
    base_change_complex,
    concentrated,
    hom_complex,
    koszul,
    resolution_complex,
)
from homascend.services.module_service import (
    base_change,
    cyclic_module,
    direct_sum,
    free_module,
    minimal_resolution,
    module_from_generator_actions,
    present_module,
    regular_module,
    residue_module,
    restrict,
    zero_module,
)
from homascend.services.pid_service import PIDModule, PIDPresentation, classify
from homascend.session.commands import COMMANDS, resolve_args
from homascend.session.lexer import Token, parse_matrix, parse_polys, split_list, tokenize
from homascend.session.state import (
    Command,
    Declaration,
    DeclKind,
    Session,
    SessionConfig,
    create_session,
    declare,
    lookup,
)

logger = logging.getLogger(__name__)

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_DECLARATION = re.compile(rf"^(field|algebra|map|module|complex|pid)\s+({_IDENT})\s*=\s*(.*)$")
_CONFIG = re.compile(rf"^config\s+({_IDENT})\s*=\s*(\S+)\s*$")
_COMMAND = re.compile(r"^cmd\s+(.*)$")


class _Line:
    """Cursor over the tokens of one declaration body."""

    def __init__(self, session: Session, tokens: Sequence[Token], line: int, end_column: int):
        self.session = session
        self.tokens = list(tokens)
        self.pos = 0
        self.line = line
        self.end_column = end_column

    def error(self, message: str, token: Optional[Token] = None) -> SessionParseError:
        column = token.column if token is not None else self.end_column
        return SessionParseError(message, self.line, column)

    def next(self, what: str) -> Token:
        if self.pos >= len(self.tokens):
            raise self.error(f"expected {what}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def keyword(self, word: str) -> None:
        tok = self.next(f"'{word}'")
        if tok.text != word:
            raise self.error(f"expected '{word}', got {tok.text!r}", tok)

    def optional_keyword(self, word: str) -> bool:
        if self.pos < len(self.tokens) and self.tokens[self.pos].text == word:
            self.pos += 1
            return True
        return False

    def integer(self, what: str = "an integer") -> int:
        tok = self.next(what)
        try:
            return int(tok.text)
        except ValueError:
            raise self.error(f"expected {what}, got {tok.text!r}", tok)

    def items(self, what: str = "a list") -> Tuple[Token, List[str]]:
        tok = self.next(what)
        try:
            return tok, split_list(tok.text)
        except SessionParseError as e:
            raise self.error(e.reason, tok)

    def ref(self, kind: DeclKind) -> Declaration:
        tok = self.next(f"a {kind.value} identifier")
        try:
            return lookup(self.session, tok.text, kind)
        except HomascendError as e:
            raise self.error(str(e), tok)

    def rest(self) -> List[Token]:
        out = self.tokens[self.pos:]
        self.pos = len(self.tokens)
        return out

    def done(self) -> None:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            raise self.error(f"unexpected {tok.text!r}", tok)


# =========================================================================
# ELEMENTS AND MATRICES
# =========================================================================

def _element(A: LocalAlgebra, text: str) -> Vector:
    """Polynomial text in the variables of A, or a bracketed coordinate vector."""
    if text.startswith("["):
        return A.element([parse_scalar(A.field, c) for c in split_list(text)])
    return A.element(text)


# =========================================================================
# DECLARATIONS
# =========================================================================

def _field(cur: _Line, ident: str) -> Tuple[FieldDesc, Dict[str, Any]]:
    kind = cur.next("rationals, prime or extend")
    if kind.text == "rationals":
        return QQ, {}
    if kind.text == "prime":
        return PrimeField(cur.integer("a prime")), {}
    if kind.text == "extend":
        base = cur.ref(DeclKind.FIELD).value
        cur.keyword("by")
        poly_tokens = cur.rest()
        if not poly_tokens:
            raise cur.error("expected a minimal polynomial")
        text = " ".join(t.text for t in poly_tokens)
        names = sorted(set(re.findall(_IDENT, text)))
        if len(names) != 1:
            raise cur.error(f"minimal polynomial must use exactly one variable, found {names}", poly_tokens[0])
        terms = polynomial_terms(text, names)
        degree = max(e for (e,) in terms)
        minpoly = [parse_scalar(base, terms.get((j,), 0)) for j in range(degree + 1)]
        return SimpleExtension(base, minpoly, gen_name=names[0]), {}
    raise cur.error(f"unknown field form {kind.text!r}", kind)


def _algebra(cur: _Line, ident: str) -> Tuple[LocalAlgebra, Dict[str, Any]]:
    kind = cur.next("quotient, field, table or quotient_of")
    if kind.text == "quotient":
        field = cur.ref(DeclKind.FIELD).value
        _, variables = cur.items("a variable list")
        cur.keyword("rels")
        _, relations = cur.items("a relation list")
        cur.keyword("trunc")
        N = cur.integer("a truncation degree")
        return algebra_from_presentation(field, variables, relations, N, name=ident), {}
    if kind.text == "field":
        return field_algebra(cur.ref(DeclKind.FIELD).value, name=ident), {}
    if kind.text == "table":
        field = cur.ref(DeclKind.FIELD).value
        cur.keyword("unit")
        unit = cur.integer("a unit index")
        cur.keyword("radical")
        _, radical_items = cur.items("radical basis vectors")
        cur.keyword("products")
        _, product_rows = cur.items("a product table")
        table = [[[parse_scalar(field, c) for c in split_list(v)] for v in split_list(row)] for row in product_rows]
        radical = Mat.from_columns(field, len(table), [[parse_scalar(field, c) for c in split_list(v)] for v in radical_items])
        return algebra_from_table(field, table, unit, radical, name=ident), {}
    if kind.text == "quotient_of":
        A = cur.ref(DeclKind.ALGEBRA).value
        cur.keyword("by")
        _, gens = cur.items("ideal generators")
        B, projection = quotient_algebra(A, [_element(A, g) for g in gens], name=ident)
        return B, {"projection": projection}
    raise cur.error(f"unknown algebra form {kind.text!r}", kind)


def _target_name(cur: _Line, default: str) -> str:
    if cur.optional_keyword("as"):
        return cur.next("an algebra identifier").text
    return default


def _map(cur: _Line, ident: str) -> Tuple[AlgebraMap, Dict[str, Any], Optional[Declaration]]:
    """Returns the map and, for forms that create one, the declaration of the new target algebra."""
    kind = cur.next("tensor_extension, images, matrix, projection or identity")
    if kind.text == "tensor_extension":
        K = cur.ref(DeclKind.FIELD).value
        A = cur.ref(DeclKind.ALGEBRA).value
        target = _target_name(cur, "S")
        S, phi = algebra_tensor_extension(K, A, name=target)
        phi = AlgebraMap(phi.source, phi.target, phi.matrix, name=ident)
        return phi, {"scalars": K}, Declaration(DeclKind.ALGEBRA, target, S, cur.line)
    if kind.text in ("images", "matrix"):
        A = cur.ref(DeclKind.ALGEBRA).value
        cur.keyword("->")
        B = cur.ref(DeclKind.ALGEBRA).value
        if kind.text == "images":
            _, images = cur.items("images")
            return algebra_map_from_images(A, B, images, name=ident), {}, None
        tok = cur.next("a matrix")
        phi = AlgebraMap(A, B, parse_matrix(A.field, tok.text), name=ident)
        phi.verify()
        return phi, {}, None
    if kind.text == "projection":
        A = cur.ref(DeclKind.ALGEBRA).value
        cur.keyword("by")
        _, gens = cur.items("ideal generators")
        target = _target_name(cur, f"{A.name}_q")
        B, projection = quotient_algebra(A, [_element(A, g) for g in gens], name=target)
        phi = AlgebraMap(A, B, projection.matrix, name=ident)
        return phi, {}, Declaration(DeclKind.ALGEBRA, target, B, cur.line)
    if kind.text == "identity":
        return identity_map(cur.ref(DeclKind.ALGEBRA).value), {}, None
    raise cur.error(f"unknown map form {kind.text!r}", kind)


def _module(cur: _Line, ident: str):
    kind = cur.next("a module form")
    form = kind.text
    if form == "present":
        A = cur.ref(DeclKind.ALGEBRA).value
        cur.keyword("cols")
        cols = cur.integer("a column count")
        cur.keyword("rels")
        _, rows = cur.items("relation rows")
        relations = [[_element(A, e) for e in split_list(row)] for row in rows]
        return present_module(A, cols, relations, name=ident)
    if form == "free":
        A = cur.ref(DeclKind.ALGEBRA).value
        return free_module(A, cur.integer("a rank"), name=ident)
    if form in ("regular", "residue", "zero"):
        A = cur.ref(DeclKind.ALGEBRA).value
        if form == "zero":
            return zero_module(A)
        return (regular_module if form == "regular" else residue_module)(A, name=ident)
    if form == "cyclic":
        A = cur.ref(DeclKind.ALGEBRA).value
        _, gens = cur.items("ideal generators")
        return cyclic_module(A, [_element(A, g) for g in gens], name=ident)
    if form == "sum":
        parts = [cur.ref(DeclKind.MODULE).value]
        while cur.pos < len(cur.tokens):
            parts.append(cur.ref(DeclKind.MODULE).value)
        return direct_sum(*parts, name=ident)
    if form in ("base_change", "restrict"):
        phi = cur.ref(DeclKind.MAP).value
        M = cur.ref(DeclKind.MODULE).value
        if form == "restrict":
            return restrict(phi, M, name=ident)
        return base_change(phi, M, name=ident).module
    if form == "actions":
        A = cur.ref(DeclKind.ALGEBRA).value
        cur.keyword("dim")
        dim = cur.integer("a dimension")
        _, mats = cur.items("generator action matrices")
        actions = [parse_matrix(A.field, m) if dim else Mat.zeros(A.field, 0, 0) for m in mats]
        return module_from_generator_actions(A, actions, dim, name=ident)
    raise cur.error(f"unknown module form {form!r}", kind)


def _complex(cur: _Line, ident: str):
    kind = cur.next("a complex form")
    form = kind.text
    if form == "koszul":
        A = cur.ref(DeclKind.ALGEBRA).value
        if cur.pos < len(cur.tokens):
            _, xs = cur.items("a sequence")
            seq = [_element(A, x) for x in xs]
        else:
            seq = list(A.generators)
        return koszul(A, seq, name=ident)
    if form == "resolution":
        M = cur.ref(DeclKind.MODULE).value
        return resolution_complex(minimal_resolution(M, cur.integer("a length")), name=ident)
    if form == "concentrated":
        M = cur.ref(DeclKind.MODULE).value
        degree = cur.integer("a degree") if cur.pos < len(cur.tokens) else 0
        return concentrated(M, degree, name=ident)
    if form == "hom":
        X = cur.ref(DeclKind.COMPLEX).value
        Y = cur.ref(DeclKind.COMPLEX).value
        return hom_complex(X, Y)
    if form == "base_change":
        phi = cur.ref(DeclKind.MAP).value
        X = cur.ref(DeclKind.COMPLEX).value
        return base_change_complex(X, phi, name=ident)[0]
    raise cur.error(f"unknown complex form {form!r}", kind)


def _pid(cur: _Line, ident: str) -> Tuple[PIDModule, Dict[str, Any]]:
    if cur.optional_keyword("relations"):
        field = cur.ref(DeclKind.FIELD).value if cur.optional_keyword("over") else QQ
        tok, rows = cur.items("relation rows")
        cur.keyword("cols")
        cols = cur.integer("a generator count")
        try:
            entries = [parse_polys(field, row) for row in rows]
            presentation = PIDPresentation(cols, PolyMat(field, len(entries), cols, entries))
        except HomascendError as e:
            raise cur.error(str(e), tok)
        M = classify(presentation)
        return PIDModule(M.free_rank, M.exponents, note=ident), {"presentation": presentation}
    free = 0
    exponents: List[int] = []
    if cur.optional_keyword("free"):
        free = cur.integer("a free rank")
    if cur.optional_keyword("torsion"):
        tok, items = cur.items("torsion exponents")
        try:
            exponents = [int(e) for e in items]
        except ValueError:
            raise cur.error("torsion exponents must be integers", tok)
    return PIDModule(free, tuple(exponents), note=ident), {}


# =========================================================================
# DOCUMENT
# =========================================================================

def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def _declaration(session: Session, keyword: str, ident: str, body: str, line: int, offset: int) -> None:
    cur = _Line(session, tokenize(body, offset), line, offset + len(body) + 1)
    kind = DeclKind(keyword)
    extra: Dict[str, Any] = {}
    created: Optional[Declaration] = None
    if kind == DeclKind.FIELD:
        value, extra = _field(cur, ident)
    elif kind == DeclKind.ALGEBRA:
        value, extra = _algebra(cur, ident)
    elif kind == DeclKind.MAP:
        value, extra, created = _map(cur, ident)
    elif kind == DeclKind.MODULE:
        value = _module(cur, ident)
    elif kind == DeclKind.COMPLEX:
        value = _complex(cur, ident)
    else:
        value, extra = _pid(cur, ident)
    cur.done()
    declare(session, Declaration(kind, ident, value, line, extra))
    if created is not None:
        declare(session, created)
    logger.debug(f"line {line}: {kind.value} {ident}")


def _command(session: Session, body: str, line: int, offset: int) -> None:
    tokens = tokenize(body, offset)
    name = tokens[0]
    spec = COMMANDS.get(name.text)
    if spec is None:
        raise SessionParseError(f"unknown command {name.text!r}", line, name.column)
    args: List[str] = []
    options: List[Tuple[str, str]] = []
    for tok in tokens[1:]:
        if "=" in tok.text and not tok.text.startswith("["):
            key, value = tok.text.split("=", 1)
            options.append((key, value))
        else:
            args.append(tok.text)
    command = Command(len(session["commands"]), name.text, tuple(args), tuple(options), line)
    try:
        resolve_args(session, spec, command)
    except HomascendError as e:
        raise SessionParseError(str(e), line, name.column)
    session["commands"].append(command)


def _check_config(key: str, value: str, line: int, offset: int) -> None:
    try:
        SessionConfig(**{key: value})
    except ValidationError as e:
        raise SessionParseError(f"invalid config {key}: {e.errors()[0]['msg']}", line, offset + 1) from e


def parse_session(text: str, source: Optional[str] = None, config: Optional[SessionConfig] = None) -> Session:
    """
    Parse and verify a session document.

    ``config`` overrides are applied on top of the document's own ``config``
    lines (command-line flags win over the file).
    """
    session = create_session(source=source)
    settings_from_file: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw)
        if not stripped.strip():
            continue
        offset = len(stripped) - len(stripped.lstrip())
        body = stripped.strip()
        try:
            match = _CONFIG.match(body)
            if match:
                _check_config(match.group(1), match.group(2), number, offset)
                settings_from_file[match.group(1)] = match.group(2)
                continue
            match = _DECLARATION.match(body)
            if match:
                _declaration(session, match.group(1), match.group(2), match.group(3), number, offset + match.start(3))
                continue
            match = _COMMAND.match(body)
            if match:
                _command(session, match.group(1), number, offset + match.start(1))
                continue
            raise SessionParseError("expected config, a declaration or cmd", number, offset + 1)
        except SessionParseError as e:
            if e.line:
                raise
            raise SessionParseError(e.reason, number, e.column or offset + 1) from e
        except HomascendError as e:
            raise SessionParseError(str(e), number, offset + 1) from e

    merged = SessionConfig(**settings_from_file)
    if config is not None:
        merged = merged.model_copy(update=config.model_dump(exclude_unset=True))
    session["config"] = merged
    logger.info(f"Parsed {source or 'session'}: {len(session['declarations'])} declarations, {len(session['commands'])} commands")
    return session
