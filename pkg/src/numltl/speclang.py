"""Specification language: LTL over Boolean atoms plus polynomial predicates.

A specification is line-oriented text.  ``##`` starts a comment.  Declaration
lines are

    INPUT a, b                      Boolean atoms the environment controls
    OUTPUT g1, g2                   Boolean atoms the controller emits
    REAL x IN [0, 4]                bounded input-side real variable
    REAL OUTPUT u IN [-1, 1]        bounded output-side real variable
    PRED req := x + y > 3           predicate atom over one side's reals

Every other nonblank line is a temporal formula: a guarantee, or an
assumption when prefixed with ``ASSUME``.  Formula operators, tightest first:
``!`` and the temporal prefixes ``ALWAYS``/``EVENTUALLY``/``NEXT``, then
``&&``, ``||``, ``UNTIL``, ``->``.  ``UNTIL`` and ``->`` associate to the
right.  Polynomials use ``+ - * ^`` with nonnegative integer exponents and no
implicit multiplication; rational constants are integers, exact decimals, or
``p/q``.

A predicate atom is an atom of its side by construction and must not be
re-listed under INPUT or OUTPUT.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .bernstein import Box, ConstraintImplication, Polynomial, PolyConstraint

INPUT_SIDE = "input"
OUTPUT_SIDE = "output"


class SpecError(ValueError):
    """Parse or validation failure with a source position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


# -- formula AST --------------------------------------------------------


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


def atoms_of(formula: Formula) -> set[str]:
    if isinstance(formula, Atom):
        return {formula.name}
    if isinstance(formula, (TrueFormula, FalseFormula)):
        return set()
    if isinstance(formula, (Not, Next, Always, Eventually)):
        return atoms_of(formula.operand)
    return atoms_of(formula.left) | atoms_of(formula.right)


def subformulas(formula: Formula) -> set[Formula]:
    out = {formula}
    if isinstance(formula, (Not, Next, Always, Eventually)):
        out |= subformulas(formula.operand)
    elif isinstance(formula, (And, Or, Implies, Until)):
        out |= subformulas(formula.left) | subformulas(formula.right)
    return out


def is_propositional(formula: Formula) -> bool:
    """No temporal operator anywhere inside."""
    if isinstance(formula, (Atom, TrueFormula, FalseFormula)):
        return True
    if isinstance(formula, Not):
        return is_propositional(formula.operand)
    if isinstance(formula, (And, Or, Implies)):
        return is_propositional(formula.left) and is_propositional(formula.right)
    return False


def evaluate_propositional(formula: Formula, assignment: dict[str, bool]) -> bool:
    if isinstance(formula, Atom):
        return assignment[formula.name]
    if isinstance(formula, TrueFormula):
        return True
    if isinstance(formula, FalseFormula):
        return False
    if isinstance(formula, Not):
        return not evaluate_propositional(formula.operand, assignment)
    if isinstance(formula, And):
        return evaluate_propositional(formula.left, assignment) and evaluate_propositional(
            formula.right, assignment
        )
    if isinstance(formula, Or):
        return evaluate_propositional(formula.left, assignment) or evaluate_propositional(
            formula.right, assignment
        )
    if isinstance(formula, Implies):
        return not evaluate_propositional(formula.left, assignment) or evaluate_propositional(
            formula.right, assignment
        )
    msg = f"not a propositional formula: {formula}"
    raise ValueError(msg)


def substitute_atoms(formula: Formula, mapping: dict[str, Formula]) -> Formula:
    if isinstance(formula, Atom):
        return mapping.get(formula.name, formula)
    if isinstance(formula, (TrueFormula, FalseFormula)):
        return formula
    if isinstance(formula, Not):
        return Not(substitute_atoms(formula.operand, mapping))
    if isinstance(formula, Next):
        return Next(substitute_atoms(formula.operand, mapping))
    if isinstance(formula, Always):
        return Always(substitute_atoms(formula.operand, mapping))
    if isinstance(formula, Eventually):
        return Eventually(substitute_atoms(formula.operand, mapping))
    ctor = type(formula)
    return ctor(
        substitute_atoms(formula.left, mapping), substitute_atoms(formula.right, mapping)
    )


def conjoin(formulas) -> Formula:
    items = list(formulas)
    if not items:
        return TrueFormula()
    result = items[0]
    for f in items[1:]:
        result = And(result, f)
    return result


# -- document types ------------------------------------------------------


@dataclass(frozen=True)
class RealVarDecl:
    name: str
    lower: Fraction
    upper: Fraction
    side: str


@dataclass(frozen=True)
class PredicateDef:
    atom: str
    constraint: PolyConstraint
    side: str


@dataclass(frozen=True)
class SpecDocument:
    boolean_inputs: tuple[str, ...]
    boolean_outputs: tuple[str, ...]
    real_vars: tuple[RealVarDecl, ...]
    predicates: tuple[PredicateDef, ...]
    assumptions: tuple[Formula, ...]
    guarantees: tuple[Formula, ...]

    def real_vars_of(self, side: str) -> tuple[RealVarDecl, ...]:
        return tuple(v for v in self.real_vars if v.side == side)

    def predicates_of(self, side: str) -> tuple[PredicateDef, ...]:
        return tuple(p for p in self.predicates if p.side == side)

    def input_atoms(self) -> tuple[str, ...]:
        return self.boolean_inputs + tuple(p.atom for p in self.predicates_of(INPUT_SIDE))

    def output_atoms(self) -> tuple[str, ...]:
        return self.boolean_outputs + tuple(p.atom for p in self.predicates_of(OUTPUT_SIDE))


def document_formula(doc: SpecDocument) -> Formula:
    """Play semantics of a document: conjoined assumptions imply guarantees."""
    guarantee = conjoin(doc.guarantees)
    if not doc.assumptions:
        return guarantee
    return Implies(conjoin(doc.assumptions), guarantee)


# -- lexer ----------------------------------------------------------------


class TokenKind(Enum):
    IDENT = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number"
    NOT = "!"
    AND = "&&"
    OR = "||"
    IMPLIES = "->"
    LPAREN = "("
    RPAREN = ")"
    LBRACKET = "["
    RBRACKET = "]"
    COMMA = ","
    ASSIGN = ":="
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    CARET = "^"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    END = "end of line"


KEYWORDS = {
    "ALWAYS",
    "EVENTUALLY",
    "NEXT",
    "UNTIL",
    "ASSUME",
    "INPUT",
    "OUTPUT",
    "REAL",
    "PRED",
    "IN",
    "TRUE",
    "FALSE",
}

RELOPS = {TokenKind.LT: "<", TokenKind.LE: "<=", TokenKind.GT: ">", TokenKind.GE: ">="}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:/\d+)?")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int
    value: Fraction | None = None


def _lex_line(text: str, line_no: int) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        col = i + 1
        if ch in " \t":
            i += 1
            continue
        if ch == "<" and text.startswith("<->", i):
            raise SpecError(
                "'<->' is not an operator; rewrite as two implications "
                "(a -> b) && (b -> a)",
                line_no,
                col,
            )
        two = text[i : i + 2]
        if two == "&&":
            tokens.append(Token(TokenKind.AND, two, line_no, col))
            i += 2
            continue
        if two == "||":
            tokens.append(Token(TokenKind.OR, two, line_no, col))
            i += 2
            continue
        if two == "->":
            tokens.append(Token(TokenKind.IMPLIES, two, line_no, col))
            i += 2
            continue
        if two == ":=":
            tokens.append(Token(TokenKind.ASSIGN, two, line_no, col))
            i += 2
            continue
        if two == "<=":
            tokens.append(Token(TokenKind.LE, two, line_no, col))
            i += 2
            continue
        if two == ">=":
            tokens.append(Token(TokenKind.GE, two, line_no, col))
            i += 2
            continue
        single = {
            "!": TokenKind.NOT,
            "(": TokenKind.LPAREN,
            ")": TokenKind.RPAREN,
            "[": TokenKind.LBRACKET,
            "]": TokenKind.RBRACKET,
            ",": TokenKind.COMMA,
            "+": TokenKind.PLUS,
            "-": TokenKind.MINUS,
            "*": TokenKind.STAR,
            "^": TokenKind.CARET,
            "<": TokenKind.LT,
            ">": TokenKind.GT,
        }
        if ch in single:
            tokens.append(Token(single[ch], ch, line_no, col))
            i += 1
            continue
        if ch.isdigit():
            m = _NUMBER_RE.match(text, i)
            assert m is not None
            lit = m.group(0)
            tokens.append(Token(TokenKind.NUMBER, lit, line_no, col, value=Fraction(lit)))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, line_no, col))
            i = m.end()
            continue
        if ch == "/":
            raise SpecError(
                "'/' is only allowed inside a rational literal such as 7/2",
                line_no,
                col,
            )
        if ch == "=":
            raise SpecError(
                "'=' is not a relation; use one of <, <=, >, >=",
                line_no,
                col,
            )
        raise SpecError(f"unexpected character {ch!r}", line_no, col)
    tokens.append(Token(TokenKind.END, "", line_no, len(text) + 1))
    return tokens


# -- polynomial expressions over named variables --------------------------

_NamedTerms = dict[tuple[tuple[str, int], ...], Fraction]


@dataclass(frozen=True)
class _NamedPoly:
    terms: _NamedTerms

    @staticmethod
    def constant(value: Fraction) -> "_NamedPoly":
        return _NamedPoly({(): value} if value else {})

    @staticmethod
    def variable(name: str) -> "_NamedPoly":
        return _NamedPoly({((name, 1),): Fraction(1)})

    def _combine(self, other: "_NamedPoly", sign: int) -> "_NamedPoly":
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            new = terms.get(key, Fraction(0)) + sign * coeff
            if new:
                terms[key] = new
            else:
                terms.pop(key, None)
        return _NamedPoly(terms)

    def add(self, other: "_NamedPoly") -> "_NamedPoly":
        return self._combine(other, 1)

    def sub(self, other: "_NamedPoly") -> "_NamedPoly":
        return self._combine(other, -1)

    def neg(self) -> "_NamedPoly":
        return _NamedPoly({k: -c for k, c in self.terms.items()})

    def mul(self, other: "_NamedPoly") -> "_NamedPoly":
        terms: _NamedTerms = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                merged: dict[str, int] = {}
                for name, e in k1 + k2:
                    merged[name] = merged.get(name, 0) + e
                key = tuple(sorted(merged.items()))
                new = terms.get(key, Fraction(0)) + c1 * c2
                if new:
                    terms[key] = new
                else:
                    terms.pop(key, None)
        return _NamedPoly(terms)

    def power(self, exponent: int) -> "_NamedPoly":
        result = _NamedPoly.constant(Fraction(1))
        for _ in range(exponent):
            result = result.mul(self)
        return result

    def variables(self) -> set[str]:
        return {name for key in self.terms for name, _ in key}

    def lower(self, var_order: tuple[str, ...]) -> Polynomial:
        index = {name: i for i, name in enumerate(var_order)}
        terms = {}
        for key, coeff in self.terms.items():
            expo = [0] * len(var_order)
            for name, e in key:
                expo[index[name]] = e
            terms[tuple(expo)] = coeff
        return Polynomial(len(var_order), terms)


# -- parser ----------------------------------------------------------------


class _LineParser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.END:
            self.pos += 1
        return tok

    def expect(self, kind: TokenKind, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind is not kind:
            expected = what or kind.value
            raise SpecError(f"expected {expected}, found {tok.text or 'end of line'!r}", tok.line, tok.column)
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind is not TokenKind.KEYWORD or tok.text != word:
            raise SpecError(f"expected {word}, found {tok.text or 'end of line'!r}", tok.line, tok.column)
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.KEYWORD and tok.text == word

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind is not TokenKind.END:
            raise SpecError(f"unexpected trailing {tok.text!r}", tok.line, tok.column)

    # formulas

    def parse_formula(self, atom_sink: list[Token]) -> Formula:
        return self._implication(atom_sink)

    def _implication(self, sink) -> Formula:
        left = self._until(sink)
        if self.peek().kind is TokenKind.IMPLIES:
            self.advance()
            return Implies(left, self._implication(sink))
        return left

    def _until(self, sink) -> Formula:
        left = self._disjunction(sink)
        if self.at_keyword("UNTIL"):
            self.advance()
            return Until(left, self._until(sink))
        return left

    def _disjunction(self, sink) -> Formula:
        left = self._conjunction(sink)
        while self.peek().kind is TokenKind.OR:
            self.advance()
            left = Or(left, self._conjunction(sink))
        return left

    def _conjunction(self, sink) -> Formula:
        left = self._unary(sink)
        while self.peek().kind is TokenKind.AND:
            self.advance()
            left = And(left, self._unary(sink))
        return left

    def _unary(self, sink) -> Formula:
        tok = self.peek()
        if tok.kind is TokenKind.NOT:
            self.advance()
            return Not(self._unary(sink))
        if tok.kind is TokenKind.KEYWORD and tok.text in ("ALWAYS", "EVENTUALLY", "NEXT"):
            self.advance()
            operand = self._unary(sink)
            ctor = {"ALWAYS": Always, "EVENTUALLY": Eventually, "NEXT": Next}[tok.text]
            return ctor(operand)
        return self._atom(sink)

    def _atom(self, sink) -> Formula:
        tok = self.peek()
        if tok.kind is TokenKind.LPAREN:
            self.advance()
            inner = self._implication(sink)
            self.expect(TokenKind.RPAREN)
            return inner
        if tok.kind is TokenKind.KEYWORD and tok.text == "TRUE":
            self.advance()
            return TrueFormula()
        if tok.kind is TokenKind.KEYWORD and tok.text == "FALSE":
            self.advance()
            return FalseFormula()
        if tok.kind is TokenKind.IDENT:
            self.advance()
            sink.append(tok)
            return Atom(tok.text)
        raise SpecError(
            f"expected a formula, found {tok.text or 'end of line'!r}", tok.line, tok.column
        )

    # polynomials

    def parse_poly(self) -> _NamedPoly:
        tok = self.peek()
        negate = False
        if tok.kind is TokenKind.MINUS:
            self.advance()
            negate = True
        poly = self._poly_term()
        if negate:
            poly = poly.neg()
        while self.peek().kind in (TokenKind.PLUS, TokenKind.MINUS):
            op = self.advance()
            term = self._poly_term()
            poly = poly.add(term) if op.kind is TokenKind.PLUS else poly.sub(term)
        return poly

    def _poly_term(self) -> _NamedPoly:
        poly = self._poly_factor()
        while True:
            tok = self.peek()
            if tok.kind is TokenKind.STAR:
                self.advance()
                poly = poly.mul(self._poly_factor())
            elif tok.kind in (TokenKind.IDENT, TokenKind.NUMBER, TokenKind.LPAREN):
                raise SpecError(
                    "implicit multiplication is not allowed; write an explicit '*'",
                    tok.line,
                    tok.column,
                )
            else:
                return poly

    def _poly_factor(self) -> _NamedPoly:
        tok = self.peek()
        if tok.kind is TokenKind.MINUS:
            self.advance()
            return self._poly_factor().neg()
        base = self._poly_base()
        if self.peek().kind is TokenKind.CARET:
            self.advance()
            expo = self.expect(TokenKind.NUMBER, "a nonnegative integer exponent")
            if expo.value.denominator != 1:
                raise SpecError(
                    "exponent must be a nonnegative integer", expo.line, expo.column
                )
            base = base.power(int(expo.value))
        return base

    def _poly_base(self) -> _NamedPoly:
        tok = self.peek()
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return _NamedPoly.constant(tok.value)
        if tok.kind is TokenKind.IDENT:
            self.advance()
            return _NamedPoly.variable(tok.text)
        if tok.kind is TokenKind.LPAREN:
            self.advance()
            inner = self.parse_poly()
            self.expect(TokenKind.RPAREN)
            return inner
        raise SpecError(
            f"expected a polynomial, found {tok.text or 'end of line'!r}",
            tok.line,
            tok.column,
        )

    def parse_signed_rational(self) -> Fraction:
        sign = 1
        if self.peek().kind is TokenKind.MINUS:
            self.advance()
            sign = -1
        tok = self.expect(TokenKind.NUMBER, "a rational constant")
        return sign * tok.value


@dataclass
class _RawPred:
    token: Token
    atom: str
    poly: _NamedPoly
    relation: str


def parse_spec(text: str) -> SpecDocument:
    """Parse specification text, validating names, sides, and ranges."""
    input_decls: list[Token] = []
    output_decls: list[Token] = []
    real_decls: list[tuple[Token, RealVarDecl]] = []
    pred_decls: list[_RawPred] = []
    assumptions: list[tuple[Formula, list[Token]]] = []
    guarantees: list[tuple[Formula, list[Token]]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("##", 1)[0]
        if not content.strip():
            continue
        parser = _LineParser(_lex_line(content, line_no))
        head = parser.peek()
        if head.kind is TokenKind.KEYWORD and head.text in ("INPUT", "OUTPUT"):
            parser.advance()
            sink = input_decls if head.text == "INPUT" else output_decls
            while True:
                sink.append(parser.expect(TokenKind.IDENT, "an atom name"))
                if parser.peek().kind is TokenKind.COMMA:
                    parser.advance()
                    continue
                break
            parser.expect_end()
        elif head.kind is TokenKind.KEYWORD and head.text == "REAL":
            parser.advance()
            side = INPUT_SIDE
            if parser.at_keyword("INPUT"):
                parser.advance()
            elif parser.at_keyword("OUTPUT"):
                parser.advance()
                side = OUTPUT_SIDE
            name_tok = parser.expect(TokenKind.IDENT, "a variable name")
            parser.expect_keyword("IN")
            parser.expect(TokenKind.LBRACKET)
            lower = parser.parse_signed_rational()
            parser.expect(TokenKind.COMMA)
            upper = parser.parse_signed_rational()
            parser.expect(TokenKind.RBRACKET)
            parser.expect_end()
            if lower > upper:
                raise SpecError(
                    f"empty range [{lower}, {upper}] for real variable '{name_tok.text}'",
                    name_tok.line,
                    name_tok.column,
                )
            real_decls.append(
                (name_tok, RealVarDecl(name_tok.text, lower, upper, side))
            )
        elif head.kind is TokenKind.KEYWORD and head.text == "PRED":
            parser.advance()
            name_tok = parser.expect(TokenKind.IDENT, "a predicate atom name")
            parser.expect(TokenKind.ASSIGN)
            lhs = parser.parse_poly()
            rel_tok = parser.peek()
            if rel_tok.kind not in RELOPS:
                raise SpecError(
                    f"expected a relation (<, <=, >, >=), found {rel_tok.text or 'end of line'!r}",
                    rel_tok.line,
                    rel_tok.column,
                )
            parser.advance()
            rhs = parser.parse_poly()
            parser.expect_end()
            pred_decls.append(
                _RawPred(name_tok, name_tok.text, lhs.sub(rhs), RELOPS[rel_tok.kind])
            )
        else:
            sink: list[Token] = []
            if head.kind is TokenKind.KEYWORD and head.text == "ASSUME":
                parser.advance()
                formula = parser.parse_formula(sink)
                parser.expect_end()
                assumptions.append((formula, sink))
            else:
                formula = parser.parse_formula(sink)
                parser.expect_end()
                guarantees.append((formula, sink))

    # name registry: reals, then predicate atoms, then Boolean atom lists
    kinds: dict[str, str] = {}
    for tok, decl in real_decls:
        if decl.name in kinds:
            raise SpecError(
                f"duplicate declaration of '{decl.name}'", tok.line, tok.column
            )
        kinds[decl.name] = "real variable"
    for pred in pred_decls:
        if pred.atom in kinds:
            raise SpecError(
                f"duplicate declaration of '{pred.atom}' "
                f"(already a {kinds[pred.atom]})",
                pred.token.line,
                pred.token.column,
            )
        kinds[pred.atom] = "predicate atom"
    boolean_inputs: list[str] = []
    boolean_outputs: list[str] = []
    for tok_list, sink, label in (
        (input_decls, boolean_inputs, "INPUT"),
        (output_decls, boolean_outputs, "OUTPUT"),
    ):
        for tok in tok_list:
            existing = kinds.get(tok.text)
            if existing == "predicate atom":
                raise SpecError(
                    f"predicate atom '{tok.text}' must not be re-listed under {label}",
                    tok.line,
                    tok.column,
                )
            if existing is not None:
                raise SpecError(
                    f"duplicate declaration of '{tok.text}' (already a {existing})",
                    tok.line,
                    tok.column,
                )
            kinds[tok.text] = f"Boolean {label.lower()}"
            sink.append(tok.text)

    real_by_name = {decl.name: decl for _, decl in real_decls}
    side_order = {
        INPUT_SIDE: tuple(d.name for _, d in real_decls if d.side == INPUT_SIDE),
        OUTPUT_SIDE: tuple(d.name for _, d in real_decls if d.side == OUTPUT_SIDE),
    }

    predicates: list[PredicateDef] = []
    for pred in pred_decls:
        sides = set()
        for var in sorted(pred.poly.variables()):
            decl = real_by_name.get(var)
            if decl is None:
                raise SpecError(
                    f"predicate '{pred.atom}' uses '{var}', which is not a declared real variable",
                    pred.token.line,
                    pred.token.column,
                )
            sides.add(decl.side)
        if len(sides) > 1:
            raise SpecError(
                f"predicate '{pred.atom}' mixes input-side and output-side real variables",
                pred.token.line,
                pred.token.column,
            )
        side = sides.pop() if sides else INPUT_SIDE
        poly = pred.poly.lower(side_order[side])
        predicates.append(PredicateDef(pred.atom, PolyConstraint(poly, pred.relation), side))

    atom_kinds = {"predicate atom", "Boolean input", "Boolean output"}
    for _, sink in assumptions + guarantees:
        for tok in sink:
            kind = kinds.get(tok.text)
            if kind is None:
                raise SpecError(f"undeclared atom '{tok.text}'", tok.line, tok.column)
            if kind not in atom_kinds:
                raise SpecError(
                    f"'{tok.text}' is a {kind} and cannot be used as a Boolean atom",
                    tok.line,
                    tok.column,
                )

    if not guarantees:
        raise SpecError("specification declares no guarantees", 1, 1)

    return SpecDocument(
        boolean_inputs=tuple(boolean_inputs),
        boolean_outputs=tuple(boolean_outputs),
        real_vars=tuple(decl for _, decl in real_decls),
        predicates=tuple(predicates),
        assumptions=tuple(f for f, _ in assumptions),
        guarantees=tuple(f for f, _ in guarantees),
    )


@dataclass(frozen=True)
class ConstraintDocument:
    """Standalone constraint file: variable ranges plus checks over them."""

    variables: tuple[str, ...]
    box: Box
    checks: tuple[PolyConstraint | ConstraintImplication, ...]


def _parse_relational(parser: _LineParser) -> tuple[_NamedPoly, str]:
    lhs = parser.parse_poly()
    rel_tok = parser.peek()
    if rel_tok.kind not in RELOPS:
        raise SpecError(
            f"expected a relation (<, <=, >, >=), found {rel_tok.text or 'end of line'!r}",
            rel_tok.line,
            rel_tok.column,
        )
    parser.advance()
    rhs = parser.parse_poly()
    return lhs.sub(rhs), RELOPS[rel_tok.kind]


def parse_constraints(text: str) -> ConstraintDocument:
    """Parse ``REAL name IN [lo, hi]`` ranges followed by check lines.

    A check line is either a constraint ``poly REL poly`` or a pointwise
    implication ``poly REL poly -> poly REL poly``.  All checks share the
    one box spanned by the declared ranges; declarations may appear on any
    line, but every variable used must be declared somewhere."""
    decls: list[RealVarDecl] = []
    seen: set[str] = set()
    pending: list[tuple[Token, list[tuple[_NamedPoly, str]]]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("##", 1)[0]
        if not content.strip():
            continue
        parser = _LineParser(_lex_line(content, line_no))
        head = parser.peek()
        if head.kind is TokenKind.KEYWORD and head.text == "REAL":
            parser.advance()
            name_tok = parser.expect(TokenKind.IDENT, "a variable name")
            parser.expect_keyword("IN")
            parser.expect(TokenKind.LBRACKET)
            lower = parser.parse_signed_rational()
            parser.expect(TokenKind.COMMA)
            upper = parser.parse_signed_rational()
            parser.expect(TokenKind.RBRACKET)
            parser.expect_end()
            if name_tok.text in seen:
                raise SpecError(
                    f"duplicate declaration of '{name_tok.text}'",
                    name_tok.line,
                    name_tok.column,
                )
            if lower > upper:
                raise SpecError(
                    f"empty range [{lower}, {upper}] for real variable '{name_tok.text}'",
                    name_tok.line,
                    name_tok.column,
                )
            seen.add(name_tok.text)
            decls.append(RealVarDecl(name_tok.text, lower, upper, INPUT_SIDE))
        else:
            halves = [_parse_relational(parser)]
            if parser.peek().kind is TokenKind.IMPLIES:
                parser.advance()
                halves.append(_parse_relational(parser))
            parser.expect_end()
            pending.append((head, halves))

    if not pending:
        raise SpecError("no constraints to check", 1, 1)
    order = tuple(d.name for d in decls)
    checks: list[PolyConstraint | ConstraintImplication] = []
    for head, halves in pending:
        lowered = []
        for poly, relation in halves:
            for var in sorted(poly.variables()):
                if var not in seen:
                    raise SpecError(
                        f"'{var}' is not a declared real variable", head.line, head.column
                    )
            lowered.append(PolyConstraint(poly.lower(order), relation))
        if len(lowered) == 1:
            checks.append(lowered[0])
        else:
            checks.append(ConstraintImplication(lowered[0], lowered[1]))
    box = Box(tuple((d.lower, d.upper) for d in decls))
    return ConstraintDocument(variables=order, box=box, checks=tuple(checks))


# -- printing ---------------------------------------------------------------


def _format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_polynomial(poly: Polynomial, var_names: tuple[str, ...]) -> str:
    if poly.is_zero():
        return "0"
    def term_sort_key(item):
        expo, _ = item
        return (-sum(expo), tuple(-e for e in expo))
    pieces: list[str] = []
    for expo, coeff in sorted(poly.terms.items(), key=term_sort_key):
        factors = [
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(var_names, expo)
            if e > 0
        ]
        magnitude = abs(coeff)
        if not factors:
            body = _format_rational(magnitude)
        elif magnitude == 1:
            body = " * ".join(factors)
        else:
            body = " * ".join([_format_rational(magnitude)] + factors)
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)


def format_constraint(constraint: PolyConstraint, var_names: tuple[str, ...]) -> str:
    return f"{format_polynomial(constraint.poly, var_names)} {constraint.relation} 0"


_PREC = {
    Implies: 1,
    Until: 2,
    Or: 3,
    And: 4,
}


def format_formula(formula: Formula) -> str:
    def prec(f: Formula) -> int:
        return _PREC.get(type(f), 5)

    def emit(f: Formula, min_level: int) -> str:
        if isinstance(f, Atom):
            text = f.name
        elif isinstance(f, TrueFormula):
            text = "TRUE"
        elif isinstance(f, FalseFormula):
            text = "FALSE"
        elif isinstance(f, Not):
            text = f"!{emit(f.operand, 5)}"
        elif isinstance(f, (Always, Eventually, Next)):
            word = {Always: "ALWAYS", Eventually: "EVENTUALLY", Next: "NEXT"}[type(f)]
            text = f"{word} ({emit(f.operand, 0)})"
        elif isinstance(f, Implies):
            text = f"{emit(f.left, 2)} -> {emit(f.right, 1)}"
        elif isinstance(f, Until):
            text = f"{emit(f.left, 3)} UNTIL {emit(f.right, 2)}"
        elif isinstance(f, Or):
            text = f"{emit(f.left, 3)} || {emit(f.right, 4)}"
        elif isinstance(f, And):
            text = f"{emit(f.left, 4)} && {emit(f.right, 5)}"
        else:
            msg = f"unknown formula node {f!r}"
            raise TypeError(msg)
        if prec(f) < min_level:
            return f"({text})"
        return text

    return emit(formula, 0)


def format_spec(doc: SpecDocument) -> str:
    """Canonical text for a document; parses back to an equal document."""
    lines: list[str] = []
    for var in doc.real_vars:
        side = "" if var.side == INPUT_SIDE else "OUTPUT "
        lines.append(
            f"REAL {side}{var.name} IN "
            f"[{_format_rational(var.lower)}, {_format_rational(var.upper)}]"
        )
    for pred in doc.predicates:
        names = tuple(v.name for v in doc.real_vars_of(pred.side))
        lines.append(f"PRED {pred.atom} := {format_constraint(pred.constraint, names)}")
    if doc.boolean_inputs:
        lines.append("INPUT " + ", ".join(doc.boolean_inputs))
    if doc.boolean_outputs:
        lines.append("OUTPUT " + ", ".join(doc.boolean_outputs))
    for formula in doc.assumptions:
        lines.append("ASSUME " + format_formula(formula))
    for formula in doc.guarantees:
        lines.append(format_formula(formula))
    return "\n".join(lines) + "\n"
