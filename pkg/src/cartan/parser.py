"""Text grammar for expressions, differential forms and vector fields.

Scalar grammar: identifiers (declared names, or x0, x1, ... when none are
declared), rational literals p/q, operators + - * and ^ with a non-negative
integer exponent, and registered primitive calls such as beta0(...) and
S(..., ...).

The form grammar adds d(expr) and reads ^ between forms as the exterior
product; juxtaposition ("2*x d(x)") multiplies as well, which is what the
canonical renderer emits.  Forms are expanded to coordinate-basis normal form
at parse time, so d(x*y) comes back as y d(x) + x d(y).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ParseError, UnknownIdentifier, UnknownPrimitive
from .expr import REGISTRY, Const, Gen, IntPow, Prim, SmoothExpr, normalize
from .forms import DifferentialForm, d_of_expr, wedge
from .calculus import VectorField
from .ring import RingPresentation

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)

_DEFAULT_NAME = re.compile(r"x(\d+)")


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "op" | "end"
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: Sequence[str] | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.names = list(names) if names is not None else None

    # -- token plumbing

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        if token.kind != "end":
            self.index += 1
        return token

    def accept(self, text: str) -> bool:
        token = self.peek()
        if token.kind == "op" and token.text == text:
            self.advance()
            return True
        return False

    def expect(self, text: str) -> None:
        token = self.peek()
        if token.kind != "op" or token.text != text:
            raise ParseError(f"expected {text!r}", token.position)
        self.advance()

    def fail(self, message: str) -> ParseError:
        return ParseError(message, self.peek().position)

    def at_end(self) -> bool:
        return self.peek().kind == "end"

    # -- identifier resolution

    def generator(self, name: str, position: int) -> Gen:
        if self.names is not None:
            if name in self.names:
                return Gen(self.names.index(name))
            raise UnknownIdentifier(f"unknown variable {name!r}", position)
        match = _DEFAULT_NAME.fullmatch(name)
        if match:
            return Gen(int(match.group(1)))
        raise UnknownIdentifier(f"unknown variable {name!r}", position)

    def primitive_call(self, name: str, position: int, parse_arg) -> Prim:
        if name not in REGISTRY:
            raise UnknownIdentifier(f"unknown primitive {name!r}", position)
        entry = REGISTRY.get(name)
        self.expect("(")
        args = [parse_arg()]
        while self.accept(","):
            args.append(parse_arg())
        self.expect(")")
        if len(args) != entry.arity:
            raise ParseError(
                f"primitive {name!r} takes {entry.arity} argument(s), got {len(args)}",
                position,
            )
        return Prim(name, tuple(args))

    # -- scalar grammar

    def parse_scalar(self) -> SmoothExpr:
        expr = self.scalar_expr()
        if not self.at_end():
            raise self.fail("trailing input")
        return expr

    def scalar_expr(self) -> SmoothExpr:
        acc = self.scalar_term()
        while True:
            if self.accept("+"):
                acc = acc + self.scalar_term()
            elif self.accept("-"):
                acc = acc - self.scalar_term()
            else:
                return acc

    def scalar_term(self) -> SmoothExpr:
        acc = self.scalar_factor()
        while self.accept("*"):
            acc = acc * self.scalar_factor()
        return acc

    def scalar_factor(self) -> SmoothExpr:
        if self.accept("-"):
            return -self.scalar_factor()
        base = self.scalar_primary()
        while self.accept("^"):
            base = IntPow(base, self.exponent())
        return base

    def exponent(self) -> int:
        token = self.peek()
        if token.kind != "number":
            raise ParseError("exponent must be a non-negative integer literal", token.position)
        self.advance()
        return int(token.text)

    def scalar_primary(self) -> SmoothExpr:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            numerator = int(token.text)
            if self.accept("/"):
                denom_token = self.peek()
                if denom_token.kind != "number":
                    raise ParseError("expected a denominator", denom_token.position)
                self.advance()
                return Const(Fraction(numerator, int(denom_token.text)))
            return Const(numerator)
        if token.kind == "ident":
            self.advance()
            if self.peek().kind == "op" and self.peek().text == "(":
                return self.primitive_call(token.text, token.position, self.scalar_expr)
            return self.generator(token.text, token.position)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.scalar_expr()
            self.expect(")")
            return inner
        raise ParseError("expected an expression", token.position)

    # -- form grammar (forms throughout; scalars are 0-forms)

    def parse_form(self, ring: RingPresentation) -> DifferentialForm:
        form = self.form_expr(ring)
        if not self.at_end():
            raise self.fail("trailing input")
        return form

    def form_expr(self, ring: RingPresentation) -> DifferentialForm:
        acc = self.form_term(ring)
        while True:
            if self.accept("+"):
                acc = acc + self.form_term(ring)
            elif self.accept("-"):
                acc = acc - self.form_term(ring)
            else:
                return acc

    def _starts_primary(self) -> bool:
        token = self.peek()
        return token.kind in ("number", "ident") or (token.kind == "op" and token.text == "(")

    def form_term(self, ring: RingPresentation) -> DifferentialForm:
        acc = self.form_factor(ring)
        while True:
            if self.accept("*"):
                acc = wedge(acc, self.form_factor(ring))
            elif self.peek().kind == "op" and self.peek().text == "^":
                self.advance()
                operand = self.form_factor(ring)
                if _is_constant_scalar(operand):
                    raise ParseError(
                        "exponent must be a non-negative integer literal",
                        self.peek().position,
                    )
                acc = wedge(acc, operand)
            elif self._starts_primary():
                acc = wedge(acc, self.form_factor(ring))
            else:
                return acc

    def form_factor(self, ring: RingPresentation) -> DifferentialForm:
        if self.accept("-"):
            return -self.form_factor(ring)
        base = self.form_primary(ring)
        while self.peek().kind == "op" and self.peek().text == "^":
            # power binds tight when the exponent is a number literal;
            # otherwise it is a wedge, handled by form_term
            if self.tokens[self.index + 1].kind != "number":
                break
            self.advance()
            power = self.exponent()
            result = DifferentialForm.scalar(ring, Const(1))
            for _ in range(power):
                result = wedge(result, base)
            base = result
        return base

    def form_primary(self, ring: RingPresentation) -> DifferentialForm:
        token = self.peek()
        if token.kind == "ident" and token.text == "d":
            after = self.tokens[self.index + 1]
            if after.kind == "op" and after.text == "(":
                self.advance()
                self.expect("(")
                inner = self.scalar_expr()
                self.expect(")")
                return d_of_expr(ring, inner)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.form_expr(ring)
            self.expect(")")
            return inner
        scalar = self.scalar_primary()
        return DifferentialForm.scalar(ring, scalar)


def _is_constant_scalar(form: DifferentialForm) -> bool:
    if form.degrees() not in ([], [0]):
        return False
    coeff = form.coefficient(())
    return isinstance(normalize(coeff), Const)


def _names_for(ring: RingPresentation) -> list[str] | None:
    return list(ring.names) if ring.names is not None else None


def parse_expr(text: str, names: Sequence[str] | None = None) -> SmoothExpr:
    """Parse a scalar expression; round-trips with the canonical renderer."""
    return _Parser(text, names).parse_scalar()


def parse_expr_in_ring(text: str, ring: RingPresentation) -> SmoothExpr:
    expr = parse_expr(text, _names_for(ring))
    if not ring.contains_expr(expr):
        raise ParseError(f"expression uses generators outside a {ring.n}-generator ring", 0)
    return expr


def parse_form(text: str, ring: RingPresentation) -> DifferentialForm:
    """Parse a differential form, fully expanded at parse time."""
    return _Parser(text, _names_for(ring)).parse_form(ring)


def parse_vector_field(coefficients: Sequence[str] | str, ring: RingPresentation) -> VectorField:
    """Coefficients as a comma-separated string or a sequence of strings."""
    if isinstance(coefficients, str):
        parser = _Parser(coefficients, _names_for(ring))
        parts = [parser.scalar_expr()]
        while parser.accept(","):
            parts.append(parser.scalar_expr())
        if not parser.at_end():
            raise parser.fail("trailing input")
    else:
        parts = [parse_expr(c, _names_for(ring)) for c in coefficients]
    if len(parts) != ring.n:
        raise ParseError(
            f"expected {ring.n} coefficient(s), got {len(parts)}", 0
        )
    return VectorField(ring, tuple(parts))
