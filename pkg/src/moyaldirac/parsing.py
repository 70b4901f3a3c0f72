"""Expression grammar for graded polynomials.

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := ("+" | "-") unary | power
    power    := atom ("^" integer)?
    atom     := number | "i" | name | "(" expr ")"

Names are those of the active context (``q``, ``p``, ``l_q``, ``c0``, ``cb1``,
``hbar`` for n=1; ``q0``, ``p1``, ``l_p0`` ... otherwise).  Division is only
allowed by a nonzero constant.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .algebra import AlgebraError, GradedPolynomial, SymplecticContext, format_canonical
from .scalar import Scalar

__all__ = ["ParseError", "parse", "format_canonical"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


class ParseError(AlgebraError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class _Parser:
    def __init__(self, text: str, ctx: SymplecticContext) -> None:
        self.text = text
        self.ctx = ctx
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        raw = text.encode("utf-8")
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ParseError(f"unexpected character {text[start]!r}", _byte(text, start))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), _byte(text, start)))
            pos = m.end()
        self.end_offset = len(raw)
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end_offset)
        self.i += 1
        return tok

    def expect(self, op: str) -> None:
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise ParseError(f"expected {op!r}, found {tok[1]!r}", tok[2])

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "op" and tok[1] in ops

    def parse(self) -> GradedPolynomial:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        out = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return out

    def expr(self) -> GradedPolynomial:
        out = self.term()
        while self.at_op("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> GradedPolynomial:
        out = self.unary()
        while self.at_op("*", "/"):
            _, op, offset = self.take()
            rhs = self.unary()
            if op == "*":
                out = out * rhs
            else:
                if not rhs.is_constant or rhs.is_zero:
                    raise ParseError("division is only defined by a nonzero constant", offset)
                out = out / rhs.constant_value()
        return out

    def unary(self) -> GradedPolynomial:
        if self.at_op("-"):
            self.take()
            return -self.unary()
        if self.at_op("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> GradedPolynomial:
        base = self.atom()
        if not self.at_op("^"):
            return base
        self.take()
        sign = 1
        tok = self.take()
        if tok[0] == "op" and tok[1] in "+-":
            sign = -1 if tok[1] == "-" else 1
            tok = self.take()
        if tok[0] != "num" or not tok[1].isdigit():
            raise ParseError("exponent must be an integer literal", tok[2])
        k = sign * int(tok[1])
        if k < 0:
            raise ParseError("negative exponents are not allowed", tok[2])
        if k > 1 and base.parity == 1 and len(base) == 1 and base.degree() == 1:
            raise ParseError("ghost variables cannot be raised to a power above 1", tok[2])
        return base**k

    def atom(self) -> GradedPolynomial:
        kind, val, offset = self.take()
        if kind == "num":
            return self.ctx.const(Fraction(val))
        if kind == "name":
            if val == "i":
                return self.ctx.const(Scalar(0, 1))
            if val not in self.ctx.name_table:
                raise ParseError(f"unknown variable {val!r}", offset)
            return self.ctx.var(val)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {val!r}", offset)


def _byte(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def parse(text: str, ctx: SymplecticContext) -> GradedPolynomial:
    """Parse an expression into an exact polynomial of ``ctx``."""
    return _Parser(text, ctx).parse()
