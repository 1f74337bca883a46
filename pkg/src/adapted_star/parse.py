"""Polynomial expression language: ``x1^2*p1 + 1/2``, ``x1*(x1 - 2)``.

Variables are x1..xN and p1..pN.  Literals are integers; ``/`` is allowed
only when the divisor is a nonzero constant, which is how rationals are
written.  ``^`` takes a non-negative integer literal.  Precedence is the
usual one with left associativity.
"""
from __future__ import annotations

import re

from .ring import BasePoly


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(src: str) -> list:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ParseError(f"unexpected character {src[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, n: int):
        self.n = n
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse(self) -> BasePoly:
        out = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return out

    def expr(self) -> BasePoly:
        out = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> BasePoly:
        out = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs_pos = self.peek()[2]
            rhs = self.unary()
            if op == "*":
                out = out * rhs
                continue
            if rhs.degree() > 0:
                raise ParseError("division by a non-constant", rhs_pos)
            c = rhs.constant_term()
            if not c:
                raise ParseError("division by zero", rhs_pos)
            out = out * (1 / c)
        return out

    def unary(self) -> BasePoly:
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            inner = self.unary()
            return -inner if op == "-" else inner
        return self.power()

    def power(self) -> BasePoly:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num":
                raise ParseError("exponent must be a non-negative integer literal", tok[2])
            base = base ** int(tok[1])
            if self.peek()[1] == "^":
                raise ParseError("chained exponents are ambiguous; use parentheses", self.peek()[2])
        return base

    def atom(self) -> BasePoly:
        kind, text, pos = self.take()
        if kind == "num":
            return BasePoly.const(self.n, int(text))
        if kind == "var":
            m = re.fullmatch(r"([xp])([1-9]\d*)", text)
            if not m or int(m.group(2)) > self.n:
                raise ParseError(f"unknown variable {text!r}", pos)
            i = int(m.group(2))
            return BasePoly.x(self.n, i) if m.group(1) == "x" else BasePoly.p(self.n, i)
        if text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse_expression(src: str, n: int) -> BasePoly:
    """Parse ``src`` into an exact polynomial on a chart of half-dimension ``n``."""
    if hasattr(n, "n"):
        n = n.n
    return _Parser(src, n).parse()


def render_rational(c) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_poly(q: BasePoly) -> str:
    """Canonical, parseable text: descending degree, exact coefficients."""
    if q.is_zero():
        return "0"
    names = [f"x{i}" for i in range(1, q.n + 1)] + [f"p{i}" for i in range(1, q.n + 1)]
    chunks = []
    for idx, (exp, c) in enumerate(q.sorted_items()):
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, exp) if e]
        mag = -c if c < 0 else c
        if factors:
            body = "*".join(factors) if mag == 1 else render_rational(mag) + "*" + "*".join(factors)
        else:
            body = render_rational(mag)
        if idx == 0:
            chunks.append(("-" if c < 0 else "") + body)
        else:
            chunks.append((" - " if c < 0 else " + ") + body)
    return "".join(chunks)
