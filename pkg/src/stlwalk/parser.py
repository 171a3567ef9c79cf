"""Recursive-descent parser for the formula concrete syntax.

Grammar (whitespace-insensitive)::

    formula  = disj ; disj = conj { "or" conj } ; conj = unary { "and" unary } ;
    unary    = "not" unary | temporal | "(" formula ")" | predicate ;
    temporal = ("eventually"|"always") [ "[" int "," int "]" ] unary
             | "(" formula ")" "until" "[" int "," int "]" "(" formula ")" ;
    predicate= expr (">="|"<=") number | builtin-name [ "(" args ")" ] ;
    expr     = affine combination of channel names ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .channels import CHANNEL_INDEX, N_CHANNELS, SignalSchema
from .formula import (
    AffineExpr,
    Always,
    And,
    Eventually,
    Formula,
    IndexWindow,
    Not,
    Or,
    Predicate,
    Until,
)

KEYWORDS = {"and", "or", "not", "eventually", "always", "until"}

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
    |(?P<ident>[A-Za-z_][A-Za-z_0-9]*)
    |(?P<op>>=|<=|[()\[\],+\-*])
    |(?P<ws>\s+)
    |(?P<bad>.)
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        tok = m.group()
        if kind == "bad":
            raise ParseError(f"unexpected character {tok!r}", line, col)
        if kind != "ws":
            tokens.append(Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, schema: SignalSchema) -> None:
        self.tokens = tokenize(text)
        self.pos = 0
        self.schema = schema

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    # grammar rules -------------------------------------------------------

    def formula(self) -> Formula:
        node = self.disj()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
        return node

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek().text == "or":
            self.next()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(parts)

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.peek().text == "and":
            self.next()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(parts)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "not":
            self.next()
            return Not(self.unary())
        if tok.text in ("eventually", "always"):
            self.next()
            window = self.maybe_window()
            child = self.unary()
            return (Eventually if tok.text == "eventually" else Always)(window, child)
        if tok.text == "(":
            self.next()
            inner = self.disj()
            self.expect(")")
            if self.peek().text == "until":
                self.next()
                window = self.window()
                self.expect("(")
                right = self.disj()
                self.expect(")")
                return Until(window, inner, right)
            return inner
        return self.predicate()

    def maybe_window(self) -> IndexWindow | None:
        if self.peek().text == "[":
            return self.window()
        return None

    def window(self) -> IndexWindow:
        open_tok = self.expect("[")
        lo = self.int_literal()
        self.expect(",")
        hi = self.int_literal()
        self.expect("]")
        if lo < 0 or lo > hi:
            raise ParseError(f"malformed window [{lo},{hi}]", open_tok.line, open_tok.col)
        return IndexWindow(lo, hi)

    def int_literal(self) -> int:
        tok = self.next()
        if tok.kind != "num" or not tok.text.isdigit():
            raise ParseError(f"expected integer, found {tok.text!r}", tok.line, tok.col)
        return int(tok.text)

    def predicate(self) -> Formula:
        tok = self.peek()
        if tok.kind == "ident" and tok.text not in CHANNEL_INDEX:
            if tok.text in KEYWORDS:
                raise ParseError(f"unexpected keyword {tok.text!r}", tok.line, tok.col)
            if not self.schema.has_builtin(tok.text):
                raise ParseError(f"unknown channel or builtin {tok.text!r}", tok.line, tok.col)
            self.next()
            args = self.maybe_args()
            builtin = self.schema.builtin(tok.text)
            if args and builtin.args != args:
                raise ParseError(
                    f"builtin {tok.text!r} registered with different arguments",
                    tok.line,
                    tok.col,
                )
            return Predicate(builtin, 0.0)
        expr = self.affine_expr()
        op = self.next()
        if op.text not in (">=", "<="):
            raise ParseError(f"expected '>=' or '<=', found {op.text!r}", op.line, op.col)
        bound = self.signed_number()
        if op.text == ">=":
            return Predicate(expr, bound)
        return Predicate(expr.negated(), -bound)

    def maybe_args(self) -> tuple[float, ...]:
        if self.peek().text != "(":
            return ()
        self.next()
        args = [self.signed_number()]
        while self.peek().text == ",":
            self.next()
            args.append(self.signed_number())
        self.expect(")")
        return tuple(args)

    def signed_number(self) -> float:
        sign = 1.0
        while self.peek().text in ("+", "-"):
            if self.next().text == "-":
                sign = -sign
        tok = self.next()
        if tok.kind != "num":
            raise ParseError(f"expected number, found {tok.text!r}", tok.line, tok.col)
        return sign * float(tok.text)

    def affine_expr(self) -> AffineExpr:
        coeffs = np.zeros(N_CHANNELS)
        const = 0.0
        first = True
        while True:
            tok = self.peek()
            if first:
                sign = 1.0
                while self.peek().text in ("+", "-"):
                    if self.next().text == "-":
                        sign = -sign
            elif tok.text in ("+", "-"):
                sign = 1.0 if self.next().text == "+" else -1.0
                while self.peek().text in ("+", "-"):
                    if self.next().text == "-":
                        sign = -sign
            else:
                break
            coeff, channel = self.term()
            if channel is None:
                const += sign * coeff
            else:
                coeffs[CHANNEL_INDEX[channel]] += sign * coeff
            first = False
        if first:
            raise self.fail("expected a predicate expression")
        return AffineExpr(coeffs, const)

    def term(self) -> tuple[float, str | None]:
        tok = self.next()
        if tok.kind == "num":
            value = float(tok.text)
            if self.peek().text == "*":
                self.next()
                chan = self.channel_name()
                return value, chan
            if self.peek().kind == "ident" and self.peek().text in CHANNEL_INDEX:
                return value, self.channel_name()
            return value, None
        if tok.kind == "ident":
            if tok.text not in CHANNEL_INDEX:
                raise ParseError(f"unknown channel {tok.text!r}", tok.line, tok.col)
            return 1.0, tok.text
        raise ParseError(f"expected number or channel, found {tok.text!r}", tok.line, tok.col)

    def channel_name(self) -> str:
        tok = self.next()
        if tok.kind != "ident" or tok.text not in CHANNEL_INDEX:
            raise ParseError(f"unknown channel {tok.text!r}", tok.line, tok.col)
        return tok.text


def parse_formula(text: str, schema: SignalSchema | None = None) -> Formula:
    """Parse a formula; builtin names resolve against ``schema``."""
    return _Parser(text, schema or SignalSchema()).formula()
