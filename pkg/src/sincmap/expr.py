"""A small arithmetic expression language for user-supplied integrands.

Grammar (``^`` binds tighter than unary minus and is right associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' powrhs)?
    powrhs := ('-' | '+') powrhs | power
    atom   := NUMBER | 'x' | 'pi' | NAME '(' expr ')' | '(' expr ')'

Expressions evaluate elementwise on numpy arrays with IEEE semantics.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .errors import SincMapError

FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "erf": special.erf,
    "abs": np.abs,
}


class ParseError(SincMapError, ValueError):
    """Malformed expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Const, Unary, Binary, Call]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", len(src[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), len(src[:pos].encode())))
        pos = m.end()
    toks.append(_Tok("end", "", len(src.encode())))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def unexpected(self):
        t = self.tok
        if t.kind == "end":
            if self.depth:
                raise ParseError("unbalanced parenthesis: expected ')'", t.pos)
            raise ParseError("unexpected end of input", t.pos)
        if t.text == ")" and not self.depth:
            raise ParseError("unbalanced parenthesis: unmatched ')'", t.pos)
        raise ParseError(f"unexpected token {t.text!r}", t.pos)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.unexpected()
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.take().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at("-") or self.at("+"):
            op = self.take().text
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("^"):
            self.take()
            return Binary("^", base, self.powrhs())
        return base

    def powrhs(self) -> Node:
        if self.at("-") or self.at("+"):
            op = self.take().text
            return Unary(op, self.powrhs())
        return self.power()

    def group(self) -> Node:
        open_tok = self.take()
        self.depth += 1
        node = self.expr()
        if not self.at(")"):
            if self.tok.kind == "end":
                raise ParseError("unbalanced parenthesis: '(' is never closed", open_tok.pos)
            self.unexpected()
        self.take()
        self.depth -= 1
        return node

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(float(t.text))
        if t.kind == "name":
            self.take()
            if t.text == "x":
                return Var()
            if t.text == "pi":
                return Const("pi")
            if t.text not in FUNCTIONS:
                raise ParseError(f"unknown function or variable {t.text!r}", t.pos)
            if not self.at("("):
                raise ParseError(f"expected '(' after function {t.text!r}", self.tok.pos)
            return Call(t.text, self.group())
        if self.at("("):
            return self.group()
        self.unexpected()


def parse(src: str) -> Node:
    """Parse ``src`` into an expression tree.

    Raises:
        ParseError: on malformed input, with the byte offset of the fault.
    """
    return _Parser(src).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return 3
    return 5


def to_string(node: Node) -> str:
    """Canonical text with the minimum parentheses that preserve the tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({to_string(node.arg)})"
    if isinstance(node, Unary):
        inner = to_string(node.operand)
        if _prec(node.operand) < 3:
            inner = f"({inner})"
        return node.op + inner
    p = _PREC[node.op]
    left, right = to_string(node.left), to_string(node.right)
    if node.op == "^":
        if _prec(node.left) <= 4:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


def evaluate(node: Node, x):
    """Evaluate at ``x`` (scalar or array).  NaN and inf propagate."""
    with np.errstate(all="ignore"):
        return _eval(node, np.asarray(x, dtype=float))


def _eval(node: Node, x):
    if isinstance(node, Num):
        return np.full(x.shape, node.value) if x.ndim else node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return math.pi
    if isinstance(node, Call):
        return FUNCTIONS[node.name](_eval(node.arg, x))
    if isinstance(node, Unary):
        v = _eval(node.operand, x)
        return -v if node.op == "-" else +v
    a, b = _eval(node.left, x), _eval(node.right, x)
    a = np.float64(a) if np.ndim(a) == 0 else a
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b


class Expression:
    """A parsed expression usable as a vectorized integrand ``f(x)``."""

    def __init__(self, src: str):
        self.source = src
        self.tree = parse(src)

    def __call__(self, x):
        return evaluate(self.tree, x)

    def __str__(self):
        return to_string(self.tree)

    def __repr__(self):
        return f"Expression({str(self)!r})"
