"""Parser, printer and evaluator for the one-variable expression mini-language.

Grammar (EBNF)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' factor)?          # '^' is right-associative
    atom   := number | 'x' | func '(' args ')' | '(' expr ')' | '-' atom

``func`` is one of sin, cos, exp, ln, abs, sqrt, sign, ind.  ``ind`` takes
exactly two numeric arguments and denotes the half-open indicator
``ind(a,b)(x) = 1`` for ``a <= x < b``, else 0.  Unary minus binds tighter
than the base of '^', so ``-x^2`` parses as ``(-x)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "ExprSyntaxError", "UnknownIdentifierError",
    "parse_expr", "print_expr", "eval_expr",
]

FUNCTIONS = ("sin", "cos", "exp", "ln", "abs", "sqrt", "sign", "ind")


class ExprSyntaxError(ValueError):
    """Malformed expression; ``offset`` is the byte offset of the fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier that is neither ``x`` nor a known function name."""

    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}'", offset)
        self.name = name


class Expr:
    """Base class for AST nodes.  Nodes are frozen and compare structurally."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple


# ---------------------------------------------------------------------------
# tokenizer

_NUM_START = "0123456789."
_OPS = "+-*/^(),"


@dataclass(frozen=True)
class _Token:
    kind: str      # 'num', 'ident', 'op', 'eof'
    text: str
    offset: int


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "+" and i + 1 < n and text[i + 1] == "+":
            # '+' is never unary, so a doubled '+' can never be valid
            raise ExprSyntaxError("unexpected '++'", i)
        if c in _OPS:
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c in _NUM_START:
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal '{lexeme}'", i) from None
            tokens.append(_Token("num", lexeme, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character '{c}'", i)
    tokens.append(_Token("eof", "", n))
    return tokens


# ---------------------------------------------------------------------------
# recursive-descent parser

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.advance()
        raise ExprSyntaxError(f"expected '{op}'", tok.offset)

    def parse_expr(self):
        node = self.parse_term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                node = BinOp(tok.text, node, self.parse_term())
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                node = BinOp(tok.text, node, self.parse_factor())
            else:
                return node

    def parse_factor(self):
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return BinOp("^", base, self.parse_factor())
        return base

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.parse_atom())
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if tok.kind == "ident":
            if tok.text == "x":
                self.advance()
                return Var()
            if tok.text in FUNCTIONS:
                self.advance()
                self.expect_op("(")
                if tok.text == "ind":
                    lo = self.parse_signed_number()
                    self.expect_op(",")
                    hi = self.parse_signed_number()
                    self.expect_op(")")
                    return Call("ind", (lo, hi))
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(tok.text, (arg,))
            raise UnknownIdentifierError(tok.text, tok.offset)
        raise ExprSyntaxError(f"unexpected '{tok.text or 'end of input'}'", tok.offset)

    def parse_signed_number(self):
        # ind() arguments are numeric literals with an optional sign
        tok = self.peek()
        negate = False
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            negate = True
            tok = self.peek()
        if tok.kind != "num":
            raise ExprSyntaxError("ind() takes numeric arguments", tok.offset)
        self.advance()
        value = float(tok.text)
        return Num(-value if negate else value)


def parse_expr(text):
    """Parse ``text`` into an AST.  The free variable is ``x``."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(text))
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ExprSyntaxError(f"unexpected trailing '{tok.text}'", tok.offset)
    return node


# ---------------------------------------------------------------------------
# printer (precedence-aware; parse(print_expr(e)) == e)

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _print(node):
    if isinstance(node, Num):
        text = repr(node.value)
        # negative literals only arise inside ind(); print sign directly
        return text, _PREC_ATOM if node.value >= 0 else _PREC_ADD
    if isinstance(node, Var):
        return "x", _PREC_ATOM
    if isinstance(node, Neg):
        inner, prec = _print(node.operand)
        if prec < _PREC_ATOM:
            inner = f"({inner})"
        return f"-{inner}", _PREC_ATOM
    if isinstance(node, Call):
        args = ",".join(_print(a)[0] for a in node.args)
        return f"{node.fn}({args})", _PREC_ATOM
    if isinstance(node, BinOp):
        if node.op in "+-":
            prec = _PREC_ADD
            left, lp = _print(node.left)
            right, rp = _print(node.right)
            if lp < prec:
                left = f"({left})"
            # '-' and '+' are left-associative: right side needs parens at equal level
            if rp <= prec:
                right = f"({right})"
            return f"{left}{node.op}{right}", prec
        if node.op in "*/":
            prec = _PREC_MUL
            left, lp = _print(node.left)
            right, rp = _print(node.right)
            if lp < prec:
                left = f"({left})"
            if rp <= prec:
                right = f"({right})"
            return f"{left}{node.op}{right}", prec
        # '^': right-associative, operands are atoms
        left, lp = _print(node.left)
        right, rp = _print(node.right)
        if lp < _PREC_ATOM:
            left = f"({left})"
        if rp < _PREC_POW:
            right = f"({right})"
        return f"{left}^{right}", _PREC_POW
    raise TypeError(f"not an Expr node: {node!r}")


def print_expr(node):
    """Render an AST back to source text."""
    return _print(node)[0]


# ---------------------------------------------------------------------------
# evaluator

def eval_expr(node, x):
    """Evaluate the AST at ``x`` (a float or a numpy array)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -eval_expr(node.operand, x)
    if isinstance(node, BinOp):
        a = eval_expr(node.left, x)
        b = eval_expr(node.right, x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return np.divide(a, b)
            return np.power(a, b)
    if isinstance(node, Call):
        if node.fn == "ind":
            lo, hi = node.args[0].value, node.args[1].value
            return np.where((np.asarray(x) >= lo) & (np.asarray(x) < hi), 1.0, 0.0)
        a = eval_expr(node.args[0], x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if node.fn == "sin":
                return np.sin(a)
            if node.fn == "cos":
                return np.cos(a)
            if node.fn == "exp":
                return np.exp(a)
            if node.fn == "ln":
                return np.log(a)
            if node.fn == "abs":
                return np.abs(a)
            if node.fn == "sqrt":
                return np.sqrt(a)
            return np.sign(a)
    raise TypeError(f"not an Expr node: {node!r}")
