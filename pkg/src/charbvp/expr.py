"""Scalar expressions in the variable t: parsing, exact differentiation,
and complex-valued evaluation.

The grammar is deliberately small -- complex literals (``1+2i``), the
variable ``t``, arithmetic with standard precedence, and the functions
exp, log, sin, cos, sqrt -- so that everything representable is smooth to
every order away from isolated evaluation-time domain failures (division
by zero, log of zero), which are reported with the offending t.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainEvalError,
    ExprSyntaxError,
    UnknownIdentifierError,
    ValidationError,
)
from .model import MatrixFunction, VectorFunction

__all__ = [
    "ExprAst",
    "Const",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "parse_expr",
    "eval_expr",
    "differentiate",
    "simplify",
    "format_expr",
    "contains_var",
    "MatrixExpr",
    "ExprMatrix",
    "ExprVector",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExprAst:
    """Base class for expression tree nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(ExprAst):
    value: complex


@dataclass(frozen=True)
class Var(ExprAst):
    pass


@dataclass(frozen=True)
class Neg(ExprAst):
    child: ExprAst


@dataclass(frozen=True)
class Add(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Sub(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Mul(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Div(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Pow(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Call(ExprAst):
    func: str
    arg: ExprAst


# --- lexer -----------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'ident' | 'op' | 'end'
    text: str
    pos: int
    value: complex = 0j


def _tokenize(src: str):
    tokens = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if src.startswith("**", i):
            tokens.append(_Token("op", "^", i))
            i += 2
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            start = i
            while i < n and src[i].isdigit():
                i += 1
            if i < n and src[i] == ".":
                i += 1
                while i < n and src[i].isdigit():
                    i += 1
            if i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    i = j
                    while i < n and src[i].isdigit():
                        i += 1
            text = src[start:i]
            imaginary = i < n and src[i] == "i"
            if imaginary:
                i += 1
            value = float(text) * (1j if imaginary else 1.0)
            tokens.append(_Token("num", src[start:i], start, value))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            tokens.append(_Token("ident", src[start:i], start))
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    """Recursive descent with precedence power > unary minus > *,/ > +,-;
    +,-,*,/ associate left, ^ associates right."""

    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.k = 0

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def advance(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def parse(self) -> ExprAst:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)
        return e

    def expr(self) -> ExprAst:
        e = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                rhs = self.term()
                e = Add(e, rhs) if tok.text == "+" else Sub(e, rhs)
            else:
                return e

    def term(self) -> ExprAst:
        e = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                rhs = self.unary()
                e = Mul(e, rhs) if tok.text == "*" else Div(e, rhs)
            else:
                return e

    def unary(self) -> ExprAst:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self) -> ExprAst:
        tok = self.advance()
        if tok.kind == "num":
            return Const(tok.value)
        if tok.kind == "ident":
            if tok.text == "t":
                return Var()
            if tok.text == "i":
                return Const(1j)
            if tok.text in FUNCTIONS:
                opener = self.advance()
                if not (opener.kind == "op" and opener.text == "("):
                    raise ExprSyntaxError(f"expected '(' after {tok.text}", opener.pos)
                arg = self.expr()
                closer = self.advance()
                if not (closer.kind == "op" and closer.text == ")"):
                    raise ExprSyntaxError("expected ')'", closer.pos)
                return Call(tok.text, arg)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            e = self.expr()
            closer = self.advance()
            if not (closer.kind == "op" and closer.text == ")"):
                raise ExprSyntaxError("expected ')'", closer.pos)
            return e
        what = tok.text if tok.text else "end of input"
        raise ExprSyntaxError(f"unexpected {what!r}", tok.pos)


def parse_expr(src: str) -> ExprAst:
    """Parse an expression in t into an AST.

    Raises :class:`ExprSyntaxError` with a 0-based character offset on
    malformed input, :class:`UnknownIdentifierError` on unsupported names.
    """
    if not isinstance(src, str) or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(src).parse()


# --- evaluation ------------------------------------------------------------

def eval_expr(e: ExprAst, t: float) -> complex:
    """Evaluate at t; non-finite results and domain failures raise
    :class:`DomainEvalError` instead of returning NaN/inf."""
    value = _eval(e, complex(t))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise DomainEvalError(f"expression evaluated to a non-finite value at t={t}")
    return value


def _eval(e: ExprAst, t: complex) -> complex:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return t
    if isinstance(e, Neg):
        return -_eval(e.child, t)
    if isinstance(e, Add):
        return _eval(e.left, t) + _eval(e.right, t)
    if isinstance(e, Sub):
        return _eval(e.left, t) - _eval(e.right, t)
    if isinstance(e, Mul):
        return _eval(e.left, t) * _eval(e.right, t)
    if isinstance(e, Div):
        denom = _eval(e.right, t)
        if denom == 0:
            raise DomainEvalError(f"division by zero at t={t.real}")
        return _eval(e.left, t) / denom
    if isinstance(e, Pow):
        base = _eval(e.left, t)
        expo = _eval(e.right, t)
        try:
            return base ** expo
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainEvalError(f"power failed at t={t.real}: {exc}") from exc
    if isinstance(e, Call):
        x = _eval(e.arg, t)
        try:
            if e.func == "exp":
                return cmath.exp(x)
            if e.func == "log":
                if x == 0:
                    raise ValueError("log of zero")
                return cmath.log(x)
            if e.func == "sin":
                return cmath.sin(x)
            if e.func == "cos":
                return cmath.cos(x)
            if e.func == "sqrt":
                return cmath.sqrt(x)
        except (ValueError, OverflowError) as exc:
            raise DomainEvalError(f"{e.func} failed at t={t.real}: {exc}") from exc
    raise ValidationError(f"unknown expression node {type(e).__name__}")


# --- differentiation -------------------------------------------------------

def differentiate(e: ExprAst, order: int = 1) -> ExprAst:
    """Exact symbolic derivative of the given order (order 0 returns the
    simplified expression itself)."""
    if order < 0:
        raise ValidationError("derivative order must be >= 0")
    out = simplify(e)
    for _ in range(order):
        out = simplify(_d(out))
    return out


def _d(e: ExprAst) -> ExprAst:
    if isinstance(e, Const):
        return Const(0j)
    if isinstance(e, Var):
        return Const(1 + 0j)
    if isinstance(e, Neg):
        return Neg(_d(e.child))
    if isinstance(e, Add):
        return Add(_d(e.left), _d(e.right))
    if isinstance(e, Sub):
        return Sub(_d(e.left), _d(e.right))
    if isinstance(e, Mul):
        return Add(Mul(_d(e.left), e.right), Mul(e.left, _d(e.right)))
    if isinstance(e, Div):
        num = Sub(Mul(_d(e.left), e.right), Mul(e.left, _d(e.right)))
        return Div(num, Mul(e.right, e.right))
    if isinstance(e, Pow):
        u, v = e.left, e.right
        if isinstance(v, Const):
            return Mul(Mul(v, Pow(u, Const(v.value - 1))), _d(u))
        if isinstance(u, Const):
            return Mul(Mul(e, Call("log", u)), _d(v))
        return Mul(e, Add(Mul(_d(v), Call("log", u)), Div(Mul(v, _d(u)), u)))
    if isinstance(e, Call):
        u, du = e.arg, _d(e.arg)
        if e.func == "exp":
            return Mul(e, du)
        if e.func == "log":
            return Div(du, u)
        if e.func == "sin":
            return Mul(Call("cos", u), du)
        if e.func == "cos":
            return Neg(Mul(Call("sin", u), du))
        if e.func == "sqrt":
            return Div(du, Mul(Const(2 + 0j), e))
    raise ValidationError(f"unknown expression node {type(e).__name__}")


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def simplify(e: ExprAst) -> ExprAst:
    """Constant folding plus the usual neutral/absorbing-element identities.
    Folding is skipped whenever evaluation would raise (e.g. log(0))."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Neg):
        child = simplify(e.child)
        if isinstance(child, Const):
            return Const(-child.value)
        if isinstance(child, Neg):
            return child.child
        return Neg(child)
    if isinstance(e, Call):
        arg = simplify(e.arg)
        node = Call(e.func, arg)
        if isinstance(arg, Const):
            return _try_fold(node)
        return node
    left = simplify(e.left)
    right = simplify(e.right)
    node = type(e)(left, right)
    if isinstance(left, Const) and isinstance(right, Const):
        return _try_fold(node)
    if isinstance(e, Add):
        if _is_const(left, 0):
            return right
        if _is_const(right, 0):
            return left
    elif isinstance(e, Sub):
        if _is_const(right, 0):
            return left
        if _is_const(left, 0):
            return Neg(right)
    elif isinstance(e, Mul):
        if _is_const(left, 0) or _is_const(right, 0):
            return Const(0j)
        if _is_const(left, 1):
            return right
        if _is_const(right, 1):
            return left
    elif isinstance(e, Div):
        if _is_const(left, 0) and not _is_const(right, 0):
            return Const(0j)
        if _is_const(right, 1):
            return left
    elif isinstance(e, Pow):
        if _is_const(right, 1):
            return left
        if _is_const(right, 0):
            return Const(1 + 0j)
    return node


def _try_fold(node: ExprAst) -> ExprAst:
    try:
        return Const(_eval(node, 0j))
    except DomainEvalError:
        return node


def contains_var(e: ExprAst) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Const):
        return False
    if isinstance(e, Neg):
        return contains_var(e.child)
    if isinstance(e, Call):
        return contains_var(e.arg)
    return contains_var(e.left) or contains_var(e.right)


# --- printing --------------------------------------------------------------

def _format_real(x: float) -> str:
    return repr(float(x))


def _format_const(z: complex) -> str:
    re, im = z.real, z.imag
    if im == 0:
        return _format_real(re)
    if re == 0:
        return f"{_format_real(im)}i"
    sign = "+" if im >= 0 else "-"
    return f"({_format_real(re)}{sign}{_format_real(abs(im))}i)"


def format_expr(e: ExprAst) -> str:
    """Canonical, fully parenthesized rendering; parsing it back yields an
    evaluation-equivalent AST."""
    if isinstance(e, Const):
        return _format_const(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Neg):
        return f"(-{format_expr(e.child)})"
    if isinstance(e, Add):
        return f"({format_expr(e.left)}+{format_expr(e.right)})"
    if isinstance(e, Sub):
        return f"({format_expr(e.left)}-{format_expr(e.right)})"
    if isinstance(e, Mul):
        return f"({format_expr(e.left)}*{format_expr(e.right)})"
    if isinstance(e, Div):
        return f"({format_expr(e.left)}/{format_expr(e.right)})"
    if isinstance(e, Pow):
        return f"({format_expr(e.left)}^{format_expr(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({format_expr(e.arg)})"
    raise ValidationError(f"unknown expression node {type(e).__name__}")


# --- expression-valued matrices and vectors --------------------------------

def _as_ast(entry) -> ExprAst:
    if isinstance(entry, ExprAst):
        return entry
    if isinstance(entry, str):
        return parse_expr(entry)
    if isinstance(entry, (int, float, complex)):
        return Const(complex(entry))
    raise ValidationError(f"cannot interpret {entry!r} as an expression")


@dataclass(frozen=True)
class MatrixExpr:
    """Rectangular grid of expression ASTs (coefficient matrices, integral
    weights)."""

    entries: tuple

    def __post_init__(self):
        if not self.entries or not all(self.entries):
            raise ValidationError("matrix of expressions must be non-empty")
        width = len(self.entries[0])
        if any(len(row) != width for row in self.entries):
            raise ValidationError("matrix of expressions must be rectangular")

    @classmethod
    def parse(cls, rows) -> "MatrixExpr":
        return cls(tuple(tuple(_as_ast(x) for x in row) for row in rows))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def eval(self, t: float) -> np.ndarray:
        return np.array(
            [[eval_expr(e, t) for e in row] for row in self.entries], dtype=complex
        )

    def derivative(self, order: int = 1) -> "MatrixExpr":
        return MatrixExpr(
            tuple(tuple(differentiate(e, order) for e in row) for row in self.entries)
        )

    def to_strings(self):
        return [[format_expr(e) for e in row] for row in self.entries]

    def is_constant(self) -> bool:
        return all(isinstance(e, Const) for row in self.entries for e in row)


class ExprMatrix(MatrixFunction):
    """Matrix function defined by expressions; derivatives are symbolic, so it
    is smooth to every order away from evaluation-time domain failures."""

    def __init__(self, mexpr: MatrixExpr):
        self.expr = mexpr
        self.rows = mexpr.rows
        self.cols = mexpr.cols
        self.max_deriv_order = None
        self._levels = {0: mexpr}

    @classmethod
    def parse(cls, rows) -> "ExprMatrix":
        return cls(MatrixExpr.parse(rows))

    def _level(self, j: int) -> MatrixExpr:
        if j not in self._levels:
            top = max(self._levels)
            for k in range(top + 1, j + 1):
                self._levels[k] = self._levels[k - 1].derivative()
        return self._levels[j]

    def eval(self, t, j=0):
        self.check_order(j)
        return self._level(j).eval(t)


class ExprVector(VectorFunction):
    """Vector function defined by expressions, one per component."""

    def __init__(self, entries):
        asts = tuple(_as_ast(x) for x in entries)
        if not asts:
            raise ValidationError("vector of expressions must be non-empty")
        self.entries = asts
        self.dim = len(asts)
        self.max_deriv_order = None
        self._levels = {0: asts}

    @classmethod
    def parse(cls, entries) -> "ExprVector":
        return cls(entries)

    def _level(self, j: int):
        if j not in self._levels:
            top = max(self._levels)
            for k in range(top + 1, j + 1):
                self._levels[k] = tuple(differentiate(e) for e in self._levels[k - 1])
        return self._levels[j]

    def eval(self, t, j=0):
        self.check_order(j)
        return np.array([eval_expr(e, t) for e in self._level(j)], dtype=complex)

    def to_strings(self):
        return [format_expr(e) for e in self.entries]

    def is_constant(self) -> bool:
        return all(isinstance(e, Const) for e in self.entries)
