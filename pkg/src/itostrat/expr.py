"""Arithmetic expressions in one variable ``x``.

Grammar (whitespace insignificant, ``^`` right-associative)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-'? atom
    atom   := number | 'x' | func '(' expr ')' | '(' expr ')'
    func   := 'sqrt' | 'exp' | 'log'

Note that unary minus binds tighter than ``^``, so ``-x^2`` is ``(-x)^2``.
Exponents must be nonnegative integer literals.

Error offsets are 1-based character positions; an error at end of input
reports ``len(text) + 1``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "ExprSyntaxError", "ExprDomainError",
    "parse_expr", "eval_expr", "evaluate", "compile_expr",
    "differentiate", "simplify", "to_string", "substitute",
    "polynomial_coefficients", "equivalent", "FUNCTIONS",
]

FUNCTIONS = ("sqrt", "exp", "log")


class ExprSyntaxError(ValueError):
    """Malformed expression text. ``offset`` is 1-based."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.message = message
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class ExprDomainError(ArithmeticError):
    """Raised when a sub-expression is evaluated outside its domain."""

    def __init__(self, message: str, subexpr: "Expr"):
        self.subexpr = subexpr
        super().__init__(f"{message} in '{to_string(subexpr)}'")


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------
# ``pos`` is kept for error messages only and never takes part in equality.

@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    pos: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    pos: int = field(default=0, compare=False, repr=False)


Expr = Union[Num, Var, Neg, BinOp, Call]

X = Var()
ZERO = Num(0.0)
ONE = Num(1.0)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            raise ExprSyntaxError(f"unexpected character {text[i]!r}", i + 1, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start + 1))
        i = m.end()
    tokens.append(("end", "", n + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ExprSyntaxError(message, tok[2], self.text)

    def expect(self, value):
        if self.tok[1] != value or self.tok[0] != "op":
            what = "end of input" if self.tok[0] == "end" else repr(self.tok[1])
            raise self.error(f"expected {value!r}, found {what}")
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok[0] != "end":
            raise self.error(f"unexpected token {self.tok[1]!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.factor(), pos)
        return node

    def factor(self) -> Expr:
        base = self.unary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            _, _, pos = self.advance()
            exp_tok = self.tok
            exponent = self.factor()
            if not (isinstance(exponent, Num) and exponent.value >= 0
                    and float(exponent.value).is_integer()):
                raise self.error(
                    "exponent must be a nonnegative integer literal", exp_tok)
            return BinOp("^", base, exponent, pos)
        return base

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] == "-":
            _, _, pos = self.advance()
            return Neg(self.atom(), pos)
        return self.atom()

    def atom(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(value), pos)
        if kind == "name":
            self.advance()
            if value == "x":
                return Var(pos)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg, pos)
            raise ExprSyntaxError(f"unknown identifier {value!r}", pos, self.text)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {value!r}")


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    >>> parse_expr("x - x^2")
    BinOp(op='-', left=Var(), right=BinOp(op='^', left=Var(), right=Num(value=2.0)))
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 1, text)
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _fmt_num(v: float) -> str:
    if math.isfinite(v) and float(v).is_integer() and abs(v) < 1e16:
        s = str(int(v))
    else:
        s = repr(float(v))
    return s


def _atomic(e: Expr) -> bool:
    return isinstance(e, (Var, Call)) or (isinstance(e, Num) and e.value >= 0)


def to_string(e: Expr) -> str:
    """Render ``e`` so that ``parse_expr(to_string(e)) == e`` for parsed trees."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    return _str(e)


def _str(e: Expr) -> str:
    # negative literals only arise from folding; wrap them as operands
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if e.value < 0 else s
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = _str(e.operand)
        if not _atomic(e.operand) and not isinstance(e.operand, Num):
            inner = f"({inner})"
        return "-" + inner
    prec = _PREC[e.op]
    left, right = _str(e.left), _str(e.right)
    if e.op == "^":
        if not (_atomic(e.left) or isinstance(e.left, (Neg, Num))):
            left = f"({left})"
        if isinstance(e.right, BinOp) and e.right.op != "^":
            right = f"({right})"
        return f"{left}^{right}"
    if isinstance(e.left, BinOp) and _PREC[e.left.op] < prec:
        left = f"({left})"
    if isinstance(e.right, BinOp) and _PREC[e.right.op] <= prec:
        right = f"({right})"
    return f"{left} {e.op} {right}"


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def eval_expr(e: Expr, x: float) -> float:
    """Evaluate ``e`` at the scalar ``x`` in double precision.

    Raises ExprDomainError for ``sqrt``/``log`` of invalid arguments and
    division by zero instead of returning NaN or inf.
    """
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Var):
        return float(x)
    if isinstance(e, Neg):
        return -eval_expr(e.operand, x)
    if isinstance(e, Call):
        a = eval_expr(e.arg, x)
        if e.func == "sqrt":
            if a < 0:
                raise ExprDomainError(f"sqrt of negative value {a!r}", e)
            return math.sqrt(a)
        if e.func == "log":
            if a <= 0:
                raise ExprDomainError(f"log of nonpositive value {a!r}", e)
            return math.log(a)
        try:
            return math.exp(a)
        except OverflowError:
            raise ExprDomainError(f"exp overflow at {a!r}", e) from None
    a = eval_expr(e.left, x)
    b = eval_expr(e.right, x)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0:
            raise ExprDomainError("division by zero", e)
        return a / b
    try:
        return a ** int(b)
    except OverflowError:
        raise ExprDomainError("power overflow", e) from None


def compile_expr(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``e`` to a vectorised numpy function of ``x``.

    The returned callable raises ExprDomainError on any invalid element.
    """
    if isinstance(e, Num):
        v = float(e.value)
        return lambda x: np.full(np.shape(x), v)
    if isinstance(e, Var):
        return lambda x: np.asarray(x, dtype=float)
    if isinstance(e, Neg):
        f = compile_expr(e.operand)
        return lambda x: -f(x)
    if isinstance(e, Call):
        f = compile_expr(e.arg)
        if e.func == "sqrt":
            def _sqrt(x):
                a = f(x)
                if np.any(a < 0):
                    raise ExprDomainError("sqrt of negative value", e)
                return np.sqrt(a)
            return _sqrt
        if e.func == "log":
            def _log(x):
                a = f(x)
                if np.any(a <= 0):
                    raise ExprDomainError("log of nonpositive value", e)
                return np.log(a)
            return _log

        def _exp(x):
            with np.errstate(over="raise"):
                try:
                    return np.exp(f(x))
                except FloatingPointError:
                    raise ExprDomainError("exp overflow", e) from None
        return _exp

    fl, fr = compile_expr(e.left), compile_expr(e.right)
    if e.op == "+":
        return lambda x: fl(x) + fr(x)
    if e.op == "-":
        return lambda x: fl(x) - fr(x)
    if e.op == "*":
        return lambda x: fl(x) * fr(x)
    if e.op == "/":
        def _div(x):
            b = fr(x)
            if np.any(b == 0):
                raise ExprDomainError("division by zero", e)
            return fl(x) / b
        return _div
    n = int(e.right.value) if isinstance(e.right, Num) else None
    if n is not None:
        if n == 0:
            return lambda x: np.ones(np.shape(x))
        if n == 1:
            return fl
        if n == 2:
            return lambda x: np.square(fl(x))
        return lambda x: fl(x) ** n
    return lambda x: fl(x) ** fr(x)


def evaluate(e: Expr, x) -> np.ndarray:
    """Vectorised evaluation; see :func:`compile_expr`."""
    return compile_expr(e)(np.asarray(x, dtype=float))


# --------------------------------------------------------------------------
# Constant folding and differentiation
# --------------------------------------------------------------------------

def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def _fold_call(func: str, v: float):
    if func == "sqrt" and v >= 0:
        return math.sqrt(v)
    if func == "log" and v > 0:
        return math.log(v)
    if func == "exp" and v < 700:
        return math.exp(v)
    return None


def simplify(e: Expr) -> Expr:
    """Constant folding only: numeric subtrees collapse and neutral elements vanish."""
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Neg):
        a = simplify(e.operand)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.operand
        return Neg(a)
    if isinstance(e, Call):
        a = simplify(e.arg)
        if isinstance(a, Num):
            v = _fold_call(e.func, a.value)
            if v is not None:
                return Num(v)
        return Call(e.func, a)

    a, b = simplify(e.left), simplify(e.right)
    op = e.op
    if isinstance(a, Num) and isinstance(b, Num):
        if op == "+":
            return Num(a.value + b.value)
        if op == "-":
            return Num(a.value - b.value)
        if op == "*":
            return Num(a.value * b.value)
        if op == "/" and b.value != 0:
            return Num(a.value / b.value)
        if op == "^":
            return Num(a.value ** int(b.value))
    if op == "+":
        if _is(a, 0):
            return b
        if _is(b, 0):
            return a
        if isinstance(b, Num) and b.value < 0:
            return BinOp("-", a, Num(-b.value))
        if isinstance(b, Neg):
            return BinOp("-", a, b.operand)
    elif op == "-":
        if _is(b, 0):
            return a
        if _is(a, 0):
            return simplify(Neg(b))
        if isinstance(b, Num) and b.value < 0:
            return BinOp("+", a, Num(-b.value))
        if isinstance(b, Neg):
            return BinOp("+", a, b.operand)
    elif op == "*":
        if _is(a, 0) or _is(b, 0):
            return ZERO
        if _is(a, 1):
            return b
        if _is(b, 1):
            return a
        if _is(a, -1):
            return simplify(Neg(b))
        if _is(b, -1):
            return simplify(Neg(a))
        # keep numeric coefficients on the left
        if isinstance(b, Num) and not isinstance(a, Num):
            return simplify(BinOp("*", b, a))
        if isinstance(a, Num) and isinstance(b, BinOp) and b.op == "*" \
                and isinstance(b.left, Num):
            return simplify(BinOp("*", Num(a.value * b.left.value), b.right))
    elif op == "/":
        if _is(a, 0):
            return ZERO
        if _is(b, 1):
            return a
    elif op == "^":
        if _is(b, 0):
            return ONE
        if _is(b, 1):
            return a
    return BinOp(op, a, b)


def _d(e: Expr) -> Expr:
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return Neg(_d(e.operand))
    if isinstance(e, Call):
        u, du = e.arg, _d(e.arg)
        if e.func == "sqrt":
            return BinOp("/", du, BinOp("*", Num(2.0), e))
        if e.func == "exp":
            return BinOp("*", e, du)
        return BinOp("/", du, u)
    u, v = e.left, e.right
    if e.op in "+-":
        return BinOp(e.op, _d(u), _d(v))
    if e.op == "*":
        return BinOp("+", BinOp("*", _d(u), v), BinOp("*", u, _d(v)))
    if e.op == "/":
        num = BinOp("-", BinOp("*", _d(u), v), BinOp("*", u, _d(v)))
        return BinOp("/", num, BinOp("^", v, Num(2.0)))
    n = v.value
    if n == 0:
        return ZERO
    return BinOp("*", BinOp("*", Num(n), BinOp("^", u, Num(n - 1))), _d(u))


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to ``x``, constant-folded."""
    return simplify(_d(e))


def substitute(e: Expr, replacement: Expr) -> Expr:
    """Replace every occurrence of ``x`` in ``e`` with ``replacement``."""
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        return replacement
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, replacement))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, replacement))
    return BinOp(e.op, substitute(e.left, replacement), substitute(e.right, replacement))


# --------------------------------------------------------------------------
# Equivalence
# --------------------------------------------------------------------------

def _padd(p, q):
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0.0) + c
    return {k: c for k, c in out.items() if c != 0.0}


def _pmul(p, q):
    out: dict[int, float] = {}
    for i, a in p.items():
        for j, b in q.items():
            out[i + j] = out.get(i + j, 0.0) + a * b
    return {k: c for k, c in out.items() if c != 0.0}


def polynomial_coefficients(e: Expr) -> dict[int, float] | None:
    """Expand ``e`` to ``{power: coefficient}``, or None if it is not a polynomial.

    Division is allowed only by a nonzero constant.
    """
    if isinstance(e, Num):
        return {0: e.value} if e.value != 0 else {}
    if isinstance(e, Var):
        return {1: 1.0}
    if isinstance(e, Neg):
        p = polynomial_coefficients(e.operand)
        return None if p is None else {k: -c for k, c in p.items()}
    if isinstance(e, Call):
        return None
    p = polynomial_coefficients(e.left)
    q = polynomial_coefficients(e.right)
    if p is None or q is None:
        return None
    if e.op == "+":
        return _padd(p, q)
    if e.op == "-":
        return _padd(p, {k: -c for k, c in q.items()})
    if e.op == "*":
        return _pmul(p, q)
    if e.op == "/":
        if set(q) != {0}:
            return None
        return {k: c / q[0] for k, c in p.items()}
    out = {0: 1.0}
    for _ in range(int(e.right.value)):
        out = _pmul(out, p)
    return out


def equivalent(a: Expr, b: Expr, sample=None, rtol: float = 1e-12) -> bool:
    """Whether two expressions define the same function.

    Polynomials are compared coefficient-wise (exact up to ``rtol``); anything
    else falls back to evaluation on ``sample`` points.
    """
    pa, pb = polynomial_coefficients(a), polynomial_coefficients(b)
    if pa is not None and pb is not None:
        for k in set(pa) | set(pb):
            ca, cb = pa.get(k, 0.0), pb.get(k, 0.0)
            if abs(ca - cb) > rtol * max(1.0, abs(ca), abs(cb)):
                return False
        return True
    if sample is None:
        sample = np.linspace(0.013, 0.987, 41)
    try:
        va, vb = evaluate(a, sample), evaluate(b, sample)
    except ExprDomainError:
        return False
    return bool(np.allclose(va, vb, rtol=1e-10, atol=1e-12))
