"""A small expression language for nonlinearities f(u) and f(u, lambda).

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' ['-'] INTEGER)?
    atom    := NUMBER | 'u' | 'lambda' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sin | cos | tan | atan | tanh | exp | log | abs | sqrt

So ``-u^2`` is ``-(u^2)`` and ``2*u^3`` is ``2*(u^3)``.  Exponents are
integer literals only, which keeps evaluation total on negative bases.
Evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "ExprSyntaxError",
    "UnknownIdentifier",
    "EvalError",
    "SuspectEvenTouch",
    "AsymptoticSlopeWarning",
    "FUNCTIONS",
    "parse",
    "render",
    "evaluate",
    "diff",
    "diff_u",
    "simplify",
    "find_zeros",
    "check_slope_at_infinity",
]

FUNCTIONS = ("sin", "cos", "tan", "atan", "tanh", "exp", "log", "abs", "sqrt")
VARIABLES = ("u", "lambda")


class ExprSyntaxError(SyntaxError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    pass


class EvalError(ArithmeticError):
    """Evaluation outside the domain of an operation."""


class SuspectEvenTouch(UserWarning):
    """|f| nearly vanishes somewhere without a sign change."""


class AsymptoticSlopeWarning(UserWarning):
    """f(u)/u at large |u| disagrees with the attested slope at infinity."""


# --------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]


# --------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, off = self.take()
        if val != text or kind == "eof":
            what = "end of input" if kind == "eof" else repr(val)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            kind, val, off = self.take()
            if kind != "num" or not re.fullmatch(r"\d+", val):
                what = "end of input" if kind == "eof" else repr(val)
                raise ExprSyntaxError(f"exponent must be an integer literal, found {what}", off)
            return Pow(base, sign * int(val))
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise UnknownIdentifier(f"unknown identifier {val!r}", off)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "eof" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off)


def parse(src: str) -> Expr:
    """Parse ``src``; errors carry the character offset of the problem."""
    return _Parser(src).parse()


# --------------------------------------------------------------------------
# rendering

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _render(e: Expr, ctx: int) -> str:
    # ctx is the binding strength required by the parent: 0 top, 1 additive
    # right operand, 2 multiplicative, 3 unary, 4 power base
    if isinstance(e, Num):
        text = _num_text(e.value)
        if e.value < 0:
            return f"({text})"
        return text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_render(e.arg, 0)})"
    if isinstance(e, Pow):
        base = _render(e.base, 4)
        if isinstance(e.base, Pow):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Neg):
        text = "-" + _render(e.arg, 3)
        return f"({text})" if ctx > 3 else text
    prec = _PREC[e.op]
    # left associativity: the right operand needs strictly higher binding
    text = f"{_render(e.left, prec)} {e.op} {_render(e.right, prec + 1)}"
    return f"({text})" if ctx > prec else text


def render(e: Expr) -> str:
    """Source text that parses back to ``e``."""
    return _render(e, 0)


# --------------------------------------------------------------------------
# evaluation

_NUMPY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "atan": np.arctan,
    "tanh": np.tanh,
    "exp": np.exp,
    "abs": np.abs,
}


def _eval(e: Expr, u, lam):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return u if e.name == "u" else lam
    if isinstance(e, Neg):
        return -_eval(e.arg, u, lam)
    if isinstance(e, Pow):
        base = _eval(e.base, u, lam)
        if e.exponent < 0:
            if np.any(np.asarray(base) == 0):
                raise EvalError(f"zero raised to negative power in {render(e)}")
            return 1.0 / np.power(base, -e.exponent)
        return np.power(base, e.exponent) if e.exponent else np.ones_like(np.asarray(base, dtype=float)) + 0 * base
    if isinstance(e, Call):
        x = _eval(e.arg, u, lam)
        if e.func == "log":
            if np.any(np.asarray(x) <= 0):
                raise EvalError(f"log of a nonpositive value in {render(e)}")
            return np.log(x)
        if e.func == "sqrt":
            if np.any(np.asarray(x) < 0):
                raise EvalError(f"sqrt of a negative value in {render(e)}")
            return np.sqrt(x)
        return _NUMPY_FUNCS[e.func](x)
    a = _eval(e.left, u, lam)
    b = _eval(e.right, u, lam)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if np.any(np.asarray(b) == 0):
        raise EvalError(f"division by zero in {render(e)}")
    return a / b


def evaluate(e: Expr | str, u, lam=0.0):
    """Evaluate at ``u`` (scalar or array) and parameter ``lam``."""
    if isinstance(e, str):
        e = parse(e)
    scalar = np.ndim(u) == 0 and np.ndim(lam) == 0
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lam, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.broadcast_to(np.asarray(_eval(e, u, lam), dtype=float), np.broadcast(u, lam).shape)
    if not np.all(np.isfinite(out)):
        raise EvalError(f"non-finite value of {render(e)}")
    return float(out) if scalar else np.array(out)


# --------------------------------------------------------------------------
# differentiation


def _is_num(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Num) and (v is None or e.value == v)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0) or _is_num(b, 0):
        return Num(0.0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def _add(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return _neg(b)
    if _is_num(a) and _is_num(b) and a.value >= b.value:
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def _neg(a: Expr) -> Expr:
    if _is_num(a, 0):
        return a
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return Num(0.0)
    if _is_num(b, 1):
        return a
    return BinOp("/", a, b)


def _chain(func: str, x: Expr) -> Expr:
    """Derivative of func at x, as an expression in x."""
    one = Num(1.0)
    if func == "sin":
        return Call("cos", x)
    if func == "cos":
        return _neg(Call("sin", x))
    if func == "tan":
        return _add(one, Pow(Call("tan", x), 2))
    if func == "atan":
        return _div(one, _add(one, Pow(x, 2)))
    if func == "tanh":
        return _sub(one, Pow(Call("tanh", x), 2))
    if func == "exp":
        return Call("exp", x)
    if func == "log":
        return _div(one, x)
    if func == "sqrt":
        return _div(one, _mul(Num(2.0), Call("sqrt", x)))
    if func == "abs":
        # sign(x) away from the kink; evaluates to a division error at x = 0
        return _div(x, Call("abs", x))
    raise ValueError(f"unknown function {func}")


def diff(e: Expr, var: str) -> Expr:
    """Symbolic derivative with respect to ``var`` ('u' or 'lambda')."""
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return _neg(diff(e.arg, var))
    if isinstance(e, Pow):
        db = diff(e.base, var)
        n = e.exponent
        if n == 0 or _is_num(db, 0):
            return Num(0.0)
        coeff = Num(float(abs(n)))
        inner = _mul(_mul(coeff, Pow(e.base, n - 1)), db)
        return _neg(inner) if n < 0 else inner
    if isinstance(e, Call):
        da = diff(e.arg, var)
        if _is_num(da, 0):
            return Num(0.0)
        return _mul(_chain(e.func, e.arg), da)
    da, db = diff(e.left, var), diff(e.right, var)
    if e.op == "+":
        return _add(da, db)
    if e.op == "-":
        return _sub(da, db)
    if e.op == "*":
        return _add(_mul(da, e.right), _mul(e.left, db))
    # quotient rule
    num = _sub(_mul(da, e.right), _mul(e.left, db))
    return _div(num, Pow(e.right, 2))


def diff_u(e: Expr | str) -> Expr:
    """d/du.  ``abs`` differentiates to x/abs(x), undefined at its kink."""
    if isinstance(e, str):
        e = parse(e)
    return diff(e, "u")


def simplify(e: Expr) -> Expr:
    """Fold constant arithmetic bottom-up (light cleanup only)."""
    if isinstance(e, Neg):
        a = simplify(e.arg)
        return _neg(a)
    if isinstance(e, Pow):
        return Pow(simplify(e.base), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, simplify(e.arg))
    if isinstance(e, BinOp):
        a, b = simplify(e.left), simplify(e.right)
        return {"+": _add, "-": _sub, "*": _mul, "/": _div}[e.op](a, b)
    return e


# --------------------------------------------------------------------------
# zeros and asymptotics


def find_zeros(
    e: Expr | str,
    bracket: float | tuple[float, float] = 100.0,
    lam: float = 0.0,
    cells: int = 100_000,
    merge_tol: float = 1e-9,
) -> list[tuple[float, float]]:
    """Zeros of u -> f(u, lam) on a bracket, with the slope f'(z) at each.

    A uniform sign-change scan followed by Brent refinement to 1e-12 or better.  Every simple
    zero separated from its neighbours by more than the cell width is found;
    places where |f| < 1e-9 without a sign change trigger ``SuspectEvenTouch``.
    """
    if isinstance(e, str):
        e = parse(e)
    if isinstance(bracket, (int, float)):
        if bracket <= 0:
            raise ValueError("bracket radius must be positive")
        lo, hi = -float(bracket), float(bracket)
    else:
        lo, hi = map(float, bracket)
        if not hi > lo:
            raise ValueError("empty bracket")
    d = diff_u(e)
    grid = np.linspace(lo, hi, cells + 1)
    vals = evaluate(e, grid, lam)
    roots: list[float] = []
    for i in np.nonzero(vals == 0.0)[0]:
        roots.append(float(grid[i]))
    f = lambda x: evaluate(e, x, lam)  # noqa: E731
    for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
        roots.append(brentq(f, float(grid[i]), float(grid[i + 1]), xtol=1e-15, rtol=4 * np.finfo(float).eps))
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and r - merged[-1] <= merge_tol:
            continue
        merged.append(r)
    # near-zeros with no sign change: local minima of |f| below the threshold
    absv = np.abs(vals)
    interior = (absv[1:-1] <= absv[:-2]) & (absv[1:-1] <= absv[2:]) & (absv[1:-1] < 1e-9)
    for i in np.nonzero(interior)[0] + 1:
        x = float(grid[i])
        if not any(abs(x - r) <= 2 * (hi - lo) / cells for r in merged):
            warnings.warn(f"|f| nearly vanishes at u={x:g} without a sign change", SuspectEvenTouch, stacklevel=2)
    return [(r, float(evaluate(d, r, lam))) for r in merged]


def check_slope_at_infinity(
    e: Expr | str, slope: float, lam: float = 0.0, at: float = 1e6, rel: float = 0.01
) -> bool:
    """Sample f(u)/u at u = +-at; warn and return False on a mismatch beyond ``rel``."""
    if isinstance(e, str):
        e = parse(e)
    ok = True
    for u in (at, -at):
        ratio = evaluate(e, u, lam) / u
        if abs(ratio - slope) > rel * max(abs(slope), 1.0):
            warnings.warn(
                f"f(u)/u = {ratio:g} at u = {u:g} differs from the attested slope {slope:g}",
                AsymptoticSlopeWarning,
                stacklevel=2,
            )
            ok = False
    return ok
