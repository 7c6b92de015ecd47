"""Expression DSL: parsing, vectorized evaluation and symbolic differentiation.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' factor)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' atom

Note that unary minus binds tighter than ``^``, so ``-x^2`` is ``(-x)^2``.

``eps`` is always declared.  ``pi`` and ``i`` are reserved constants; the
presence of ``i`` (or of a complex binding) switches evaluation to complex
arithmetic.  Bindings may be numpy arrays, in which case evaluation
broadcasts.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs", "re", "im")
CONSTANTS = ("pi", "i")
EPS = "eps"

_IDENT = re.compile(r"[a-z][a-z0-9]*")
_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UndeclaredVariableError(ExprError):
    def __init__(self, name: str, position: int):
        super().__init__(f"undeclared variable {name!r} at position {position}")
        self.name = name
        self.position = position


class DomainError(ArithmeticError):
    """Raised when a sub-expression is evaluated outside its domain."""

    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message}: {node}")
        self.node = node


# ---------------------------------------------------------------- tree nodes


class Expr:
    prec = 4

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Expr({to_text(self)!r})"

    def children(self) -> tuple["Expr", ...]:
        return ()

    def variables(self) -> frozenset[str]:
        cached = self.__dict__.get("_vars")
        if cached is not None:
            return cached
        out: set[str] = set()
        stack: list[Expr] = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Var):
                out.add(node.name)
            stack.extend(node.children())
        # trees are immutable, so memoise on the instance
        object.__setattr__(self, "_vars", frozenset(out))
        return self.__dict__["_vars"]

    def has_imaginary(self) -> bool:
        cached = self.__dict__.get("_imag")
        if cached is None:
            cached = (isinstance(self, Const) and self.name == "i") or any(
                c.has_imaginary() for c in self.children())
            object.__setattr__(self, "_imag", cached)
        return cached


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: float


@dataclass(frozen=True, repr=False)
class Const(Expr):
    name: str


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, repr=False)
class Call(Expr):
    fn: str
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, repr=False)
class _Binary(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    prec = 1
    symbol = "+"


class Sub(_Binary):
    prec = 1
    symbol = "-"


class Mul(_Binary):
    prec = 2
    symbol = "*"


class Div(_Binary):
    prec = 2
    symbol = "/"


class Pow(_Binary):
    prec = 3
    symbol = "^"


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}


# ------------------------------------------------------------------- parsing


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int  # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    k = 0
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            k += 1
            continue
        m = _NUMBER.match(text, k)
        if m and (ch.isdigit() or ch == "."):
            tokens.append(_Token("num", m.group(0), k + 1))
            k = m.end()
            continue
        m = _IDENT.match(text, k)
        if m:
            tokens.append(_Token("ident", m.group(0), k + 1))
            k = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, k + 1))
            k += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", k + 1)
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.k = 0
        self.declared = set(variables) | {EPS}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.k]

    def take(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            raise ParseError(f"expected {text!r}", self.tok.pos)
        self.k += 1

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = _BINARY[op](node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            node = _BINARY[op](node, self.factor())
        return node

    def factor(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.take()
            nxt = self.tok
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok.text!r}", tok.pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in FUNCTIONS:
                raise ParseError(f"function {tok.text!r} needs an argument", nxt.pos)
            if tok.text in self.declared:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            raise UndeclaredVariableError(tok.text, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.atom())
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.pos)
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)


def parse(text: str, variables: Sequence[str] = ()) -> Expr:
    """Parse ``text`` into an expression tree over ``variables`` (plus ``eps``)."""
    if not text or not text.strip():
        raise ParseError("empty expression", 1)
    p = _Parser(text, variables)
    node = p.expr()
    if p.tok.kind != "end":
        raise ParseError(f"unexpected token {p.tok.text!r}", p.tok.pos)
    return node


# ------------------------------------------------------------------ printing


def _fmt_number(v: float) -> str:
    s = format(v, ".17g")
    # shortest repr that round-trips
    short = repr(float(v))
    if float(short) == v and len(short) < len(s):
        s = short
    if s.endswith(".0"):
        s = s[:-2]
    return s


def _wrap(node: Expr, parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if parens else text


def to_text(node: Expr) -> str:
    """Render ``node`` so that ``parse(to_text(node))`` rebuilds an equivalent tree."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, node.arg.prec < 4 or _leading_minus(node.arg))
    if isinstance(node, Pow):
        base = _wrap(node.left, node.left.prec < 4)
        expo = _wrap(node.right, node.right.prec < 3)
        return f"{base}^{expo}"
    if isinstance(node, _Binary):
        left = _wrap(node.left, node.left.prec < node.prec)
        right = _wrap(node.right, node.right.prec <= node.prec and not isinstance(node.right, Pow))
        if node.prec == 1:
            return f"{left} {node.symbol} {right}"
        return f"{left}{node.symbol}{right}"
    raise TypeError(f"not an expression node: {node!r}")


def _leading_minus(node: Expr) -> bool:
    return isinstance(node, Num) and node.value < 0


# ---------------------------------------------------------------- evaluation


def _is_complex(value) -> bool:
    return np.iscomplexobj(value)


def evaluate(node: Expr, env: Mapping[str, object]):
    """Evaluate ``node`` with variable bindings ``env``.

    Bindings may be scalars or broadcastable numpy arrays.  Returns a python
    scalar when every binding is scalar, else an ndarray.
    """
    missing = node.variables() - set(env)
    if missing:
        raise ExprError(f"unbound variables: {sorted(missing)}")
    complex_mode = node.has_imaginary() or any(_is_complex(v) for v in env.values())
    dtype = complex if complex_mode else float
    bound = {k: np.asarray(v, dtype=dtype) for k, v in env.items()}
    with np.errstate(all="ignore"):
        out = _eval(node, bound, complex_mode)
    out = np.asarray(out)
    if out.ndim == 0:
        return out.item()
    return out


def _eval(node: Expr, env, cplx: bool):
    if isinstance(node, Num):
        return np.asarray(node.value, dtype=complex if cplx else float)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        if node.name == "pi":
            return np.asarray(math.pi)
        return np.asarray(1j)
    if isinstance(node, Neg):
        return -_eval(node.arg, env, cplx)
    if isinstance(node, Call):
        return _call(node, _eval(node.arg, env, cplx), cplx)
    a = _eval(node.left, env, cplx)
    if isinstance(node, Pow) and isinstance(node.right, Num):
        k = node.right.value
        if k >= 0 and k == int(k) and not np.iscomplexobj(k):
            return a * a if k == 2 else a ** int(k)
    b = _eval(node.right, env, cplx)
    if isinstance(node, Add):
        return a + b
    if isinstance(node, Sub):
        return a - b
    if isinstance(node, Mul):
        return a * b
    if isinstance(node, Div):
        if np.any(b == 0):
            raise DomainError("division by zero", node)
        return a / b
    return _power(node, a, b, cplx)


def _power(node: Pow, a, b, cplx: bool):
    if cplx or np.iscomplexobj(a) or np.iscomplexobj(b):
        a = a.astype(complex)
        if np.any((a == 0) & (np.real(b) <= 0)):
            raise DomainError("zero to a non-positive power", node)
        return np.power(a, b)
    integral = np.all(np.isfinite(b)) and np.all(b == np.round(b))
    if integral:
        if np.any((a == 0) & (b < 0)):
            raise DomainError("division by zero", node)
        return np.power(a, b)
    if np.any((a < 0) | ((a == 0) & (b <= 0))):
        raise DomainError("non-integer power of a non-positive base", node)
    return np.power(a, b)


def _call(node: Call, x, cplx: bool):
    fn = node.fn
    if fn == "sin":
        return np.sin(x)
    if fn == "cos":
        return np.cos(x)
    if fn == "exp":
        return np.exp(x)
    if fn == "log":
        if np.iscomplexobj(x):
            if np.any(x == 0):
                raise DomainError("log of zero", node)
        elif np.any(x <= 0):
            raise DomainError("log of a non-positive real", node)
        return np.log(x)
    if fn == "sqrt":
        if not np.iscomplexobj(x) and np.any(x < 0):
            raise DomainError("sqrt of a negative real", node)
        return np.sqrt(x)
    if fn == "abs":
        return np.abs(x)
    if fn == "re":
        return np.real(x)
    if fn == "im":
        return np.imag(x) if np.iscomplexobj(x) else np.zeros_like(x)
    raise ExprError(f"unknown function {fn!r}")


# ----------------------------------------------------------- differentiation

ZERO = Num(0.0)
ONE = Num(1.0)


def _num(node: Expr) -> float | None:
    return node.value if isinstance(node, Num) else None


def _fold(value: float) -> Num | None:
    if math.isfinite(value):
        return Num(float(value))
    return None


def add(a: Expr, b: Expr) -> Expr:
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return _fold(x + y) or Add(a, b)
    if x == 0:
        return b
    if y == 0:
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return _fold(x - y) or Sub(a, b)
    if y == 0:
        return a
    if x == 0:
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return _fold(x * y) or Mul(a, b)
    if x == 0 or y == 0:
        return ZERO
    if x == 1:
        return b
    if y == 1:
        return a
    if x == -1:
        return neg(b)
    if y == -1:
        return neg(a)
    if isinstance(b, Div) and _num(b.left) == 1:
        return div(a, b.right)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    x, y = _num(a), _num(b)
    if x is not None and y is not None and y != 0:
        return _fold(x / y) or Div(a, b)
    if x == 0:
        return ZERO
    if y == 1:
        return a
    return Div(a, b)


def power(a: Expr, b: Expr) -> Expr:
    y = _num(b)
    if y == 0:
        return ONE
    if y == 1:
        return a
    return Pow(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(fn: str, a: Expr) -> Expr:
    return Call(fn, a)


def differentiate(node: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``node`` with respect to ``var``.

    Only constant folding is applied.  ``abs`` differentiates to an
    expression that divides by ``abs(u)``, so evaluating it where ``u = 0``
    raises :class:`DomainError`.
    """
    if var not in node.variables():
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Neg):
        return neg(differentiate(node.arg, var))
    if isinstance(node, Add):
        return add(differentiate(node.left, var), differentiate(node.right, var))
    if isinstance(node, Sub):
        return sub(differentiate(node.left, var), differentiate(node.right, var))
    if isinstance(node, Mul):
        u, v = node.left, node.right
        return add(mul(differentiate(u, var), v), mul(u, differentiate(v, var)))
    if isinstance(node, Div):
        u, v = node.left, node.right
        du, dv = differentiate(u, var), differentiate(v, var)
        if _num(dv) == 0:
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), power(v, Num(2.0)))
    if isinstance(node, Pow):
        u, v = node.left, node.right
        du = differentiate(u, var)
        if var not in v.variables():
            y = _num(v)
            lowered = Num(y - 1) if y is not None else sub(v, ONE)
            return mul(mul(v, power(u, lowered)), du)
        dv = differentiate(v, var)
        inner = add(mul(dv, call("log", u)), div(mul(v, du), u))
        return mul(node, inner)
    if isinstance(node, Call):
        u = node.arg
        du = differentiate(u, var)
        fn = node.fn
        if fn == "sin":
            outer = call("cos", u)
        elif fn == "cos":
            outer = neg(call("sin", u))
        elif fn == "exp":
            outer = node
        elif fn == "log":
            return div(du, u)
        elif fn == "sqrt":
            return div(du, mul(Num(2.0), node))
        elif fn == "abs":
            # d|u| = (re u re u' + im u im u') / |u|; valid for real and complex u
            num = add(mul(call("re", u), call("re", du)), mul(call("im", u), call("im", du)))
            return div(_fold_reim(num), node)
        elif fn in ("re", "im"):
            return _fold_reim(call(fn, du))
        else:
            raise ExprError(f"cannot differentiate {fn!r}")
        return mul(du, outer) if isinstance(du, Num) else mul(outer, du)
    raise ExprError(f"cannot differentiate {node!r}")


def _fold_reim(node: Expr) -> Expr:
    """Fold re/im of real literals produced while differentiating ``abs``."""
    if isinstance(node, Call) and node.fn in ("re", "im"):
        arg = _fold_reim(node.arg)
        if isinstance(arg, Num):
            return arg if node.fn == "re" else ZERO
        return Call(node.fn, arg)
    if isinstance(node, Add):
        return add(_fold_reim(node.left), _fold_reim(node.right))
    if isinstance(node, Mul):
        return mul(_fold_reim(node.left), _fold_reim(node.right))
    return node


def substitute(node: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (no folding)."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    if isinstance(node, _Binary):
        return type(node)(substitute(node.left, mapping), substitute(node.right, mapping))
    return node


def is_zero(node: Expr) -> bool:
    return isinstance(node, Num) and node.value == 0
