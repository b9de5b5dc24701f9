"""A small expression language for potentials.

Grammar (Pratt parser): numbers, identifiers, + - * / ^, unary minus,
parentheses and the functions sin cos sinh cosh exp log sqrt abs.
Precedence: ^ (right associative) > unary - > * / > + -.

Identifiers are q1..qn plus coordinate aliases that depend on the space
(t, x, y, z and the lightlike pairs mu/nu, zeta/eta).  Exact constants are
kept as Fractions and folded eagerly, so printing and reparsing a tree gives
the same tree back.
"""

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "exp", "log", "sqrt", "abs")


class DSLError(ValueError):
    pass


class ParseError(DSLError):
    def __init__(self, msg, src="", pos=0):
        line = src.count("\n", 0, pos) + 1
        col = pos - (src.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.column = line, col


class NotDifferentiable(DSLError):
    pass


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: object  # Fraction or float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based coordinate index


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: object  # Num, integer or half-integer


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def _is_num(a, v=None):
    return isinstance(a, Num) and (v is None or a.value == v)


def _num(v):
    if isinstance(v, (int, Fraction)):
        return Num(Fraction(v))
    if float(v).is_integer() and abs(v) < 2 ** 53:
        return Num(Fraction(int(v)))
    return Num(float(v))


def _exact(v):
    return isinstance(v, Fraction)


# smart constructors: constant folding and 0/1 elimination only

def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a.value + b.value)
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return Add(a, b)


def sub(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a.value - b.value)
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a.value * b.value)
    if _is_num(a, 0) or _is_num(b, 0):
        return ZERO
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    if _is_num(a, -1):
        return neg(b)
    if _is_num(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a, b):
    if _is_num(b, 0):
        raise DSLError("division by zero constant")
    if _is_num(a) and _is_num(b):
        if _exact(a.value) and _exact(b.value):
            return Num(a.value / b.value)
        return _num(float(a.value) / float(b.value))
    if _is_num(b, 1):
        return a
    if _is_num(a, 0):
        return ZERO
    return Div(a, b)


def _check_exponent(e):
    if not isinstance(e, Num):
        raise DSLError("exponents must be constants (use exp/log for general powers)")
    v = Fraction(e.value) if not _exact(e.value) else e.value
    if (2 * v).denominator != 1:
        raise DSLError(f"exponent {e.value} is not an integer or half-integer")
    return Num(v)


def power(a, e):
    e = _check_exponent(e)
    if _is_num(e, 0):
        return ONE
    if _is_num(e, 1):
        return a
    if _is_num(a) and e.value.denominator == 1:
        if _is_num(a, 0) and e.value < 0:
            raise DSLError("zero to a negative power")
        if _exact(a.value):
            return Num(a.value ** int(e.value))
        return _num(float(a.value) ** int(e.value))
    return Pow(a, e)


def call(fn, a):
    if fn not in FUNCTIONS:
        raise DSLError(f"unknown function '{fn}'")
    return Call(fn, a)


# -- tokenizer and parser ------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][+-]?\d+)?|\d*\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)"
                    r"|(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),]))")


def tokenize(src):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            rest = src[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", src, bad)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", float(m.group(1)), start))
        elif m.group(2):
            out.append(("num", Fraction(int(m.group(2))), start))
        elif m.group(3):
            out.append(("id", m.group(3), start))
        else:
            op = m.group(4)
            out.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(("end", None, len(src)))
    return out


_BINARY = {"+": (10, add), "-": (10, sub), "*": (20, mul), "/": (20, div)}
_UNARY_BP = 30
_POW_BP = 40


class _Parser:
    def __init__(self, src, names):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        t = self.next()
        if t[0] != "op" or t[1] != op:
            raise ParseError(f"expected '{op}'", self.src, t[2])
        return t

    def parse(self):
        e = self.expr(0)
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", self.src, t[2])
        return e

    def nud(self):
        kind, val, pos = self.next()
        if kind == "num":
            return _num(val)
        if kind == "id":
            if val in FUNCTIONS:
                t = self.peek()
                if t[0] != "op" or t[1] != "(":
                    raise ParseError(f"function '{val}' needs one argument in parentheses", self.src, t[2])
                self.next()
                arg = self.expr(0)
                t = self.peek()
                if t[0] == "op" and t[1] == ",":
                    raise ParseError(f"function '{val}' takes exactly one argument", self.src, t[2])
                self.expect(")")
                return call(val, arg)
            if val in self.names:
                return self.names[val]
            raise ParseError(f"unknown identifier '{val}'", self.src, pos)
        if kind == "op" and val == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if kind == "op" and val == "-":
            return neg(self.expr(_UNARY_BP))
        if kind == "op" and val == "+":
            return self.expr(_UNARY_BP)
        if kind == "end":
            raise ParseError("unexpected end of input", self.src, pos)
        raise ParseError(f"unexpected token {val!r}", self.src, pos)

    def expr(self, rbp):
        left = self.nud()
        while True:
            kind, val, pos = self.peek()
            if kind != "op":
                if kind == "end":
                    return left
                raise ParseError(f"unexpected token {val!r}", self.src, pos)
            if val == "^":
                if _POW_BP <= rbp:
                    return left
                self.next()
                right = self.expr(_POW_BP - 1)
                try:
                    left = power(left, right)
                except DSLError as e:
                    raise ParseError(str(e), self.src, pos) from None
                continue
            if val not in _BINARY:
                return left
            bp, fn = _BINARY[val]
            if bp <= rbp:
                return left
            self.next()
            right = self.expr(bp)
            try:
                left = fn(left, right)
            except DSLError as e:
                raise ParseError(str(e), self.src, pos) from None


def alias_table(space):
    """Identifier -> AST for a space (q1..qn always present)."""
    n = space.dim
    names = {f"q{i + 1}": Var(i) for i in range(n)}
    nu = space.nu
    if nu >= 1 and n >= 2:
        letters = ["t", "x", "y", "z"][:n] if n <= 4 else []
    elif n <= 3:
        letters = ["x", "y", "z"][:n]
    else:
        letters = []
    for i, c in enumerate(letters):
        names[c] = Var(i)
    if nu >= 1 and n >= 2:
        t, x = Var(0), Var(1)
        r2 = Pow(Num(Fraction(2)), Num(Fraction(-1, 2)))  # 1/sqrt(2)
        names["mu"] = mul(sub(x, t), r2)
        names["nu"] = mul(add(t, x), r2)
        names["zeta"] = mul(sub(t, x), r2)
        names["eta"] = mul(add(t, x), r2)
    return names


def parse_expr(src, space):
    return _Parser(src, alias_table(space)).parse()


# -- printing ------------------------------------------------------------------

def _prec(a):
    if isinstance(a, Num):
        v = a.value
        if _exact(v) and v.denominator != 1:
            return 20
        return 30 if v < 0 else 100
    return {Add: 10, Sub: 10, Mul: 20, Div: 20, Neg: 30, Pow: 40}.get(type(a), 100)


def to_string(a):
    if isinstance(a, Num):
        v = a.value
        if _exact(v):
            return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return repr(float(v))
    if isinstance(a, Var):
        return f"q{a.index + 1}"
    if isinstance(a, Call):
        return f"{a.fn}({to_string(a.arg)})"
    if isinstance(a, Neg):
        s = to_string(a.arg)
        return f"-({s})" if _prec(a.arg) <= 30 else f"-{s}"
    if isinstance(a, Pow):
        b = to_string(a.base)
        if _prec(a.base) <= 40:
            b = f"({b})"
        e = to_string(a.exponent)
        if _prec(a.exponent) < 30:
            e = f"({e})"
        return f"{b}^{e}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(a)]
    p = _prec(a)
    ls, rs = to_string(a.left), to_string(a.right)
    if _prec(a.left) < p:
        ls = f"({ls})"
    if _prec(a.right) <= p:
        rs = f"({rs})"
    return f"{ls} {op} {rs}"


# -- differentiation -------------------------------------------------------------

def differentiate(a, var):
    """Exact derivative with respect to coordinate index ``var``."""
    if isinstance(a, Num):
        return ZERO
    if isinstance(a, Var):
        return ONE if a.index == var else ZERO
    if isinstance(a, Neg):
        return neg(differentiate(a.arg, var))
    if isinstance(a, Add):
        return add(differentiate(a.left, var), differentiate(a.right, var))
    if isinstance(a, Sub):
        return sub(differentiate(a.left, var), differentiate(a.right, var))
    if isinstance(a, Mul):
        return add(mul(differentiate(a.left, var), a.right), mul(a.left, differentiate(a.right, var)))
    if isinstance(a, Div):
        du, dv = differentiate(a.left, var), differentiate(a.right, var)
        if _is_num(dv, 0):
            return div(du, a.right)
        return div(sub(mul(du, a.right), mul(a.left, dv)), power(a.right, Num(Fraction(2))))
    if isinstance(a, Pow):
        du = differentiate(a.base, var)
        if _is_num(du, 0):
            return ZERO
        c = a.exponent.value
        return mul(mul(Num(c), power(a.base, Num(c - 1))), du)
    if isinstance(a, Call):
        u = a.arg
        du = differentiate(u, var)
        if a.fn == "abs":
            raise NotDifferentiable("abs is not differentiable")
        if _is_num(du, 0):
            return ZERO
        outer = {
            "sin": lambda: call("cos", u),
            "cos": lambda: neg(call("sin", u)),
            "sinh": lambda: call("cosh", u),
            "cosh": lambda: call("sinh", u),
            "exp": lambda: call("exp", u),
            "log": lambda: power(u, Num(Fraction(-1))),
            "sqrt": lambda: mul(Num(Fraction(1, 2)), power(u, Num(Fraction(-1, 2)))),
        }[a.fn]()
        return mul(outer, du)
    raise TypeError(f"not an expression node: {a!r}")


def variables(a):
    if isinstance(a, Var):
        return {a.index}
    if isinstance(a, Num):
        return set()
    out = set()
    for f in ("arg", "left", "right", "base"):
        if hasattr(a, f):
            out |= variables(getattr(a, f))
    return out


# -- evaluation --------------------------------------------------------------------

_NP = {"sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh, "exp": np.exp,
       "log": np.log, "sqrt": np.sqrt, "abs": np.abs}


def evaluate(a, X):
    """Vectorized evaluation; X has shape (m, n)."""
    if isinstance(a, Num):
        return np.full(X.shape[0], float(a.value))
    if isinstance(a, Var):
        return X[:, a.index]
    if isinstance(a, Neg):
        return -evaluate(a.arg, X)
    if isinstance(a, Add):
        return evaluate(a.left, X) + evaluate(a.right, X)
    if isinstance(a, Sub):
        return evaluate(a.left, X) - evaluate(a.right, X)
    if isinstance(a, Mul):
        return evaluate(a.left, X) * evaluate(a.right, X)
    if isinstance(a, Div):
        return evaluate(a.left, X) / evaluate(a.right, X)
    if isinstance(a, Pow):
        b = evaluate(a.base, X)
        e = a.exponent.value
        if e.denominator == 1:
            k = int(e)
            return b ** k if k >= 0 else 1.0 / b ** (-k)
        return np.sqrt(b) ** int(2 * e) if e > 0 else 1.0 / np.sqrt(b) ** int(-2 * e)
    if isinstance(a, Call):
        return _NP[a.fn](evaluate(a.arg, X))
    raise TypeError(f"not an expression node: {a!r}")


def _source(a):
    if isinstance(a, Num):
        return repr(float(a.value))
    if isinstance(a, Var):
        return f"X[:, {a.index}]"
    if isinstance(a, Neg):
        return f"(-{_source(a.arg)})"
    if isinstance(a, (Add, Sub, Mul, Div)):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(a)]
        return f"({_source(a.left)} {op} {_source(a.right)})"
    if isinstance(a, Pow):
        b = _source(a.base)
        e = a.exponent.value
        if e.denominator == 1:
            k = int(e)
            return f"({b} ** {k})" if k >= 0 else f"(1.0 / {b} ** {-k})"
        k = int(2 * e)
        return f"(np.sqrt({b}) ** {k})" if e > 0 else f"(1.0 / np.sqrt({b}) ** {-k})"
    if isinstance(a, Call):
        return f"_NP[{a.fn!r}]({_source(a.arg)})"
    raise TypeError(f"not an expression node: {a!r}")


def compile_expr(a):
    """Same result as evaluate(a, X), as one generated numpy function."""
    src = _source(a)
    if isinstance(a, Num):
        src = f"np.full(X.shape[0], {src})"
    fn = eval(f"lambda X: {src}", {"np": np, "_NP": _NP})  # noqa: S307 - source built from our AST only
    return fn


class EvaluationError(DSLError):
    pass


class PotentialField:
    """Scalar potential with value / gradient / Hessian on batches of points."""

    def __init__(self, ast, space, name=None):
        self.ast = ast
        self.space = space
        self.name = name
        n = space.dim
        if variables(ast) and max(variables(ast)) >= n:
            raise DSLError("variable index exceeds the space dimension")
        self._grad = None
        self._hess = None
        self._fns = {}

    @property
    def grad_ast(self):
        if self._grad is None:
            self._grad = [differentiate(self.ast, i) for i in range(self.space.dim)]
        return self._grad

    @property
    def hess_ast(self):
        if self._hess is None:
            n = self.space.dim
            H = [[None] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    H[i][j] = H[j][i] = differentiate(self.grad_ast[i], j)
            self._hess = H
        return self._hess

    def _eval(self, a, X):
        fn = self._fns.get(id(a))
        if fn is None:
            fn = self._fns[id(a)] = (compile_expr(a), a)
        v = fn[0](X)
        return np.broadcast_to(v, (X.shape[0],)).astype(float) if np.ndim(v) == 0 else v

    def _prep(self, X):
        X = np.asarray(X, dtype=float)
        return X, X.ndim == 1, np.atleast_2d(X)

    def value(self, X):
        X, single, X2 = self._prep(X)
        with np.errstate(all="ignore"):
            v = self._eval(self.ast, X2)
        return v[0] if single else v

    __call__ = value

    def grad(self, X):
        X, single, X2 = self._prep(X)
        with np.errstate(all="ignore"):
            G = np.stack([self._eval(e, X2) for e in self.grad_ast], axis=1)
        return G[0] if single else G

    def hessian(self, X):
        X, single, X2 = self._prep(X)
        n = self.space.dim
        with np.errstate(all="ignore"):
            H = np.empty((X2.shape[0], n, n))
            for i in range(n):
                for j in range(i, n):
                    H[:, i, j] = H[:, j, i] = self._eval(self.hess_ast[i][j], X2)
        return H[0] if single else H

    def __str__(self):
        return to_string(self.ast)


class ComposedPotential:
    """V(x0 + F y): restriction of a potential through an affine map."""

    def __init__(self, base, F, x0, space, name=None):
        self.base = base
        self.F = np.asarray(F, dtype=float)
        self.x0 = np.asarray(x0, dtype=float)
        self.space = space
        self.name = name

    def _map(self, Y):
        Y = np.asarray(Y, dtype=float)
        single = Y.ndim == 1
        Y2 = np.atleast_2d(Y)
        return single, self.x0 + Y2 @ self.F.T

    def value(self, Y):
        single, X = self._map(Y)
        v = self.base.value(X)
        return v[0] if single else v

    __call__ = value

    def grad(self, Y):
        single, X = self._map(Y)
        G = self.base.grad(X) @ self.F
        return G[0] if single else G

    def hessian(self, Y):
        single, X = self._map(Y)
        H = np.einsum("ai,mab,bj->mij", self.F, self.base.hessian(X), self.F)
        return H[0] if single else H


class CallablePotential:
    """Plain callable V(x); derivatives by 4th-order central differences."""

    def __init__(self, fun, space, h=1e-5, name=None):
        self.fun = fun
        self.space = space
        self.h = h
        self.name = name

    def value(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return float(self.fun(X))
        return np.array([self.fun(x) for x in X])

    __call__ = value

    def _step(self, x):
        return self.h * max(1.0, np.abs(x).max())

    def grad(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            return np.array([self.grad(x) for x in X])
        h = self._step(X)
        n = len(X)
        g = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            f = self.fun
            g[i] = (-f(X + 2 * e) + 8 * f(X + e) - 8 * f(X - e) + f(X - 2 * e)) / (12 * h)
        return g

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            return np.array([self.hessian(x) for x in X])
        h = self._step(X) * 10
        n = len(X)
        H = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            H[i] = (-self.grad(X + 2 * e) + 8 * self.grad(X + e) - 8 * self.grad(X - e)
                    + self.grad(X - 2 * e)) / (12 * h)
        return 0.5 * (H + H.T)


BUILTINS = {
    "calogero-moser": ("(q1-q2)^-2 + (q2-q3)^-2 + (q1-q3)^-2", "E3"),
    "morosi-tondo": ("-5/8*mu^4 + 5/2*mu^2*nu + 1/2*mu*y^2 - 1/2*nu^2", "E3_1"),
}


def parse_potential(src, space):
    """Parse an expression (or a built-in name) into a PotentialField."""
    from .pseudo_space import parse_space
    key = src.strip()
    if key in BUILTINS:
        expr, sp = BUILTINS[key]
        want = parse_space(sp)
        if space is not None and space != want:
            raise DSLError(f"built-in '{key}' lives on {sp}")
        return PotentialField(parse_expr(expr, want), want, name=key)
    return PotentialField(parse_expr(src, space), space)


def fd_check(V, X, h=1e-4):
    """Max relative disagreement of V.grad / V.hessian with central differences."""
    worst = 0.0
    for x in np.atleast_2d(X):
        n = len(x)
        g = V.grad(x)
        H = V.hessian(x)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            gd = (-V.value(x + 2 * e) + 8 * V.value(x + e) - 8 * V.value(x - e) + V.value(x - 2 * e)) / (12 * h)
            Hd = (-V.grad(x + 2 * e) + 8 * V.grad(x + e) - 8 * V.grad(x - e) + V.grad(x - 2 * e)) / (12 * h)
            worst = max(worst, abs(gd - g[i]) / max(1.0, abs(g[i])),
                        np.abs(Hd - H[i]).max() / max(1.0, np.abs(H[i]).max()))
    return worst


__all__ = ["parse_potential", "parse_expr", "differentiate", "to_string", "evaluate",
           "PotentialField", "ComposedPotential", "CallablePotential", "BUILTINS",
           "DSLError", "ParseError", "NotDifferentiable"]
