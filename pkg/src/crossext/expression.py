"""Closed-form expressions in two complex variables.

Trees over constants, ``z``, ``w``, the four field operations, integer powers,
``exp`` and the principal ``log`` (cut on the negative real axis). They can be
evaluated on scalars (singularities raise) or arrays (singularities give nan),
differentiated symbolically, enclosed by disc arithmetic and serialized to JSON.
"""

from __future__ import annotations

import ast
import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

SING_TOL = 1e-300
CUT_TOL = 1e-12

KINDS = ("const", "var_z", "var_w", "add", "sub", "mul", "div", "neg", "powi", "exp", "log")
_ARITY = {"const": 0, "var_z": 0, "var_w": 0, "add": 2, "sub": 2, "mul": 2, "div": 2,
          "neg": 1, "powi": 1, "exp": 1, "log": 1}


class SingularityHit(ArithmeticError):
    """Division by (numerically) zero; ``node`` is the offending subtree."""

    def __init__(self, node: "Expr", message: str = "division by zero"):
        super().__init__(f"{message} in {node}")
        self.node = node


class BranchCutHit(SingularityHit):
    def __init__(self, node: "Expr"):
        super().__init__(node, "log argument on its branch cut")


class EnclosureFailed(ArithmeticError):
    pass


@dataclass(frozen=True, eq=True)
class Expr:
    kind: str
    args: tuple = ()
    value: complex = 0j
    n: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.args) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} arguments")

    # construction helpers
    def __add__(self, other):
        return Expr("add", (self, as_expr(other)))

    def __radd__(self, other):
        return Expr("add", (as_expr(other), self))

    def __sub__(self, other):
        return Expr("sub", (self, as_expr(other)))

    def __rsub__(self, other):
        return Expr("sub", (as_expr(other), self))

    def __mul__(self, other):
        return Expr("mul", (self, as_expr(other)))

    def __rmul__(self, other):
        return Expr("mul", (as_expr(other), self))

    def __truediv__(self, other):
        return Expr("div", (self, as_expr(other)))

    def __rtruediv__(self, other):
        return Expr("div", (as_expr(other), self))

    def __neg__(self):
        return Expr("neg", (self,))

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
            raise TypeError("only integer powers are supported")
        return Expr("powi", (self,), n=int(k))

    def __str__(self):
        return to_text(self)

    def __call__(self, z=0j, w=0j):
        return evaluate(self, z, w)

    @property
    def variables(self) -> frozenset:
        if self.kind == "var_z":
            return frozenset("z")
        if self.kind == "var_w":
            return frozenset("w")
        out = frozenset()
        for a in self.args:
            out |= a.variables
        return out

    def to_json(self) -> str:
        return json.dumps(to_dict(self), separators=(",", ":"))


def const(c) -> Expr:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError("constants must be finite")
    return Expr("const", value=c)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


Z = Expr("var_z")
W = Expr("var_w")


def exp(x) -> Expr:
    return Expr("exp", (as_expr(x),))


def log(x) -> Expr:
    return Expr("log", (as_expr(x),))


# --- serialization -------------------------------------------------------

def to_dict(e: Expr) -> dict:
    if e.kind == "const":
        return {"kind": "const", "value": [e.value.real, e.value.imag]}
    if e.kind in ("var_z", "var_w"):
        return {"kind": e.kind}
    out = {"kind": e.kind, "args": [to_dict(a) for a in e.args]}
    if e.kind == "powi":
        out["n"] = e.n
    return out


def from_dict(d) -> Expr:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"malformed expression node: {d!r}")
    kind = d["kind"]
    if kind not in KINDS:
        raise ValueError(f"unknown node kind {kind!r}")
    if kind == "const":
        re, im = d["value"]
        return const(complex(float(re), float(im)))
    if kind in ("var_z", "var_w"):
        return Expr(kind)
    args = d.get("args")
    if not isinstance(args, list):
        raise ValueError(f"node {kind!r} needs an args list")
    sub = tuple(from_dict(a) for a in args)
    if kind == "powi":
        n = d.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            raise ValueError("powi needs an integer exponent n")
        return Expr("powi", sub, n=n)
    return Expr(kind, sub)


def from_json(text: str) -> Expr:
    return from_dict(json.loads(text))


def to_text(e: Expr) -> str:
    k = e.kind
    if k == "const":
        c = e.value
        return repr(c.real) if c.imag == 0 else f"({c.real!r}{c.imag:+.17g}j)"
    if k == "var_z":
        return "z"
    if k == "var_w":
        return "w"
    if k in ("exp", "log"):
        return f"{k}({to_text(e.args[0])})"
    if k == "neg":
        return f"(-{to_text(e.args[0])})"
    if k == "powi":
        return f"({to_text(e.args[0])}**{e.n})"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[k]
    return f"({to_text(e.args[0])} {op} {to_text(e.args[1])})"


_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}


def parse(text: str) -> Expr:
    """Parse a Python-style formula such as ``"1/(2*w - z)"`` or ``"exp(z)*w"``."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc.msg}") from None

    def walk(node) -> Expr:
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return Expr(_BINOPS[type(node.op)], (walk(node.left), walk(node.right)))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            k = node.right
            sign = 1
            if isinstance(k, ast.UnaryOp) and isinstance(k.op, ast.USub):
                sign, k = -1, k.operand
            if not (isinstance(k, ast.Constant) and isinstance(k.value, int)):
                raise ValueError("only integer powers are supported")
            return walk(node.left) ** (sign * k.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -walk(node.operand)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
            return walk(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            return const(node.value)
        if isinstance(node, ast.Name) and node.id in ("z", "w"):
            return Z if node.id == "z" else W
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in ("exp", "log") and len(node.args) == 1 and not node.keywords:
            return Expr(node.func.id, (walk(node.args[0]),))
        raise ValueError(f"unsupported syntax in {text!r}: {ast.dump(node)[:60]}")

    return walk(tree.body)


def load(spec) -> Expr:
    """Expression from a JSON tree (dict) or a formula string."""
    if isinstance(spec, str):
        return parse(spec)
    return from_dict(spec)


# --- evaluation ----------------------------------------------------------

def evaluate(e: Expr, z, w=0j) -> complex:
    """Scalar evaluation; raises ``SingularityHit`` or ``BranchCutHit``."""
    k = e.kind
    if k == "const":
        return e.value
    if k == "var_z":
        return complex(z)
    if k == "var_w":
        return complex(w)
    if k == "add":
        return evaluate(e.args[0], z, w) + evaluate(e.args[1], z, w)
    if k == "sub":
        return evaluate(e.args[0], z, w) - evaluate(e.args[1], z, w)
    if k == "mul":
        return evaluate(e.args[0], z, w) * evaluate(e.args[1], z, w)
    if k == "div":
        num = evaluate(e.args[0], z, w)
        den = evaluate(e.args[1], z, w)
        if abs(den) < SING_TOL:
            raise SingularityHit(e)
        return num / den
    if k == "neg":
        return -evaluate(e.args[0], z, w)
    if k == "powi":
        base = evaluate(e.args[0], z, w)
        if e.n < 0 and abs(base) < SING_TOL:
            raise SingularityHit(e)
        return base ** e.n
    if k == "exp":
        return cmath.exp(evaluate(e.args[0], z, w))
    # log
    x = evaluate(e.args[0], z, w)
    if abs(x) < SING_TOL:
        raise SingularityHit(e, "log of zero")
    if x.real < 0 and abs(x.imag) <= CUT_TOL:
        raise BranchCutHit(e)
    return cmath.log(x)


def evaluate_array(e: Expr, z, w=0j) -> np.ndarray:
    """Vectorized evaluation with nan at singular and branch-cut points."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    shape = np.broadcast_shapes(z.shape, w.shape)
    with np.errstate(all="ignore"):
        out = _eval_arr(e, z, w)
    return np.broadcast_to(out, shape).astype(complex, copy=True)


def _eval_arr(e: Expr, z, w):
    k = e.kind
    if k == "const":
        return np.asarray(e.value)
    if k == "var_z":
        return z
    if k == "var_w":
        return w
    if k in ("add", "sub", "mul", "div"):
        a = _eval_arr(e.args[0], z, w)
        b = _eval_arr(e.args[1], z, w)
        if k == "add":
            return a + b
        if k == "sub":
            return a - b
        if k == "mul":
            return a * b
        bad = np.abs(b) < SING_TOL
        return np.where(bad, np.nan, a / np.where(bad, 1.0, b))
    a = _eval_arr(e.args[0], z, w)
    if k == "neg":
        return -a
    if k == "powi":
        if e.n < 0:
            bad = np.abs(a) < SING_TOL
            return np.where(bad, np.nan, np.where(bad, 1.0, a) ** e.n)
        return a ** e.n
    if k == "exp":
        return np.exp(a)
    bad = (np.abs(a) < SING_TOL) | ((a.real < 0) & (np.abs(a.imag) <= CUT_TOL))
    return np.where(bad, np.nan, np.log(np.where(bad, 1.0, a)))


def bind(e: Expr, var: str, value: complex) -> Expr:
    """Substitute a constant for one variable."""
    if e.kind == ("var_z" if var == "z" else "var_w"):
        return const(value)
    if not e.args:
        return e
    return Expr(e.kind, tuple(bind(a, var, value) for a in e.args), e.value, e.n)


def swap_variables(e: Expr) -> Expr:
    if e.kind == "var_z":
        return W
    if e.kind == "var_w":
        return Z
    if not e.args:
        return e
    return Expr(e.kind, tuple(swap_variables(a) for a in e.args), e.value, e.n)


# --- differentiation -----------------------------------------------------

def diff(e: Expr, var: str = "z") -> Expr:
    """Symbolic derivative with respect to ``var`` (``'z'`` or ``'w'``)."""
    if var not in ("z", "w"):
        raise ValueError("var must be 'z' or 'w'")
    k = e.kind
    if k == "const":
        return const(0)
    if k in ("var_z", "var_w"):
        return const(1 if k == f"var_{var}" else 0)
    if k in ("add", "sub"):
        return Expr(k, (diff(e.args[0], var), diff(e.args[1], var)))
    if k == "neg":
        return -diff(e.args[0], var)
    if k == "mul":
        f, g = e.args
        return diff(f, var) * g + f * diff(g, var)
    if k == "div":
        f, g = e.args
        return (diff(f, var) * g - f * diff(g, var)) / g ** 2
    if k == "powi":
        f = e.args[0]
        if e.n == 0:
            return const(0)
        return const(e.n) * f ** (e.n - 1) * diff(f, var)
    if k == "exp":
        return e * diff(e.args[0], var)
    return diff(e.args[0], var) / e.args[0]


# --- disc arithmetic -----------------------------------------------------

_ULP = 4e-16


@dataclass(frozen=True)
class Disc:
    """Closed disc ``{c + t: |t| <= r}`` used as a complex interval."""

    center: complex
    radius: float

    def __post_init__(self):
        if self.radius < 0 or not math.isfinite(self.radius):
            raise EnclosureFailed("invalid disc radius")

    def _pad(self, c: complex, r: float) -> "Disc":
        return Disc(c, r + _ULP * (abs(c) + r))

    def __add__(self, o: "Disc") -> "Disc":
        return self._pad(self.center + o.center, self.radius + o.radius)

    def __sub__(self, o: "Disc") -> "Disc":
        return self._pad(self.center - o.center, self.radius + o.radius)

    def __neg__(self) -> "Disc":
        return Disc(-self.center, self.radius)

    def __mul__(self, o: "Disc") -> "Disc":
        c1, r1, c2, r2 = self.center, self.radius, o.center, o.radius
        return self._pad(c1 * c2, abs(c1) * r2 + abs(c2) * r1 + r1 * r2)

    def inv(self) -> "Disc":
        c, r = self.center, self.radius
        den = abs(c) ** 2 - r ** 2
        if den <= 0 or abs(c) - r < 1e-300:
            raise EnclosureFailed("disc contains zero")
        return self._pad(c.conjugate() / den, r / den)

    def exp(self) -> "Disc":
        ec = cmath.exp(self.center)
        return self._pad(ec, abs(ec) * math.expm1(self.radius))

    def log(self) -> "Disc":
        c, r = self.center, self.radius
        if r >= abs(c):
            raise EnclosureFailed("disc contains zero")
        # the disc must not reach the negative real axis
        if c.real - r <= 0 and abs(c.imag) <= r:
            raise EnclosureFailed("disc meets the log branch cut")
        return self._pad(cmath.log(c), -math.log1p(-r / abs(c)))

    def powi(self, n: int) -> "Disc":
        if n < 0:
            return self.inv().powi(-n)
        out = Disc(1 + 0j, 0.0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    @property
    def abs_bounds(self) -> tuple[float, float]:
        return max(abs(self.center) - self.radius, 0.0), abs(self.center) + self.radius


def enclose(e: Expr, zd: Disc, wd: Disc | None = None) -> Disc:
    """Disc containing ``e(z, w)`` for all ``z`` in ``zd`` and ``w`` in ``wd``."""
    wd = wd if wd is not None else Disc(0j, 0.0)
    k = e.kind
    if k == "const":
        return Disc(e.value, 0.0)
    if k == "var_z":
        return zd
    if k == "var_w":
        return wd
    if k == "add":
        return enclose(e.args[0], zd, wd) + enclose(e.args[1], zd, wd)
    if k == "sub":
        return enclose(e.args[0], zd, wd) - enclose(e.args[1], zd, wd)
    if k == "mul":
        return enclose(e.args[0], zd, wd) * enclose(e.args[1], zd, wd)
    if k == "div":
        return enclose(e.args[0], zd, wd) * enclose(e.args[1], zd, wd).inv()
    a = enclose(e.args[0], zd, wd)
    if k == "neg":
        return -a
    if k == "powi":
        return a.powi(e.n)
    if k == "exp":
        return a.exp()
    return a.log()
