"""Discrete-time plant models as expression trees over set-valued operands.

Successor-state maps are plain expression trees: variables refer to state,
input and disturbance components, combined with sums, constant scalings,
binary products and applications of univariate primitives.  Evaluating a
tree on symbolic operands keeps every affine step exact; products and
primitive applications are the only places conservatism enters, each
consuming one fresh symbol.

A univariate primitive carries its function plus a closed-form enumerator
of the stationary points of x -> h(x) - slope * x, which makes the optimal
chord-parallel sandwich computable without any generic root finder.  The
enumerator is a per-primitive proof obligation: if it misses a stationary
point the sandwich is unsound, so every shipped primitive has a full
derivation in its tests.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import spoly as sp
from . import szono as sz
from .errors import AbstractionError, ConfigError, DimensionError
from .symbols import SymbolProvider, fresh_ids

DEGENERATE_WIDTH = 1e-12

TWO_PI = 2.0 * math.pi


# -- expression nodes ------------------------------------------------------


class Expr:
    """Base class for expression-tree nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class StateVar(Expr):
    index: int  # 0-based


@dataclass(frozen=True)
class InputVar(Expr):
    index: int


@dataclass(frozen=True)
class NoiseVar(Expr):
    index: int


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Scale(Expr):
    factor: float
    child: Expr


@dataclass(frozen=True)
class Product(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Apply(Expr):
    name: str
    child: Expr


# -- univariate primitives ---------------------------------------------------


@dataclass(frozen=True)
class UnivariatePrimitive:
    """A scalar function with enough structure for optimal sandwiches.

    Attributes:
        name: registry key used by expression trees and config files.
        fn: vectorized evaluation.
        stationary_points: all x with h'(x) == slope, given (slope, lo, hi);
            may return points outside [lo, hi], they are filtered later.
        domain_error: optional check returning a message when [lo, hi] is
            outside the function's domain (hard error, never silently clipped).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    stationary_points: Callable[[float, float, float], list]
    domain_error: Optional[Callable[[float, float], Optional[str]]] = None


def _sin_stat(slope, lo, hi):
    if abs(slope) > 1.0:
        return []
    x0 = math.acos(max(-1.0, min(1.0, slope)))
    pts = []
    for base in (x0, -x0):
        k = math.ceil((lo - base) / TWO_PI)
        x = base + k * TWO_PI
        while x <= hi:
            pts.append(x)
            x += TWO_PI
    return pts


def _cos_stat(slope, lo, hi):
    # d/dx cos = -sin, so solve sin x = -slope
    if abs(slope) > 1.0:
        return []
    x0 = math.asin(max(-1.0, min(1.0, -slope)))
    pts = []
    for base in (x0, math.pi - x0):
        k = math.ceil((lo - base) / TWO_PI)
        x = base + k * TWO_PI
        while x <= hi:
            pts.append(x)
            x += TWO_PI
    return pts


def _tanh_stat(slope, lo, hi):
    # 1 - tanh^2 x = slope has solutions only for slope in (0, 1]
    if slope <= 0.0 or slope > 1.0:
        return []
    r = math.sqrt(1.0 - slope)
    if r >= 1.0:
        return []
    x = math.atanh(r)
    return [x, -x] if x else [0.0]


def _sigmoid_stat(slope, lo, hi):
    # s(1 - s) = slope with s in (0, 1) needs slope in (0, 1/4]
    if slope <= 0.0 or slope > 0.25:
        return []
    root = math.sqrt(max(0.0, 1.0 - 4.0 * slope))
    pts = []
    for s in (0.5 * (1.0 + root), 0.5 * (1.0 - root)):
        if 0.0 < s < 1.0:
            pts.append(math.log(s / (1.0 - s)))
    return pts


def _exp_stat(slope, lo, hi):
    return [math.log(slope)] if slope > 0.0 else []


def _square_stat(slope, lo, hi):
    return [0.5 * slope]


def _identity_stat(slope, lo, hi):
    # the residual is constant when slope == 1; endpoints already cover it
    return []


def _recip_stat(slope, lo, hi):
    # -1/x^2 = slope has solutions only for negative slopes
    if slope >= 0.0:
        return []
    r = math.sqrt(-1.0 / slope)
    return [r, -r]


def _recip_domain(lo, hi):
    if lo <= 0.0 <= hi:
        return f"reciprocal argument range [{lo}, {hi}] spans 0"
    return None


def _np_sigmoid(x):
    return 0.5 + 0.5 * np.tanh(0.5 * np.asarray(x, dtype=float))


PRIMITIVES: dict[str, UnivariatePrimitive] = {}


def register_primitive(prim: UnivariatePrimitive) -> None:
    """Add (or replace) a primitive in the global registry."""
    PRIMITIVES[prim.name] = prim


for _p in (
    UnivariatePrimitive("sin", np.sin, _sin_stat),
    UnivariatePrimitive("cos", np.cos, _cos_stat),
    UnivariatePrimitive("tanh", np.tanh, _tanh_stat),
    UnivariatePrimitive("sigmoid", _np_sigmoid, _sigmoid_stat),
    UnivariatePrimitive("exp", np.exp, _exp_stat),
    UnivariatePrimitive("square", np.square, _square_stat),
    UnivariatePrimitive("identity", lambda x: np.asarray(x, dtype=float), _identity_stat),
    UnivariatePrimitive("recip", lambda x: 1.0 / np.asarray(x, dtype=float), _recip_stat, _recip_domain),
):
    register_primitive(_p)


# -- optimal univariate sandwich ---------------------------------------------


def sandwich(prim: UnivariatePrimitive, lo: float, hi: float):
    """Optimal chord-parallel sandwich (alpha, beta, gamma) of prim on [lo, hi].

    alpha is the chord slope; the residual h(x) - alpha*x vanishes at both
    endpoints, so its extrema lie at endpoints or interior stationary
    points, all of which the primitive enumerates in closed form.  beta
    centers the band between those extrema and gamma is its half-height;
    for convex or concave primitives this band is the smallest possible.
    """
    if prim.domain_error is not None:
        msg = prim.domain_error(lo, hi)
        if msg:
            raise AbstractionError(msg)
    f_lo = float(prim.fn(lo))
    f_hi = float(prim.fn(hi))
    if hi - lo < DEGENERATE_WIDTH:
        return 0.0, 0.5 * (f_lo + f_hi), 0.5 * abs(f_hi - f_lo)
    alpha = (f_hi - f_lo) / (hi - lo)
    cand = [lo, hi]
    for x in prim.stationary_points(alpha, lo, hi):
        if lo < x < hi:
            cand.append(float(x))
    cand.sort()  # ties between equal residuals resolve to the smaller point
    vals = [float(prim.fn(x)) for x in cand]
    residuals = [v - alpha * x for x, v in zip(cand, vals)]
    k_hi = int(np.argmax(residuals))
    k_lo = int(np.argmin(residuals))
    beta = 0.5 * ((vals[k_lo] + vals[k_hi]) - alpha * (cand[k_lo] + cand[k_hi]))
    gamma = 0.5 * (residuals[k_hi] - residuals[k_lo])
    return alpha, beta, gamma


def _lookup(prim) -> UnivariatePrimitive:
    if isinstance(prim, UnivariatePrimitive):
        return prim
    try:
        return PRIMITIVES[prim]
    except KeyError:
        raise AbstractionError(f"unknown primitive {prim!r}") from None


def abstract_univariate(prim, Z: sz.SZonotope, provider: SymbolProvider | None = None) -> sz.SZonotope:
    """Sound scalar-set image of a primitive, one fresh symbol of error."""
    prim = _lookup(prim)
    lo, hi = sz.bounds_1d(Z)
    alpha, beta, gamma = sandwich(prim, lo, hi)
    err = fresh_ids(1, provider)
    return sz.SZonotope(
        [alpha * float(Z.c[0]) + beta],
        np.concatenate([alpha * Z.G[0], [gamma]]).reshape(1, -1),
        np.concatenate([Z.ids, err]),
    )


def abstract_univariate_poly(
    prim, Z: sp.SPolynotope, refine_depth: int = 2, provider: SymbolProvider | None = None
) -> sp.SPolynotope:
    """Polynotope version; range comes from branch-and-bound refinement."""
    prim = _lookup(prim)
    lo, hi = sp.refine_bound(Z, refine_depth)
    alpha, beta, gamma = sandwich(prim, lo, hi)
    err_id = int(fresh_ids(1, provider)[0])
    return sp.add(
        sp.linear_image(alpha, Z),
        sp.SPolynotope([beta], [[gamma]], [err_id], [[1]]),
    )


# -- disturbances ------------------------------------------------------------


@dataclass(frozen=True)
class DisturbanceSpec:
    """Per-component box w_i in center_i + amplitude_i * [-1, 1]."""

    amplitude: np.ndarray
    center: np.ndarray | None = None

    def __post_init__(self):
        amp = np.atleast_1d(np.asarray(self.amplitude, dtype=float))
        ctr = np.zeros_like(amp) if self.center is None else np.atleast_1d(np.asarray(self.center, dtype=float))
        if amp.shape != ctr.shape or amp.ndim != 1:
            raise DimensionError("amplitude and center must be equal-length vectors")
        if (amp < 0).any():
            raise ValueError("amplitudes must be non-negative")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "center", ctr)

    @property
    def dim(self) -> int:
        return self.amplitude.size


def disturbance_szonotope(spec: DisturbanceSpec, provider: SymbolProvider | None = None) -> sz.SZonotope:
    """One step's disturbance set on fresh, never-reused symbols."""
    return sz.SZonotope(spec.center, np.diag(spec.amplitude), fresh_ids(spec.dim, provider))


# -- evaluation --------------------------------------------------------------


def _operand(store, index: int, what: str):
    if store is None:
        raise DimensionError(f"expression uses {what} {index + 1} but none was provided")
    if not 0 <= index < store.dim:
        raise DimensionError(f"{what} index {index + 1} out of range (dim {store.dim})")
    return store.project(index)


def eval_szono(expr: Expr, X: sz.SZonotope, U=None, W=None, provider=None) -> sz.SZonotope:
    """Evaluate one successor component on symbolic-zonotope operands.

    ``W`` is the current step's disturbance set; build it once per step with
    :func:`disturbance_szonotope` so that all components of the step share
    the same disturbance symbols.
    """
    if isinstance(expr, Const):
        return sz.SZonotope([expr.value])
    if isinstance(expr, StateVar):
        return _operand(X, expr.index, "state")
    if isinstance(expr, InputVar):
        return _operand(U, expr.index, "input")
    if isinstance(expr, NoiseVar):
        return _operand(W, expr.index, "disturbance")
    if isinstance(expr, Add):
        return sz.add(eval_szono(expr.left, X, U, W, provider), eval_szono(expr.right, X, U, W, provider))
    if isinstance(expr, Sub):
        return sz.add(eval_szono(expr.left, X, U, W, provider), -eval_szono(expr.right, X, U, W, provider))
    if isinstance(expr, Scale):
        return sz.linear_image(expr.factor, eval_szono(expr.child, X, U, W, provider))
    if isinstance(expr, Product):
        return sz.multiply(
            eval_szono(expr.left, X, U, W, provider),
            eval_szono(expr.right, X, U, W, provider),
            provider,
        )
    if isinstance(expr, Apply):
        return abstract_univariate(expr.name, eval_szono(expr.child, X, U, W, provider), provider)
    raise TypeError(f"not an expression node: {expr!r}")


def eval_spoly(expr: Expr, X: sp.SPolynotope, U=None, W=None, refine_depth: int = 2, provider=None) -> sp.SPolynotope:
    """Polynotope twin of :func:`eval_szono`; products compose exactly."""
    if isinstance(expr, Const):
        return sp.SPolynotope([expr.value])
    if isinstance(expr, StateVar):
        return _operand(X, expr.index, "state")
    if isinstance(expr, InputVar):
        return _operand(U, expr.index, "input")
    if isinstance(expr, NoiseVar):
        return _operand(W, expr.index, "disturbance")
    if isinstance(expr, Add):
        return sp.add(
            eval_spoly(expr.left, X, U, W, refine_depth, provider),
            eval_spoly(expr.right, X, U, W, refine_depth, provider),
        )
    if isinstance(expr, Sub):
        return sp.add(
            eval_spoly(expr.left, X, U, W, refine_depth, provider),
            -eval_spoly(expr.right, X, U, W, refine_depth, provider),
        )
    if isinstance(expr, Scale):
        return sp.linear_image(expr.factor, eval_spoly(expr.child, X, U, W, refine_depth, provider))
    if isinstance(expr, Product):
        return sp.multiply(
            eval_spoly(expr.left, X, U, W, refine_depth, provider),
            eval_spoly(expr.right, X, U, W, refine_depth, provider),
        )
    if isinstance(expr, Apply):
        return abstract_univariate_poly(
            expr.name, eval_spoly(expr.child, X, U, W, refine_depth, provider), refine_depth, provider
        )
    raise TypeError(f"not an expression node: {expr!r}")


def eval_concrete(expr: Expr, x, u=None, w=None):
    """Pointwise evaluation on concrete vectors (or batches); test oracle."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, StateVar):
        return np.asarray(x, dtype=float)[expr.index]
    if isinstance(expr, InputVar):
        return np.asarray(u, dtype=float)[expr.index]
    if isinstance(expr, NoiseVar):
        return np.asarray(w, dtype=float)[expr.index]
    if isinstance(expr, Add):
        return eval_concrete(expr.left, x, u, w) + eval_concrete(expr.right, x, u, w)
    if isinstance(expr, Sub):
        return eval_concrete(expr.left, x, u, w) - eval_concrete(expr.right, x, u, w)
    if isinstance(expr, Scale):
        return expr.factor * eval_concrete(expr.child, x, u, w)
    if isinstance(expr, Product):
        return eval_concrete(expr.left, x, u, w) * eval_concrete(expr.right, x, u, w)
    if isinstance(expr, Apply):
        return _lookup(expr.name).fn(eval_concrete(expr.child, x, u, w))
    raise TypeError(f"not an expression node: {expr!r}")


# -- text syntax --------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*()]))"
)

_VAR = re.compile(r"^([xuw])(\d+)$")


class _Parser:
    """Recursive-descent parser for the infix successor-map syntax.

    Grammar:  expr  := term (("+" | "-") term)*
              term  := unary ("*" unary)*
              unary := "-" unary | atom
              atom  := NUMBER | var | prim "(" expr ")" | "(" expr ")"
    Variables are 1-based: x1..xn states, u1..um inputs, w1..wk disturbances.
    """

    def __init__(self, text: str, n_x: int, n_u: int, n_w: int):
        self.text = text
        self.n = {"x": n_x, "u": n_u, "w": n_w}
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _tokenize(self, text):
        tokens = []
        k = 0
        while k < len(text):
            m = _TOKEN.match(text, k)
            if m is None:
                if text[k:].strip():
                    raise ConfigError(f"cannot tokenize {text[k:]!r} in expression {text!r}")
                break
            k = m.end()
            if m.group("num") is not None:
                tokens.append(("num", float(m.group("num"))))
            elif m.group("ident") is not None:
                tokens.append(("ident", m.group("ident")))
            else:
                tokens.append(("op", m.group("op")))
        return tokens

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def _next(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _expect(self, op: str):
        kind, val = self._next()
        if kind != "op" or val != op:
            raise ConfigError(f"expected {op!r} in expression {self.text!r}")

    def parse(self) -> Expr:
        node = self._expr()
        if self.pos != len(self.tokens):
            raise ConfigError(f"trailing input in expression {self.text!r}")
        return node

    def _expr(self) -> Expr:
        node = self._term()
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "+-":
                self.pos += 1
                rhs = self._term()
                node = _fold_add(node, rhs) if val == "+" else _fold_sub(node, rhs)
            else:
                return node

    def _term(self) -> Expr:
        node = self._unary()
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "*":
                self.pos += 1
                node = _fold_mul(node, self._unary())
            else:
                return node

    def _unary(self) -> Expr:
        kind, val = self._peek()
        if kind == "op" and val == "-":
            self.pos += 1
            child = self._unary()
            if isinstance(child, Const):
                return Const(-child.value)
            return Scale(-1.0, child)
        return self._atom()

    def _atom(self) -> Expr:
        kind, val = self._next()
        if kind == "num":
            return Const(val)
        if kind == "op" and val == "(":
            node = self._expr()
            self._expect(")")
            return node
        if kind == "ident":
            m = _VAR.match(val)
            if m:
                group, idx = m.group(1), int(m.group(2))
                if not 1 <= idx <= self.n[group]:
                    raise ConfigError(
                        f"variable {val!r} out of range: {group}-dimension is {self.n[group]}"
                    )
                node_cls = {"x": StateVar, "u": InputVar, "w": NoiseVar}[group]
                return node_cls(idx - 1)
            if val in PRIMITIVES:
                self._expect("(")
                node = self._expr()
                self._expect(")")
                return Apply(val, node)
            raise ConfigError(f"unknown identifier {val!r} in expression {self.text!r}")
        raise ConfigError(f"unexpected end of expression {self.text!r}")


def _fold_add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def _fold_sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def _fold_mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Const):
        return Scale(a.value, b)
    if isinstance(b, Const):
        return Scale(b.value, a)
    return Product(a, b)


def parse_expression(text: str, n_x: int, n_u: int = 0, n_w: int = 0) -> Expr:
    """Parse one successor-map component; raises ConfigError on bad input."""
    return _Parser(text, n_x, n_u, n_w).parse()
