"""Feed-forward networks and their set-valued propagation.

A network here is a chain of dense layers, each holding its weights, bias
and activation name; the final layer is affine (activation "linear").
Set propagation replaces every scalar activation by a guaranteed sandwich

    alpha * z + beta - gamma  <=  act(z)  <=  alpha * z + beta + gamma

valid on the pre-activation range [l, u] of that neuron, so the layer image
becomes an affine map plus one fresh error symbol per neuron.  The affine
engine does this on symbolic zonotopes; the polynomial engine additionally
offers a quadratic sandwich for ReLU and composes exactly on polynotopes.

Every neuron always consumes exactly one fresh symbol id, even when its
error coefficient is zero (a stable neuron), so the output symbol count of
a propagation is a function of the architecture alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spoly
from .errors import DimensionError
from .symbols import SymbolProvider, fresh_ids
from .szono import SZonotope, hull_array, linear_image

ACTIVATIONS = ("relu", "sigmoid", "tanh", "linear")

# pre-activation ranges narrower than this are treated as a point
DEGENERATE_WIDTH = 1e-12


def _sigmoid(x):
    # tanh form is overflow-safe for large |x|
    return 0.5 + 0.5 * np.tanh(0.5 * np.asarray(x, dtype=float))


_ACT_FN = {
    "relu": lambda x: np.maximum(x, 0.0),
    "sigmoid": _sigmoid,
    "tanh": np.tanh,
    "linear": lambda x: x,
}

_ACT_DERIV = {
    "sigmoid": lambda x: _sigmoid(x) * (1.0 - _sigmoid(x)),
    "tanh": lambda x: 1.0 - np.tanh(x) ** 2,
}


@dataclass(frozen=True)
class Layer:
    """One dense layer y = act(W @ x + b)."""

    W: np.ndarray
    b: np.ndarray
    activation: str

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if W.ndim != 2 or b.ndim != 1 or W.shape[0] != b.shape[0]:
            raise DimensionError(f"weight shape {W.shape} does not match bias shape {b.shape}")
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ValueError("layer parameters must be finite")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @property
    def fan_in(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class Network:
    """A validated layer chain; the last layer must be affine."""

    layers: tuple[Layer, ...] = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.fan_in != prev.width:
                raise DimensionError(
                    f"layer fan-in {nxt.fan_in} does not match previous width {prev.width}"
                )
        if layers[-1].activation != "linear":
            raise ValueError("the output layer must have the linear activation")
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].width

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return tuple(layer.width for layer in self.layers[:-1])

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.input_dim, *(layer.width for layer in self.layers))


def forward(net: Network, x) -> np.ndarray:
    """Concrete forward pass; ``x`` is one column vector or an (n, m) batch."""
    x = np.asarray(x, dtype=float)
    for layer in net.layers:
        x = layer.W @ x
        x = x + (layer.b if x.ndim == 1 else layer.b[:, None])
        x = _ACT_FN[layer.activation](x)
    return x


# -- scalar sandwiches ---------------------------------------------------


def relu_triplet(l: float, u: float):
    """Affine sandwich of ReLU on [l, u] with the smallest band.

    The slope is the chord slope; the band half-height gamma equals half the
    vertical spread of the chord-parallel parallelogram, which for ReLU is
    attained at the kink.
    """
    alpha = (max(u, 0.0) - max(l, 0.0)) / (u - l)
    beta = 0.5 * (max(l, 0.0) - alpha * l)
    return alpha, beta, beta


def sshape_triplet(kind: str, l: float, u: float):
    """Affine sandwich for sigmoid or tanh on [l, u].

    Uses the smaller endpoint slope; since the derivative of either function
    peaks at 0 and decays in |x|, the interior slope never drops below that
    choice, making the offset residual monotone and the band exact at the
    endpoints.
    """
    fn = _ACT_FN[kind]
    deriv = _ACT_DERIV[kind]
    alpha = float(min(deriv(l), deriv(u)))
    fl, fu = float(fn(l)), float(fn(u))
    beta = 0.5 * (fu + fl - alpha * (u + l))
    gamma = 0.5 * (fu - fl - alpha * (u - l))
    return alpha, beta, gamma


def activation_triplet(kind: str, l: float, u: float):
    """Sound (alpha, beta, gamma) sandwich for one neuron on [l, u].

    Stable ReLU neurons get their exact affine form; ranges narrower than
    DEGENERATE_WIDTH collapse to a constant sandwich at the midpoint.
    """
    if u < l:
        raise ValueError(f"empty range [{l}, {u}]")
    if kind == "linear":
        return 1.0, 0.0, 0.0
    if kind == "relu":
        if l >= 0.0:
            return 1.0, 0.0, 0.0
        if u <= 0.0:
            return 0.0, 0.0, 0.0
    fn = _ACT_FN[kind]
    if u - l < DEGENERATE_WIDTH:
        fl, fu = float(fn(l)), float(fn(u))
        return 0.0, 0.5 * (fl + fu), 0.5 * abs(fu - fl)
    if kind == "relu":
        return relu_triplet(l, u)
    return sshape_triplet(kind, l, u)


def relu_quadratic(l: float, u: float):
    """Quadratic sandwich (a2, a1, beta, gamma) for ReLU on [l, u].

    Only defined for crossing ranges whose sides are within a factor of two
    of each other; returns None otherwise and the caller falls back to the
    affine sandwich.  When it applies, gamma is at most 3/8 of the affine
    sandwich's band.
    """
    if not (l < 0.0 < u):
        return None
    if -l <= u <= -2.0 * l:
        a2 = 1.0 / (2.0 * u)
        band = a2 * u * u / 8.0
        return a2, 1.0 - a2 * u, band, band
    if u < -l <= 2.0 * u:
        a2 = -1.0 / (2.0 * l)
        band = a2 * l * l / 8.0
        return a2, -a2 * l, band, band
    return None


# -- set-valued propagation ----------------------------------------------


def propagate_affine(X: SZonotope, net: Network, provider: SymbolProvider | None = None) -> SZonotope:
    """Enclose net(X) by a symbolic zonotope.

    The result keeps every input symbol's column (state dependencies pass
    through linearly) and appends one fresh symbol per hidden neuron.
    """
    if X.dim != net.input_dim:
        raise DimensionError(f"network expects dim {net.input_dim}, set has dim {X.dim}")
    cur = X
    for layer in net.layers[:-1]:
        pre = linear_image(layer.W, cur) + layer.b
        bounds = hull_array(pre)
        alpha = np.empty(layer.width)
        beta = np.empty(layer.width)
        gamma = np.empty(layer.width)
        for i in range(layer.width):
            alpha[i], beta[i], gamma[i] = activation_triplet(
                layer.activation, bounds[i, 0], bounds[i, 1]
            )
        errs = fresh_ids(layer.width, provider)
        cur = SZonotope(
            alpha * pre.c + beta,
            np.hstack([alpha[:, None] * pre.G, np.diag(gamma)]),
            np.concatenate([pre.ids, errs]),
        )
    out = net.layers[-1]
    return linear_image(out.W, cur) + out.b


def propagate_poly(
    P: spoly.SPolynotope,
    net: Network,
    order: int = 2,
    monomial_budget: int = 100,
    max_degree: int | None = 6,
    refine_depth: int = 2,
    provider: SymbolProvider | None = None,
) -> spoly.SPolynotope:
    """Enclose net(P) by a symbolic polynotope.

    Pre-activation ranges come from branch-and-bound refinement of each
    neuron's scalar polynotope.  With ``order`` 2, crossing ReLU neurons use
    the quadratic sandwich when its shape condition holds; everything else
    falls back to the affine sandwich, composed exactly in the ring.  After
    each hidden layer the monomial count is cut back to ``monomial_budget``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if P.dim != net.input_dim:
        raise DimensionError(f"network expects dim {net.input_dim}, set has dim {P.dim}")
    cur = P
    for layer in net.layers[:-1]:
        pre = spoly.linear_image(layer.W, cur) + layer.b
        outs = []
        for i in range(layer.width):
            row = pre.project(i)
            l, u = spoly.refine_bound(row, refine_depth)
            err_id = int(fresh_ids(1, provider)[0])
            quad = None
            if order == 2 and layer.activation == "relu":
                quad = relu_quadratic(l, u)
            if quad is not None:
                a2, a1, b0, gamma = quad
                sq = spoly.multiply(row, row)
                out = spoly.add(spoly.linear_image(a2, sq), spoly.linear_image(a1, row))
            else:
                a1, b0, gamma = activation_triplet(layer.activation, l, u)
                out = spoly.linear_image(a1, row)
            err = spoly.SPolynotope([b0], [[gamma]], [err_id], [[1]])
            outs.append(spoly.add(out, err))
        stacked = outs[0]
        for nxt in outs[1:]:
            stacked = spoly.vcat(stacked, nxt)
        cur = spoly.reduce_monomials(stacked, monomial_budget, max_degree, provider)
    out = net.layers[-1]
    return spoly.linear_image(out.W, cur) + out.b
