"""Symbolic zonotopes: affine images of shared unit-interval symbols.

An ``SZonotope`` <c, G, ids> is the function s -> c + G @ s over the symbols
named by ``ids``, each valued in [-1, 1].  Evaluated set-wise it is an
ordinary zonotope, but because operands keep their symbol identities, sums
and differences cancel shared dependencies exactly instead of accumulating
conservatism.  All operations return new objects; instances are treated as
immutable values.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, ReductionError
from .symbols import SymbolProvider, align, as_id_vector, fresh_ids


class Interval(NamedTuple):
    """Closed interval [lo, hi] on the real line."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


class Polyhedron:
    """H-representation {x : H @ x <= r}."""

    __slots__ = ("H", "r")

    def __init__(self, H, r):
        H = np.atleast_2d(np.asarray(H, dtype=float))
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if H.shape[0] != r.shape[0]:
            raise DimensionError(f"{H.shape[0]} rows but {r.shape[0]} offsets")
        if not (np.isfinite(H).all() and np.isfinite(r).all()):
            raise ValueError("polyhedron data must be finite")
        self.H = H
        self.r = r

    @classmethod
    def from_box(cls, bounds) -> "Polyhedron":
        """Axis-aligned box [[lo, hi], ...] as 2n half-spaces."""
        b = np.atleast_2d(np.asarray(bounds, dtype=float))
        if b.shape[1] != 2 or (b[:, 0] > b[:, 1]).any():
            raise ValueError("box bounds must be [lo, hi] rows")
        n = b.shape[0]
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.concatenate([b[:, 1], -b[:, 0]]))

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    def __repr__(self) -> str:
        return f"Polyhedron({self.H.shape[0]} half-spaces, dim={self.dim})"


class SZonotope:
    """Symbolic zonotope <c, G, ids> over unit-interval symbols.

    Attributes:
        c: center, shape (n,).
        G: generator matrix, shape (n, p); column k multiplies symbol ids[k].
        ids: symbol ids, shape (p,), pairwise distinct.

    Duplicate ids passed to the constructor are merged by summing their
    columns (first occurrence kept), so stored instances are canonical.
    Zero columns are legal and preserved by all operations except order
    reduction; they record that a set once depended on a symbol.
    """

    __slots__ = ("c", "G", "ids")
    __array_priority__ = 1000  # keep numpy from hijacking M @ X and a * X

    def __init__(self, c, G=None, ids=None):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if c.ndim != 1:
            raise DimensionError("center must be a vector")
        if G is None:
            G = np.zeros((c.size, 0))
        G = np.asarray(G, dtype=float)
        if G.ndim == 1:
            if c.size != 1:
                raise DimensionError("1-D generator data only valid for scalar sets")
            G = G.reshape(1, -1)
        if G.ndim != 2 or G.shape[0] != c.size:
            raise DimensionError(f"generator shape {G.shape} does not match center size {c.size}")
        ids = as_id_vector([] if ids is None else ids)
        if ids.size != G.shape[1]:
            raise DimensionError(f"{G.shape[1]} generator columns but {ids.size} ids")
        if not (np.isfinite(c).all() and np.isfinite(G).all()):
            raise ValueError("set data must be finite")

        if ids.size and np.unique(ids).size != ids.size:
            c, G, ids = _merge_duplicate_ids(c, G, ids)

        self.c = c
        self.G = G
        self.ids = ids

    # -- basic shape ----------------------------------------------------

    @property
    def dim(self) -> int:
        return self.c.size

    @property
    def order(self) -> int:
        """Number of symbols this set mentions."""
        return self.ids.size

    def column(self, sid: int) -> np.ndarray:
        """Generator column of symbol ``sid`` (zeros if absent)."""
        hit = np.nonzero(self.ids == sid)[0]
        if hit.size == 0:
            return np.zeros(self.dim)
        return self.G[:, hit[0]].copy()

    def project(self, dim: int) -> "SZonotope":
        """Scalar set for one coordinate, keeping all symbol ids."""
        if not 0 <= dim < self.dim:
            raise DimensionError(f"coordinate {dim} out of range for dim {self.dim}")
        return SZonotope(self.c[dim : dim + 1], self.G[dim : dim + 1, :], self.ids)

    def radius(self) -> np.ndarray:
        """Per-dimension half-width of the interval hull."""
        return np.abs(self.G).sum(axis=1)

    # -- operators ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, SZonotope):
            return add(self, other)
        return SZonotope(self.c + np.asarray(other, dtype=float), self.G, self.ids)

    __radd__ = __add__

    def __neg__(self):
        return SZonotope(-self.c, -self.G, self.ids)

    def __sub__(self, other):
        if isinstance(other, SZonotope):
            return add(self, -other)
        return SZonotope(self.c - np.asarray(other, dtype=float), self.G, self.ids)

    def __mul__(self, scalar):
        return linear_image(float(scalar), self)

    __rmul__ = __mul__

    def __rmatmul__(self, M):
        return linear_image(M, self)

    def __repr__(self) -> str:
        return f"SZonotope(dim={self.dim}, order={self.order})"


def _merge_duplicate_ids(c, G, ids):
    """Sum columns sharing an id; first appearance keeps the slot."""
    slot: dict[int, int] = {}
    keep: list[int] = []
    G = G.copy()
    for k, sid in enumerate(ids.tolist()):
        if sid in slot:
            G[:, slot[sid]] += G[:, k]
        else:
            slot[sid] = len(keep)
            keep.append(k)
    return c, G[:, keep], ids[keep]


# -- affine algebra -----------------------------------------------------


def linear_image(M, X: SZonotope) -> SZonotope:
    """Image of ``X`` under the linear map ``M`` (matrix or scalar)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        return SZonotope(M * X.c, M * X.G, X.ids)
    M = np.atleast_2d(M)
    if M.shape[1] != X.dim:
        raise DimensionError(f"map expects dim {M.shape[1]}, set has dim {X.dim}")
    return SZonotope(M @ X.c, M @ X.G, X.ids)


def add(X: SZonotope, Y: SZonotope) -> SZonotope:
    """Sum of two sets; generator columns of shared symbols add exactly."""
    if X.dim != Y.dim:
        raise DimensionError(f"dims {X.dim} and {Y.dim} differ")
    merged, pos_x, pos_y = align(X.ids, Y.ids)
    G = np.zeros((X.dim, merged.size))
    G[:, pos_x] += X.G
    G[:, pos_y] += Y.G
    return SZonotope(X.c + Y.c, G, merged)


def vcat(X: SZonotope, Y: SZonotope) -> SZonotope:
    """Stack two sets into one of dimension dim(X) + dim(Y).

    Shared symbols end up in a single column spanning both row blocks, so
    cross-set dependencies survive the concatenation.
    """
    merged, pos_x, pos_y = align(X.ids, Y.ids)
    G = np.zeros((X.dim + Y.dim, merged.size))
    G[: X.dim, pos_x] = X.G
    G[X.dim :, pos_y] = Y.G
    return SZonotope(np.concatenate([X.c, Y.c]), G, merged)


def bounds_1d(X: SZonotope) -> Interval:
    """Exact interval hull of a scalar set."""
    if X.dim != 1:
        raise DimensionError("bounds_1d needs a scalar set")
    rad = float(np.abs(X.G).sum())
    return Interval(float(X.c[0]) - rad, float(X.c[0]) + rad)


def interval_hull(X: SZonotope) -> list[Interval]:
    """Tight per-dimension interval bounds."""
    rad = X.radius()
    return [Interval(float(lo), float(hi)) for lo, hi in zip(X.c - rad, X.c + rad)]


def hull_array(X: SZonotope) -> np.ndarray:
    """Interval hull as an (n, 2) array of [lo, hi] rows."""
    rad = X.radius()
    return np.column_stack([X.c - rad, X.c + rad])


def multiply(X: SZonotope, Y: SZonotope, provider: SymbolProvider | None = None) -> SZonotope:
    """Product of two scalar sets, enclosed with one fresh symbol.

    The affine part in the shared symbols is kept exactly; all second-order
    content is split into a center shift plus a single fresh symbol whose
    coefficient bounds the quadratic remainder.  The fresh column is always
    appended, even when the remainder is zero, so symbol bookkeeping does
    not depend on operand values.
    """
    if X.dim != 1 or Y.dim != 1:
        raise DimensionError("multiply is defined for scalar sets")
    merged, pos_x, pos_y = align(X.ids, Y.ids)
    r = np.zeros(merged.size)
    g = np.zeros(merged.size)
    r[pos_x] = X.G[0]
    g[pos_y] = Y.G[0]
    cx = float(X.c[0])
    cy = float(Y.c[0])

    diag = r * g
    center = cx * cy + 0.5 * diag.sum()
    lin = cx * g + cy * r
    # remainder bound: |sum_i r_i g_i (s_i^2 - 1/2) + sum_{i<l} (r_i g_l + r_l g_i) s_i s_l|
    cross = np.outer(r, g)
    cross = cross + cross.T
    rem = 0.5 * np.abs(diag).sum() + np.abs(np.triu(cross, k=1)).sum()

    new_id = fresh_ids(1, provider)
    return SZonotope(
        np.array([center]),
        np.concatenate([lin, [rem]]).reshape(1, -1),
        np.concatenate([merged, new_id]),
    )


def reduce(
    X: SZonotope,
    q: int,
    protected=None,
    provider: SymbolProvider | None = None,
) -> SZonotope:
    """Enclose ``X`` by a set mentioning at most ``q`` symbols.

    Columns are ranked by Euclidean norm; the weakest non-protected ones are
    replaced by an axis-aligned box on ``dim`` fresh symbols whose radii are
    the absolute row sums of the dropped block.  All-zero columns are
    discarded exactly first.  Ids in ``protected`` are never eliminated.
    Equal-norm ties drop the smaller id, so results are reproducible.
    """
    if q < 0:
        raise ValueError("symbol budget must be non-negative")
    if X.order <= q:
        return X
    protected_set = set() if protected is None else {int(s) for s in protected}

    is_protected = np.fromiter(
        (sid in protected_set for sid in X.ids.tolist()), dtype=bool, count=X.order
    )
    nonzero = np.abs(X.G).sum(axis=0) > 0.0
    keep_mask = is_protected | nonzero
    if keep_mask.sum() <= q:
        return SZonotope(X.c, X.G[:, keep_mask], X.ids[keep_mask])

    n = X.dim
    slots = q - n  # symbols that survive next to the fresh box block
    n_protected = int(is_protected.sum())
    if slots < n_protected:
        raise ReductionError(
            f"budget {q} cannot hold {n_protected} protected symbols plus a {n}-symbol box"
        )

    cand = np.nonzero(keep_mask & ~is_protected)[0]
    norms = np.linalg.norm(X.G[:, cand], axis=0)
    # ascending (norm, id): weakest first, smaller id first on ties
    order = np.lexsort((X.ids[cand], norms))
    n_keep_cand = slots - n_protected
    dropped = cand[order[: cand.size - n_keep_cand]] if n_keep_cand < cand.size else np.array([], dtype=int)

    drop_mask = np.zeros(X.order, dtype=bool)
    drop_mask[dropped] = True
    drop_mask[~keep_mask] = True  # zero columns go silently
    kept = ~drop_mask

    box = np.abs(X.G[:, drop_mask & keep_mask]).sum(axis=1)
    fresh = fresh_ids(n, provider)
    G = np.hstack([X.G[:, kept], np.diag(box)])
    return SZonotope(X.c, G, np.concatenate([X.ids[kept], fresh]))


# -- supports and checks ------------------------------------------------


def support(h, X: SZonotope) -> float:
    """Exact support value max{h.x : x in X}."""
    h = np.asarray(h, dtype=float).ravel()
    if h.size != X.dim:
        raise DimensionError(f"direction size {h.size}, set dim {X.dim}")
    return float(h @ X.c + np.abs(h @ X.G).sum())


def disjoint_from(X: SZonotope, A: Polyhedron) -> bool:
    """Certify X ∩ A = ∅ (one-sided: False means "cannot certify").

    True when some half-space of ``A`` is strictly cleared by the whole set,
    i.e. the set's infimum along that row exceeds the row offset.
    """
    if A.dim != X.dim:
        raise DimensionError(f"polyhedron dim {A.dim}, set dim {X.dim}")
    infs = A.H @ X.c - np.abs(A.H @ X.G).sum(axis=1)
    return bool((infs > A.r).any())


def contained_in(X: SZonotope, P: Polyhedron) -> bool:
    """Exact test X ⊆ P via support values of every half-space."""
    if P.dim != X.dim:
        raise DimensionError(f"polyhedron dim {P.dim}, set dim {X.dim}")
    sups = P.H @ X.c + np.abs(P.H @ X.G).sum(axis=1)
    return bool((sups <= P.r).all())


# -- splitting ----------------------------------------------------------


def bisect_symbol(X: SZonotope, sid: int, provider: SymbolProvider | None = None):
    """Split the domain of one symbol in half.

    Rewrites ``sid`` as 0.5 + 0.5*s_new in the left child and -0.5 + 0.5*s_new
    in the right child; the union of the children's ranges is exactly the
    parent's.  Each child replaces ``sid`` by its own fresh id.
    """
    hit = np.nonzero(X.ids == sid)[0]
    if hit.size == 0:
        raise KeyError(f"symbol id {sid} not present in this set")
    k = int(hit[0])
    col = X.G[:, k]
    children = []
    for sign in (+1.0, -1.0):
        G = X.G.copy()
        G[:, k] = 0.5 * col
        ids = X.ids.copy()
        ids[k] = int(fresh_ids(1, provider)[0])
        children.append(SZonotope(X.c + sign * 0.5 * col, G, ids))
    return children[0], children[1]


def f_radius(M) -> float:
    """Frobenius norm, the accuracy measure used for error blocks."""
    return float(np.linalg.norm(np.asarray(M, dtype=float)))


def evaluate(X: SZonotope, sigma) -> np.ndarray:
    """Concrete point(s) for symbol values aligned with ``X.ids``.

    ``sigma`` may be a vector (one valuation) or an (order, m) matrix of m
    valuations; a dict id -> value is also accepted.  Mainly for testing
    soundness against sampled realizations.
    """
    if isinstance(sigma, dict):
        sigma = np.array([sigma.get(int(s), 0.0) for s in X.ids], dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape[0] != X.order:
        raise DimensionError(f"{X.order} symbols but {sigma.shape[0]} values")
    if sigma.ndim == 1:
        return X.c + X.G @ sigma
    return X.c[:, None] + X.G @ sigma
