"""Symbolic polynotopes: polynomial images of shared unit-interval symbols.

An ``SPolynotope`` <c, G, ids, E> is the function s -> c + G @ m(s) where
each column k of the exponent matrix E defines one monomial
m_k(s) = prod_i s_{ids[i]}^{E[i, k]} over symbols valued in [-1, 1].  Ring
operations (sum, product, powers) are exact on the function level; only
range bounding and monomial-budget reduction introduce conservatism.

Stored instances are canonical: duplicate monomial columns are summed,
constant columns are folded into the center, zero-coefficient columns and
unused symbol rows are removed, and columns are ordered by exponent
signature.  Canonicalization is idempotent, so structural equality of
canonical parts is meaningful.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .errors import DimensionError
from .symbols import SymbolProvider, align, as_id_vector, fresh_ids
from .szono import Interval, SZonotope


class SPolynotope:
    """Polynomial set <c, G, ids, E> over unit-interval symbols.

    Attributes:
        c: center, shape (n,).
        G: coefficient matrix, shape (n, p); column k scales monomial k.
        ids: symbol ids, shape (q,), pairwise distinct.
        E: exponent matrix, shape (q, p), non-negative integers; E[i, k] is
           the power of symbol ids[i] inside monomial k.
    """

    __slots__ = ("c", "G", "ids", "E")
    __array_priority__ = 1000

    def __init__(self, c, G=None, ids=None, E=None):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if c.ndim != 1:
            raise DimensionError("center must be a vector")
        if G is None:
            G = np.zeros((c.size, 0))
        G = np.asarray(G, dtype=float)
        if G.ndim == 1:
            if c.size != 1:
                raise DimensionError("1-D coefficient data only valid for scalar sets")
            G = G.reshape(1, -1)
        if G.ndim != 2 or G.shape[0] != c.size:
            raise DimensionError(f"coefficient shape {G.shape} does not match center size {c.size}")
        ids = as_id_vector([] if ids is None else ids)
        if E is None:
            E = np.zeros((ids.size, G.shape[1]), dtype=np.int64)
        E = np.asarray(E, dtype=np.int64)
        if E.ndim != 2 or E.shape != (ids.size, G.shape[1]):
            raise DimensionError(f"exponent shape {E.shape}, expected {(ids.size, G.shape[1])}")
        if E.size and E.min() < 0:
            raise ValueError("exponents must be non-negative")
        if not (np.isfinite(c).all() and np.isfinite(G).all()):
            raise ValueError("set data must be finite")

        self.c, self.G, self.ids, self.E = _canonicalize(c, G, ids, E)

    # -- shape ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.c.size

    @property
    def n_monomials(self) -> int:
        return self.G.shape[1]

    @property
    def degree(self) -> int:
        """Largest total degree over all monomials (0 for a point)."""
        return int(self.E.sum(axis=0).max()) if self.n_monomials else 0

    def coefficient(self, powers: dict) -> np.ndarray:
        """Coefficient column of the monomial given as {id: exponent}.

        The empty monomial ({}) means the constant term, which canonical
        form keeps in the center.
        """
        want = np.zeros(self.ids.size, dtype=np.int64)
        lookup = {int(s): k for k, s in enumerate(self.ids.tolist())}
        for sid, e in powers.items():
            if int(e) == 0:
                continue
            if int(sid) not in lookup:
                return np.zeros(self.dim)
            want[lookup[int(sid)]] = int(e)
        if not want.any():
            return self.c.copy()
        hit = np.nonzero((self.E == want[:, None]).all(axis=0))[0]
        if hit.size == 0:
            return np.zeros(self.dim)
        return self.G[:, hit[0]].copy()

    def project(self, dim: int) -> "SPolynotope":
        if not 0 <= dim < self.dim:
            raise DimensionError(f"coordinate {dim} out of range for dim {self.dim}")
        return SPolynotope(self.c[dim : dim + 1], self.G[dim : dim + 1, :], self.ids, self.E)

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, SPolynotope):
            return add(self, other)
        return SPolynotope(self.c + np.asarray(other, dtype=float), self.G, self.ids, self.E)

    __radd__ = __add__

    def __neg__(self):
        return SPolynotope(-self.c, -self.G, self.ids, self.E)

    def __sub__(self, other):
        if isinstance(other, SPolynotope):
            return add(self, -other)
        return SPolynotope(self.c - np.asarray(other, dtype=float), self.G, self.ids, self.E)

    def __mul__(self, other):
        if isinstance(other, SPolynotope):
            return multiply(self, other)
        return linear_image(float(other), self)

    def __rmul__(self, other):
        return linear_image(float(other), self)

    def __pow__(self, m: int):
        return power(self, m)

    def __repr__(self) -> str:
        return f"SPolynotope(dim={self.dim}, symbols={self.ids.size}, monomials={self.n_monomials})"


def _canonicalize(c, G, ids, E):
    """Normal form shared by the constructor; idempotent by design."""
    # merge duplicate symbol rows (their exponents add per monomial)
    if ids.size and np.unique(ids).size != ids.size:
        slot: dict[int, int] = {}
        keep_rows: list[int] = []
        E = E.copy()
        for k, sid in enumerate(ids.tolist()):
            if sid in slot:
                E[slot[sid]] += E[k]
            else:
                slot[sid] = len(keep_rows)
                keep_rows.append(k)
        E = E[keep_rows]
        ids = ids[keep_rows]

    # fold constant monomials (all-zero exponent columns) into the center
    if G.shape[1]:
        const = (E == 0).all(axis=0)
        if const.any():
            c = c + G[:, const].sum(axis=1)
            G = G[:, ~const]
            E = E[:, ~const]

    # merge duplicate monomials; this also orders columns by signature
    if G.shape[1]:
        E, inv = np.unique(E, axis=1, return_inverse=True)
        merged = np.zeros((G.shape[0], E.shape[1]))
        np.add.at(merged, (slice(None), inv), G)
        G = merged

    # cancellation may leave zero-coefficient monomials; remove them
    if G.shape[1]:
        nonzero = np.abs(G).sum(axis=0) > 0.0
        if not nonzero.all():
            G = G[:, nonzero]
            E = E[:, nonzero]

    # remove symbols no monomial uses
    if ids.size:
        used = E.sum(axis=1) > 0
        if not used.all():
            ids = ids[used]
            E = E[used]

    return c, G, ids, E


def symbol(sid: int) -> SPolynotope:
    """The scalar set equal to one bare symbol, handy for building tests."""
    return SPolynotope([0.0], [[1.0]], [sid], [[1]])


# -- conversions ----------------------------------------------------------


def from_szonotope(X: SZonotope) -> SPolynotope:
    """Degree-1 polynotope with the same function as ``X``."""
    return SPolynotope(X.c, X.G, X.ids, np.eye(X.order, dtype=np.int64))


def to_szonotope(P: SPolynotope) -> SZonotope:
    """Inverse of :func:`from_szonotope`; requires every monomial degree 1."""
    deg = P.E.sum(axis=0)
    if P.n_monomials and ((deg != 1).any() or (P.E > 1).any()):
        raise ValueError("polynotope has monomials of degree != 1")
    # each column selects exactly one symbol row
    rows = P.E.argmax(axis=0)
    return SZonotope(P.c, P.G, P.ids[rows])


# -- exact ring operations -------------------------------------------------


def _scatter_rows(E: np.ndarray, pos: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros((q, E.shape[1]), dtype=np.int64)
    out[pos] = E
    return out


def add(P: SPolynotope, Q: SPolynotope) -> SPolynotope:
    """Exact sum; shared monomials merge, opposite coefficients cancel."""
    if P.dim != Q.dim:
        raise DimensionError(f"dims {P.dim} and {Q.dim} differ")
    merged, pos_p, pos_q = align(P.ids, Q.ids)
    Ep = _scatter_rows(P.E, pos_p, merged.size)
    Eq = _scatter_rows(Q.E, pos_q, merged.size)
    return SPolynotope(
        P.c + Q.c,
        np.hstack([P.G, Q.G]),
        merged,
        np.hstack([Ep, Eq]),
    )


def linear_image(M, P: SPolynotope) -> SPolynotope:
    """Image under a linear map (matrix or scalar); exact."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        return SPolynotope(M * P.c, M * P.G, P.ids, P.E)
    M = np.atleast_2d(M)
    if M.shape[1] != P.dim:
        raise DimensionError(f"map expects dim {M.shape[1]}, set has dim {P.dim}")
    return SPolynotope(M @ P.c, M @ P.G, P.ids, P.E)


def vcat(P: SPolynotope, Q: SPolynotope) -> SPolynotope:
    """Stack two sets; shared monomials end up in one column."""
    merged, pos_p, pos_q = align(P.ids, Q.ids)
    Ep = _scatter_rows(P.E, pos_p, merged.size)
    Eq = _scatter_rows(Q.E, pos_q, merged.size)
    G = np.zeros((P.dim + Q.dim, P.n_monomials + Q.n_monomials))
    G[: P.dim, : P.n_monomials] = P.G
    G[P.dim :, P.n_monomials :] = Q.G
    return SPolynotope(np.concatenate([P.c, Q.c]), G, merged, np.hstack([Ep, Eq]))


def multiply(P: SPolynotope, Q: SPolynotope) -> SPolynotope:
    """Exact product of two scalar sets in the polynomial ring."""
    if P.dim != 1 or Q.dim != 1:
        raise DimensionError("multiply is defined for scalar sets")
    merged, pos_p, pos_q = align(P.ids, Q.ids)
    Ep = _scatter_rows(P.E, pos_p, merged.size)
    Eq = _scatter_rows(Q.E, pos_q, merged.size)
    rp = P.G[0]
    rq = Q.G[0]
    cp = float(P.c[0])
    cq = float(Q.c[0])

    pairs = np.repeat(Ep, Eq.shape[1], axis=1) + np.tile(Eq, (1, Ep.shape[1]))
    G = np.concatenate([cp * rq, cq * rp, np.outer(rp, rq).ravel()])
    E = np.hstack([Eq, Ep, pairs])
    return SPolynotope([cp * cq], G.reshape(1, -1), merged, E)


def power(P: SPolynotope, m: int) -> SPolynotope:
    """Exact integer power of a scalar set via repeated multiplication."""
    if m < 0 or int(m) != m:
        raise ValueError("exponent must be a non-negative integer")
    out = SPolynotope([1.0])
    for _ in range(int(m)):
        out = multiply(out, P)
    return out


# -- range bounding ---------------------------------------------------------


def _monomial_ranges(E: np.ndarray) -> np.ndarray:
    """Per-column value range of the bare monomial over [-1, 1] symbols.

    A monomial with any odd exponent spans [-1, 1]; one whose exponents are
    all even (and not all zero, excluded by canonical form) spans [0, 1].
    """
    odd = (E % 2 == 1).any(axis=0)
    lo = np.where(odd, -1.0, 0.0)
    hi = np.ones(E.shape[1])
    return np.column_stack([lo, hi])


def hull_array(P: SPolynotope) -> np.ndarray:
    """Interval bounds per dimension from the natural extension, (n, 2)."""
    if P.n_monomials == 0:
        return np.column_stack([P.c, P.c])
    rng = _monomial_ranges(P.E)
    term_lo = np.minimum(P.G * rng[:, 0], P.G * rng[:, 1])
    term_hi = np.maximum(P.G * rng[:, 0], P.G * rng[:, 1])
    return np.column_stack([P.c + term_lo.sum(axis=1), P.c + term_hi.sum(axis=1)])


def interval_hull(P: SPolynotope) -> list[Interval]:
    return [Interval(float(lo), float(hi)) for lo, hi in hull_array(P)]


def interval_bound(P: SPolynotope) -> Interval:
    """Natural-extension range bound of a scalar set."""
    if P.dim != 1:
        raise DimensionError("interval_bound needs a scalar set")
    lo, hi = hull_array(P)[0]
    return Interval(float(lo), float(hi))


def substitute_affine(P: SPolynotope, sid: int, offset: float, scale: float) -> SPolynotope:
    """Replace symbol ``sid`` by offset + scale * s (same id); exact.

    With offset ±0.5 and scale 0.5 this restricts the symbol to one half of
    its domain, the workhorse of branch-and-bound range refinement and of
    input-set bisection.
    """
    hit = np.nonzero(P.ids == sid)[0]
    if hit.size == 0:
        return P
    row = int(hit[0])
    cols_G: list[np.ndarray] = []
    cols_E: list[np.ndarray] = []
    for k in range(P.n_monomials):
        e = int(P.E[row, k])
        if e == 0:
            cols_G.append(P.G[:, k])
            cols_E.append(P.E[:, k])
            continue
        # (offset + scale*s)^e expanded binomially
        for j in range(e + 1):
            coeff = comb(e, j) * offset ** (e - j) * scale**j
            col = P.E[:, k].copy()
            col[row] = j
            cols_G.append(coeff * P.G[:, k])
            cols_E.append(col)
    G = np.column_stack(cols_G) if cols_G else np.zeros((P.dim, 0))
    E = np.column_stack(cols_E) if cols_E else np.zeros((P.ids.size, 0), dtype=np.int64)
    return SPolynotope(P.c, G, P.ids, E)


def _branch_row(P: SPolynotope) -> int:
    """Row of the symbol with the largest absolute coefficient mass."""
    occurs = P.E > 0
    mass = occurs @ np.abs(P.G[0])
    return int(np.argmax(mass))


def refine_bound(P: SPolynotope, depth: int) -> Interval:
    """Branch-and-bound range of a scalar set, bisecting symbol domains.

    ``depth`` 0 is the natural extension; each extra level splits the most
    influential symbol of the current node in half and intersects the
    parent's bound with the union of the children's, so bounds are nested:
    deeper never loosens.
    """
    if P.dim != 1:
        raise DimensionError("refine_bound needs a scalar set")
    base = interval_bound(P)
    if depth <= 0 or P.ids.size == 0:
        return base
    sid = int(P.ids[_branch_row(P)])
    left = refine_bound(substitute_affine(P, sid, +0.5, 0.5), depth - 1)
    right = refine_bound(substitute_affine(P, sid, -0.5, 0.5), depth - 1)
    return Interval(
        max(base.lo, min(left.lo, right.lo)),
        min(base.hi, max(left.hi, right.hi)),
    )


# -- conservative reduction ---------------------------------------------------


def reduce_monomials(
    P: SPolynotope,
    budget: int,
    max_degree: int | None = None,
    provider: SymbolProvider | None = None,
) -> SPolynotope:
    """Keep at most ``budget`` monomials (all of degree <= ``max_degree``).

    Monomials are ranked by coefficient-column norm; dropped ones are
    absorbed through their natural range into a center shift plus one fresh
    independent symbol per dimension.  Inclusion-preserving, never exact
    unless nothing is dropped.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    deg = P.E.sum(axis=0)
    eligible = np.ones(P.n_monomials, dtype=bool) if max_degree is None else deg <= max_degree
    keep = np.zeros(P.n_monomials, dtype=bool)
    idx = np.nonzero(eligible)[0]
    if idx.size > budget:
        norms = np.linalg.norm(P.G[:, idx], axis=0)
        ranked = idx[np.argsort(-norms, kind="stable")]
        keep[ranked[:budget]] = True
    else:
        keep[idx] = True
    if keep.all():
        return P

    drop = ~keep
    rng = _monomial_ranges(P.E[:, drop])
    lo = np.minimum(P.G[:, drop] * rng[:, 0], P.G[:, drop] * rng[:, 1])
    hi = np.maximum(P.G[:, drop] * rng[:, 0], P.G[:, drop] * rng[:, 1])
    mid = 0.5 * (lo + hi).sum(axis=1)
    rad = 0.5 * (hi - lo).sum(axis=1)

    fresh = fresh_ids(P.dim, provider)
    G = np.hstack([P.G[:, keep], np.diag(rad)])
    E = np.zeros((P.ids.size + P.dim, G.shape[1]), dtype=np.int64)
    E[: P.ids.size, : int(keep.sum())] = P.E[:, keep]
    E[P.ids.size :, int(keep.sum()) :] = np.eye(P.dim, dtype=np.int64)
    return SPolynotope(P.c + mid, G, np.concatenate([P.ids, fresh]), E)


def evaluate(P: SPolynotope, sigma) -> np.ndarray:
    """Concrete point(s) for symbol values aligned with ``P.ids``.

    ``sigma``: vector (one valuation), (q, m) matrix of m valuations, or a
    dict id -> value.  Testing hook for exactness and soundness oracles.
    """
    if isinstance(sigma, dict):
        sigma = np.array([sigma.get(int(s), 0.0) for s in P.ids], dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape[0] != P.ids.size:
        raise DimensionError(f"{P.ids.size} symbols but {sigma.shape[0]} values")
    if sigma.ndim == 1:
        mono = np.prod(sigma[:, None] ** P.E, axis=0)
        return P.c + P.G @ mono
    mono = np.prod(sigma[:, None, :] ** P.E[:, :, None], axis=0)
    return P.c[:, None] + P.G @ mono
