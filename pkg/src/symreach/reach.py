"""Finite-horizon reach-avoid verification of neural-network control loops.

One verification step abstracts the controller over the current state set,
evaluates the successor-map expressions on symbolic operands (sharing one
fresh disturbance set per step), and cuts the symbol count back to the
budget.  Because the controller's output keeps the state symbols, feeding
it back through the plant cancels dependencies exactly where the dynamics
subtract them; recomputing the controller every ``hold`` steps models
sampled control with a longer actuation period than the discretization.

All answers are one-sided: "verified" is a proof, "violated" only means the
enclosure could not certify the property at that instant.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import spoly as sp
from . import szono as sz
from .errors import ConfigError, SymreachError
from .nn import Network, propagate_affine, propagate_poly
from .plant import (
    DisturbanceSpec,
    Expr,
    disturbance_szonotope,
    eval_spoly,
    eval_szono,
    parse_expression,
)
from .symbols import SymbolProvider


@dataclass
class RAProblem:
    """A reach-avoid verification instance.

    Attributes:
        x0: initial state set.
        network: state-feedback controller u = g(x).
        dynamics: one successor expression per state dimension; strings are
            parsed with the problem's dimensions.
        horizon: number of steps N; instants run 0..N.
        disturbance: per-step noise box, or None.
        goal: polyhedron the final set must lie in, or None.
        avoid: polyhedron(s) the set must provably miss at instants
            0..N-1: a single polyhedron applies at every instant, a
            sequence gives one entry (or None) per instant.
        symbol_budget: symbol cap q enforced after every step.
        hold: controller refresh period in steps (1 = every step).
        engine: "affine" (symbolic zonotopes) or "poly" (polynotopes).
    """

    x0: sz.SZonotope
    network: Network
    dynamics: Sequence[Union[Expr, str]]
    horizon: int
    disturbance: Optional[DisturbanceSpec] = None
    goal: Optional[sz.Polyhedron] = None
    avoid: Union[sz.Polyhedron, Sequence[Optional[sz.Polyhedron]], None] = None
    symbol_budget: int = 200
    hold: int = 1
    engine: str = "affine"
    poly_order: int = 2
    monomial_budget: int = 100
    max_degree: Optional[int] = 6
    refine_depth: int = 2

    def __post_init__(self):
        n = self.x0.dim
        if self.network.input_dim != n:
            raise ConfigError(f"controller expects dim {self.network.input_dim}, state has dim {n}")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.hold < 1:
            raise ConfigError("hold period must be at least 1")
        if self.engine not in ("affine", "poly"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        n_u = self.network.output_dim
        n_w = self.disturbance.dim if self.disturbance is not None else 0
        exprs = []
        for k, e in enumerate(self.dynamics):
            if isinstance(e, str):
                e = parse_expression(e, n, n_u, n_w)
            if not isinstance(e, Expr):
                raise ConfigError(f"dynamics component {k} is not an expression")
            exprs.append(e)
        if len(exprs) != n:
            raise ConfigError(f"{len(exprs)} dynamics components for a dim-{n} state")
        self.dynamics = tuple(exprs)

        if self.avoid is None or isinstance(self.avoid, sz.Polyhedron):
            self.avoid = (self.avoid,) * self.horizon
        else:
            self.avoid = tuple(self.avoid)
            if len(self.avoid) != self.horizon:
                raise ConfigError(
                    f"avoid sequence has {len(self.avoid)} entries for horizon {self.horizon}"
                )

    @property
    def dim(self) -> int:
        return self.x0.dim


@dataclass
class ReachResult:
    """Outcome of a verification run.

    ``t_err`` is None when every requested check passed; otherwise it is the
    violating instant: the first one for :func:`verify` (which stops there),
    the last one for :func:`verify_last_error` (which never stops early).
    """

    verified: bool
    t_err: Optional[int]
    sets: list = field(repr=False)
    hulls: np.ndarray = field(repr=False)
    symbol_counts: list[int] = field(default_factory=list)

    @property
    def witness(self):
        """The set at the violating instant (final set when verified)."""
        if self.t_err is not None and self.t_err < len(self.sets):
            return self.sets[self.t_err]
        return self.sets[-1]


def _hull(X) -> np.ndarray:
    return sz.hull_array(X) if isinstance(X, sz.SZonotope) else sp.hull_array(X)


def _order(X) -> int:
    return X.order if isinstance(X, sz.SZonotope) else int(X.ids.size)


def _poly_row_bound(A: sz.Polyhedron, P: sp.SPolynotope) -> np.ndarray:
    rows = [sp.interval_bound(sp.linear_image(h.reshape(1, -1), P)) for h in A.H]
    return np.array([[iv.lo, iv.hi] for iv in rows])


def _certainly_misses(X, A: sz.Polyhedron) -> bool:
    if isinstance(X, sz.SZonotope):
        return sz.disjoint_from(X, A)
    bounds = _poly_row_bound(A, X)
    return bool((bounds[:, 0] > A.r).any())


def _certainly_inside(X, P: sz.Polyhedron) -> bool:
    if isinstance(X, sz.SZonotope):
        return sz.contained_in(X, P)
    bounds = _poly_row_bound(P, X)
    return bool((bounds[:, 1] <= P.r).all())


class _Engine:
    """Per-run state: problem, provider, and the engine dispatch."""

    def __init__(self, problem: RAProblem, provider: SymbolProvider | None, protect_ids=None):
        self.p = problem
        self.provider = provider
        self.protect = set() if protect_ids is None else {int(s) for s in protect_ids}

    def initial(self):
        if self.p.engine == "affine":
            return self.p.x0
        return sp.from_szonotope(self.p.x0)

    def controller(self, X):
        if self.p.engine == "affine":
            return propagate_affine(X, self.p.network, self.provider)
        return propagate_poly(
            X,
            self.p.network,
            order=self.p.poly_order,
            monomial_budget=self.p.monomial_budget,
            max_degree=self.p.max_degree,
            refine_depth=self.p.refine_depth,
            provider=self.provider,
        )

    def plant_step(self, X, U):
        p = self.p
        noise_ids: set[int] = set()
        W = None
        if p.disturbance is not None and p.disturbance.dim:
            Wz = disturbance_szonotope(p.disturbance, self.provider)
            noise_ids = set(Wz.ids.tolist())
            W = Wz if p.engine == "affine" else sp.from_szonotope(Wz)
        if p.engine == "affine":
            rows = [eval_szono(e, X, U, W, self.provider) for e in p.dynamics]
            nxt = rows[0]
            for r in rows[1:]:
                nxt = sz.vcat(nxt, r)
            return sz.reduce(nxt, p.symbol_budget, self.protect | noise_ids, self.provider)
        rows = [eval_spoly(e, X, U, W, p.refine_depth, self.provider) for e in p.dynamics]
        nxt = rows[0]
        for r in rows[1:]:
            nxt = sp.vcat(nxt, r)
        return sp.reduce_monomials(nxt, p.monomial_budget, p.max_degree, self.provider)


def verify(
    problem: RAProblem,
    provider: SymbolProvider | None = None,
    protect_ids=None,
) -> ReachResult:
    """Run the reach-avoid check, stopping at the first uncertifiable instant.

    Returns a verified result only when every avoid instant is provably
    missed and (when a goal is given) the final set provably lies in it.
    """
    eng = _Engine(problem, provider, protect_ids)
    X = eng.initial()
    sets = [X]
    U = None
    t_err: Optional[int] = None
    for i in range(problem.horizon):
        A = problem.avoid[i]
        if A is not None and not _certainly_misses(X, A):
            t_err = i
            break
        try:
            if i % problem.hold == 0:
                U = eng.controller(X)
            X = eng.plant_step(X, U)
        except SymreachError as e:
            raise type(e)(f"step {i}: {e}") from e
        sets.append(X)
    if t_err is None and problem.goal is not None:
        if not _certainly_inside(sets[-1], problem.goal):
            t_err = problem.horizon
    return ReachResult(
        verified=t_err is None,
        t_err=t_err,
        sets=sets,
        hulls=np.stack([_hull(S) for S in sets]),
        symbol_counts=[_order(S) for S in sets],
    )


def verify_last_error(
    problem: RAProblem,
    horizon_cap: Optional[int] = None,
    provider: SymbolProvider | None = None,
    protect_ids=None,
) -> ReachResult:
    """Evaluate every check up to ``horizon_cap`` and report the last failure.

    Unlike :func:`verify` this never stops early: the trace always spans
    min(cap, N) steps, avoid instants 0..min(cap, N-1) are all tested, and
    the goal only when the cap reaches the full horizon.  The input-space
    partition refinement needs exactly this "time to last error" signal.
    """
    N = problem.horizon
    cap = N if horizon_cap is None else min(horizon_cap, N)
    eng = _Engine(problem, provider, protect_ids)
    X = eng.initial()
    sets = [X]
    U = None
    violations = []
    for i in range(cap):
        A = problem.avoid[i]
        if A is not None and not _certainly_misses(X, A):
            violations.append(i)
        try:
            if i % problem.hold == 0:
                U = eng.controller(X)
            X = eng.plant_step(X, U)
        except SymreachError as e:
            raise type(e)(f"step {i}: {e}") from e
        sets.append(X)
    if cap < N and problem.avoid[cap] is not None:
        if not _certainly_misses(sets[-1], problem.avoid[cap]):
            violations.append(cap)
    if cap >= N and problem.goal is not None:
        if not _certainly_inside(sets[-1], problem.goal):
            violations.append(N)
    t_last = max(violations) if violations else None
    return ReachResult(
        verified=t_last is None,
        t_err=t_last,
        sets=sets,
        hulls=np.stack([_hull(S) for S in sets]),
        symbol_counts=[_order(S) for S in sets],
    )


def with_initial_set(problem: RAProblem, x0: sz.SZonotope) -> RAProblem:
    """Copy of the problem starting from a different initial set."""
    return dataclasses.replace(problem, x0=x0)
