"""Sensitivity-guided bisection of the initial set.

When one enclosure of the whole initial set cannot certify a property, the
set is split along the unit symbol whose influence on the violating set is
largest relative to its input width, and each half is re-verified.  Binary
splits keep the number of subsets linear in the number of refinements.

Three schedulers pick which leaf to split next:

* ``backward``: re-check each child only up to the instant its parent last
  failed and refine the leaf whose last failure is latest.  Instants past a
  leaf's cap were already certified by an ancestor whose enclosure covers
  the leaf, so the capped runs stay sound while skipping redundant work.
* ``forward``: full-horizon runs that stop at the first failure; refine the
  leaf that fails earliest.
* ``accuracy``: refine the unsatisfied leaf whose witness carries the most
  abstraction error (Frobenius norm of the non-initial generator columns),
  optionally until that measure drops below ``tol_F`` everywhere.

Initial symbols are protected from reduction in every leaf run, so the
witness can always be decomposed into initial-symbol columns (the set's
dependence on where it started) and error columns (everything picked up
along the way).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import szono as sz
from .errors import ConfigError, SymreachError
from .nn import Network, propagate_affine
from .reach import RAProblem, ReachResult, verify, verify_last_error, with_initial_set
from .symbols import SymbolProvider


@dataclass
class PartitionNode:
    """One leaf of the split tree.

    ``set`` is the leaf's share of the initial set; ``witness`` is the
    violating set of its last run (the final set when it passed).
    ``t_err`` is None once every instant the leaf was checked against
    passed; ``cap`` records how far that check went (None = full horizon).
    """

    label: int
    set: sz.SZonotope
    t_err: Optional[int] = None
    witness: Optional[sz.SZonotope] = None
    result: Optional[ReachResult] = None
    cap: Optional[int] = None
    parent: Optional[int] = None
    failed: bool = False

    @property
    def satisfied(self) -> bool:
        return self.t_err is None and not self.failed

    def initial_block(self) -> np.ndarray:
        """Witness columns driven by this leaf's own initial symbols."""
        mask = np.isin(self.witness.ids, self.set.ids)
        return self.witness.G[:, mask]

    def error_block(self) -> np.ndarray:
        """Witness columns of every other symbol (noise, abstraction error)."""
        mask = np.isin(self.witness.ids, self.set.ids)
        return self.witness.G[:, ~mask]

    def error_frobenius(self) -> float:
        if self.failed:
            return math.inf
        return sz.f_radius(self.error_block())


@dataclass
class PartitionResult:
    """Split tree produced by :func:`run` or :func:`run_open_loop`."""

    is_ra_ok: bool
    leaves: list[PartitionNode]
    edges: list[tuple[int, int]]
    decisions: list[dict] = field(repr=False)
    splits: int = 0
    mode: str = "backward"
    root: Optional[PartitionNode] = None

    def leaf(self, label: int) -> PartitionNode:
        for nd in self.leaves:
            if nd.label == label:
                return nd
        raise KeyError(f"no leaf labelled {label}")


def sym_select(node: PartitionNode) -> int:
    """Initial symbol whose influence survives strongest into the witness.

    Scores each of the leaf's initial symbols by the 2-norm of its witness
    column over the 2-norm of its input column and returns the argmax;
    symbols with zero input width are skipped.  When no symbol shows any
    surviving influence the widest input column wins.  Ties break to the
    smaller id so reruns are deterministic.
    """
    scored = []
    for k, sid in enumerate(node.set.ids.tolist()):
        width = float(np.linalg.norm(node.set.G[:, k]))
        if width <= 0.0:
            continue
        out = float(np.linalg.norm(node.witness.column(sid)))
        scored.append((sid, out / width, width))
    if not scored:
        raise ConfigError(f"leaf {node.label} has no symbol with nonzero input width")
    if all(s[1] == 0.0 for s in scored):
        return min(scored, key=lambda s: (-s[2], s[0]))[0]
    return min(scored, key=lambda s: (-s[1], s[0]))[0]


def sym_split(
    node: PartitionNode,
    sid: int,
    first_label: int,
    provider: SymbolProvider | None = None,
) -> tuple[PartitionNode, PartitionNode]:
    """Bisect one symbol of the leaf's initial set into two fresh leaves.

    The children tile the parent exactly and carry labels ``first_label``
    and ``first_label + 1``; they are returned unevaluated (witness is a
    placeholder until a run fills it in).
    """
    lo_half, hi_half = sz.bisect_symbol(node.set, sid, provider)
    mk = lambda lbl, s: PartitionNode(label=lbl, set=s, witness=s, parent=node.label)
    return mk(first_label, lo_half), mk(first_label + 1, hi_half)


def _splittable(node: PartitionNode) -> bool:
    return bool(np.any(node.set.G))


def _refine(
    root_set: sz.SZonotope,
    evaluate: Callable[[PartitionNode, Optional[int]], None],
    n_max: int,
    mode: str,
    tol_F: Optional[float],
    provider: SymbolProvider | None,
) -> PartitionResult:
    """Shared scheduler loop: evaluate, pick, split, repeat until quiet."""
    if mode not in ("backward", "forward", "accuracy"):
        raise ConfigError(f"unknown partition mode {mode!r}")
    if n_max < 0:
        raise ConfigError("n_max must be non-negative")

    root = PartitionNode(label=0, set=root_set, witness=root_set)
    evaluate(root, None)
    leaves: dict[int, PartitionNode] = {0: root}
    edges: list[tuple[int, int]] = []
    decisions: list[dict] = []
    counter = 0
    splits = 0

    while splits < n_max:
        live = [nd for nd in leaves.values() if not nd.satisfied and _splittable(nd)]
        if not live:
            break
        if mode == "backward":
            # priority t_err + 1 keeps an instant-0 failure distinct from "passed"
            scores = {nd.label: (0 if nd.satisfied else nd.t_err + 1) for nd in live}
            chosen = min(live, key=lambda nd: (-scores[nd.label], nd.label))
            child_cap = chosen.t_err
        elif mode == "forward":
            scores = {nd.label: nd.t_err for nd in live}
            chosen = min(live, key=lambda nd: (scores[nd.label], nd.label))
            child_cap = None
        else:
            scores = {nd.label: nd.error_frobenius() for nd in live}
            if tol_F is not None and all(v < tol_F for v in scores.values()):
                break
            chosen = min(live, key=lambda nd: (-scores[nd.label], nd.label))
            child_cap = None

        sid = sym_select(chosen)
        left, right = sym_split(chosen, sid, counter + 1, provider)
        counter += 2
        for child in (left, right):
            evaluate(child, child_cap)
            leaves[child.label] = child
            edges.append((chosen.label, child.label))
        del leaves[chosen.label]
        splits += 1
        decisions.append(
            {
                "iteration": splits,
                "mode": mode,
                "scores": scores,
                "selected": chosen.label,
                "symbol": int(sid),
                "children": (left.label, right.label),
                "cap": child_cap,
            }
        )

    ordered = sorted(leaves.values(), key=lambda nd: nd.label)
    return PartitionResult(
        is_ra_ok=all(nd.satisfied for nd in ordered),
        leaves=ordered,
        edges=edges,
        decisions=decisions,
        splits=splits,
        mode=mode,
        root=root,
    )


def run(
    problem: RAProblem,
    n_max: int,
    mode: str = "backward",
    tol_F: Optional[float] = None,
    provider: SymbolProvider | None = None,
) -> PartitionResult:
    """Refine the initial set until the reach-avoid check passes everywhere.

    Performs at most ``n_max`` bisections.  A verified result means every
    leaf passed all the instants it was responsible for; an unverified one
    reports the surviving leaves with their latest (backward/accuracy) or
    earliest (forward) failing instants.  A leaf whose run itself blows up
    is kept with its cap as the failing instant, which is the conservative
    reading.
    """
    if problem.engine != "affine":
        raise ConfigError("partitioning needs the affine engine; got " + repr(problem.engine))

    def evaluate(node: PartitionNode, cap: Optional[int]) -> None:
        sub = with_initial_set(problem, node.set)
        protect = node.set.ids
        try:
            if mode == "forward":
                res = verify(sub, provider, protect_ids=protect)
            else:
                res = verify_last_error(sub, cap, provider, protect_ids=protect)
        except SymreachError:
            node.t_err = problem.horizon if cap is None else cap
            node.cap = cap
            node.witness = node.set
            node.failed = True
            return
        node.t_err = res.t_err
        node.cap = cap
        node.witness = res.witness
        node.result = res

    return _refine(problem.x0, evaluate, n_max, mode, tol_F, provider)


def run_open_loop(
    net: Network,
    x0: sz.SZonotope,
    prop: Optional[sz.Polyhedron] = None,
    n_max: int = 0,
    mode: str = "accuracy",
    tol_F: Optional[float] = None,
    provider: SymbolProvider | None = None,
) -> PartitionResult:
    """Partition the input of a single network evaluation.

    Each leaf is propagated through ``net`` once; it is satisfied when the
    output set provably lies in ``prop``.  Without a property nothing can be
    satisfied and the loop is driven purely by the accuracy measure (or the
    split budget).
    """
    if net.input_dim != x0.dim:
        raise ConfigError(f"network expects dim {net.input_dim}, input set has dim {x0.dim}")

    def evaluate(node: PartitionNode, cap: Optional[int]) -> None:
        try:
            out = propagate_affine(node.set, net, provider)
        except SymreachError:
            node.t_err = 0
            node.witness = node.set
            node.failed = True
            return
        node.witness = out
        node.t_err = None if (prop is not None and sz.contained_in(out, prop)) else 0

    return _refine(x0, evaluate, n_max, mode, tol_F, provider)
