"""Command-line front end: config ingestion, dispatch, machine-readable output.

Three subcommands share the output conventions:

* ``verify --config f.json``: one closed-loop reach-avoid run.
* ``partition --config f.json [--mode m] [--max-splits n]``: the same
  problem refined by initial-set splitting; also writes ``splits.json``.
* ``bound-nn --network net.json --input-box "[[lo,hi],...]"``: interval
  bounds on one network evaluation.

Every command writes ``report.json`` and ``trace.csv`` (header
``step,t,dim,lo,hi``, one row per step and state dimension, ``t`` being
``step * dt``) into the output directory.  Floats are serialized with
``repr``, the shortest decimal that round-trips, so downstream consumers
see bit-identical values.  Exit codes: 0 verified, 1 violated, 2
inconclusive (split budget exhausted), 3 bad config, 4 analysis error,
5 unexpected failure.

A fresh symbol provider is created per command, which makes reruns of the
same config bit-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionError, SymreachError
from .nn import ACTIVATIONS, Layer, Network, propagate_affine, propagate_poly
from .partition import PartitionResult, run as run_partition
from .plant import DisturbanceSpec
from .reach import RAProblem, ReachResult, verify
from .spoly import from_szonotope, hull_array as poly_hull
from .symbols import SymbolProvider
from .szono import Polyhedron, SZonotope, hull_array


# -- network files ------------------------------------------------------


def load_network(path) -> Network:
    """Read a network from the layered JSON format.

    The file holds ``{"layers": [...]}``; each layer has an ``activation``
    name, a ``weights`` matrix given as a list of rows, and a ``bias``
    vector.  Dimension-chain and activation validation happens in the
    Network constructor.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read network file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"network file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict) or not isinstance(raw.get("layers"), list) or not raw["layers"]:
        raise ConfigError(f"network file {path} must hold a non-empty 'layers' list")
    layers = []
    for k, spec in enumerate(raw["layers"]):
        if not isinstance(spec, dict):
            raise ConfigError(f"layer {k} must be an object")
        missing = {"activation", "weights", "bias"} - spec.keys()
        if missing:
            raise ConfigError(f"layer {k} is missing {sorted(missing)}")
        try:
            layers.append(
                Layer(
                    W=np.asarray(spec["weights"], dtype=float),
                    b=np.asarray(spec["bias"], dtype=float),
                    activation=str(spec["activation"]),
                )
            )
        except (ValueError, TypeError, DimensionError) as e:
            raise ConfigError(f"layer {k}: {e}") from e
    try:
        return Network(tuple(layers))
    except (ValueError, TypeError, DimensionError) as e:
        raise ConfigError(f"network file {path}: {e}") from e


def network_to_json(net: Network) -> dict:
    """Inverse of :func:`load_network`: a dict that reloads identically."""
    return {
        "layers": [
            {
                "activation": layer.activation,
                "weights": [list(map(float, row)) for row in layer.W],
                "bias": [float(v) for v in layer.b],
            }
            for layer in net.layers
        ]
    }


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_json(net), fh, indent=1)
        fh.write("\n")


# -- config parsing -----------------------------------------------------


def _as_float_array(obj, what: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{what} is not numeric: {e}") from e
    if arr.ndim != ndim:
        raise ConfigError(f"{what} must have {ndim} dimension(s), got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ConfigError(f"{what} contains non-finite values")
    return arr


def _box_array(obj, what: str) -> np.ndarray:
    box = _as_float_array(obj, what, 2)
    if box.shape[1] != 2 or (box[:, 0] > box[:, 1]).any():
        raise ConfigError(f"{what} must be rows of [lo, hi] with lo <= hi")
    return box


def set_from_config(obj, what: str, provider: SymbolProvider) -> SZonotope:
    """Build a state set from ``{"box": ...}`` or center + generator vectors."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be an object")
    if "box" in obj:
        box = _box_array(obj["box"], f"{what}.box")
        c = box.mean(axis=1)
        G = np.diag((box[:, 1] - box[:, 0]) / 2.0)
        return SZonotope(c, G, provider.fresh_ids(box.shape[0]))
    if "center" in obj:
        c = _as_float_array(obj["center"], f"{what}.center", 1)
        gens = obj.get("generators", [])
        G = _as_float_array(gens, f"{what}.generators", 2) if gens else np.zeros((c.size, 0))
        if G.size and G.shape[1] != c.size:
            raise ConfigError(f"{what}: each generator must have length {c.size}")
        G = G.T if G.size else np.zeros((c.size, 0))
        return SZonotope(c, G, provider.fresh_ids(G.shape[1]))
    raise ConfigError(f"{what} needs either 'box' or 'center' (+ 'generators')")


def polyhedron_from_config(obj, what: str) -> Polyhedron:
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be an object")
    if "box" in obj:
        return Polyhedron.from_box(_box_array(obj["box"], f"{what}.box"))
    if "H" in obj and "r" in obj:
        H = _as_float_array(obj["H"], f"{what}.H", 2)
        r = _as_float_array(obj["r"], f"{what}.r", 1)
        if H.shape[0] != r.size:
            raise ConfigError(f"{what}: H has {H.shape[0]} rows but r has {r.size} entries")
        return Polyhedron(H, r)
    raise ConfigError(f"{what} needs either 'box' or 'H' + 'r'")


def _avoid_from_config(obj, horizon: int):
    """One optional polyhedron per instant 0..horizon-1.

    The config gives a list of regions, each tagged with ``step`` (one
    instant), ``steps`` ([first, last] inclusive), or neither (all
    instants).  Two regions on the same instant would silently mean their
    intersection, so that is rejected.
    """
    if obj is None:
        return None
    entries = obj if isinstance(obj, list) else [obj]
    per_step: list[Optional[Polyhedron]] = [None] * horizon
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"avoid[{k}] must be an object")
        poly = polyhedron_from_config(
            {key: entry[key] for key in ("box", "H", "r") if key in entry}, f"avoid[{k}]"
        )
        if "step" in entry and "steps" in entry:
            raise ConfigError(f"avoid[{k}]: give 'step' or 'steps', not both")
        if "step" in entry:
            instants = [int(entry["step"])]
        elif "steps" in entry:
            first, last = (int(v) for v in entry["steps"])
            instants = list(range(first, last + 1))
        else:
            instants = list(range(horizon))
        for i in instants:
            if not 0 <= i < horizon:
                raise ConfigError(f"avoid[{k}]: instant {i} outside 0..{horizon - 1}")
            if per_step[i] is not None:
                raise ConfigError(f"avoid[{k}]: instant {i} already has an avoid region")
            per_step[i] = poly
    return tuple(per_step)


_KNOWN_KEYS = {
    "network",
    "dynamics",
    "initial",
    "disturbance",
    "goal",
    "avoid",
    "horizon",
    "symbol_budget",
    "hold",
    "engine",
    "poly",
    "dt",
    "seed",
    "partition",
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"config {path} has unknown keys {sorted(unknown)}")
    return cfg


def build_problem(cfg: dict, base_dir: Path, provider: SymbolProvider) -> RAProblem:
    for key in ("network", "dynamics", "initial", "horizon"):
        if key not in cfg:
            raise ConfigError(f"config is missing required key '{key}'")
    net_path = Path(cfg["network"])
    if not net_path.is_absolute():
        net_path = base_dir / net_path
    net = load_network(net_path)

    horizon = cfg["horizon"]
    if not isinstance(horizon, int) or isinstance(horizon, bool):
        raise ConfigError("horizon must be an integer")

    x0 = set_from_config(cfg["initial"], "initial", provider)

    dist = None
    if cfg.get("disturbance") is not None:
        dobj = cfg["disturbance"]
        if not isinstance(dobj, dict) or "amplitude" not in dobj:
            raise ConfigError("disturbance needs an 'amplitude' vector")
        dist = DisturbanceSpec(
            amplitude=_as_float_array(dobj["amplitude"], "disturbance.amplitude", 1),
            center=(
                _as_float_array(dobj["center"], "disturbance.center", 1)
                if dobj.get("center") is not None
                else None
            ),
        )

    goal = polyhedron_from_config(cfg["goal"], "goal") if cfg.get("goal") is not None else None
    avoid = _avoid_from_config(cfg.get("avoid"), horizon)

    dynamics = cfg["dynamics"]
    if not isinstance(dynamics, list) or not all(isinstance(d, str) for d in dynamics):
        raise ConfigError("dynamics must be a list of expression strings")

    poly_opts = cfg.get("poly") or {}
    if not isinstance(poly_opts, dict):
        raise ConfigError("poly options must be an object")

    return RAProblem(
        x0=x0,
        network=net,
        dynamics=dynamics,
        horizon=horizon,
        disturbance=dist,
        goal=goal,
        avoid=avoid,
        symbol_budget=int(cfg.get("symbol_budget", 200)),
        hold=int(cfg.get("hold", 1)),
        engine=str(cfg.get("engine", "affine")),
        poly_order=int(poly_opts.get("order", 2)),
        monomial_budget=int(poly_opts.get("monomial_budget", 100)),
        max_degree=(None if poly_opts.get("max_degree", 6) is None else int(poly_opts.get("max_degree", 6))),
        refine_depth=int(poly_opts.get("refine_depth", 2)),
    )


# -- output writers -----------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace_csv(path, hulls: np.ndarray, dt: float) -> None:
    """Rows of per-step per-dimension bounds; floats as shortest decimals."""
    with open(path, "w") as fh:
        fh.write("step,t,dim,lo,hi\n")
        for step, frame in enumerate(hulls):
            t = step * dt
            for dim, (lo, hi) in enumerate(frame):
                fh.write(f"{step},{_fmt(t)},{dim},{_fmt(lo)},{_fmt(hi)}\n")


def _hulls_list(hulls: np.ndarray) -> list:
    return [[[float(lo), float(hi)] for lo, hi in frame] for frame in hulls]


def write_report(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")


def _verdict(t_err: Optional[int], inconclusive: bool = False) -> str:
    if t_err is None:
        return "verified"
    if inconclusive:
        return "inconclusive(budget)"
    return f"violated-at({t_err})"


# -- commands -----------------------------------------------------------


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    provider = SymbolProvider()
    problem = build_problem(cfg, Path(args.config).resolve().parent, provider)
    dt = float(cfg.get("dt", 1.0))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    result = verify(problem, provider)
    elapsed = time.perf_counter() - t0

    write_trace_csv(out_dir / "trace.csv", result.hulls, dt)
    report = {
        "command": "verify",
        "verdict": _verdict(result.t_err),
        "t_err": result.t_err,
        "horizon": problem.horizon,
        "engine": problem.engine,
        "dt": dt,
        "seed": cfg.get("seed"),
        "timings": {"total_s": elapsed},
        "symbol_counts": result.symbol_counts,
        "hulls": _hulls_list(result.hulls),
        "trace_csv": "trace.csv",
    }
    write_report(out_dir / "report.json", report)
    return 0 if result.verified else 1


def _leaf_dict(nd) -> dict:
    entry = {
        "label": nd.label,
        "parent": nd.parent,
        "box": _hulls_list(np.asarray([hull_array(nd.set)]))[0],
        "t_err": nd.t_err,
        "satisfied": nd.satisfied,
        "cap": nd.cap,
        "failed": nd.failed,
    }
    if nd.result is not None:
        entry["hulls"] = _hulls_list(nd.result.hulls)
    return entry


def cmd_partition(args) -> int:
    cfg = load_config(args.config)
    provider = SymbolProvider()
    problem = build_problem(cfg, Path(args.config).resolve().parent, provider)
    dt = float(cfg.get("dt", 1.0))
    popts = cfg.get("partition") or {}
    if not isinstance(popts, dict):
        raise ConfigError("partition options must be an object")
    mode = args.mode or popts.get("mode", "backward")
    n_max = args.max_splits if args.max_splits is not None else int(popts.get("n_max", 16))
    tol_F = popts.get("tol_F")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    result = run_partition(problem, n_max=n_max, mode=mode, tol_F=tol_F, provider=provider)
    elapsed = time.perf_counter() - t0

    if result.root is not None and result.root.result is not None:
        root_hulls = result.root.result.hulls
    else:
        root_hulls = np.asarray([hull_array(problem.x0)])
    write_trace_csv(out_dir / "trace.csv", root_hulls, dt)

    splits = {
        "is_ra_ok": result.is_ra_ok,
        "mode": result.mode,
        "splits": result.splits,
        "edges": [[p, c] for p, c in result.edges],
        "leaves": [_leaf_dict(nd) for nd in result.leaves],
        "decisions": [
            {**d, "scores": {str(k): v for k, v in d["scores"].items()}} for d in result.decisions
        ],
    }
    with open(out_dir / "splits.json", "w") as fh:
        json.dump(splits, fh, indent=1)
        fh.write("\n")

    worst = max((nd.t_err for nd in result.leaves if nd.t_err is not None), default=None)
    report = {
        "command": "partition",
        "verdict": _verdict(worst, inconclusive=worst is not None),
        "t_err": worst,
        "horizon": problem.horizon,
        "engine": problem.engine,
        "dt": dt,
        "seed": cfg.get("seed"),
        "mode": result.mode,
        "splits": result.splits,
        "leaves": len(result.leaves),
        "timings": {"total_s": elapsed},
        "trace_csv": "trace.csv",
        "splits_json": "splits.json",
    }
    write_report(out_dir / "report.json", report)
    return 0 if result.is_ra_ok else 2


def cmd_bound_nn(args) -> int:
    provider = SymbolProvider()
    net = load_network(args.network)
    try:
        box_raw = json.loads(args.input_box)
    except json.JSONDecodeError as e:
        raise ConfigError(f"--input-box is not valid JSON: {e}") from e
    box = _box_array(box_raw, "input box")
    if box.shape[0] != net.input_dim:
        raise ConfigError(f"input box has {box.shape[0]} dims, network expects {net.input_dim}")
    x0 = SZonotope(
        box.mean(axis=1), np.diag((box[:, 1] - box[:, 0]) / 2.0), provider.fresh_ids(box.shape[0])
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    if args.engine == "poly":
        out = propagate_poly(from_szonotope(x0), net, provider=provider)
        out_hull = poly_hull(out)
    else:
        out = propagate_affine(x0, net, provider)
        out_hull = hull_array(out)
    elapsed = time.perf_counter() - t0

    hulls = np.stack([box, out_hull])
    write_trace_csv(out_dir / "trace.csv", hulls, dt=1.0)
    report = {
        "command": "bound-nn",
        "verdict": "verified",
        "t_err": None,
        "engine": args.engine,
        "dt": 1.0,
        "timings": {"total_s": elapsed},
        "input_box": _hulls_list(np.asarray([box]))[0],
        "output_box": _hulls_list(np.asarray([out_hull]))[0],
        "trace_csv": "trace.csv",
    }
    write_report(out_dir / "report.json", report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symreach",
        description="Sound reachability and verification for neural-network control loops.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="closed-loop reach-avoid verification")
    p_verify.add_argument("--config", required=True, help="problem config (JSON)")
    p_verify.add_argument("--out-dir", default=".", help="where report.json / trace.csv go")
    p_verify.set_defaults(fn=cmd_verify)

    p_part = sub.add_parser("partition", help="verification with initial-set splitting")
    p_part.add_argument("--config", required=True, help="problem config (JSON)")
    p_part.add_argument("--mode", choices=("backward", "forward", "accuracy"), default=None)
    p_part.add_argument("--max-splits", type=int, default=None)
    p_part.add_argument("--out-dir", default=".", help="where report/trace/splits go")
    p_part.set_defaults(fn=cmd_partition)

    p_bound = sub.add_parser("bound-nn", help="interval bounds of one network evaluation")
    p_bound.add_argument("--network", required=True, help="network file (JSON)")
    p_bound.add_argument("--input-box", required=True, help='JSON like "[[-1,1],[0,2]]"')
    p_bound.add_argument("--engine", choices=("affine", "poly"), default="affine")
    p_bound.add_argument("--out-dir", default=".")
    p_bound.set_defaults(fn=cmd_bound_nn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3
    except SymreachError as e:
        print(f"analysis error: {e}", file=sys.stderr)
        return 4
    except Exception as e:  # anything else is a bug worth a distinct code
        print(f"unexpected failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
