#!/usr/bin/env python3
"""Convert benchmark controller weights to the layered JSON network format.

Supported sources, picked by suffix unless --format says otherwise:

* ``.nnet``   text format (comment lines ``//``, sizes, normalization
              constants, then row-wise weights and biases); the input and
              output normalizations are folded into the first and last
              layers so the JSON file computes the same function as the
              deployed network.
* ``.txt``    sherlock format (one number per line).
* ``.mat``    MATLAB files holding weight and bias cell arrays, as shipped
              by several verification-tool repositories (needs scipy).
* ``.onnx``   plain feed-forward chains of Gemm/MatMul+Add and activations
              (needs the onnx package).

A committed adapter layer can be prepended with --prepend, e.g. the
cruise-control input map in configs/networks/.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from symreach import Layer, Network
from symreach.cli import save_network

ACT_NAMES = {
    "relu": "relu",
    "poslin": "relu",
    "tanh": "tanh",
    "tansig": "tanh",
    "sigmoid": "sigmoid",
    "logsig": "sigmoid",
    "linear": "linear",
    "purelin": "linear",
    "identity": "linear",
}


def finalize(layers):
    """Validate through the Network constructor.

    Sources whose last layer carries an activation get an identity layer
    appended so the required linear read-out holds without changing the
    function.
    """
    if layers[-1].activation != "linear":
        n = layers[-1].width
        layers.append(Layer(W=np.eye(n), b=np.zeros(n), activation="linear"))
    return Network(layers)


def _numbers(line):
    return [float(tok) for tok in line.replace(",", " ").split()]


def read_nnet(path):
    with open(path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln and not ln.startswith("//")]
    it = iter(lines)
    n_layers, n_in, n_out, _ = (int(v) for v in _numbers(next(it))[:4])
    sizes = [int(v) for v in _numbers(next(it))[: n_layers + 1]]
    next(it)  # historical flag line
    next(it)  # input minimums, not part of the function
    next(it)  # input maximums
    means = _numbers(next(it))
    ranges = _numbers(next(it))
    layers = []
    for l in range(n_layers):
        W = np.array([_numbers(next(it))[: sizes[l]] for _ in range(sizes[l + 1])])
        b = np.array([_numbers(next(it))[0] for _ in range(sizes[l + 1])])
        act = "linear" if l == n_layers - 1 else "relu"
        layers.append(Layer(W=W, b=b, activation=act))
    # The stored weights act on normalized inputs and produce a normalized
    # output; fold x -> (x - mean)/range into layer 0 and y -> y*range + mean
    # into the last layer.
    mean_in = np.asarray(means[:n_in])
    range_in = np.asarray(ranges[:n_in])
    first = layers[0]
    layers[0] = Layer(
        W=first.W / range_in,
        b=first.b - first.W @ (mean_in / range_in),
        activation=first.activation,
    )
    last = layers[-1]
    layers[-1] = Layer(
        W=last.W * ranges[n_in],
        b=last.b * ranges[n_in] + means[n_in],
        activation=last.activation,
    )
    return layers


def read_sherlock(path):
    with open(path) as fh:
        vals = [float(ln.strip()) for ln in fh if ln.strip()]
    it = iter(vals)
    n_in, n_out, n_hidden = int(next(it)), int(next(it)), int(next(it))
    sizes = [n_in] + [int(next(it)) for _ in range(n_hidden)] + [n_out]
    layers = []
    for l in range(len(sizes) - 1):
        rows, cols = sizes[l + 1], sizes[l]
        W = np.empty((rows, cols))
        b = np.empty(rows)
        for i in range(rows):
            W[i] = [next(it) for _ in range(cols)]
            b[i] = next(it)
        act = "linear" if l == len(sizes) - 2 else "relu"
        layers.append(Layer(W=W, b=b, activation=act))
    leftovers = sum(1 for _ in it)
    if leftovers:
        raise ValueError(f"{leftovers} unread numbers; not a sherlock file?")
    return layers


def _cell_list(obj):
    if isinstance(obj, np.ndarray) and obj.dtype == object:
        return list(obj.ravel())
    return [obj]


def read_mat(path):
    import scipy.io

    data = scipy.io.loadmat(path, squeeze_me=True, struct_as_record=False)
    data = {k: v for k, v in data.items() if not k.startswith("__")}

    def pick(container, names):
        for name in names:
            if isinstance(container, dict) and name in container:
                return container[name]
            if hasattr(container, name):
                return getattr(container, name)
        return None

    source = data
    if pick(data, ("W", "weights")) is None:
        # single struct variable wrapping the fields
        structs = [v for v in data.values() if hasattr(v, "_fieldnames")]
        if len(structs) == 1:
            source = structs[0]
    Ws = pick(source, ("W", "weights"))
    bs = pick(source, ("b", "biases", "bias"))
    if Ws is None or bs is None:
        raise ValueError(f"no weight/bias arrays found in {path} (vars: {sorted(data)})")
    Ws = [np.atleast_2d(np.asarray(w, dtype=float)) for w in _cell_list(Ws)]
    bs = [np.asarray(b, dtype=float).ravel() for b in _cell_list(bs)]
    acts = pick(source, ("act_fcns", "activation_fcns", "acts"))
    if acts is None:
        names = ["relu"] * (len(Ws) - 1) + ["linear"]
    else:
        raw = _cell_list(acts) if isinstance(acts, np.ndarray) else [acts]
        if len(raw) == 1 and isinstance(raw[0], str) and len(Ws) > 1:
            raw = raw * len(Ws)
        names = [ACT_NAMES[str(a).strip().lower()] for a in raw]
    return [Layer(W=W, b=b, activation=a) for W, b, a in zip(Ws, bs, names)]


def read_onnx(path):
    try:
        import onnx
        from onnx import numpy_helper
    except ImportError:
        raise SystemExit("converting .onnx files needs the onnx package (pip install onnx)")

    model = onnx.load(str(path))
    init = {t.name: numpy_helper.to_array(t).astype(float) for t in model.graph.initializer}
    layers = []
    pending = None  # (W, b) awaiting its activation

    def flush(act):
        nonlocal pending
        if pending is None:
            raise ValueError(f"activation '{act}' with no preceding linear node")
        layers.append(Layer(W=pending[0], b=pending[1], activation=act))
        pending = None

    for node in model.graph.node:
        op = node.op_type
        if op in ("Flatten", "Identity", "Reshape", "Cast", "Squeeze", "Unsqueeze"):
            continue
        if op == "Gemm":
            if pending is not None:
                flush("linear")
            W = init[node.input[1]]
            if not any(a.name == "transB" and a.i for a in node.attribute):
                W = W.T
            b = init[node.input[2]] if len(node.input) > 2 else np.zeros(W.shape[0])
            pending = (W, b.ravel())
        elif op == "MatMul":
            if pending is not None:
                flush("linear")
            pending = (init[node.input[1]].T, None)
        elif op == "Add" and pending is not None and pending[1] is None:
            pending = (pending[0], init[node.input[1]].ravel())
        elif op in ("Relu", "Tanh", "Sigmoid"):
            if pending is not None and pending[1] is None:
                pending = (pending[0], np.zeros(pending[0].shape[0]))
            flush(op.lower())
        else:
            raise ValueError(f"unsupported onnx op '{op}'; only plain MLP chains convert")
    if pending is not None:
        if pending[1] is None:
            pending = (pending[0], np.zeros(pending[0].shape[0]))
        flush("linear")
    return layers


READERS = {"nnet": read_nnet, "txt": read_sherlock, "mat": read_mat, "onnx": read_onnx}


def convert(src, fmt=None, prepend=None):
    fmt = fmt or Path(src).suffix.lstrip(".").lower()
    if fmt not in READERS:
        raise SystemExit(f"unknown format '{fmt}'; expected one of {sorted(READERS)}")
    layers = READERS[fmt](src)
    if prepend is not None:
        spec = json.loads(Path(prepend).read_text())
        layers.insert(
            0,
            Layer(
                W=np.asarray(spec["weights"], dtype=float),
                b=np.asarray(spec["bias"], dtype=float),
                activation="linear",
            ),
        )
    return finalize(layers)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", help="weights file (.nnet, .txt, .mat, .onnx)")
    ap.add_argument("dest", help="output JSON path")
    ap.add_argument("--format", choices=sorted(READERS), help="override suffix detection")
    ap.add_argument("--prepend", metavar="JSON", help="linear layer to prepend (weights/bias object)")
    args = ap.parse_args(argv)
    net = convert(args.source, args.format, args.prepend)
    save_network(net, args.dest)
    chain = " -> ".join(str(d) for d in (net.input_dim, *(l.width for l in net.layers)))
    acts = ", ".join(l.activation for l in net.layers)
    print(f"wrote {args.dest}: {chain} ({acts})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
