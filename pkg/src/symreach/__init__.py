"""Sound reachability for neural-network-controlled systems.

State sets are affine or polynomial images of named unit-interval symbols.
Keeping the names alive across every operation lets dependent quantities
cancel exactly instead of accumulating wrapping error, which is what makes
closed-loop enclosures with a held controller tight.  Everything downstream
(network abstraction, plant evaluation, reach-avoid verification,
input-set partitioning) is built on that one idea.
"""

from .errors import (
    AbstractionError,
    ConfigError,
    DimensionError,
    ReductionError,
    SymreachError,
)
from .nn import (
    Layer,
    Network,
    activation_triplet,
    forward,
    propagate_affine,
    propagate_poly,
    relu_quadratic,
    relu_triplet,
    sshape_triplet,
)
from .partition import (
    PartitionNode,
    PartitionResult,
    run,
    run_open_loop,
    sym_select,
    sym_split,
)
from .plant import (
    DisturbanceSpec,
    PRIMITIVES,
    UnivariatePrimitive,
    abstract_univariate,
    abstract_univariate_poly,
    disturbance_szonotope,
    eval_concrete,
    eval_spoly,
    eval_szono,
    parse_expression,
    register_primitive,
    sandwich,
)
from .reach import RAProblem, ReachResult, verify, verify_last_error, with_initial_set
from .symbols import SymbolProvider, align, fresh_ids
from . import spoly
from . import szono
from .szono import Interval, Polyhedron, SZonotope
from .spoly import SPolynotope

__version__ = "0.1.0"

__all__ = [
    "AbstractionError",
    "ConfigError",
    "DimensionError",
    "DisturbanceSpec",
    "Interval",
    "Layer",
    "Network",
    "PRIMITIVES",
    "PartitionNode",
    "PartitionResult",
    "Polyhedron",
    "RAProblem",
    "ReachResult",
    "ReductionError",
    "SPolynotope",
    "SZonotope",
    "SymbolProvider",
    "SymreachError",
    "activation_triplet",
    "align",
    "disturbance_szonotope",
    "eval_concrete",
    "eval_spoly",
    "eval_szono",
    "forward",
    "fresh_ids",
    "parse_expression",
    "propagate_affine",
    "propagate_poly",
    "register_primitive",
    "relu_quadratic",
    "relu_triplet",
    "run",
    "run_open_loop",
    "UnivariatePrimitive",
    "abstract_univariate",
    "abstract_univariate_poly",
    "sandwich",
    "spoly",
    "sshape_triplet",
    "sym_select",
    "sym_split",
    "szono",
    "verify",
    "verify_last_error",
    "with_initial_set",
    "__version__",
]
