"""Structural averaged controllability of parameter-dependent linear systems.

Decide from a sparsity pattern whether some compliant ensemble ``(A(sigma),
b(sigma))`` can steer its average to any target, build an explicit certifying
ensemble, cross-check against random polynomial ensembles, and simulate the
steering on a quadrature discretization.
"""
__version__ = "0.1.0"

from .graph import (  # noqa: E402
    BETA,
    BetaHasInNeighbor,
    DecisionReport,
    DuplicateEdge,
    NotWeaklyConnected,
    PatternError,
    SparsityPattern,
    UnknownNode,
    core,
    decide_structural_avg_ctrl,
    node_label,
    parse_node,
    skeleton,
    strong_components,
    validate_pattern,
)
from .reduction import (  # noqa: E402
    NotReduced,
    NotStructurallyAvgControllable,
    ReducedGraph,
    analyze_reduced,
    reduce,
    validate_reduced,
)
from .certificate import (  # noqa: E402
    LAMBDAS,
    SQRT2,
    LambdaSpec,
    NuValue,
    build_certificate,
    build_nu,
    canonical_relabel,
    nu_of_walk,
    partition_edges,
    reachable_set,
    relabel,
)
from .verification import (  # noqa: E402
    OracleContradiction,
    PolynomialEnsemble,
    RankDeficient,
    certify_rank,
    column,
    cross_validate,
    moment,
    oracle_rank,
    oracle_sample,
    select_columns,
)
from .simulator import (  # noqa: E402
    SingularGramian,
    discretize,
    simulate,
    synthesize_control,
    verify_target,
)
from .io import parse_dot, parse_edge_list  # noqa: E402
from .generate import random_pattern  # noqa: E402

__all__ = [
    "__version__",
    "BETA",
    "BetaHasInNeighbor",
    "DecisionReport",
    "DuplicateEdge",
    "NotWeaklyConnected",
    "PatternError",
    "SparsityPattern",
    "UnknownNode",
    "core",
    "decide_structural_avg_ctrl",
    "node_label",
    "parse_node",
    "skeleton",
    "strong_components",
    "validate_pattern",
    "NotReduced",
    "NotStructurallyAvgControllable",
    "ReducedGraph",
    "analyze_reduced",
    "reduce",
    "validate_reduced",
    "LAMBDAS",
    "SQRT2",
    "LambdaSpec",
    "NuValue",
    "build_certificate",
    "build_nu",
    "canonical_relabel",
    "nu_of_walk",
    "partition_edges",
    "reachable_set",
    "relabel",
    "OracleContradiction",
    "PolynomialEnsemble",
    "RankDeficient",
    "certify_rank",
    "column",
    "cross_validate",
    "moment",
    "oracle_rank",
    "oracle_sample",
    "select_columns",
    "SingularGramian",
    "discretize",
    "simulate",
    "synthesize_control",
    "verify_target",
    "parse_dot",
    "parse_edge_list",
    "random_pattern",
]
