"""acyclekit: weighted simplicial complexes, GF(2) persistence, minimal
spanning acycles, and Monte-Carlo experiments on their extremal statistics."""

__version__ = "0.1.0"

from .complexes import (
    Chain,
    Face,
    SimplicialComplex,
    WeightedFiltration,
    boundary_chain,
    build_complex,
    complete_skeleton,
    dump_complex,
    load_complex,
    sublevel_complex,
    total_order,
)
from .homology import BettiVector, Gf2Matrix, betti_numbers, classify_face, gf2_rank, incremental_betti
from .persistence import (
    BirthDeathMultisets,
    PersistenceDiagram,
    build_diagram,
    lifetime_identity_check,
    lifetime_sum,
    run_incremental,
)
from .spanning import (
    SpanningAcycle,
    brute_force_msa,
    char_msa_check,
    gamma_d,
    hypergraph_connected,
    kruskal_msa,
    mv_gamma_identity_check,
    prim_msa,
    structural_property_suite,
)
from .stability import (
    PointMeasure,
    bottleneck_distance,
    lp_matching_distance,
    stability_check,
    vague_metric,
)
from .random_models import (
    PerturbedModelParams,
    UniformModelParams,
    gen_perturbed_complex,
    gen_uniform_complex,
    nearest_face_distances,
    scale_point_set,
)

__all__ = [
    "__version__",
    "BettiVector",
    "BirthDeathMultisets",
    "Chain",
    "Face",
    "Gf2Matrix",
    "PersistenceDiagram",
    "PerturbedModelParams",
    "PointMeasure",
    "SimplicialComplex",
    "SpanningAcycle",
    "UniformModelParams",
    "WeightedFiltration",
    "betti_numbers",
    "bottleneck_distance",
    "boundary_chain",
    "brute_force_msa",
    "build_complex",
    "build_diagram",
    "char_msa_check",
    "classify_face",
    "complete_skeleton",
    "dump_complex",
    "gamma_d",
    "gen_perturbed_complex",
    "gen_uniform_complex",
    "gf2_rank",
    "hypergraph_connected",
    "incremental_betti",
    "kruskal_msa",
    "lifetime_identity_check",
    "lifetime_sum",
    "load_complex",
    "lp_matching_distance",
    "mv_gamma_identity_check",
    "nearest_face_distances",
    "prim_msa",
    "run_incremental",
    "scale_point_set",
    "stability_check",
    "structural_property_suite",
    "sublevel_complex",
    "total_order",
    "vague_metric",
]
