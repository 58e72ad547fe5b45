"""Distances, lower bounds and invariants for weighted measure networks."""

from . import errors
from ._kernels import BACKEND, HAVE_NUMBA
from .analysis import (
    Dendrogram,
    DissimilarityMatrix,
    PairFailure,
    dissimilarity_matrix,
    emit_outputs,
    ingest_matrix_csv,
    load_dissimilarity_csv,
    single_linkage,
    to_newick,
)
from .bounds import (
    BoundReport,
    TlbCostMatrix,
    rflb,
    rslb,
    rtlb,
    rtlb_max,
    szlb,
    tlb_cost,
)
from .core import (
    Coupling,
    DiscreteDistribution,
    GpResult,
    MeasureNetwork,
    diagonal_coupling,
    distortion,
    distortion_quad,
    dnp_to_point,
    gp_objective,
    load_network,
    network_from_json,
    network_to_json,
    new_network,
    one_point_network,
    product_coupling,
    save_network,
)
from .generators import (
    SbmSpec,
    cycle_network,
    experiment_preset,
    normalize_max_abs,
    sample_collection,
    sbm_sample,
)
from .gw import (
    GwResult,
    cosine_rescale,
    cosine_rule_inner,
    entropic_gw,
    gw_bruteforce,
    lambda_rescale,
)
from .invariants import (
    EccentricityVector,
    SizeCurve,
    ecc_pushforward,
    eccentricity,
    interleaving_distance,
    local_distribution,
    size_curve,
    size_p,
    sphere_discretize,
    sphere_subsize_closed_form,
    sphere_subsize_curve,
    sphere_surface_area,
    sub_size,
    sup_size,
    weight_pushforward,
)
from .ot import (
    KernelState,
    SinkhornConfig,
    SinkhornResult,
    decide_param,
    exact_ot,
    log_initialize,
    sinkhorn,
    sinkhorn_log,
    wasserstein_1d,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "Coupling",
    "Dendrogram",
    "DiscreteDistribution",
    "DissimilarityMatrix",
    "EccentricityVector",
    "GpResult",
    "GwResult",
    "HAVE_NUMBA",
    "KernelState",
    "MeasureNetwork",
    "PairFailure",
    "SbmSpec",
    "SinkhornConfig",
    "SinkhornResult",
    "SizeCurve",
    "TlbCostMatrix",
    "cosine_rescale",
    "cosine_rule_inner",
    "cycle_network",
    "decide_param",
    "diagonal_coupling",
    "dissimilarity_matrix",
    "distortion",
    "distortion_quad",
    "dnp_to_point",
    "ecc_pushforward",
    "eccentricity",
    "emit_outputs",
    "entropic_gw",
    "errors",
    "exact_ot",
    "experiment_preset",
    "gp_objective",
    "gw_bruteforce",
    "ingest_matrix_csv",
    "interleaving_distance",
    "lambda_rescale",
    "load_dissimilarity_csv",
    "load_network",
    "local_distribution",
    "log_initialize",
    "network_from_json",
    "network_to_json",
    "new_network",
    "normalize_max_abs",
    "one_point_network",
    "product_coupling",
    "rflb",
    "rslb",
    "rtlb",
    "rtlb_max",
    "sample_collection",
    "save_network",
    "sbm_sample",
    "single_linkage",
    "sinkhorn",
    "sinkhorn_log",
    "size_curve",
    "size_p",
    "sphere_discretize",
    "sphere_subsize_closed_form",
    "sphere_subsize_curve",
    "sphere_surface_area",
    "sub_size",
    "sup_size",
    "szlb",
    "tlb_cost",
    "to_newick",
    "wasserstein_1d",
    "weight_pushforward",
]
