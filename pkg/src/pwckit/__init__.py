"""Exact computations for clustered dry-set measures on binary-tree leaves.

The package computes partition functions, free energies, and dry-set
densities for Gibbs measures on leaf subsets whose energy couples the
subset size with a clustering penalty, via dynamic programs over subtree
decompositions. It also ships size-resolved canonical tables, exact
top-down samplers, brute-force enumeration oracles for cross-checking,
and diagnostics for locating the wetting threshold.
"""

from .logdomain import LogReal, log_add, log_sum, log_sum_array
from .tree import (
    LeafSet,
    Vertex,
    beta_profile,
    branching_points,
    is_more_clustered,
    joint_ages,
    leaf_meet_age,
)
from .patterns import (
    Pattern1,
    Pattern2,
    entropy1,
    entropy2,
    enumerate_patterns1,
    log_entropy1,
    pattern1_of,
    pattern2_of,
)
from .capacity import (
    ConductanceProfile,
    LeafMeasure,
    alpha_profile,
    cap_quadratic,
    cap_reduce,
    cap_table,
    flow_energy,
)
from .clustering import (
    CapacityClustering,
    FirstOrderClustering,
    HArray,
    HSequence,
    SecondOrderClustering,
    SpecConfigError,
    UnsupportedVariant,
    ZeroClustering,
    capacity_uniform,
    check_monotone,
    dgff_spec,
    first_linear,
    first_logcorrected,
    load_spec_file,
    parse_preset,
    phi,
    random_capacity,
    random_first_order,
    random_second_order,
    save_spec_file,
    spec_from_doc,
    zero_spec,
)
from .dp import CanonicalTable, dp_W, dp_W_maxterm, dp_Z, dp_density, zeta
from .oracle import (
    ExactDistribution,
    enum_W,
    enum_Z,
    enum_density,
    enum_maxterm,
    enum_phi,
    enum_zeta,
    phi_vector,
)
from .analysis import (
    BracketError,
    CertificateFirst,
    CertificateSecond,
    DiagnosticCurve,
    Kappa1Report,
    Kappa2Report,
    LegendreResult,
    OmegaCurve,
    TauberianReport,
    WettingReport,
    binary_entropy,
    certificate_first,
    certificate_second,
    estimate_jstar,
    kappa1,
    kappa2,
    laplace_first,
    laplace_second,
    legendre,
    minimal_certificate_depth,
    tauberian_first,
    tauberian_second,
)
from .sampler import DensityEstimate, Sampler, empirical_density, sample

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "CanonicalTable",
    "CapacityClustering",
    "CertificateFirst",
    "CertificateSecond",
    "ConductanceProfile",
    "DensityEstimate",
    "DiagnosticCurve",
    "ExactDistribution",
    "FirstOrderClustering",
    "HArray",
    "HSequence",
    "Kappa1Report",
    "Kappa2Report",
    "LeafMeasure",
    "LeafSet",
    "LegendreResult",
    "LogReal",
    "OmegaCurve",
    "Pattern1",
    "Pattern2",
    "Sampler",
    "SecondOrderClustering",
    "SpecConfigError",
    "TauberianReport",
    "UnsupportedVariant",
    "Vertex",
    "WettingReport",
    "ZeroClustering",
    "alpha_profile",
    "beta_profile",
    "binary_entropy",
    "branching_points",
    "cap_quadratic",
    "cap_reduce",
    "cap_table",
    "capacity_uniform",
    "certificate_first",
    "certificate_second",
    "check_monotone",
    "dgff_spec",
    "dp_W",
    "dp_W_maxterm",
    "dp_Z",
    "dp_density",
    "empirical_density",
    "entropy1",
    "entropy2",
    "enum_W",
    "enum_Z",
    "enum_density",
    "enum_maxterm",
    "enum_phi",
    "enum_zeta",
    "enumerate_patterns1",
    "estimate_jstar",
    "first_linear",
    "first_logcorrected",
    "flow_energy",
    "is_more_clustered",
    "joint_ages",
    "kappa1",
    "kappa2",
    "laplace_first",
    "laplace_second",
    "leaf_meet_age",
    "legendre",
    "load_spec_file",
    "log_add",
    "log_entropy1",
    "log_sum",
    "log_sum_array",
    "minimal_certificate_depth",
    "parse_preset",
    "pattern1_of",
    "pattern2_of",
    "phi",
    "phi_vector",
    "random_capacity",
    "random_first_order",
    "random_second_order",
    "sample",
    "save_spec_file",
    "spec_from_doc",
    "zero_spec",
    "zeta",
]
