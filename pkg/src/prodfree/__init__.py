"""Product-free subset extraction and approximate-group diagnostics.

Finite (and integer) group oracles, exact Ruzsa-style set algebra, and a
family of extraction algorithms that each return a machine-checkable
certificate: a middle-third interval in cyclic groups, a derandomized
weighted extraction in abelian groups, a subnormal-series recursion for
solvable groups, an iterated-halving pipeline with triple localization,
and a final coset-pigeonhole extraction for sets of bounded doubling.
"""

from .baselines import exhaustive_max_product_free, greedy_product_free
from .certificates import (
    ExtractionCertificate,
    TraceRecord,
    build_certificate,
    eval_inequality,
    input_digest,
    record,
    verify_certificate,
)
from .errors import (
    BudgetExceededError,
    CertificateError,
    DomainMismatchError,
    GroupAxiomError,
    GroupSpecError,
    InvariantViolationError,
    NotASubgroupError,
    NotEnumerableError,
    NotNormalError,
    NotSolvableError,
    PreconditionError,
    ProdfreeError,
    SearchExhaustedError,
    StageFailedError,
)
from .families import (
    FAMILY_NAMES,
    FamilySpec,
    generate,
    generate_with_info,
    parse_family,
)
from .groups import (
    Element,
    GroupOracle,
    ProjectionMap,
    QuotientStep,
    SubnormalSeries,
    abelian_basis,
    abelian_coords,
    build_group,
    closure_keys,
    cyclic_subgroups,
    derived_subnormal_series,
    element_order,
    generated_subgroup,
    group_spec_token_count,
    quotient_projection,
    subgroup_view,
    subnormal_series_from_chain,
    verify_group_axioms,
)
from .pipeline import (
    BoundsProfile,
    HomogeneousTuple,
    LocalizeResult,
    SehHalvingResult,
    SehStage,
    compute_bounds_profile,
    find_homogeneous_tuple,
    localize_small_triple,
    petridis_subset,
    product_free_extract,
    seh_halving,
)
from .sets import (
    ApproxGroupReport,
    MultSet,
    approx_report,
    count_incident_pairs,
    frac_str,
    inverse_set,
    is_product_free,
    power_set,
    product_set,
)
from .setio import read_set, write_set
from .sumfree import (
    SUMFREE_ALPHA,
    WeightedSet,
    alon_kleitman_weighted,
    cyclic_interval,
    interval_bounds,
    solvable_extract,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxGroupReport",
    "BoundsProfile",
    "BudgetExceededError",
    "CertificateError",
    "DomainMismatchError",
    "Element",
    "ExtractionCertificate",
    "FAMILY_NAMES",
    "FamilySpec",
    "GroupAxiomError",
    "GroupOracle",
    "GroupSpecError",
    "HomogeneousTuple",
    "InvariantViolationError",
    "LocalizeResult",
    "MultSet",
    "NotASubgroupError",
    "NotEnumerableError",
    "NotNormalError",
    "NotSolvableError",
    "PreconditionError",
    "ProdfreeError",
    "ProjectionMap",
    "QuotientStep",
    "SUMFREE_ALPHA",
    "SearchExhaustedError",
    "SehHalvingResult",
    "SehStage",
    "StageFailedError",
    "SubnormalSeries",
    "TraceRecord",
    "WeightedSet",
    "abelian_basis",
    "abelian_coords",
    "alon_kleitman_weighted",
    "approx_report",
    "build_certificate",
    "build_group",
    "closure_keys",
    "compute_bounds_profile",
    "count_incident_pairs",
    "cyclic_interval",
    "cyclic_subgroups",
    "derived_subnormal_series",
    "element_order",
    "eval_inequality",
    "exhaustive_max_product_free",
    "find_homogeneous_tuple",
    "frac_str",
    "generate",
    "generate_with_info",
    "generated_subgroup",
    "greedy_product_free",
    "group_spec_token_count",
    "input_digest",
    "interval_bounds",
    "inverse_set",
    "is_product_free",
    "localize_small_triple",
    "parse_family",
    "petridis_subset",
    "power_set",
    "product_free_extract",
    "product_set",
    "quotient_projection",
    "read_set",
    "record",
    "seh_halving",
    "solvable_extract",
    "subgroup_view",
    "subnormal_series_from_chain",
    "verify_certificate",
    "verify_group_axioms",
    "write_set",
]
