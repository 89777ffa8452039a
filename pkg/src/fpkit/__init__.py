"""Fixed points of enriched nonexpansive self-maps of R^d.

The toolkit verifies enrichment-style conditions by sampling, reduces maps
that satisfy them to nonexpansive or contractive averaged maps, computes
fixed points by Picard/Krasnoselskij iteration, and ships a reproducible
experiment harness with a CLI.
"""

from .enrichment import (
    B_CAP,
    ConditionKind,
    EnrichmentReport,
    PairSampler,
    averaged,
    condition_ratio,
    enriched_reduction,
    min_b_affine,
    modified_shift,
    verify_condition,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    FpkitError,
    InsufficientData,
    InvariantViolation,
    IoError,
    NoConvergence,
    NonFiniteResult,
    ParameterOutOfRange,
    SchemaError,
    SearchBudgetExceeded,
)
from .harness import (
    BenchScheme,
    ExperimentConfig,
    RunSummary,
    Scheme,
    bench_compare,
    config_digest,
    config_to_doc,
    generate_affine_family,
    parse_config,
    run_experiment,
    write_bench_csv,
)
from .iteration import (
    IterationTrace,
    SolveResult,
    Status,
    StopRule,
    apriori_iterations,
    check_fixed_point,
    empirical_ratio,
    krasnoselskij,
    picard,
    solve_modified,
    write_trace_csv,
)
from .mappings import (
    Affine,
    BoxProjection,
    Composition,
    Identity,
    LinearCombinationWithIdentity,
    Mapping,
    Rotation,
    as_affine,
    evaluate,
    evaluate_many,
    line_map,
    parse_mapping,
    scaling_map,
    serialize_mapping,
)
from .spaces import DIM_CAP, NormKind, norm, operator_norm

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "B_CAP",
    "BenchScheme",
    "BoxProjection",
    "Composition",
    "ConditionKind",
    "ConfigError",
    "DIM_CAP",
    "DimensionMismatch",
    "EnrichmentReport",
    "ExperimentConfig",
    "FpkitError",
    "Identity",
    "InsufficientData",
    "InvariantViolation",
    "IoError",
    "IterationTrace",
    "LinearCombinationWithIdentity",
    "Mapping",
    "NoConvergence",
    "NonFiniteResult",
    "NormKind",
    "PairSampler",
    "ParameterOutOfRange",
    "Rotation",
    "RunSummary",
    "SchemaError",
    "Scheme",
    "SearchBudgetExceeded",
    "SolveResult",
    "Status",
    "StopRule",
    "apriori_iterations",
    "as_affine",
    "averaged",
    "bench_compare",
    "check_fixed_point",
    "condition_ratio",
    "config_digest",
    "config_to_doc",
    "empirical_ratio",
    "enriched_reduction",
    "evaluate",
    "evaluate_many",
    "generate_affine_family",
    "krasnoselskij",
    "line_map",
    "min_b_affine",
    "modified_shift",
    "norm",
    "operator_norm",
    "parse_config",
    "parse_mapping",
    "picard",
    "run_experiment",
    "scaling_map",
    "serialize_mapping",
    "solve_modified",
    "verify_condition",
    "write_bench_csv",
    "write_trace_csv",
]
