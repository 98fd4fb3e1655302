"""Emergent network geometry toolkit.

Simulates a noisy antisymmetric-matrix iteration, extracts gebits (connected
units of strong links), maximizes the likelihood of spanning-tree shell
profiles, and estimates the effective dimension of the resulting geometry.
"""

from .relational import (
    ANTISYMMETRY_TOL,
    IterationHistory,
    IteratorConfig,
    NoiseSpec,
    NumericalBlowUpError,
    Snapshot,
    check_antisymmetric,
    draw_noise,
    init_matrix,
    iterate_step,
    run_iterator,
    safe_inverse,
    singular_values,
)
from .graphs import (
    Gebit,
    LinkGraph,
    ShellProfile,
    SpanningTree,
    ThresholdSpec,
    connected_components,
    extract_links,
    shell_profile,
    spanning_tree,
)
from .likelihood import (
    ORACLE_CAP_DEFAULT,
    LikelihoodQuery,
    MaximizationResult,
    brute_force_profile,
    gradient_log_likelihood,
    log_likelihood,
    maximize_profile,
)
from .dimension import (
    DimensionCurvePoint,
    DimensionFit,
    dimension_of_p,
    empirical_dimension,
    fit_dimension,
)
from .config import (
    MODES,
    ConfigError,
    ExperimentConfig,
    config_from_mapping,
    config_to_mapping,
    format_config,
    load_config,
    parse_config_text,
)
from .experiment import (
    ExperimentReport,
    PipelineError,
    emit_report,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ANTISYMMETRY_TOL",
    "NumericalBlowUpError",
    "NoiseSpec",
    "IteratorConfig",
    "Snapshot",
    "IterationHistory",
    "check_antisymmetric",
    "init_matrix",
    "draw_noise",
    "safe_inverse",
    "iterate_step",
    "run_iterator",
    "singular_values",
    "ThresholdSpec",
    "LinkGraph",
    "Gebit",
    "ShellProfile",
    "SpanningTree",
    "extract_links",
    "connected_components",
    "shell_profile",
    "spanning_tree",
    "ORACLE_CAP_DEFAULT",
    "LikelihoodQuery",
    "MaximizationResult",
    "log_likelihood",
    "gradient_log_likelihood",
    "maximize_profile",
    "brute_force_profile",
    "DimensionFit",
    "DimensionCurvePoint",
    "fit_dimension",
    "dimension_of_p",
    "empirical_dimension",
    "MODES",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config_text",
    "format_config",
    "config_to_mapping",
    "config_from_mapping",
    "ExperimentReport",
    "PipelineError",
    "run_experiment",
    "emit_report",
]
