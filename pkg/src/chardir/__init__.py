"""Characteristic-direction analysis of two-class gene expression data.

The package identifies differentially expressed genes geometrically: a
unit vector normal to a linear classification boundary between the two
sample classes apportions the expression difference across genes through
its squared components. Alongside the two estimators (regression-based
and permutation-based) it ships the Welch/BH baseline, hypergeometric and
principal-angle enrichment, projection plot data, and a synthetic-data
benchmark with known ground truth.
"""

__version__ = "0.1.0"

from .data import (
    ExpressionDataError,
    ExpressionMatrix,
    GeneSet,
    GeneSetLibrary,
    TwoClassDesign,
    align_design,
    parse_design_tsv,
    parse_expression_tsv,
    parse_gmt,
)
from .direction import (
    CharacteristicDirection,
    NoDifferentialSignalError,
    SignificantGeneCall,
    call_significant,
    lr1_direction,
    np1_direction,
)
from .enrichment import (
    AngleEnrichmentResult,
    EnrichmentResult,
    angle_enrich,
    angle_null_pvalue,
    hypergeom_enrich,
    hypergeom_tail,
    overlap_curve,
    principal_angle,
    sliding_window_profile,
)
from .linalg import PcaModel, ZeroVarianceError, pca_reduce, random_rotation, solve_least_squares
from .projection import density_estimate, project, project_hierarchy
from .simulate import (
    RecoveryScore,
    SimulationOutcome,
    SyntheticSpec,
    benchmark_roc,
    benchmark_sweep,
    generate,
    score_recovery,
)
from .welch import UndefinedStatisticError, WelchResult, bh_fdr, ttest_screen, welch_test

__all__ = [
    "__version__",
    "ExpressionDataError",
    "ExpressionMatrix",
    "GeneSet",
    "GeneSetLibrary",
    "TwoClassDesign",
    "align_design",
    "parse_design_tsv",
    "parse_expression_tsv",
    "parse_gmt",
    "CharacteristicDirection",
    "NoDifferentialSignalError",
    "SignificantGeneCall",
    "call_significant",
    "lr1_direction",
    "np1_direction",
    "AngleEnrichmentResult",
    "EnrichmentResult",
    "angle_enrich",
    "angle_null_pvalue",
    "hypergeom_enrich",
    "hypergeom_tail",
    "overlap_curve",
    "principal_angle",
    "sliding_window_profile",
    "PcaModel",
    "ZeroVarianceError",
    "pca_reduce",
    "random_rotation",
    "solve_least_squares",
    "density_estimate",
    "project",
    "project_hierarchy",
    "RecoveryScore",
    "SimulationOutcome",
    "SyntheticSpec",
    "benchmark_roc",
    "benchmark_sweep",
    "generate",
    "score_recovery",
    "UndefinedStatisticError",
    "WelchResult",
    "bh_fdr",
    "ttest_screen",
    "welch_test",
]
