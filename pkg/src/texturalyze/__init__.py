"""Texture profile analysis and sensory survey statistics for burger patties."""

__version__ = "0.1.0"

from .ca import CaModel, CorrespondenceAnalysis, chi2_distance, fit_ca, project_supplementary
from .errors import AnalysisError, ConfigError, InputError, TexturalyzeError
from .ingest import (
    CurveFile,
    StudyConfig,
    SurveyRecord,
    load_config,
    load_curve_dir,
    load_survey,
    parse_config,
    parse_curve_file,
    parse_survey_file,
)
from .lmm import LmmFit, RandomInterceptLMM, fit_lmm, lmm_predict
from .stats import CorrelationResult, pearson, t_cdf, t_ppf
from .survey import ContingencyTable, build_contingency, likert_summary, ratings_matrix, zscore
from .synth import SyntheticCurveSpec, SyntheticSurveySpec, gen_curve, gen_survey
from .tpa import (
    PARAMETERS,
    CompressionProtocol,
    TPAExtractor,
    TpaParameters,
    analyze_burgers,
    analyze_curve,
    compute_tpa,
    ensemble_stats,
    segment_cycles,
)

__all__ = [
    "__version__",
    "PARAMETERS",
    "AnalysisError",
    "CaModel",
    "CompressionProtocol",
    "ConfigError",
    "ContingencyTable",
    "CorrelationResult",
    "CorrespondenceAnalysis",
    "CurveFile",
    "InputError",
    "LmmFit",
    "RandomInterceptLMM",
    "StudyConfig",
    "SurveyRecord",
    "SyntheticCurveSpec",
    "SyntheticSurveySpec",
    "TPAExtractor",
    "TexturalyzeError",
    "TpaParameters",
    "analyze_burgers",
    "analyze_curve",
    "build_contingency",
    "chi2_distance",
    "compute_tpa",
    "ensemble_stats",
    "fit_ca",
    "fit_lmm",
    "gen_curve",
    "gen_survey",
    "likert_summary",
    "lmm_predict",
    "load_config",
    "load_curve_dir",
    "load_survey",
    "parse_config",
    "parse_curve_file",
    "parse_survey_file",
    "pearson",
    "project_supplementary",
    "ratings_matrix",
    "segment_cycles",
    "t_cdf",
    "t_ppf",
    "zscore",
]
