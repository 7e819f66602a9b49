"""avinfer: anytime-valid inference for streams.

Time-uniform p-values and confidence sequences for the mean, a sequential
conditional-independence test built on regression residuals, the
boundary-crossing distribution they share, and a Monte Carlo laboratory
that checks the distributional claims by simulation.
"""

__version__ = "0.1.0"

from .rsdist import (
    normal_cdf,
    normal_pdf,
    normal_sf,
    rs_cdf,
    rs_density,
    rs_quantile,
    rs_survival,
)
from .streaming import MomentAccumulator
from .mean import (
    AnytimeResult,
    SequencingError,
    anytime_p_value,
    anytime_test,
    boundary,
    confidence_sequence,
    evaluate,
)
from .gcm import (
    DegenerateVarianceError,
    GcmState,
    KernelRegressor,
    KnnRegressor,
    Triplet,
    batch_gcm_p_value,
    batch_gcm_statistic,
    gcm_evaluate,
    gcm_p_value,
    gcm_statistic,
    gcm_update,
)
from .families import Family, cit_stream, family_names, get_family
from .coupling import (
    EmpiricalCdf,
    LilReport,
    PathConfig,
    boundary_crossing_rate,
    default_lil_grid,
    ks_distance,
    lil_envelope_check,
    partial_sum_sup_samples,
    simulate_partial_sum_sup,
    simulate_wiener_sup,
    wiener_sup_samples,
    write_samples_csv,
)
from .harness import (
    CitCurves,
    ConfigError,
    ExperimentConfig,
    RejectionCurve,
    default_batch_grid,
    run_cit_experiment,
    run_mean_calibration,
    run_mean_calibration_multi,
    run_mean_coverage,
    write_curve_csv,
    write_experiment,
)
from .rng import substream

__all__ = [
    "__version__",
    # boundary distribution
    "rs_cdf", "rs_survival", "rs_density", "rs_quantile",
    "normal_cdf", "normal_sf", "normal_pdf",
    # streaming moments
    "MomentAccumulator",
    # anytime mean inference
    "AnytimeResult", "SequencingError", "anytime_p_value", "anytime_test",
    "confidence_sequence", "evaluate", "boundary",
    # conditional independence
    "DegenerateVarianceError", "GcmState", "KnnRegressor", "KernelRegressor",
    "Triplet", "gcm_update", "gcm_statistic", "gcm_p_value", "gcm_evaluate",
    "batch_gcm_statistic", "batch_gcm_p_value",
    # families / DGPs
    "Family", "get_family", "family_names", "cit_stream",
    # Monte Carlo lab
    "PathConfig", "EmpiricalCdf", "ks_distance", "simulate_wiener_sup",
    "wiener_sup_samples", "simulate_partial_sum_sup", "partial_sum_sup_samples",
    "boundary_crossing_rate", "LilReport", "default_lil_grid",
    "lil_envelope_check", "write_samples_csv",
    # experiments
    "ExperimentConfig", "ConfigError", "RejectionCurve", "CitCurves",
    "run_mean_calibration", "run_mean_calibration_multi", "run_mean_coverage",
    "run_cit_experiment", "default_batch_grid", "write_curve_csv",
    "write_experiment",
    # rng
    "substream",
]
