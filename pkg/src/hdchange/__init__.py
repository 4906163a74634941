"""Least-squares estimation and inference for a single mean change point in a high-dimensional series."""

from .changepoint import (
    BoundaryDecision,
    ChangePointFit,
    algorithm1,
    algorithm2,
    boundary_test,
    coarse_grid_init,
    plugin_argmin,
    update_step,
)
from .datagen import DesignSpec, GeneratedSeries, MeanProfile, NoiseFamily, gen_noise, gen_series, standard_means, toeplitz_factor
from .harness import (
    ExperimentConfig,
    MetricRow,
    run_estimation_experiment,
    run_inference_experiment,
    run_initializer_sweep,
    run_scaling_sweep,
)
from .inference import (
    DegenerateJumpError,
    IntervalResult,
    VarianceEstimate,
    confidence_interval,
    estimate_jump,
    estimate_sigma_inf,
    plugin_estimates,
)
from .limitdist import (
    IncrementLaw,
    Regime,
    RegimeKind,
    RwConfig,
    quantile_nonvanishing,
    quantile_vanishing,
    simulate_brownian_argmax,
    simulate_rw_argmax,
)
from .mean_estimation import (
    LambdaGrid,
    MeanPair,
    bic_score,
    default_lambda_grid,
    refit_means,
    soft_threshold,
    thresholded_means,
    tune_lambda,
)
from .model import GainProfile, JumpSummary, SeriesMatrix, center_columns, gain_profile, squared_loss

__version__ = "0.1.0"
