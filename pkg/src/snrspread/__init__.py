"""Output-SNR variability analysis for noisy compressed sensing.

Library + CLI for quantifying how the output signal-to-noise ratio of
compressive measurements spreads over the signal support, as a function of
the sensing-matrix ensemble: noise model and folding, analytic SNR
distributions and coefficients of variation, oracle-assisted recovery
bounds, and the Monte Carlo experiments that validate them.
"""

from .analytic import (
    AnalyticMoments,
    DiscretePmf,
    GammaParams,
    analytic_cv,
    bernoulli_dm2_moments,
    bernoulli_dm_pmf,
    gamma_cdf,
    gamma_pdf,
    gaussian_conditional_snr_dist,
    marginal_gaussian_moments,
    rademacher_dm2_moments,
)
from .ensembles import (
    MatrixEnsemble,
    SensingMatrix,
    bernoulli,
    coherence,
    draw_matrix,
    gaussian,
    load_matrix,
    monte_carlo_rip_lower_bound,
    rademacher,
    rip_constant,
    row_orthogonal_scaled,
    save_matrix,
    trace_gram,
    unit_normalize_columns,
)
from .experiments import (
    CvSweepResult,
    ExperimentConfig,
    RmseSweepResult,
    SnrStats,
    conditional_snr_samples,
    cv_vs_k_sweep,
    gamma_fit_check,
    marginal_snr_stats,
    rmse_sweep,
)
from .linalg import RandomStream, least_squares, matvec
from .signals import (
    BudgetExceededError,
    MagnitudeModel,
    SparseSignal,
    draw_magnitudes,
    enumerate_supports,
    load_signal,
    sample_support,
    sample_supports,
    save_signal,
    unrank_support,
)
from .snr import (
    NoiseSpec,
    SnrValue,
    measure,
    noise_covariance,
    oracle_estimate,
    output_snr,
    recovered_snr,
    rsnr_osnr_bounds,
    sigma0_sq,
)

__version__ = "0.1.0"
