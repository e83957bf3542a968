"""Desk-scale laboratory for the moment-dependent size breakdown of Gaussian max tests."""

from .errors import BudgetExceededError, DomainError
from .gaussian_extremes import (
    CriticalValue,
    Method,
    Statistic,
    gaussian_max_exceed,
    max_critical_asymptotic,
    max_critical_exact,
    normal_cdf,
    normal_quantile,
)
from .heavy_tail import (
    HeavyTailDistribution,
    absolute_moment_check,
    cdf_G,
    cdf_P,
    quantile_G,
    sample,
    sigma_squared,
)
from .monte_carlo import (
    DataLaw,
    Estimator,
    ExperimentConfig,
    McEstimate,
    derive_replication_seed,
    gae_at_threshold,
    simulate,
    simulate_column_power,
    simulate_direct,
    simulate_thresholds,
)
from .theory_bounds import (
    Regime,
    RegimeReport,
    classify_regime,
    e_minus_M_envelope,
    nagaev_size_lower_bound,
    phase_threshold,
)

__version__ = "0.1.0"
