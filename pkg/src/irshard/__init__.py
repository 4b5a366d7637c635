"""Simulation and large-system analysis of IRS-aided multi-antenna channels."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, IRSError, NumericalError
from .geometry import ArrayGeometry, Direction, array_response, exponent, exponents, index_maps
from .channel import (
    ChannelRealization,
    CovarianceMatrix,
    SystemParams,
    build_los_T,
    build_los_h_bar,
    build_sinc_covariance,
    sample_direct,
    sample_reflect,
)
from .capacity import PhaseProfile, capacity, compose_end_to_end, optimal_phases
from .analytic import (
    CapacityStatistics,
    HardeningDiagnostics,
    ScalingModel,
    alpha_bar,
    analytic_capacity_stats,
    analytic_moments,
    check_eigen_conditions,
    far_field_check,
    hardening_fit,
)
from .montecarlo import (
    CampaignConfig,
    EmpiricalStats,
    RunningMoments,
    SweepRecord,
    histogram,
    ks_against_gaussian,
    run_campaign,
    sweep_N,
)
