"""Joint channel estimation and pilot allocation for underlay cognitive MISO networks.

Submodules
----------
channel_model    ULA steering vectors, angular-spread covariances, channel draws
pilot_signaling  pilots, training matrices, contaminated uplink observations
estimators       NMMSE / MMSE / contamination-constrained MMSE filters and MSEs
allocation       overlap and chordal metrics, RPA / MPA / HPA / UGPA allocators
experiments      scenario drops, Monte Carlo sweeps, CSV/JSON reports
cli              ``cogpilot`` command line
"""
__version__ = "0.1.0"

from .channel_model import (  # noqa: E402
    AngularProfile,
    CovarianceMatrix,
    SpreadLaw,
    effective_rank_fraction,
    multipath_channel,
    sample_channel,
    spread_covariance,
    steering_vector,
)
from .estimators import (  # noqa: E402
    CmmseConfig,
    EstimatorFilter,
    EstimatorKind,
    analytic_mse_cmmse,
    analytic_mse_cognitive,
    analytic_mse_primary,
    cmmse_at,
    cmmse_filter,
    contamination_level,
    estimate,
    mmse_filter,
    nmmse_filter,
)
from .pilot_signaling import make_pilot, matched_filter, received_uplink, training_matrix  # noqa: E402
from .allocation import (  # noqa: E402
    Allocation,
    Allocator,
    UserSet,
    allocate_hpa,
    allocate_mpa,
    allocate_rpa,
    allocate_ugpa,
    chordal_distance,
    overlap_metric,
)
from .experiments import MseReport, ScenarioConfig, build_scenario, sweep, write_report  # noqa: E402
