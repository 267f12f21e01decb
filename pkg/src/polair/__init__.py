"""Capacity and achievable information rates of unitary MIMO-AWGN channels.

Simulates the dual-polarization optical drift channel: a Haar-random
unitary channel with AWGN, pilot-aided LS and Kabsch channel estimation,
and the mismatched-decoding rate bounds that quantify the cost of
imperfect channel knowledge.
"""

__version__ = "0.1.0"

from .air import (
    AirEstimate,
    air_corollary1,
    air_corollary2_mc,
    air_corollary4,
    air_discrete_mc,
    air_discrete_paired_mc,
    air_gaussian_paired_mc,
    air_synthetic_mc,
    air_theorem1,
    capacity_perfect,
    mi_discrete_mc,
    mi_gaussian_given_H,
    synthetic_estimates,
)
from .channel import (
    ChannelParams,
    Constellation,
    PilotMatrix,
    TransmissionBlock,
    constellation_to_csv,
    make_constellation,
    make_pilots,
    sample_channel,
    transmit,
)
from .estimators import (
    ErrorStats,
    EstimatorSpec,
    KabschEstimator,
    LeastSquaresEstimator,
    empirical_error_covariance,
    error_matrix,
    error_stats_to_json,
    estimate_kabsch,
    estimate_ls,
    make_estimator,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    SweepRow,
    default_config,
    run_error_cov,
    run_experiment,
    run_fig2,
    run_fig3,
    run_fig4,
)
from .linalg import (
    SingularMatrixError,
    SvdResult,
    dagger,
    det,
    fro_norm,
    haar_unitary,
    inverse,
    matmul,
    sample_cgauss,
    sample_cgauss_vector,
    svd,
    trace,
)
