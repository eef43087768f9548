//! Sample paths of forward and backward models and their statistics.

mod covariance;
mod dump;
mod noise;
mod paths;
mod stats;

pub use covariance::output_covariance;
pub use dump::{path_columns, write_path_dump};
pub use noise::{gen_white_noise, NoiseSource, GENERATOR_ID};
pub use paths::{
    derive_dual_increments, derive_dual_input, exact_step, roundtrip_check, roundtrip_path,
    roundtrip_with, run_backward_discrete, run_forward_discrete, simulate_backward_discrete,
    simulate_continuous, simulate_discrete, BackwardRun, ExactStep, ForwardRun, RoundtripError,
    SamplePath, MAX_STEP_SCALE,
};
pub use stats::{
    backward_orthogonality_check, covariance_rel_error, cross_covariance, dual_autocovariance_gap,
    estimate_autocovariance, max_autocorrelation, orthogonality_at, run_statistics,
    variance_deviation, StatReport, Thresholds, COVARIANCE_REL_TOL, REVERSE_STREAM, ROUNDTRIP_TOL,
};
