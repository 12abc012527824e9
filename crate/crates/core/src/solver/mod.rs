//! Closed-form extremal solve, scale calibration and the reference oracle.

mod checks;
mod oracle;
mod state;

pub use checks::{
    almost_invariance_profile, epsilon_scan, proportionality_constant, stationarity_check,
    InvarianceProfile, ScanPoint, ScanResult,
};
pub use oracle::{oracle_minimize, OracleResult};
pub use state::{
    calibrate_scale, calibrate_scale_real, residual_at_scale, residual_infimum, solve_extremal,
    solve_scaled, ExtremalState,
};
