//! Analyses over a loaded system: power flow, initialization, time-domain
//! simulation and small-signal eigenvalues.

mod eig;
mod init;
mod newton;
mod pf;
mod tds;

pub use eig::{compute_state_matrix, eigen_report, EigenReport, Mode};
pub use init::{initialize_dynamics, InitConfig};
pub use newton::solve_algebraic;
pub use pf::{solve_power_flow, PowerFlowConfig, PowerFlowResult, Timing};
pub use tds::{run_tds, Event, Integrator, TdsConfig, TdsResult};

use crate::linalg::LinalgError;
use crate::numeric::NumericError;

#[derive(Debug, thiserror::Error)]
pub enum RoutineError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("singular Jacobian: no usable pivot for `{variable}`")]
    Singular { variable: String },
    #[error(transparent)]
    Linalg(LinalgError),
    #[error("{routine} did not converge in {iterations} iterations (max residual {residual:.3e})")]
    NoConvergence { routine: &'static str, iterations: usize, residual: f64 },
    #[error("islanded buses without a reference: {}", buses.join(", "))]
    Islanded { buses: Vec<String> },
    #[error("{model}: iterative initialization of {} did not converge", vars.join(", "))]
    Init { model: String, vars: Vec<String> },
    #[error("initialization leaves residual {residual:.3e} at `{equation}`")]
    Inconsistent { equation: String, residual: f64 },
    #[error("time step at t = {t:.6} s failed: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<RoutineError>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, RoutineError>;
