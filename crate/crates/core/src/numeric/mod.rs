//! Case-dependent storage and execution of compiled models.

mod eval;
mod jacobian;
mod system;

pub use jacobian::JacobianStore;
pub use system::{Dae, FieldValue, ModelData, Scope, System, SystemConfig};

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("{model}: unknown field `{field}`")]
    UnknownField { model: String, field: String },
    #[error("{model}: duplicate idx `{idx}`")]
    DuplicateIdx { model: String, idx: String },
    #[error("{model}.{field} of device `{idx}` must be non-zero")]
    NonZero { model: String, field: String, idx: String },
    #[error("{model}.{field} of device `{idx}`: {message}")]
    BadField { model: String, field: String, idx: String, message: String },
    #[error("{model} device `{idx}`: {indexer} refers to unknown `{target}` device `{value}`")]
    UnknownIdx { model: String, idx: String, indexer: String, target: String, value: String },
    #[error("{model}.{name}: linked value `{target}.{src}` not found or of the wrong kind")]
    BadLink { model: String, name: String, target: String, src: String },
    #[error("{model}.{discrete} of device `{idx}`: lower bound exceeds upper bound")]
    Bounds { model: String, discrete: String, idx: String },
    #[error("{model}.{discrete}: anti-windup input must be an internal state")]
    AntiWindupInput { model: String, discrete: String },
    #[error("parameters are already in per unit on the system base")]
    AlreadyConverted,
    #[error("devices cannot be added after setup")]
    Sealed,
    #[error("system is not set up")]
    NotSetUp,
    #[error("power-flow models must be registered before dynamic models (`{0}`)")]
    Registration(String),
    #[error("{model}.{element} (device `{idx}`): {source}")]
    Eval {
        model: String,
        element: String,
        idx: String,
        #[source]
        source: ExprError,
    },
}

pub type Result<T> = std::result::Result<T, NumericError>;

#[cfg(test)]
mod tests;
