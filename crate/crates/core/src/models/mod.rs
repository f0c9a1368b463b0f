//! The two economic applications: the fractional Liviatan-Samuelson model
//! and the constrained investment model.

mod investment;
mod samuelson;

pub mod fixtures;

pub use investment::{
    check_homogeneity, investment_derive, investment_relation_residual, investment_relation_residual_from,
    investment_simulate, investment_steady_state, Homogeneity, InvestmentSpec, INITIAL_LAYER,
};
pub use samuelson::{
    liviatan_el_residual, liviatan_steady_state, samuelson_derive, samuelson_equation, samuelson_residual,
    samuelson_simulate, LiviatanForm, SamuelsonParams, Utility,
};

use crate::error::FracError;

/// Turns evaluation failures caused by leaving the positive orthant into an
/// [`FracError::OrthantExit`] at time `t`.
pub(crate) fn orthant_error(err: FracError, t: f64) -> FracError {
    match err {
        FracError::NegativeBase { .. } | FracError::SingularAtOrigin { .. } => FracError::OrthantExit { t, detail: err.to_string() },
        other => other,
    }
}
