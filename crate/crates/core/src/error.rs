use thiserror::Error;

use crate::modular::Family;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series grains {0} and {1} cannot be brought to a common grain")]
    GrainMismatch(u32, u32),

    #[error("series has no invertible leading coefficient")]
    NotInvertible,

    #[error("series reversion needs zero constant term and nonzero linear term")]
    ReversionPrecondition,

    #[error("composition needs an inner series with positive valuation and an outer power series")]
    CompositionPrecondition,

    #[error("eta quotient leading exponent {numer}/{denom} is not integral at grain {grain}")]
    NonIntegralExponent { numer: i64, denom: i64, grain: u32 },

    #[error("k = {k} is a singular fiber of family {family} (singular set: {singular})")]
    SingularParameter {
        family: Family,
        k: String,
        singular: &'static str,
    },

    #[error("parameter outside the domain of this method: {0}")]
    Domain(String),

    #[error("hauptmodul inversion failed: residual {residual:e} exceeds {eps:e}")]
    InversionFailed { residual: f64, eps: f64 },

    #[error("fiber polynomial vanishes identically")]
    ZeroFiber,

    #[error("exact identity fails at exponent {exponent}: {detail}")]
    IdentityMismatch { exponent: i64, detail: String },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code for this error class: 2 for domain errors, 3 for
    /// numerical failures, 4 for malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularParameter { .. }
            | Error::Domain(_)
            | Error::UnknownCase(_)
            | Error::NonIntegralExponent { .. } => 2,
            Error::Parse(_) => 4,
            _ => 3,
        }
    }
}
