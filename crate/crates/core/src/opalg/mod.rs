//! Radial operator algebra and the separated operator matrices.

pub mod entries;
pub mod identities;
pub mod jet;
pub mod operator;

pub use entries::{
    build_o, build_o_dagger, principal_part, EntryPerturbation, MatrixKind, OperatorMatrix, SeparatedContext,
};
pub use identities::{verify_identities, IdentityReport};
pub use jet::{Jet, JET_CAP};
pub use operator::RadialOperator;

use crate::background::BlackHoleParams;
use crate::error::Result;
use crate::harmonics::ModeSpec;

/// Separated `D` at radius `r`: `∂_r − iω/χ²`.
pub fn separated_d(p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<RadialOperator> {
    Ok(SeparatedContext::new(p, mode, r, entries::DEFAULT_DEPTH)?.d())
}

/// Separated `Δ` at radius `r`: `−(χ²/2)(∂_r + iω/χ²)`.
pub fn separated_delta(p: &BlackHoleParams, mode: &ModeSpec, r: f64) -> Result<RadialOperator> {
    Ok(SeparatedContext::new(p, mode, r, entries::DEFAULT_DEPTH)?.delta())
}
