//! Adjoint-operator perturbation framework for static charged dilaton black
//! holes: background data, separated operator matrices, Debye-potential
//! integration, field reconstruction and the conserved radial bilinears.

pub mod background;
pub mod conserved;
pub mod error;
pub mod harmonics;
pub mod opalg;
pub mod reconstruct;
pub mod solver;

pub use background::{eval_background, params_from_horizons, Background, BlackHoleParams};
pub use error::{Error, Result};
pub use harmonics::ModeSpec;
