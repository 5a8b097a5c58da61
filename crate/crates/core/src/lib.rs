//! Solutions of the general Heun equation
//!
//! ```text
//! u'' + (γ/z + δ/(z-1) + ε/(z-a)) u' + (αβ z - q)/(z (z-1) (z-a)) u = 0
//! ```
//!
//! through expansions in Gauss hypergeometric functions, with power-series and
//! ODE-integration oracles, accessory-parameter roots for terminating
//! expansions and closed-form boundary values in the two-term regime.

pub mod accel;
pub mod closed_values;
pub mod error;
pub mod expansions;
pub mod heun;
pub mod hypergeom;
pub mod termination;
pub mod verify;

pub use error::{HeunError, Result};
pub use heun::HeunParams;
pub use hypergeom::{HyperParams2F1, SeriesValue};
