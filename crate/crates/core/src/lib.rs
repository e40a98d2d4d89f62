//! Vacuum kinetic energy of a massless scalar field in 1+1 dimensions with a
//! double-delta potential that is switched off at `t = 0`, together with the
//! quantum-inequality checks that the resulting negative-energy pulses fail.
//!
//! The crate is organised bottom-up:
//!
//! - [`quadrature`]: adaptive Gauss-Kronrod integration, semi-infinite maps and
//!   the damped-limit evaluation of conditionally convergent oscillatory integrals.
//! - [`modes`]: closed-form eigenmodes of the double-delta potential.
//! - [`evolution`]: mode functions after the potential is removed.
//! - [`energy`]: regularized energy densities, piecewise profiles and conservation.
//! - [`sampling`]: sampling functions and the lower-bound functional.
//! - [`qi`]: spatial/temporal inequality experiments and the pulse inventory.
//! - [`pointsplit`]: massive single-delta field, mode vs. point-split regularization.

pub mod energy;
pub mod error;
pub mod evolution;
pub mod modes;
pub mod pointsplit;
pub mod profile;
pub mod qi;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use modes::{Eigenmode, Family, ModeId, PotentialConfig};
pub use profile::PiecewiseProfile;
pub use quadrature::{QuadratureResult, QuadratureSpec};
