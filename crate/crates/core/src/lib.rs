//! Numerical laboratory for the N-peakon evolution system
//!
//! ```text
//! n_t = 4 [n (v_x + 2 beta0 v)]_x,   n = 4 beta0^2 v - v_xx
//! ```
//!
//! on a periodic box `[-L, L)`: a pseudospectral and a first-order upwind
//! solver for the velocity form, the nonlocal Helmholtz operators computed two
//! ways, characteristic (flow map) integration, sign and energy monitors, the
//! finite-time blow-up certificate, exact peakon data, and a Littlewood-Paley
//! Besov-norm estimator.

pub mod analysis;
pub mod besov;
pub mod cli_io;
pub mod blowup;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod helmholtz;
pub mod peakon;
pub mod timestepper;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use helmholtz::HelmholtzParams;
