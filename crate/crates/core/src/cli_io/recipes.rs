//! Shipped configurations for the three reference simulations, read from
//! `recipes/*.toml` at the workspace root.

use crate::error::{Error, Result};

/// Negative momentum bump `n0 = -20 e f(20 x)`; blows up before `1 / (12 e)`.
pub const FIG1: &str = include_str!("../../../../recipes/fig1.toml");

/// Nonnegative momentum `n0 = f(x)`; the solution is global.
pub const FIG2: &str = include_str!("../../../../recipes/fig2.toml");

/// Single peakon `a1 = a2 = 1`, first-order upwind scheme.
pub const FIG3: &str = include_str!("../../../../recipes/fig3.toml");

pub const NAMES: [&str; 3] = ["fig1", "fig2", "fig3"];

pub fn recipe(name: &str) -> Result<&'static str> {
    match name {
        "fig1" => Ok(FIG1),
        "fig2" => Ok(FIG2),
        "fig3" => Ok(FIG3),
        other => Err(Error::Config(format!(
            "unknown recipe `{other}` (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}
