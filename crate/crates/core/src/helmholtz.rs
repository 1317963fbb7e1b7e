//! The nonlocal operators `P2 = (4 beta0^2 - d_xx)^{-1}` and `P1 = d_x P2`.
//!
//! Two independent routes are provided: the Fourier symbol
//! `1 / (4 beta0^2 + k^2)` and a direct physical-space convolution with the
//! periodized Green's function `exp(-2 |beta0| |x|) / (4 |beta0|)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Field;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelmholtzParams {
    beta0: f64,
}

impl HelmholtzParams {
    pub fn new(beta0: f64) -> Result<Self> {
        if !beta0.is_finite() || beta0 == 0.0 {
            return Err(Error::Parameter(format!(
                "beta0 must be finite and nonzero, got {beta0}"
            )));
        }
        Ok(Self { beta0 })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// `4 beta0^2`, the zero-frequency value of the inverse symbol.
    pub fn mass(&self) -> f64 {
        4.0 * self.beta0 * self.beta0
    }

    pub fn flipped(&self) -> Self {
        Self { beta0: -self.beta0 }
    }
}

pub fn apply_p2(f: &Field, params: &HelmholtzParams) -> Field {
    let m = params.mass();
    let values = f
        .grid()
        .apply_multiplier(f.values(), |_, k| Complex64::new(1.0 / (m + k * k), 0.0));
    Field::from_parts(f.grid(), values)
}

pub fn apply_p1(f: &Field, params: &HelmholtzParams) -> Field {
    let m = params.mass();
    let nyquist = f.grid().nyquist_index();
    let values = f.grid().apply_multiplier(f.values(), |j, k| {
        if j == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k / (m + k * k))
        }
    });
    Field::from_parts(f.grid(), values)
}

/// Periodized Green's function of `4 beta0^2 - d_xx` at separation `z`.
///
/// Images `z + 2Lm` are summed until a term drops below `1e-16`.
pub fn periodized_kernel(z: f64, half_width: f64, params: &HelmholtzParams) -> f64 {
    let b = params.beta0().abs();
    let period = 2.0 * half_width;
    let norm = 1.0 / (4.0 * b);
    let mut total = norm * (-2.0 * b * z.abs()).exp();
    for sign in [1.0, -1.0] {
        let mut m = 1.0;
        loop {
            let term = norm * (-2.0 * b * (z + sign * m * period).abs()).exp();
            total += term;
            if term < 1e-16 {
                break;
            }
            m += 1.0;
        }
    }
    total
}

/// Discrete periodic convolution with the periodized Green's function.
///
/// The weights are `dx * G(x_i - x_j)` with one correction: the trapezoid rule
/// over the kink of `G` at zero separation carries an `O(dx^2)` error equal to
/// `dx^2 f(x_i) / 12`, which is subtracted from the self weight. The remainder
/// is `O(dx^4)` for smooth `f`.
pub fn green_convolve(f: &Field, params: &HelmholtzParams) -> Field {
    let grid = f.grid();
    let n = grid.n_points();
    let dx = grid.dx();
    let mut weights: Vec<f64> = (0..n)
        .map(|offset| {
            let z = if offset <= n / 2 {
                offset as f64 * dx
            } else {
                (offset as f64 - n as f64) * dx
            };
            dx * periodized_kernel(z, grid.half_width(), params)
        })
        .collect();
    weights[0] -= dx * dx / 12.0;
    let values = f.values();
    let out = (0..n)
        .map(|i| {
            // sum_j w[(i - j) mod n] f[j], split to avoid a modulo per term
            let mut acc = 0.0;
            for (j, &fj) in values[..=i].iter().enumerate() {
                acc += weights[i - j] * fj;
            }
            for (j, &fj) in values[i + 1..].iter().enumerate() {
                acc += weights[n - 1 - j] * fj;
            }
            acc
        })
        .collect();
    Field::from_parts(grid, out)
}

pub fn v_from_n(n: &Field, params: &HelmholtzParams) -> Field {
    apply_p2(n, params)
}

/// `n = 4 beta0^2 v - v_xx` with the spectral second derivative.
pub fn n_from_v(v: &Field, params: &HelmholtzParams) -> Field {
    let m = params.mass();
    let values = v
        .grid()
        .apply_multiplier(v.values(), |_, k| Complex64::new(m + k * k, 0.0));
    Field::from_parts(v.grid(), values)
}
