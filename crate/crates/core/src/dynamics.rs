//! Right-hand sides of the two forms of the system.
//!
//! Velocity form (time stepping):
//!
//! ```text
//! v_t = (8 b v + 2 v_x) v_x - 8 b^2 v^2
//!       + 8 b P1(2 b^2 v^2 + v_x^2) + 8 b^2 P2(4 b^2 v^2 - v_x^2)
//! ```
//!
//! Momentum form (conservative, used as a cross-check):
//!
//! ```text
//! n_t = 4 [n (v_x + 2 b v)]_x,   n = 4 b^2 v - v_xx
//! ```

use num_complex::Complex64;

use crate::grid::Field;
use crate::helmholtz::{n_from_v, v_from_n, HelmholtzParams};

#[derive(Clone, Debug)]
pub struct StateV {
    pub t: f64,
    pub v: Field,
    pub params: HelmholtzParams,
    /// Set once a non-finite value has appeared in `v`.
    pub blown_up: bool,
}

impl StateV {
    pub fn new(v: Field, params: HelmholtzParams) -> Self {
        let blown_up = !v.is_finite();
        Self {
            t: 0.0,
            v,
            params,
            blown_up,
        }
    }
}

/// Spatial derivative used inside the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// Fourier derivative, products filtered with the 2/3 rule.
    Spectral,
    /// One-sided differences against the transport coefficient `8 b v + 2 v_x`.
    Upwind,
}

/// `dv/dt` with spectral derivatives and 2/3-rule dealiasing.
pub fn rhs_v(state: &StateV) -> Field {
    rhs_v_with(&state.v, &state.params, Derivative::Spectral)
}

/// `dv/dt` for the first-order difference scheme.
pub fn rhs_v_upwind(state: &StateV) -> Field {
    rhs_v_with(&state.v, &state.params, Derivative::Upwind)
}

pub fn rhs_v_with(v: &Field, params: &HelmholtzParams, derivative: Derivative) -> Field {
    let vx = match derivative {
        Derivative::Spectral => v.derivative(),
        Derivative::Upwind => upwind_slope(v, params),
    };
    assemble(v, &vx, params, derivative == Derivative::Spectral)
}

/// `v_x` differenced from the upstream side of the transport `v_t = a v_x`.
pub(crate) fn upwind_slope(v: &Field, params: &HelmholtzParams) -> Field {
    let b = params.beta0();
    let centred = v.centered_difference();
    let wind = v.zip_map_unchecked(&centred, |v, vx| 8.0 * b * v + 2.0 * vx);
    v.upwind_derivative(&wind)
        .expect("wind is built on the same grid")
}

fn assemble(v: &Field, vx: &Field, params: &HelmholtzParams, dealias: bool) -> Field {
    let grid = v.grid();
    let b = params.beta0();
    let b2 = b * b;
    let m = params.mass();
    let n = grid.n_points();

    let (local, smooth_a, smooth_b): (Vec<f64>, Vec<f64>, Vec<f64>) = {
        let mut local = Vec::with_capacity(n);
        let mut pa = Vec::with_capacity(n);
        let mut pb = Vec::with_capacity(n);
        for (&v, &vx) in v.values().iter().zip(vx.values()) {
            let v2 = v * v;
            let vx2 = vx * vx;
            local.push((8.0 * b * v + 2.0 * vx) * vx - 8.0 * b2 * v2);
            pa.push(2.0 * b2 * v2 + vx2);
            pb.push(4.0 * b2 * v2 - vx2);
        }
        (local, pa, pb)
    };

    let local_hat = grid.forward(&local);
    let a_hat = grid.forward(&smooth_a);
    let b_hat = grid.forward(&smooth_b);

    let nyquist = grid.nyquist_index();
    let cutoff = n / 3;
    let spectrum = (0..n)
        .map(|j| {
            let index = if j <= n / 2 { j } else { n - j };
            if dealias && index > cutoff {
                return Complex64::new(0.0, 0.0);
            }
            let k = grid.wavenumbers()[j];
            let p2 = 1.0 / (m + k * k);
            let p1 = if j == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k * p2)
            };
            local_hat[j] + a_hat[j] * p1 * (8.0 * b) + b_hat[j] * (8.0 * b2 * p2)
        })
        .collect();
    Field::from_parts(grid, grid.inverse(spectrum))
}

/// `dn/dt = 4 d_x[n (v_x + 2 b v)]` with `v = P2 n`, all derivatives spectral.
pub fn rhs_n(n: &Field, params: &HelmholtzParams) -> Field {
    let v = v_from_n(n, params);
    let vx = v.derivative();
    let b = params.beta0();
    let flux: Vec<f64> = n
        .values()
        .iter()
        .zip(v.values().iter().zip(vx.values()))
        .map(|(&n, (&v, &vx))| 4.0 * n * (vx + 2.0 * b * v))
        .collect();
    Field::from_parts(n.grid(), flux).derivative()
}

/// `|| (4b^2 - d_xx) rhs_v(v) - rhs_n(n(v)) ||_inf / max(1, ||n(v)||_inf)`.
pub fn consistency_residual(v: &Field, params: &HelmholtzParams) -> f64 {
    let n = n_from_v(v, params);
    let state = StateV::new(v.clone(), *params);
    let lhs = n_from_v(&rhs_v(&state), params);
    let rhs = rhs_n(&n, params);
    let err = lhs.zip_map_unchecked(&rhs, |a, b| a - b).max_abs();
    err / n.max_abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn params(b: f64) -> HelmholtzParams {
        HelmholtzParams::new(b).unwrap()
    }

    #[test]
    fn zero_and_constants_are_steady() {
        let g = Grid::new(16.0, 128).unwrap();
        for b in [1.0, -0.5, 2.0] {
            for c in [0.0, 0.3, -1.7] {
                let s = StateV::new(Field::constant(&g, c), params(b));
                assert!(rhs_v(&s).max_abs() < 1e-13, "b {b} c {c}");
                assert!(rhs_v_upwind(&s).max_abs() < 1e-13, "b {b} c {c}");
                let n = Field::constant(&g, params(b).mass() * c);
                assert!(rhs_n(&n, &params(b)).max_abs() < 1e-13);
                assert!(consistency_residual(&s.v, &params(b)) < 1e-13);
            }
        }
    }

    #[test]
    fn momentum_rhs_integrates_to_zero() {
        let g = Grid::new(16.0, 1024).unwrap();
        let n = Field::sample(&g, |x| (-(x - 0.5) * (x - 0.5) * 3.0).exp() - 0.4 * (-x * x).exp())
            .unwrap();
        let r = rhs_n(&n, &params(1.0));
        assert!(r.integral().abs() < 1e-10);
    }

    #[test]
    fn forms_agree_on_smooth_data() {
        let g = Grid::new(16.0, 4096).unwrap();
        let v = Field::sample(&g, |x| 0.8 * (-x * x / 0.5).exp() - 0.3 * (-(x - 2.0).powi(2)).exp())
            .unwrap();
        for b in [1.0, -1.0, 0.5] {
            let r = consistency_residual(&v, &params(b));
            assert!(r < 1e-6, "b {b}: residual {r}");
        }
    }

    #[test]
    fn exact_peakon_time_derivative() {
        // v = exp(-2 |x - 1 + 8t|): v_t = -16 sgn(x - 1) v at t = 0.
        // Compare against a centred time difference of the closed form.
        let g = Grid::new(16.0, 4096).unwrap();
        let v = Field::sample(&g, |x| (-2.0 * (x - 1.0).abs()).exp()).unwrap();
        let s = StateV::new(v, params(1.0));
        let rhs = rhs_v(&s);
        let h = 1e-6;
        let dx = g.dx();
        for i in 0..g.n_points() {
            let x = g.x(i);
            if (x - 1.0).abs() <= 5.0 * dx || x.abs() > 8.0 {
                continue;
            }
            let exact = |t: f64| (-2.0f64 * (x - 1.0 + 8.0 * t).abs()).exp();
            let vt = (exact(h) - exact(-h)) / (2.0 * h);
            let err = (rhs.values()[i] - vt).abs();
            // spectral ripples from the kink decay with distance from the crest
            assert!(err < 20.0 * dx / (x - 1.0).abs() + 1e-3,
                "x {x}: rhs {} vs {vt}", rhs.values()[i]);
        }
    }

    #[test]
    fn reflection_equivariance() {
        let g = Grid::new(16.0, 1024).unwrap();
        let v = Field::sample(&g, |x| (-(x - 0.7).powi(2)).exp() + 0.2 * (-(x + 2.0).powi(2) * 2.0).exp())
            .unwrap();
        let p = params(0.8);
        let direct = rhs_v(&StateV::new(v.clone(), p)).mirror();
        let mirrored = rhs_v(&StateV::new(v.mirror(), p.flipped()));
        let err = direct.zip_map(&mirrored, |a, b| a - b).unwrap().max_abs();
        assert!(err < 1e-8 * direct.max_abs().max(1.0), "err {err}");
    }
}
