//! Sufficient condition for finite-time blow-up and the comparison ODE.
//!
//! With `b = (16 b0^2 ||v0||_inf)^2 + (8 b0 ||v0_x||_inf)^2` and
//! `T1 = 1 / (32 max(b0^2, b0^-2) ||v0||_W1inf)`, any point `x0` with
//!
//! ```text
//! n0(x0) < -sqrt(b/2) + sqrt(2b) / (1 - exp(2 sqrt(2b) T1))
//! ```
//!
//! forces blow-up no later than
//! `T2 = ln((sqrt2 n0 - sqrt b) / (sqrt2 n0 + sqrt b)) / (2 sqrt(2b))`,
//! the divergence time of the supersolution `f' = -2 f^2 + b`, `f(0) = n0(x0)`.

use crate::analysis::w1inf_norm;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::helmholtz::{v_from_n, HelmholtzParams};

/// Sup norms of the initial velocity and its slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormBounds {
    pub v_sup: f64,
    pub vx_sup: f64,
}

impl NormBounds {
    pub fn measured(v0: &Field) -> Self {
        Self {
            v_sup: v0.max_abs(),
            vx_sup: v0.derivative().max_abs(),
        }
    }

    pub fn w1inf(&self) -> f64 {
        self.v_sup + self.vx_sup
    }
}

pub fn compute_b(v0: &Field, params: &HelmholtzParams) -> f64 {
    compute_b_from_bounds(&NormBounds::measured(v0), params)
}

pub fn compute_b_from_bounds(bounds: &NormBounds, params: &HelmholtzParams) -> f64 {
    let b = params.beta0();
    let low = 16.0 * b * b * bounds.v_sup;
    let high = 8.0 * b * bounds.vx_sup;
    low * low + high * high
}

/// `None` for identically zero data.
pub fn compute_t1(v0: &Field, params: &HelmholtzParams) -> Option<f64> {
    t1_from_norm(w1inf_norm(v0), params)
}

pub fn compute_t1_from_bounds(bounds: &NormBounds, params: &HelmholtzParams) -> Option<f64> {
    t1_from_norm(bounds.w1inf(), params)
}

fn t1_from_norm(norm: f64, params: &HelmholtzParams) -> Option<f64> {
    let b2 = params.beta0() * params.beta0();
    let weight = b2.max(1.0 / b2);
    (norm > 0.0 && norm.is_finite()).then(|| 1.0 / (32.0 * weight * norm))
}

/// `None` when `b = 0` or `T1` is not positive: the condition then says
/// nothing.
pub fn blowup_threshold(b: f64, t1: f64) -> Option<f64> {
    if !(b > 0.0 && t1 > 0.0) {
        return None;
    }
    let root = (2.0 * b).sqrt();
    let growth = (2.0 * root * t1).exp();
    let tail = if growth.is_infinite() { 0.0 } else { root / (1.0 - growth) };
    Some(-(b / 2.0).sqrt() + tail)
}

/// Divergence time of `f' = -2 f^2 + b` from `f(0) = n0_at_x0`.
///
/// Requires `n0_at_x0 < -sqrt(b/2)`. At `b = 0` the limit `-1 / (2 n0)` is
/// returned.
pub fn compute_t2(n0_at_x0: f64, b: f64) -> Result<f64> {
    if !(b >= 0.0) || !n0_at_x0.is_finite() {
        return Err(Error::Domain(format!("invalid arguments n0 = {n0_at_x0}, b = {b}")));
    }
    let rest = -(b / 2.0).sqrt();
    if !(n0_at_x0 < rest) {
        return Err(Error::Domain(format!(
            "n0(x0) = {n0_at_x0} must lie below -sqrt(b/2) = {rest}"
        )));
    }
    if b == 0.0 {
        return Ok(-1.0 / (2.0 * n0_at_x0));
    }
    let s2 = std::f64::consts::SQRT_2;
    let ratio = (s2 * n0_at_x0 - b.sqrt()) / (s2 * n0_at_x0 + b.sqrt());
    Ok(ratio.ln() / (2.0 * (2.0 * b).sqrt()))
}

/// Closed-form solution of `f' = -2 f^2 + b`, `f(0) = f0`:
/// `sqrt(b/2) (1 + C e^{-2 sqrt(2b) t}) / (1 - C e^{-2 sqrt(2b) t})` with
/// `C = (sqrt2 f0 - sqrt b) / (sqrt2 f0 + sqrt b)`.
///
/// Fails at or after the divergence time.
pub fn supersolution_ode(f0: f64, b: f64, t: f64) -> Result<f64> {
    if !(b >= 0.0) || !f0.is_finite() || !(t >= 0.0) {
        return Err(Error::Domain(format!("invalid arguments f0 = {f0}, b = {b}, t = {t}")));
    }
    if let Ok(t2) = compute_t2(f0, b) {
        if t >= t2 {
            return Err(Error::Domain(format!(
                "t = {t} is past the divergence time {t2}"
            )));
        }
    }
    if b == 0.0 {
        return Ok(f0 / (1.0 + 2.0 * f0 * t));
    }
    let s2 = std::f64::consts::SQRT_2;
    let denominator = s2 * f0 + b.sqrt();
    if denominator == 0.0 {
        // unstable equilibrium -sqrt(b/2)
        return Ok(f0);
    }
    let c = (s2 * f0 - b.sqrt()) / denominator;
    let decay = c * (-2.0 * (2.0 * b).sqrt() * t).exp();
    Ok((b / 2.0).sqrt() * (1.0 + decay) / (1.0 - decay))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateVerdict {
    CertifiedBlowup,
    NoConclusion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupReport {
    pub bounds: NormBounds,
    pub b: f64,
    pub t1: Option<f64>,
    pub threshold: Option<f64>,
    /// Grid points `(x, n0(x))` strictly below the threshold.
    pub witnesses: Vec<(f64, f64)>,
    /// From the most negative witness.
    pub t2: Option<f64>,
    pub verdict: CertificateVerdict,
}

/// Evaluates the condition with sup norms measured on the grid.
pub fn check_condition(n0: &Field, params: &HelmholtzParams) -> BlowupReport {
    let v0 = v_from_n(n0, params);
    check_condition_with_bounds(n0, params, &NormBounds::measured(&v0))
}

/// Evaluates the condition with caller-supplied upper bounds on the sup norms.
pub fn check_condition_with_bounds(
    n0: &Field,
    params: &HelmholtzParams,
    bounds: &NormBounds,
) -> BlowupReport {
    let b = compute_b_from_bounds(bounds, params);
    let t1 = compute_t1_from_bounds(bounds, params);
    let threshold = t1.and_then(|t1| blowup_threshold(b, t1));
    let mut witnesses = Vec::new();
    if let Some(threshold) = threshold {
        let grid = n0.grid();
        for (i, &value) in n0.values().iter().enumerate() {
            if value < threshold {
                witnesses.push((grid.x(i), value));
            }
        }
    }
    let t2 = witnesses
        .iter()
        .map(|&(_, value)| value)
        .reduce(f64::min)
        .and_then(|worst| compute_t2(worst, b).ok());
    let verdict = if t2.is_some() {
        CertificateVerdict::CertifiedBlowup
    } else {
        witnesses.clear();
        CertificateVerdict::NoConclusion
    };
    BlowupReport {
        bounds: *bounds,
        b,
        t1,
        threshold,
        witnesses,
        t2,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::E;

    fn p(b: f64) -> HelmholtzParams {
        HelmholtzParams::new(b).unwrap()
    }

    const REFERENCE: NormBounds = NormBounds {
        v_sup: E / 8.0,
        vx_sup: E / 4.0,
    };

    #[test]
    fn certificate_numbers_from_bounds() {
        let b = compute_b_from_bounds(&REFERENCE, &p(1.0));
        assert!((b - 8.0 * E * E).abs() < 1e-12);
        assert_eq!(compute_b_from_bounds(&REFERENCE, &p(-1.0)), b);
        let t1 = compute_t1_from_bounds(&REFERENCE, &p(1.0)).unwrap();
        assert!((t1 - 1.0 / (12.0 * E)).abs() < 1e-15);
        assert_eq!(compute_t1_from_bounds(&REFERENCE, &p(-1.0)), Some(t1));
        let threshold = blowup_threshold(b, t1).unwrap();
        let want = -2.0 * E - 4.0 * E / ((2.0f64 / 3.0).exp() - 1.0);
        assert!((threshold - want).abs() < 1e-12);
        assert!(-20.0 < threshold);
    }

    #[test]
    fn zero_data_gives_no_conclusion() {
        let g = Grid::new(16.0, 64).unwrap();
        let z = Field::zeros(&g);
        assert_eq!(compute_b(&z, &p(1.0)), 0.0);
        assert_eq!(compute_t1(&z, &p(1.0)), None);
        let r = check_condition(&z, &p(1.0));
        assert_eq!(r.verdict, CertificateVerdict::NoConclusion);
        assert!(r.witnesses.is_empty() && r.t2.is_none());
        assert_eq!(blowup_threshold(0.0, 1.0), None);
    }

    #[test]
    fn doubling_halves_t1() {
        let g = Grid::new(16.0, 256).unwrap();
        let v = Field::sample(&g, |x| (-x * x).exp()).unwrap();
        let t = compute_t1(&v, &p(0.5)).unwrap();
        let t_double = compute_t1(&v.map(|x| 2.0 * x), &p(0.5)).unwrap();
        assert!((t / t_double - 2.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_limit() {
        let b = 3.0;
        let far = blowup_threshold(b, 1e3).unwrap();
        assert!((far + (b / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn t2_values() {
        let b = 8.0 * E * E;
        let t2 = compute_t2(-20.0, b).unwrap();
        let want = (1.0 / (8.0 * E)) * ((20.0 + 2.0 * E) / (20.0 - 2.0 * E)).ln();
        assert!((t2 - want).abs() < 1e-15);
        assert!((t2 - 0.02565).abs() < 1e-5);
        assert!(t2 < 1.0 / (12.0 * E));
        assert!(compute_t2(-1.0, b).is_err());
        assert!(compute_t2(-1e9, b).unwrap() < 1e-9);
        assert!((compute_t2(-4.0, 0.0).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn closed_form_solves_the_ode() {
        let h = 2e-5;
        for (f0, b) in [(-20.0, 8.0 * E * E), (0.0, 2.0), (3.0, 1.0), (-0.5, 4.0), (-2.0, 0.0)] {
            let stop = compute_t2(f0, b).map(|t| 0.5 * t).unwrap_or(0.5);
            let f = |t: f64| supersolution_ode(f0, b, t).unwrap();
            for k in 1..10 {
                let t = stop * k as f64 / 10.0;
                // fourth-order central difference
                let d = (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h))
                    / (12.0 * h);
                let residual = (d - (-2.0 * f(t) * f(t) + b)).abs();
                assert!(residual < 1e-8 * (1.0 + f(t).abs()), "f0 {f0} b {b} t {t}: {residual}");
            }
        }
    }

    #[test]
    fn equilibria_and_tanh() {
        let b = 2.0;
        for t in [0.0, 0.3, 5.0] {
            assert!((supersolution_ode(1.0, b, t).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(supersolution_ode(-1.0, b, t).unwrap(), -1.0);
            assert!((supersolution_ode(0.0, b, t).unwrap() - (2.0 * t).tanh()).abs() < 1e-14);
        }
        let t2 = compute_t2(-20.0, 8.0 * E * E).unwrap();
        assert!(supersolution_ode(-20.0, 8.0 * E * E, t2).is_err());
    }

    #[test]
    fn nonnegative_momentum_gives_no_witness() {
        let g = Grid::new(16.0, 1024).unwrap();
        let n0 = Field::sample(&g, |x| crate::peakon::bump(x, 0.0, 1.0, 1.0)).unwrap();
        let r = check_condition(&n0, &p(1.0));
        assert_eq!(r.verdict, CertificateVerdict::NoConclusion);
        assert!(r.threshold.unwrap() < 0.0);
    }
}
