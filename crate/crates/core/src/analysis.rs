//! Norms, sign monitors and characteristics along numerical trajectories.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::Field;
use crate::helmholtz::HelmholtzParams;

/// Velocity and momentum at one instant.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub v: Field,
    pub n: Field,
}

/// `max |v| + max |v_x|`, spectral `v_x`.
pub fn w1inf_norm(v: &Field) -> f64 {
    v.max_abs() + v.derivative().max_abs()
}

/// Trapezoidal `int 4 b^2 v^2 + v_x^2 dx` over the box.
pub fn h1_beta_norm_sq(v: &Field, params: &HelmholtzParams) -> f64 {
    let m = params.mass();
    let vx = v.derivative();
    let sum: f64 = v
        .values()
        .iter()
        .zip(vx.values())
        .map(|(&v, &vx)| m * v * v + vx * vx)
        .sum();
    sum * v.grid().dx()
}

/// The same quadratic form evaluated on the Fourier side,
/// `(2L / N^2) sum_k (4 b^2 + k^2) |v_k|^2`, with the Nyquist mode carrying
/// no derivative weight to match the spectral derivative.
pub fn h1_beta_norm_sq_fourier(v: &Field, params: &HelmholtzParams) -> f64 {
    let grid = v.grid();
    let m = params.mass();
    let nyquist = grid.nyquist_index();
    let spectrum: Vec<Complex64> = grid.forward(v.values());
    let n = grid.n_points() as f64;
    let sum: f64 = spectrum
        .iter()
        .zip(grid.wavenumbers())
        .enumerate()
        .map(|(j, (c, &k))| {
            let weight = if j == nyquist { m } else { m + k * k };
            weight * c.norm_sqr()
        })
        .sum();
    sum * 2.0 * grid.half_width() / (n * n)
}

/// `max_x (|v_x| - 2 |b| v)`; nonpositive when the gradient bound holds.
pub fn gradient_bound_residual(v: &Field, params: &HelmholtzParams) -> f64 {
    let rate = 2.0 * params.beta0().abs();
    let vx = v.derivative();
    v.values()
        .iter()
        .zip(vx.values())
        .map(|(&v, &vx)| vx.abs() - rate * v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Characteristics `psi(t, x0)` and their stretching `psi_x(t, x0)`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
    /// `psi[seed][time]`, unwrapped (not reduced into the box).
    pub psi: Vec<Vec<f64>>,
    /// `psi_x[seed][time]`.
    pub psi_x: Vec<Vec<f64>>,
    pub escaped: Vec<bool>,
}

impl Trajectory {
    pub fn escaped_count(&self) -> usize {
        self.escaped.iter().filter(|&&e| e).count()
    }

    pub fn min_psi_x(&self) -> f64 {
        self.active()
            .flat_map(|s| self.psi_x[s].iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest gap `psi(t, b) - psi(t, a)` over consecutive seeds `a < b`.
    /// Negative values mean crossed paths.
    pub fn min_separation(&self) -> f64 {
        let mut order: Vec<usize> = self.active().collect();
        order.sort_by(|&a, &b| self.x0[a].total_cmp(&self.x0[b]));
        let mut gap = f64::INFINITY;
        for pair in order.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for k in 0..self.times.len() {
                gap = gap.min(self.psi[b][k] - self.psi[a][k]);
            }
        }
        gap
    }

    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.x0.len()).filter(|&s| !self.escaped[s])
    }
}

/// Integrates `psi_t = -4 (v_x + 2 b v)(t, psi)` and
/// `(log psi_x)_t = -4 (v_xx + 2 b v_x)(t, psi)` with one RK4 step per
/// snapshot interval.
///
/// Coefficients are interpolated linearly in space and time; `v_xx` is taken
/// as `4 b^2 v - n` from the stored momentum. A path whose state stops being
/// finite is marked escaped.
pub fn flow_map_integrate(
    snapshots: &[Snapshot],
    params: &HelmholtzParams,
    seeds: &[f64],
) -> Trajectory {
    let b = params.beta0();
    let m = params.mass();
    let coefficients: Vec<(Field, Field)> = snapshots
        .par_iter()
        .map(|s| {
            let vx = s.v.derivative();
            let speed = vx.zip_map_unchecked(&s.v, |vx, v| -4.0 * (vx + 2.0 * b * v));
            let vxx = s.v.zip_map_unchecked(&s.n, |v, n| m * v - n);
            let stretch = vxx.zip_map_unchecked(&vx, |vxx, vx| -4.0 * (vxx + 2.0 * b * vx));
            (speed, stretch)
        })
        .collect();
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();

    let paths: Vec<(Vec<f64>, Vec<f64>, bool)> = seeds
        .par_iter()
        .map(|&x0| integrate_path(x0, &times, &coefficients))
        .collect();

    let mut out = Trajectory {
        x0: seeds.to_vec(),
        times,
        psi: Vec::with_capacity(seeds.len()),
        psi_x: Vec::with_capacity(seeds.len()),
        escaped: Vec::with_capacity(seeds.len()),
    };
    for (psi, psi_x, escaped) in paths {
        out.psi.push(psi);
        out.psi_x.push(psi_x);
        out.escaped.push(escaped);
    }
    out
}

fn integrate_path(x0: f64, times: &[f64], coefficients: &[(Field, Field)]) -> (Vec<f64>, Vec<f64>, bool) {
    let mut psi = Vec::with_capacity(times.len());
    let mut psi_x = Vec::with_capacity(times.len());
    if times.is_empty() {
        return (psi, psi_x, false);
    }
    let mut x = x0;
    let mut log_stretch = 0.0;
    psi.push(x);
    psi_x.push(1.0);
    let mut escaped = false;
    for k in 0..times.len() - 1 {
        let h = times[k + 1] - times[k];
        let (s0, g0) = &coefficients[k];
        let (s1, g1) = &coefficients[k + 1];
        let eval = |theta: f64, x: f64| {
            let s = (1.0 - theta) * s0.interpolate(x) + theta * s1.interpolate(x);
            let g = (1.0 - theta) * g0.interpolate(x) + theta * g1.interpolate(x);
            (s, g)
        };
        let (a1, c1) = eval(0.0, x);
        let (a2, c2) = eval(0.5, x + 0.5 * h * a1);
        let (a3, c3) = eval(0.5, x + 0.5 * h * a2);
        let (a4, c4) = eval(1.0, x + h * a3);
        x += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        log_stretch += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
        if !x.is_finite() || !log_stretch.is_finite() {
            escaped = true;
        }
        psi.push(x);
        psi_x.push(log_stretch.exp());
    }
    (psi, psi_x, escaped)
}

/// `max |n(t, psi) psi_x - n0(x0)| / max(1, ||n0||_inf)` over non-escaped
/// paths and all recorded times.
///
/// `n_snapshots` must be the snapshots the trajectory was integrated from.
pub fn lagrangian_residual(trajectory: &Trajectory, n_snapshots: &[Snapshot], n0: &Field) -> f64 {
    let scale = n0.max_abs().max(1.0);
    let mut worst: f64 = 0.0;
    for s in 0..trajectory.x0.len() {
        if trajectory.escaped[s] {
            continue;
        }
        let start = n0.interpolate(trajectory.x0[s]);
        for (k, snap) in n_snapshots.iter().enumerate().take(trajectory.times.len()) {
            let carried = snap.n.interpolate(trajectory.psi[s][k]) * trajectory.psi_x[s][k];
            worst = worst.max((carried - start).abs());
        }
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::helmholtz::{n_from_v, v_from_n};
    use std::f64::consts::PI;

    fn p(b: f64) -> HelmholtzParams {
        HelmholtzParams::new(b).unwrap()
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = Grid::new(PI, 64).unwrap();
        assert_eq!(w1inf_norm(&Field::zeros(&g)), 0.0);
        assert_eq!(h1_beta_norm_sq(&Field::zeros(&g), &p(1.0)), 0.0);
        let cos = Field::sample(&g, f64::cos).unwrap();
        assert!((w1inf_norm(&cos) - 2.0).abs() < 1e-3);
        let twice = cos.map(|c| 2.0 * c);
        let ratio = h1_beta_norm_sq(&twice, &p(0.7)) / h1_beta_norm_sq(&cos, &p(0.7));
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn peakon_energy() {
        // exact value 4; the spectral slope of the kink adds an O(dx) excess
        let mut previous = f64::INFINITY;
        for n in [1024, 2048, 4096] {
            let g = Grid::new(16.0, n).unwrap();
            let v = Field::sample(&g, |x| (-2.0 * x.abs()).exp()).unwrap();
            let err = (h1_beta_norm_sq(&v, &p(1.0)) - 4.0).abs();
            assert!(err < 3.0 * g.dx(), "n {n}: {err}");
            assert!(err < 0.6 * previous);
            previous = err;
        }
    }

    #[test]
    fn plancherel_agreement() {
        let g = Grid::new(16.0, 256).unwrap();
        let v = Field::sample(&g, |x| {
            (PI * x / 16.0 * 3.0).cos() + 0.4 * (PI * x / 16.0 * 11.0).sin()
        })
        .unwrap();
        let a = h1_beta_norm_sq(&v, &p(1.3));
        let b = h1_beta_norm_sq_fourier(&v, &p(1.3));
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn gradient_bound_of_constant() {
        let g = Grid::new(16.0, 64).unwrap();
        let r = gradient_bound_residual(&Field::constant(&g, 0.5), &p(-1.5));
        assert!((r + 1.5).abs() < 1e-12);
    }

    #[test]
    fn gradient_bound_nearly_saturated_by_narrow_momentum() {
        // v = P2 n for a narrow n >= 0 approaches the kernel, where |v_x| = 2|b| v
        let g = Grid::new(16.0, 4096).unwrap();
        let n = Field::sample(&g, |x| (-x * x / (2.0 * 0.05f64.powi(2))).exp()).unwrap();
        let v = v_from_n(&n, &p(1.0));
        let r = gradient_bound_residual(&v, &p(1.0));
        assert!(r <= 1e-8 * v.max_abs(), "residual {r}");
        let vx = v.derivative();
        let i = g.n_points() / 2 + (3.0 / g.dx()) as usize;
        assert!(vx.values()[i].abs() > 0.99 * 2.0 * v.values()[i]);
    }

    fn steady(c: f64, b: f64) -> Vec<Snapshot> {
        let g = Grid::new(8.0, 128).unwrap();
        let v = Field::constant(&g, c);
        let n = n_from_v(&v, &p(b));
        (0..=20)
            .map(|k| Snapshot {
                t: 0.01 * k as f64,
                v: v.clone(),
                n: n.clone(),
            })
            .collect()
    }

    #[test]
    fn flow_of_constant_velocity() {
        let b = 1.0;
        for c in [0.0, 0.3] {
            let snaps = steady(c, b);
            let seeds = [-1.0, 0.0, 2.5];
            let tr = flow_map_integrate(&snaps, &p(b), &seeds);
            for (s, &x0) in seeds.iter().enumerate() {
                let t = tr.times[20];
                assert!((tr.psi[s][20] - (x0 - 8.0 * b * c * t)).abs() < 1e-12);
                assert!((tr.psi_x[s][20] - 1.0).abs() < 1e-12);
            }
            assert_eq!(tr.escaped_count(), 0);
            assert!(tr.min_separation() > 0.9);
            let n0 = snaps[0].n.clone();
            assert!(lagrangian_residual(&tr, &snaps, &n0) < 1e-12);
        }
    }
}
