//! Uniform periodic grid on `[-L, L)` and sampled fields.
//!
//! Spectral operators use the standard FFT ordering of wavenumbers,
//! `k_j = (pi / L) * j` for `j < N/2` and `(pi / L) * (j - N)` otherwise, so
//! the Nyquist mode sits at index `N/2` with a negative wavenumber.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    half_width: f64,
    n_points: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid with cached FFT plans. Cloning is cheap and clones share
/// the plans, which are safe for concurrent use.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_width", &self.inner.half_width)
            .field("n_points", &self.inner.n_points)
            .field("dx", &self.inner.dx)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n_points == other.inner.n_points
                && self.inner.half_width == other.inner.half_width)
    }
}

impl Grid {
    /// Builds the grid `x_i = -L + i dx`, `dx = 2L / N`.
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        let dx = 2.0 * half_width / n_points as f64;
        let scale = std::f64::consts::PI / half_width;
        let half = n_points / 2;
        let wavenumbers = (0..n_points)
            .map(|j| {
                let signed = if j < half {
                    j as f64
                } else {
                    j as f64 - n_points as f64
                };
                scale * signed
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        Ok(Self {
            inner: Arc::new(GridInner {
                half_width,
                n_points,
                dx,
                wavenumbers,
                forward,
                inverse,
            }),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    pub fn n_points(&self) -> usize {
        self.inner.n_points
    }

    pub fn dx(&self) -> f64 {
        self.inner.dx
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.inner.n_points / 2
    }

    /// Magnitude of the Nyquist wavenumber, `pi N / (2L)`.
    pub fn nyquist_wavenumber(&self) -> f64 {
        self.inner.wavenumbers[self.nyquist_index()].abs()
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.inner.half_width + i as f64 * self.inner.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points()).map(|i| self.x(i)).collect()
    }

    /// Maps `x` into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let period = 2.0 * self.inner.half_width;
        let shifted = (x + self.inner.half_width).rem_euclid(period);
        shifted - self.inner.half_width
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.forward.process(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part; includes the `1/N` factor.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inner.inverse.process(&mut spectrum);
        let scale = 1.0 / self.inner.n_points as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Multiplies mode `j` by `symbol(j, k_j)`.
    pub fn apply_multiplier<F>(&self, values: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let mut spectrum = self.forward(values);
        for (j, (c, &k)) in spectrum.iter_mut().zip(self.wavenumbers()).enumerate() {
            *c *= symbol(j, k);
        }
        self.inverse(spectrum)
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Config(format!(
                "field has {} samples but the grid has {} points",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_parts(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.n_points()])
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_parts(grid, vec![c; grid.n_points()])
    }

    /// `values[i] = f(x_i)`; fails on the first non-finite sample.
    pub fn sample<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_points());
        for i in 0..grid.n_points() {
            let x = grid.x(i);
            let value = f(x);
            if !value.is_finite() {
                return Err(Error::Sampling { x, value });
            }
            values.push(value);
        }
        Ok(Self::from_parts(grid, values))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Periodic trapezoidal rule, which on a uniform periodic grid is `dx * sum`.
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Self::from_parts(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(self.zip_map_unchecked(other, f))
    }

    pub(crate) fn zip_map_unchecked<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Field {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_parts(&self.grid, values)
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Spectral first derivative; the Nyquist mode is dropped.
    pub fn derivative(&self) -> Field {
        let nyquist = self.grid.nyquist_index();
        let values = self.grid.apply_multiplier(&self.values, |j, k| {
            if j == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        });
        Self::from_parts(&self.grid, values)
    }

    /// Spectral second derivative, symbol `-k^2` on every mode.
    pub fn second_derivative(&self) -> Field {
        let values = self
            .grid
            .apply_multiplier(&self.values, |_, k| Complex64::new(-k * k, 0.0));
        Self::from_parts(&self.grid, values)
    }

    /// One-sided first difference for the advection form `f_t = wind * f_x`.
    ///
    /// Characteristics move with velocity `-wind`, so where `wind > 0` the
    /// upstream neighbour is on the right and the forward difference is
    /// used; elsewhere the backward difference. Indices wrap periodically.
    pub fn upwind_derivative(&self, wind: &Field) -> Result<Field> {
        self.check_same_grid(wind)?;
        let n = self.values.len();
        let inv_dx = 1.0 / self.grid.dx();
        let f = &self.values;
        let values = (0..n)
            .map(|i| {
                if wind.values[i] > 0.0 {
                    (f[(i + 1) % n] - f[i]) * inv_dx
                } else {
                    (f[i] - f[(i + n - 1) % n]) * inv_dx
                }
            })
            .collect();
        Ok(Self::from_parts(&self.grid, values))
    }

    /// Second-order centred difference.
    pub fn centered_difference(&self) -> Field {
        let n = self.values.len();
        let scale = 0.5 / self.grid.dx();
        let f = &self.values;
        let values = (0..n)
            .map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) * scale)
            .collect();
        Self::from_parts(&self.grid, values)
    }

    /// The field sampled at `-x`: index `i` maps to `(N - i) mod N`.
    pub fn mirror(&self) -> Field {
        let n = self.values.len();
        let values = (0..n).map(|i| self.values[(n - i) % n]).collect();
        Self::from_parts(&self.grid, values)
    }

    /// Periodic linear interpolation at an arbitrary position.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = (self.grid.wrap(x) + self.grid.half_width()) / self.grid.dx();
        let base = s.floor();
        let theta = s - base;
        let i = (base as isize).rem_euclid(n as isize) as usize;
        let j = (i + 1) % n;
        self.values[i] * (1.0 - theta) + self.values[j] * theta
    }

    /// Zeroes every mode with `|j| > N/3` (the 2/3 rule).
    pub fn dealiased(&self) -> Field {
        let n = self.grid.n_points();
        let cutoff = n / 3;
        let values = self.grid.apply_multiplier(&self.values, |j, _| {
            let index = if j <= n / 2 { j } else { n - j };
            if index > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        Self::from_parts(&self.grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spacing_and_errors() {
        let g = Grid::new(16.0, 1024).unwrap();
        assert_eq!(g.dx(), 0.03125);
        assert!((g.dx() * g.n_points() as f64 - 32.0).abs() < 1e-12);
        assert!(matches!(Grid::new(16.0, 1000), Err(Error::Config(_))));
        assert!(matches!(Grid::new(16.0, 4), Err(Error::Config(_))));
        assert!(matches!(Grid::new(0.0, 64), Err(Error::Config(_))));
        assert!(matches!(Grid::new(-1.0, 64), Err(Error::Config(_))));
    }

    #[test]
    fn unit_period_wavenumbers() {
        let g = Grid::new(PI, 8).unwrap();
        let expected = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (k, e) in g.wavenumbers().iter().zip(expected) {
            assert!((k - e).abs() < 1e-14);
        }
        for j in 1..4 {
            assert_eq!(g.wavenumbers()[j], -g.wavenumbers()[8 - j]);
        }
    }

    #[test]
    fn sampling() {
        let g = Grid::new(16.0, 64).unwrap();
        let zero = Field::sample(&g, |_| 0.0).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let mode = Field::sample(&g, |x| (PI * x / 16.0).cos()).unwrap();
        assert!((mode.values()[0] + 1.0).abs() < 1e-15);
        assert!(matches!(
            Field::sample(&g, |x| if x > 0.0 { f64::NAN } else { 1.0 }),
            Err(Error::Sampling { .. })
        ));
    }

    #[test]
    fn derivative_of_modes() {
        let g = Grid::new(16.0, 256).unwrap();
        let c = Field::constant(&g, 3.5);
        assert!(c.derivative().max_abs() < 1e-13);
        let k = 5.0 * PI / 16.0;
        let s = Field::sample(&g, |x| (k * x).sin()).unwrap();
        let ds = s.derivative();
        let expected = Field::sample(&g, |x| k * (k * x).cos()).unwrap();
        let err = ds.zip_map(&expected, |a, b| a - b).unwrap().max_abs();
        assert!(err < 1e-12, "err = {err}");
    }

    #[test]
    fn derivative_of_two_sided_exponential() {
        let g = Grid::new(16.0, 4096).unwrap();
        let f = Field::sample(&g, |x| (-2.0 * x.abs()).exp()).unwrap();
        let df = f.derivative();
        let dx = g.dx();
        let mut worst: f64 = 0.0;
        for i in 0..g.n_points() {
            let x = g.x(i);
            if x.abs() <= 3.0 * dx || (x.abs() - 16.0).abs() <= 3.0 * dx {
                continue;
            }
            let exact = -2.0 * x.signum() * (-2.0 * x.abs()).exp();
            // Gibbs ripples from the kink decay like 1/distance; weight by it.
            worst = worst.max((df.values()[i] - exact).abs() * x.abs());
        }
        assert!(worst < 4.0 * dx, "weighted error {worst}");
    }

    #[test]
    fn upwind_picks_upstream_side() {
        let g = Grid::new(1.0, 16).unwrap();
        let f = Field::sample(&g, |x| 3.0 * x + 1.0).unwrap();
        let pos = Field::constant(&g, 1.0);
        let neg = Field::constant(&g, -1.0);
        let dpos = f.upwind_derivative(&pos).unwrap();
        let dneg = f.upwind_derivative(&neg).unwrap();
        for i in 1..15 {
            assert!((dpos.values()[i] - 3.0).abs() < 1e-12);
            assert!((dneg.values()[i] - 3.0).abs() < 1e-12);
        }
        // Forward difference at the last point wraps onto the sawtooth jump.
        assert!(dpos.values()[15] < 0.0);
        assert!(dneg.values()[0] < 0.0);
        let c = Field::constant(&g, 2.0);
        assert_eq!(c.upwind_derivative(&pos).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn upwind_rejects_foreign_grid() {
        let a = Grid::new(1.0, 16).unwrap();
        let b = Grid::new(2.0, 16).unwrap();
        let f = Field::zeros(&a);
        let w = Field::zeros(&b);
        assert!(matches!(f.upwind_derivative(&w), Err(Error::GridMismatch)));
    }

    #[test]
    fn upwind_is_first_order() {
        let errs: Vec<f64> = [128usize, 256, 512]
            .iter()
            .map(|&n| {
                let g = Grid::new(PI, n).unwrap();
                let f = Field::sample(&g, |x| (x).sin() + 0.5 * (2.0 * x).cos()).unwrap();
                let wind = Field::sample(&g, |x| x.cos()).unwrap();
                let d = f.upwind_derivative(&wind).unwrap();
                let exact = Field::sample(&g, |x| x.cos() - (2.0 * x).sin()).unwrap();
                d.zip_map(&exact, |a, b| a - b).unwrap().max_abs()
            })
            .collect();
        for pair in errs.windows(2) {
            let slope = (pair[0] / pair[1]).log2();
            assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
        }
    }

    #[test]
    fn interpolation_wraps() {
        let g = Grid::new(PI, 64).unwrap();
        let f = Field::sample(&g, |x| x.sin()).unwrap();
        assert!((f.interpolate(0.3) - f.interpolate(0.3 + 2.0 * PI)).abs() < 1e-12);
        assert!((f.interpolate(g.x(5)) - f.values()[5]).abs() < 1e-15);
        assert!((f.interpolate(0.3) - 0.3f64.sin()).abs() < 2e-3);
    }

    #[test]
    fn mirror_reflects_positions() {
        let g = Grid::new(PI, 32).unwrap();
        let f = Field::sample(&g, |x| x.sin() + 0.2 * x.cos()).unwrap();
        let m = f.mirror();
        let expected = Field::sample(&g, |x| (-x).sin() + 0.2 * (-x).cos()).unwrap();
        assert!(m.zip_map(&expected, |a, b| a - b).unwrap().max_abs() < 1e-14);
    }
}
