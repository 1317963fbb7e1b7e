//! Littlewood-Paley blocks and Besov norms on the periodic grid.
//!
//! The low-frequency cutoff is `chi(xi) = 1` for `|xi| <= 3/4`, `0` for
//! `|xi| >= 4/3`, joined by the smoothstep `1 - t^4 (35 - 84 t + 70 t^2 - 20 t^3)`.
//! The annulus profile `phi(xi) = chi(xi / 2) - chi(xi)` is supported in
//! `3/4 <= |xi| <= 8/3`, and `chi + sum_j phi(2^-j .) = 1` telescopes.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

/// Smallest grid size with room for at least two annuli.
pub const MIN_POINTS: usize = 32;

pub fn chi(xi: f64) -> f64 {
    let r = xi.abs();
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        let t = (r - INNER) / (OUTER - INNER);
        let t4 = t * t * t * t;
        1.0 - t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

pub fn phi(xi: f64) -> f64 {
    chi(xi / 2.0) - chi(xi)
}

#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    chi: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

/// Profiles on the grid wavenumbers for `j = -1..=j_max`, where `j_max` is
/// the smallest index with `(3/4) 2^(j+1) >= k_Nyquist`. Every grid
/// wavenumber is then covered.
pub fn build_partition(grid: &Grid) -> Result<DyadicPartition> {
    if grid.n_points() < MIN_POINTS {
        return Err(Error::Config(format!(
            "a dyadic partition needs at least {MIN_POINTS} grid points, got {}",
            grid.n_points()
        )));
    }
    let nyquist = grid.nyquist_wavenumber();
    let mut j_max = 0usize;
    while INNER * 2f64.powi(j_max as i32 + 1) < nyquist {
        j_max += 1;
    }
    let k = grid.wavenumbers();
    let chi_values = k.iter().map(|&k| chi(k)).collect();
    let phi_values = (0..=j_max)
        .map(|j| {
            let scale = 2f64.powi(-(j as i32));
            k.iter().map(|&k| phi(scale * k)).collect()
        })
        .collect();
    Ok(DyadicPartition {
        grid: grid.clone(),
        chi: chi_values,
        phi: phi_values,
    })
}

impl DyadicPartition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.phi.len() as i32 - 1
    }

    /// Profile of block `j` on the grid wavenumbers, `None` outside
    /// `-1..=j_max`.
    pub fn profile(&self, j: i32) -> Option<&[f64]> {
        match j {
            -1 => Some(&self.chi),
            j if j >= 0 && j <= self.j_max() => Some(&self.phi[j as usize]),
            _ => None,
        }
    }

    /// `max |chi + sum_j phi_j - 1|` over all grid wavenumbers.
    pub fn unity_residual(&self) -> f64 {
        (0..self.chi.len())
            .map(|i| {
                let total: f64 = self.chi[i] + self.phi.iter().map(|p| p[i]).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `Delta_j f`; zero for `j` outside the partition range.
pub fn dyadic_block(f: &Field, j: i32, partition: &DyadicPartition) -> Result<Field> {
    if f.grid() != partition.grid() {
        return Err(Error::GridMismatch);
    }
    let values = match partition.profile(j) {
        Some(profile) => f
            .grid()
            .apply_multiplier(f.values(), |i, _| profile[i].into()),
        None => vec![0.0; f.len()],
    };
    Field::new(f.grid(), values)
}

fn check_exponent(name: &str, value: f64) -> Result<()> {
    if value >= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{name} must be at least 1 (or infinite), got {value}"
        )))
    }
}

/// Discrete `L^p` norm with quadrature weight `dx`; `p = inf` gives the max.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * f.grid().dx()).powf(1.0 / p))
}

/// `2^(j s) ||Delta_j f||_{L^p}` for every block `j = -1..=j_max`.
pub fn block_norms(f: &Field, s: f64, p: f64, partition: &DyadicPartition) -> Result<Vec<(i32, f64)>> {
    check_exponent("p", p)?;
    (-1..=partition.j_max())
        .map(|j| {
            let block = dyadic_block(f, j, partition)?;
            Ok((j, 2f64.powf(j as f64 * s) * lp_norm(&block, p)?))
        })
        .collect()
}

/// `|| (2^(j s) ||Delta_j f||_{L^p})_j ||_{l^r}`.
pub fn besov_norm(f: &Field, s: f64, p: f64, r: f64, partition: &DyadicPartition) -> Result<f64> {
    check_exponent("r", r)?;
    let blocks = block_norms(f, s, p, partition)?;
    if r.is_infinite() {
        return Ok(blocks.iter().map(|&(_, a)| a).fold(0.0, f64::max));
    }
    let sum: f64 = blocks.iter().map(|&(_, a)| a.powf(r)).sum();
    Ok(sum.powf(1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_supports() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(0.7), 0.0);
        assert_eq!(phi(2.7), 0.0);
        assert!((phi(1.4) - 1.0).abs() < 1e-15);
        // non-adjacent annuli never overlap
        for i in 0..1000 {
            let xi = i as f64 * 0.02;
            assert_eq!(phi(xi) * phi(xi / 4.0), 0.0);
        }
    }

    #[test]
    fn ramp_is_monotone_and_smooth_at_the_joins() {
        let mut last = 1.0;
        for i in 0..=200 {
            let c = chi(INNER + (OUTER - INNER) * i as f64 / 200.0);
            assert!(c <= last + 1e-15);
            last = c;
        }
        let h = 1e-4;
        assert!((chi(INNER + h) - 1.0).abs() < 1e-12);
        assert!(chi(OUTER - h).abs() < 1e-12);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let g = Grid::new(16.0, 16).unwrap();
        assert!(matches!(build_partition(&g), Err(Error::Config(_))));
        assert!(build_partition(&Grid::new(16.0, 32).unwrap()).is_ok());
    }

    #[test]
    fn partition_covers_every_wavenumber() {
        for n in [32, 256, 4096] {
            let part = build_partition(&Grid::new(16.0, n).unwrap()).unwrap();
            assert!(part.unity_residual() < 1e-12, "n {n}");
            // and the top block is needed
            let nyq = part.grid().nyquist_wavenumber();
            assert!(0.75 * 2f64.powi(part.j_max()) < nyq);
        }
    }

    #[test]
    fn blocks_outside_range_vanish() {
        let g = Grid::new(16.0, 256).unwrap();
        let part = build_partition(&g).unwrap();
        let f = Field::sample(&g, |x| (-x * x).exp()).unwrap();
        assert_eq!(dyadic_block(&f, -5, &part).unwrap().max_abs(), 0.0);
        assert_eq!(dyadic_block(&f, part.j_max() + 1, &part).unwrap().max_abs(), 0.0);
        let other = Grid::new(8.0, 256).unwrap();
        assert!(dyadic_block(&Field::zeros(&other), 0, &part).is_err());
    }

    #[test]
    fn single_annulus_mode() {
        let g = Grid::new(PI, 256).unwrap();
        let part = build_partition(&g).unwrap();
        // k = 6 lies in [4/3 * 4, 3/2 * 4], so only block j = 2 is active
        let f = Field::sample(&g, |x| (6.0 * x).cos()).unwrap();
        let block = dyadic_block(&f, 2, &part).unwrap();
        assert!(block.zip_map(&f, |a, b| a - b).unwrap().max_abs() < 1e-13);
        for s in [-1.0, 0.0, 1.5] {
            for p in [1.0, 2.0, f64::INFINITY] {
                let norm = besov_norm(&f, s, p, 2.0, &part).unwrap();
                let want = 4f64.powf(s) * lp_norm(&f, p).unwrap();
                assert!((norm - want).abs() < 1e-12 * want.max(1.0), "s {s} p {p}");
            }
        }
    }

    #[test]
    fn exponents_below_one_are_rejected() {
        let g = Grid::new(PI, 64).unwrap();
        let part = build_partition(&g).unwrap();
        let f = Field::zeros(&g);
        assert!(besov_norm(&f, 0.0, 0.5, 2.0, &part).is_err());
        assert!(besov_norm(&f, 0.0, 2.0, 0.9, &part).is_err());
        assert_eq!(besov_norm(&f, 1.0, 2.0, f64::INFINITY, &part).unwrap(), 0.0);
    }
}
