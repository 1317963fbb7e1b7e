//! Exact solutions and canonical initial data.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::helmholtz::{n_from_v, v_from_n, HelmholtzParams};

/// `amplitude * f(scale * (x - center))` with the compactly supported
/// `f(y) = exp(-1 / (1 - y^2))` for `|y| < 1`, zero otherwise.
pub fn bump(x: f64, center: f64, scale: f64, amplitude: f64) -> f64 {
    let y = scale * (x - center);
    if y.abs() >= 1.0 {
        0.0
    } else {
        amplitude * (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Single peakon `a1 exp(-2 |beta0| |x + 8 beta0 a1 t - a2|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakonSpec {
    pub a1: f64,
    pub a2: f64,
    pub params: HelmholtzParams,
}

impl PeakonSpec {
    pub fn new(a1: f64, a2: f64, beta0: f64) -> Result<Self> {
        Ok(Self {
            a1,
            a2,
            params: HelmholtzParams::new(beta0)?,
        })
    }

    pub fn crest_at(&self, t: f64) -> f64 {
        self.a2 - 8.0 * self.params.beta0() * self.a1 * t
    }

    /// Velocity of the crest, `-8 beta0 a1`.
    pub fn speed(&self) -> f64 {
        -8.0 * self.params.beta0() * self.a1
    }
}

pub fn exact_peakon(spec: &PeakonSpec, t: f64) -> impl Fn(f64) -> f64 {
    let crest = spec.crest_at(t);
    let rate = 2.0 * spec.params.beta0().abs();
    let a1 = spec.a1;
    move |x| a1 * (-rate * (x - crest).abs()).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakonTerm {
    pub weight: f64,
    pub position: f64,
}

/// Frozen-time ansatz `sum_i n_i exp(-2 |beta0| |x - x_i|)`.
pub fn peakon_superposition(
    params: &HelmholtzParams,
    terms: &[PeakonTerm],
) -> impl Fn(f64) -> f64 {
    let rate = 2.0 * params.beta0().abs();
    let terms = terms.to_vec();
    move |x| {
        terms
            .iter()
            .map(|t| t.weight * (-rate * (x - t.position).abs()).exp())
            .sum()
    }
}

/// Position of `max |v|` refined by a three-point parabola through `|v|`.
///
/// Ties go to the smallest grid index. The result is wrapped into `[-L, L)`.
pub fn crest_position(v: &Field) -> f64 {
    let values = v.values();
    let n = values.len();
    let mut best = 0;
    for (i, value) in values.iter().enumerate() {
        if value.abs() > values[best].abs() {
            best = i;
        }
    }
    let left = values[(best + n - 1) % n].abs();
    let mid = values[best].abs();
    let right = values[(best + 1) % n].abs();
    let curvature = left - 2.0 * mid + right;
    let shift = if curvature < 0.0 {
        0.5 * (left - right) / curvature
    } else {
        0.0
    };
    let grid = v.grid();
    grid.wrap(grid.x(best) + shift.clamp(-0.5, 0.5) * grid.dx())
}

/// Named initial-data generators.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// Momentum `n0 = amplitude * f(scale (x - center))`.
    Bump {
        center: f64,
        scale: f64,
        amplitude: f64,
    },
    /// Velocity `v0` equal to the exact peakon at `t = 0`.
    Peakon { a1: f64, a2: f64 },
    /// Velocity `v0` equal to the frozen superposition.
    Superposition(Vec<PeakonTerm>),
}

/// Initial velocity and momentum on a grid.
#[derive(Clone, Debug)]
pub struct InitialFields {
    pub v0: Field,
    /// `n0 = 4 beta0^2 v0 - v0_xx` on the grid.
    pub n0: Field,
    /// Pointwise momentum used to seed characteristics. Equals `n0` for bump
    /// data; for peakon data the momentum is a sum of point masses
    /// `4 |beta0| n_i`, each deposited in its nearest cell.
    pub seed_momentum: Field,
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::Bump {
                center,
                scale,
                amplitude,
            } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::Config(format!(
                        "bump scale must be positive, got {scale}"
                    )));
                }
                if !center.is_finite() || !amplitude.is_finite() {
                    return Err(Error::Config("bump parameters must be finite".into()));
                }
            }
            InitialData::Peakon { a1, a2 } => {
                if !a1.is_finite() || !a2.is_finite() {
                    return Err(Error::Config("peakon parameters must be finite".into()));
                }
            }
            InitialData::Superposition(terms) => {
                if terms.is_empty() {
                    return Err(Error::Config("superposition needs at least one term".into()));
                }
                if terms
                    .iter()
                    .any(|t| !t.weight.is_finite() || !t.position.is_finite())
                {
                    return Err(Error::Config(
                        "superposition parameters must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn fields(&self, grid: &Grid, params: &HelmholtzParams) -> Result<InitialFields> {
        self.validate()?;
        match self {
            InitialData::Bump {
                center,
                scale,
                amplitude,
            } => {
                let n0 = Field::sample(grid, |x| bump(x, *center, *scale, *amplitude))?;
                let v0 = v_from_n(&n0, params);
                Ok(InitialFields {
                    v0,
                    seed_momentum: n0.clone(),
                    n0,
                })
            }
            InitialData::Peakon { a1, a2 } => {
                let terms = [PeakonTerm {
                    weight: *a1,
                    position: *a2,
                }];
                Self::from_terms(grid, params, &terms)
            }
            InitialData::Superposition(terms) => Self::from_terms(grid, params, terms),
        }
    }

    fn from_terms(
        grid: &Grid,
        params: &HelmholtzParams,
        terms: &[PeakonTerm],
    ) -> Result<InitialFields> {
        let v0 = Field::sample(grid, peakon_superposition(params, terms))?;
        let n0 = n_from_v(&v0, params);
        let mut masses = vec![0.0; grid.n_points()];
        let n = grid.n_points() as isize;
        for t in terms {
            let s = (grid.wrap(t.position) + grid.half_width()) / grid.dx();
            let i = (s.round() as isize).rem_euclid(n) as usize;
            masses[i] += 4.0 * params.beta0().abs() * t.weight / grid.dx();
        }
        Ok(InitialFields {
            v0,
            n0,
            seed_momentum: Field::new(grid, masses)?,
        })
    }

    /// Replaces one named parameter, as used by parameter sweeps.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = self.clone();
        match (&mut out, name) {
            (InitialData::Bump { center, .. }, "center") => *center = value,
            (InitialData::Bump { scale, .. }, "scale") => *scale = value,
            (InitialData::Bump { amplitude, .. }, "amplitude") => *amplitude = value,
            (InitialData::Peakon { a1, .. }, "a1") => *a1 = value,
            (InitialData::Peakon { a2, .. }, "a2") => *a2 = value,
            _ => {
                return Err(Error::Config(format!(
                    "initial data {self} has no parameter `{name}`"
                )))
            }
        }
        Ok(out)
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Bump {
                center,
                scale,
                amplitude,
            } => write!(
                f,
                "bump(center={center:e}, scale={scale:e}, amplitude={amplitude:e})"
            ),
            InitialData::Peakon { a1, a2 } => write!(f, "peakon(a1={a1:e}, a2={a2:e})"),
            InitialData::Superposition(terms) => {
                write!(f, "superposition([")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({:e}, {:e})", t.weight, t.position)?;
                }
                write!(f, "])")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn bump_values() {
        assert!((bump(0.0, 0.0, 1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(bump(1.5, 0.0, 1.0, 1.0), 0.0);
        assert_eq!(bump(1.0, 0.0, 1.0, 1.0), 0.0);
        // n0 = -20 e f(20 x) peaks at -20
        assert!((bump(0.0, 0.0, 20.0, -20.0 * E) + 20.0).abs() < 1e-13);
        assert_eq!(bump(0.05, 0.0, 20.0, -20.0 * E), 0.0);
    }

    #[test]
    fn bump_support_boundary_is_flat() {
        // f(-1 + h) / h^3 -> 0: every derivative vanishes at the edge
        let mut previous = f64::INFINITY;
        for h in [0.05, 0.025, 0.0125] {
            let ratio = bump(-1.0 + h, 0.0, 1.0, 1.0) / (h * h * h);
            assert!(ratio < previous, "h {h}: {ratio}");
            previous = ratio;
        }
        assert!(previous < 1e-3);
    }

    #[test]
    fn peakon_crest() {
        let spec = PeakonSpec::new(1.0, 1.0, 1.0).unwrap();
        let v = exact_peakon(&spec, 0.0);
        assert_eq!(v(1.0), 1.0);
        assert!((spec.crest_at(0.1) - 0.2).abs() < 1e-15);
        let later = exact_peakon(&spec, 0.1);
        assert!((later(0.2) - 1.0).abs() < 1e-15);
        assert!(later(0.3) < 1.0 && later(0.1) < 1.0);
        assert!(PeakonSpec::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn superposition() {
        let p = HelmholtzParams::new(1.0).unwrap();
        let single = peakon_superposition(&p, &[PeakonTerm { weight: 1.0, position: 1.0 }]);
        let exact = exact_peakon(&PeakonSpec::new(1.0, 1.0, 1.0).unwrap(), 0.0);
        for x in [-2.0, 0.0, 0.7, 1.0, 3.0] {
            assert!((single(x) - exact(x)).abs() < 1e-15);
        }
        let pair = peakon_superposition(
            &p,
            &[
                PeakonTerm { weight: 0.5, position: -1.5 },
                PeakonTerm { weight: 0.5, position: 1.5 },
            ],
        );
        for x in [0.1, 0.9, 2.3] {
            assert!((pair(x) - pair(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn superposition_momentum_mass() {
        let g = Grid::new(16.0, 4096).unwrap();
        for beta in [1.0, 0.5] {
            let p = HelmholtzParams::new(beta).unwrap();
            let terms = [
                PeakonTerm { weight: 0.7, position: -2.0 },
                PeakonTerm { weight: 0.4, position: 1.5 },
            ];
            let v = Field::sample(&g, peakon_superposition(&p, &terms)).unwrap();
            let n = n_from_v(&v, &p);
            // 4 b^2 sum n_i / |b|
            let want = 4.0 * beta * beta * (0.7 + 0.4) / beta;
            assert!((n.integral() - want).abs() < 1e-3 * want, "beta {beta}");
        }
    }

    #[test]
    fn crest_tracking_on_samples() {
        let g = Grid::new(16.0, 4096).unwrap();
        let spec = PeakonSpec::new(1.0, 1.0, 1.0).unwrap();
        let v = Field::sample(&g, exact_peakon(&spec, 0.0)).unwrap();
        assert!((crest_position(&v) - 1.0).abs() <= g.dx());
        let shifted = Field::sample(&g, exact_peakon(&spec, 0.05)).unwrap();
        assert!((crest_position(&shifted) - spec.crest_at(0.05)).abs() <= g.dx());
        // flat plateau: first index wins
        let flat = Field::constant(&g, 2.0);
        assert_eq!(crest_position(&flat), g.x(0));
    }

    #[test]
    fn peakon_saturates_gradient_bound() {
        let g = Grid::new(16.0, 2048).unwrap();
        let spec = PeakonSpec::new(0.8, 0.5, 1.5).unwrap();
        let f = exact_peakon(&spec, 0.0);
        for i in 0..g.n_points() {
            let x = g.x(i);
            if (x - 0.5).abs() < 2.0 * g.dx() {
                continue;
            }
            // analytic slope magnitude 2 |b| v
            let h = 1e-7;
            let slope = (f(x + h) - f(x - h)) / (2.0 * h);
            assert!((slope.abs() - 3.0 * f(x)).abs() < 1e-8f64.max(1e-6 * f(x)));
        }
    }

    #[test]
    fn with_param_rejects_unknown_names() {
        let d = InitialData::Bump { center: 0.0, scale: 20.0, amplitude: -20.0 * E };
        let e = d.with_param("amplitude", -5.0).unwrap();
        assert_eq!(e, InitialData::Bump { center: 0.0, scale: 20.0, amplitude: -5.0 });
        assert!(d.with_param("a1", 1.0).is_err());
    }
}
