//! Time integration, CFL control and blow-up detection.
//!
//! Alongside the grid solution every run carries a set of characteristic
//! markers. Each marker follows `psi_t = -4 (v_x + 2 b v)` and carries the
//! reciprocal momentum `w = 1 / n` along its path, which obeys the linear
//! equation
//!
//! ```text
//! w_t = 4 - (16 b^2 v + 8 b v_x) w
//! ```
//!
//! Grid values of `n` saturate at the resolution limit as a singularity
//! forms, while `w` reaches zero in finite time exactly when the momentum
//! carried by the path diverges, so the markers resolve blow-up that the grid
//! cannot.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{h1_beta_norm_sq, w1inf_norm, Snapshot};
use crate::dynamics::{rhs_v_with, Derivative, StateV};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::helmholtz::{n_from_v, HelmholtzParams};
use crate::peakon::InitialData;

/// Guard against a vanishing transport speed.
pub const SPEED_EPSILON: f64 = 1e-12;
/// CFL steps below this length end the run.
pub const DT_FLOOR: f64 = 1e-10;
/// Markers start where `|n0| > MARKER_THRESHOLD * ||n0||_inf`.
pub const MARKER_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler with first-order upwind differences.
    EulerUpwind,
    /// Classical RK4 with spectral derivatives and dealiasing.
    Rk4Spectral,
}

impl Scheme {
    fn derivative(self) -> Derivative {
        match self {
            Scheme::EulerUpwind => Derivative::Upwind,
            Scheme::Rk4Spectral => Derivative::Spectral,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::EulerUpwind => "euler_upwind",
            Scheme::Rk4Spectral => "rk4_spectral",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_upwind" => Ok(Scheme::EulerUpwind),
            "rk4_spectral" => Ok(Scheme::Rk4Spectral),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected euler_upwind or rk4_spectral)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.n_points)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            n_points: 4096,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SnapshotCadence {
    Never,
    /// After every `k` steps.
    EverySteps(usize),
    /// Roughly this many snapshots, evenly spaced in time.
    Count(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputCadence {
    /// A diagnostics record after every `k` steps (the final state is always
    /// recorded).
    pub diagnostics_every: usize,
    pub snapshots: SnapshotCadence,
}

impl Default for OutputCadence {
    fn default() -> Self {
        Self {
            diagnostics_every: 1,
            snapshots: SnapshotCadence::Count(20),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub params: HelmholtzParams,
    pub grid: GridSpec,
    pub initial_data: InitialData,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub blowup_factor: f64,
    pub output: OutputCadence,
}

impl SimConfig {
    pub fn new(params: HelmholtzParams, initial_data: InitialData, t_end: f64) -> Self {
        Self {
            params,
            grid: GridSpec::default(),
            initial_data,
            t_end,
            scheme: Scheme::Rk4Spectral,
            cfl_safety: 0.5,
            blowup_factor: 1000.0,
            output: OutputCadence::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Config(format!(
                "blowup_factor must exceed 1, got {}",
                self.blowup_factor
            )));
        }
        if self.output.diagnostics_every == 0 {
            return Err(Error::Config("diagnostics_every must be at least 1".into()));
        }
        match self.output.snapshots {
            SnapshotCadence::EverySteps(0) | SnapshotCadence::Count(0) => {
                return Err(Error::Config("snapshot cadence must be at least 1".into()))
            }
            _ => {}
        }
        self.grid.build()?;
        self.initial_data.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub linf_n: f64,
    pub w1inf_v: f64,
    pub h1beta_sq: f64,
    pub min_n: f64,
    /// Courant number of the step that ended at `t` (of the first step for the
    /// initial record).
    pub cfl_number: f64,
    /// Largest momentum carried by the characteristic markers.
    pub linf_n_char: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Completed,
    /// Detected between the previous step time and the offending step time.
    BlowupDetected { t_low: f64, t_high: f64 },
    /// Non-finite values without preceding growth of the momentum.
    Unstable { t: f64 },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Completed => "completed",
            Verdict::BlowupDetected { .. } => "blowup_detected",
            Verdict::Unstable { .. } => "unstable",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub verdict: Verdict,
    pub final_state: StateV,
    pub steps: usize,
    /// `||n0||_inf` on the grid.
    pub initial_linf_n: f64,
    /// Number of characteristic markers carried.
    pub markers: usize,
}

fn transport_speed(v: &Field, params: &HelmholtzParams) -> f64 {
    let b = params.beta0();
    let vx = v.derivative();
    v.values()
        .iter()
        .zip(vx.values())
        .map(|(&v, &vx)| {
            let characteristic = 4.0 * (vx + 2.0 * b * v);
            let wave = 8.0 * b * v + 2.0 * vx;
            characteristic.abs().max(wave.abs())
        })
        .fold(0.0, f64::max)
}

/// `safety * dx / max(eps, s)` where `s` is the larger of the characteristic
/// speed `|4 (v_x + 2 b v)|` and the coefficient `|8 b v + 2 v_x|` that
/// transports `v` itself.
pub fn cfl_dt(state: &StateV, safety: f64) -> f64 {
    let speed = transport_speed(&state.v, &state.params).max(SPEED_EPSILON);
    safety * state.v.grid().dx() / speed
}

/// One step of the chosen scheme. A non-finite result sets `blown_up`.
pub fn step(state: &StateV, dt: f64, scheme: Scheme) -> StateV {
    let mut joint = Joint {
        v: state.v.values().to_vec(),
        psi: Vec::new(),
        w: Vec::new(),
    };
    joint = advance(&joint, state.v.grid(), &state.params, dt, scheme);
    let v = Field::new(state.v.grid(), joint.v).expect("length preserved");
    let blown_up = state.blown_up || !v.is_finite();
    StateV {
        t: state.t + dt,
        v,
        params: state.params,
        blown_up,
    }
}

/// Grid values plus marker positions and reciprocal momenta.
#[derive(Clone, Debug)]
struct Joint {
    v: Vec<f64>,
    psi: Vec<f64>,
    w: Vec<f64>,
}

impl Joint {
    fn axpy(&self, h: f64, d: &Joint) -> Joint {
        let combine = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + h * y).collect();
        Joint {
            v: combine(&self.v, &d.v),
            psi: combine(&self.psi, &d.psi),
            w: combine(&self.w, &d.w),
        }
    }
}

fn joint_rhs(state: &Joint, grid: &Grid, params: &HelmholtzParams, scheme: Scheme) -> Joint {
    let v = Field::new(grid, state.v.clone()).expect("length preserved");
    let dv = rhs_v_with(&v, params, scheme.derivative());
    let (dpsi, dw) = if state.psi.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let vx = match scheme {
            Scheme::Rk4Spectral => v.derivative(),
            Scheme::EulerUpwind => v.centered_difference(),
        };
        let b = params.beta0();
        let b2 = b * b;
        state
            .psi
            .iter()
            .zip(&state.w)
            .map(|(&x, &w)| {
                let vi = v.interpolate(x);
                let vxi = vx.interpolate(x);
                (
                    -4.0 * (vxi + 2.0 * b * vi),
                    4.0 - (16.0 * b2 * vi + 8.0 * b * vxi) * w,
                )
            })
            .unzip()
    };
    Joint {
        v: dv.into_values(),
        psi: dpsi,
        w: dw,
    }
}

fn advance(state: &Joint, grid: &Grid, params: &HelmholtzParams, dt: f64, scheme: Scheme) -> Joint {
    match scheme {
        Scheme::EulerUpwind => {
            let k1 = joint_rhs(state, grid, params, scheme);
            state.axpy(dt, &k1)
        }
        Scheme::Rk4Spectral => {
            let k1 = joint_rhs(state, grid, params, scheme);
            let k2 = joint_rhs(&state.axpy(0.5 * dt, &k1), grid, params, scheme);
            let k3 = joint_rhs(&state.axpy(0.5 * dt, &k2), grid, params, scheme);
            let k4 = joint_rhs(&state.axpy(dt, &k3), grid, params, scheme);
            let mut out = state.axpy(dt / 6.0, &k1);
            out = out.axpy(dt / 3.0, &k2);
            out = out.axpy(dt / 3.0, &k3);
            out.axpy(dt / 6.0, &k4)
        }
    }
}

struct Monitor {
    seed_sign: Vec<f64>,
    history: Vec<f64>,
}

impl Monitor {
    /// Largest carried momentum; infinite once any `w` has changed sign.
    fn carried_sup(&self, w: &[f64]) -> f64 {
        let mut sup: f64 = 0.0;
        for (&w, &sign) in w.iter().zip(&self.seed_sign) {
            if !w.is_finite() {
                return f64::NAN;
            }
            if w * sign <= 0.0 {
                return f64::INFINITY;
            }
            sup = sup.max(1.0 / w.abs());
        }
        sup
    }

    fn push(&mut self, magnitude: f64) {
        self.history.push(magnitude);
        if self.history.len() > 4 {
            self.history.remove(0);
        }
    }

    /// True when the last three increments were all increases.
    fn growing(&self) -> bool {
        self.history.len() == 4 && self.history.windows(2).all(|p| p[1] > p[0])
    }
}

fn diagnostics(
    v: &Field,
    params: &HelmholtzParams,
    t: f64,
    cfl_number: f64,
    linf_n_char: f64,
) -> (DiagnosticsRecord, Field) {
    let n = n_from_v(v, params);
    let record = DiagnosticsRecord {
        t,
        linf_n: n.max_abs(),
        w1inf_v: w1inf_norm(v),
        h1beta_sq: h1_beta_norm_sq(v, params),
        min_n: n.min(),
        cfl_number,
        linf_n_char,
    };
    (record, n)
}

/// Integrates from `t = 0` to `t_end` with CFL-limited steps.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let grid = config.grid.build()?;
    let params = config.params;
    let scheme = config.scheme;
    let init = config.initial_data.fields(&grid, &params)?;

    let initial_linf_n = init.n0.max_abs();
    let seed_scale = init.seed_momentum.max_abs();
    let mut psi = Vec::new();
    let mut w = Vec::new();
    for (i, &n0) in init.seed_momentum.values().iter().enumerate() {
        if n0.abs() > MARKER_THRESHOLD * seed_scale && n0 != 0.0 {
            psi.push(grid.x(i));
            w.push(1.0 / n0);
        }
    }
    let mut monitor = Monitor {
        seed_sign: w.iter().map(|w| w.signum()).collect(),
        history: Vec::new(),
    };
    let markers = psi.len();
    let mut joint = Joint {
        v: init.v0.values().to_vec(),
        psi,
        w,
    };

    let snapshot_interval = match config.output.snapshots {
        SnapshotCadence::Count(k) => Some(config.t_end / k as f64),
        _ => None,
    };
    let mut next_snapshot_time = 0.0;

    let mut state = StateV::new(init.v0.clone(), params);
    let mut diagnostics_out = Vec::new();
    let mut snapshots = Vec::new();
    let mut steps = 0usize;
    let verdict;

    let dx = grid.dx();
    let mut speed = transport_speed(&state.v, &params).max(SPEED_EPSILON);
    let carried0 = monitor.carried_sup(&joint.w);
    let (first, n) = diagnostics(&state.v, &params, 0.0, config.cfl_safety, carried0);
    monitor.push(first.linf_n.max(carried0));
    diagnostics_out.push(first);
    if config.output.snapshots != SnapshotCadence::Never {
        snapshots.push(Snapshot {
            t: 0.0,
            v: state.v.clone(),
            n,
        });
        next_snapshot_time = snapshot_interval.unwrap_or(0.0);
    }

    loop {
        let remaining = config.t_end - state.t;
        let cfl = config.cfl_safety * dx / speed;
        if cfl < DT_FLOOR && remaining > DT_FLOOR {
            verdict = if monitor.growing() {
                Verdict::BlowupDetected {
                    t_low: state.t,
                    t_high: state.t + cfl,
                }
            } else {
                Verdict::Unstable { t: state.t }
            };
            break;
        }
        let dt = cfl.min(remaining);
        let last_step = dt >= remaining;
        let t_prev = state.t;
        let courant = dt * speed / dx;

        joint = advance(&joint, &grid, &params, dt, scheme);
        steps += 1;
        let t = if last_step { config.t_end } else { t_prev + dt };
        let v = Field::new(&grid, joint.v.clone()).expect("length preserved");
        let finite = v.is_finite() && joint.psi.iter().all(|x| x.is_finite());
        state = StateV {
            t,
            blown_up: !finite,
            v,
            params,
        };

        let carried = monitor.carried_sup(&joint.w);
        let want_record = last_step || steps % config.output.diagnostics_every == 0;
        let (record, n) = diagnostics(&state.v, &params, t, courant, carried);
        let magnitude = record.linf_n.max(carried);

        let finite = finite && record.linf_n.is_finite() && !carried.is_nan();
        let exceeded = record.linf_n >= config.blowup_factor * initial_linf_n
            || (markers > 0 && carried >= config.blowup_factor * seed_scale);
        let stop = !finite || exceeded;

        if want_record || stop {
            diagnostics_out.push(record);
        }
        let want_snapshot = match config.output.snapshots {
            SnapshotCadence::Never => false,
            SnapshotCadence::EverySteps(k) => steps % k == 0 || last_step,
            SnapshotCadence::Count(_) => t >= next_snapshot_time - 1e-12 * config.t_end || last_step,
        };
        if want_snapshot || (stop && config.output.snapshots != SnapshotCadence::Never) {
            snapshots.push(Snapshot {
                t,
                v: state.v.clone(),
                n,
            });
            if let Some(interval) = snapshot_interval {
                while next_snapshot_time <= t + 1e-12 * config.t_end {
                    next_snapshot_time += interval;
                }
            }
        }

        if !finite {
            verdict = if monitor.growing() {
                Verdict::BlowupDetected {
                    t_low: t_prev,
                    t_high: t,
                }
            } else {
                Verdict::Unstable { t }
            };
            break;
        }
        monitor.push(magnitude);
        if exceeded {
            verdict = Verdict::BlowupDetected {
                t_low: t_prev,
                t_high: t,
            };
            break;
        }
        if last_step {
            verdict = Verdict::Completed;
            break;
        }
        speed = transport_speed(&state.v, &params).max(SPEED_EPSILON);
    }

    Ok(SimResult {
        diagnostics: diagnostics_out,
        snapshots,
        verdict,
        final_state: state,
        steps,
        initial_linf_n,
        markers,
    })
}
