use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use toml::{Table, Value};

use super::config::{parse_number, RunConfig};
use super::output::{float, read_snapshot, write_csv, write_diagnostics, write_snapshot};
use crate::besov::{besov_norm, block_norms, build_partition};
use crate::blowup::{check_condition, check_condition_with_bounds, BlowupReport, CertificateVerdict};
use crate::error::{Error, Result};
use crate::peakon::crest_position;
use crate::timestepper::{run, Verdict};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug)]
pub struct RunManifest {
    pub config: Table,
    pub version: String,
    pub half_width: f64,
    pub n_points: usize,
    pub dx: f64,
    pub wall_clock_seconds: f64,
    pub verdict: Verdict,
    pub steps: usize,
    /// Paths relative to the output directory.
    pub files: Vec<PathBuf>,
}

impl RunManifest {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("version".into(), Value::String(self.version.clone()));
        t.insert("wall_clock_seconds".into(), Value::Float(self.wall_clock_seconds));
        t.insert("steps".into(), Value::Integer(self.steps as i64));
        let mut grid = Table::new();
        grid.insert("half_width".into(), Value::Float(self.half_width));
        grid.insert("n_points".into(), Value::Integer(self.n_points as i64));
        grid.insert("dx".into(), Value::Float(self.dx));
        t.insert("grid".into(), Value::Table(grid));
        let mut verdict = Table::new();
        verdict.insert("outcome".into(), Value::String(self.verdict.label().into()));
        match self.verdict {
            Verdict::Completed => {}
            Verdict::BlowupDetected { t_low, t_high } => {
                verdict.insert("t_low".into(), Value::Float(t_low));
                verdict.insert("t_high".into(), Value::Float(t_high));
            }
            Verdict::Unstable { t } => {
                verdict.insert("t".into(), Value::Float(t));
            }
        }
        t.insert("verdict".into(), Value::Table(verdict));
        let files = self
            .files
            .iter()
            .map(|p| Value::String(p.display().to_string()))
            .collect();
        t.insert("files".into(), Value::Array(files));
        t.insert("config".into(), Value::Table(self.config.clone()));
        t
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs the simulation and writes `diagnostics.csv`, `snapshots.csv` with one
/// `snapshots/snap_NNNNN.csv` per output time, `crest.csv` and
/// `manifest.toml` under `out`.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let result = run(&config.sim)?;
    let elapsed = started.elapsed().as_secs_f64();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let mut files = Vec::new();
    let diagnostics = PathBuf::from("diagnostics.csv");
    write_diagnostics(&out.join(&diagnostics), &result.diagnostics)?;
    files.push(diagnostics);

    let mut index = Vec::new();
    for (k, snap) in result.snapshots.iter().enumerate() {
        let rel = PathBuf::from(format!("snapshots/snap_{k:05}.csv"));
        write_snapshot(&out.join(&rel), &snap.v, &snap.n)?;
        index.push(vec![k.to_string(), float(snap.t), rel.display().to_string()]);
        files.push(rel);
    }
    if !result.snapshots.is_empty() {
        let rel = PathBuf::from("snapshots.csv");
        write_csv(&out.join(&rel), &["index", "t", "path"], index)?;
        files.push(rel);

        let rel = PathBuf::from("crest.csv");
        let rows = result.snapshots.iter().map(|s| {
            let x = crest_position(&s.v);
            vec![float(s.t), float(x), float(s.v.interpolate(x))]
        });
        write_csv(&out.join(&rel), &["t", "crest", "value"], rows)?;
        files.push(rel);
    }

    let grid = result.final_state.v.grid().clone();
    let mut manifest = RunManifest {
        config: config.to_table(),
        version: VERSION.into(),
        half_width: grid.half_width(),
        n_points: grid.n_points(),
        dx: grid.dx(),
        wall_clock_seconds: elapsed,
        verdict: result.verdict,
        steps: result.steps,
        files,
    };
    manifest.files.push(PathBuf::from("manifest.toml"));
    write_text(&out.join("manifest.toml"), &manifest.to_table().to_string())?;
    Ok(manifest)
}

/// Certificate evaluated with measured sup norms and, when the config
/// supplies them, with analytic bounds.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub measured: BlowupReport,
    pub from_bounds: Option<BlowupReport>,
}

fn report_table(r: &BlowupReport) -> Table {
    let mut t = Table::new();
    let label = match r.verdict {
        CertificateVerdict::CertifiedBlowup => "certified_blowup",
        CertificateVerdict::NoConclusion => "no_conclusion",
    };
    t.insert("verdict".into(), Value::String(label.into()));
    t.insert("v0_sup".into(), Value::Float(r.bounds.v_sup));
    t.insert("v0x_sup".into(), Value::Float(r.bounds.vx_sup));
    t.insert("b".into(), Value::Float(r.b));
    if let Some(t1) = r.t1 {
        t.insert("t1".into(), Value::Float(t1));
    }
    if let Some(threshold) = r.threshold {
        t.insert("threshold".into(), Value::Float(threshold));
    }
    if let Some(t2) = r.t2 {
        t.insert("t2".into(), Value::Float(t2));
    }
    let witnesses = r
        .witnesses
        .iter()
        .map(|&(x, n)| Value::Array(vec![Value::Float(x), Value::Float(n)]))
        .collect();
    t.insert("witnesses".into(), Value::Array(witnesses));
    t
}

impl Prediction {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("measured".into(), Value::Table(report_table(&self.measured)));
        if let Some(b) = &self.from_bounds {
            t.insert("bounds".into(), Value::Table(report_table(b)));
        }
        t
    }
}

pub fn cmd_predict_blowup(config: &RunConfig) -> Result<Prediction> {
    let grid = config.sim.grid.build()?;
    let params = config.sim.params;
    let init = config.sim.initial_data.fields(&grid, &params)?;
    let measured = check_condition(&init.n0, &params);
    let from_bounds = config
        .bounds
        .map(|b| check_condition_with_bounds(&init.n0, &params, &b));
    Ok(Prediction {
        measured,
        from_bounds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotField {
    V,
    N,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BesovProfile {
    /// `(j, 2^(j s) ||Delta_j f||_{L^p})`.
    pub rows: Vec<(i32, f64)>,
    pub aggregate: f64,
}

impl BesovProfile {
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("j,weighted_norm\n");
        for (j, a) in &self.rows {
            s.push_str(&format!("{j},{}\n", float(*a)));
        }
        s.push_str(&format!("total,{}\n", float(self.aggregate)));
        s
    }
}

pub fn cmd_besov_profile(
    snapshot: &Path,
    s: f64,
    p: f64,
    r: f64,
    field: SnapshotField,
) -> Result<BesovProfile> {
    let (v, n) = read_snapshot(snapshot)?;
    let f = match field {
        SnapshotField::V => v,
        SnapshotField::N => n,
    };
    let partition = build_partition(f.grid())?;
    Ok(BesovProfile {
        rows: block_norms(&f, s, p, &partition)?,
        aggregate: besov_norm(&f, s, p, r, &partition)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Parses `key=v1,v2,...`; values use the config number grammar.
    pub fn parse(text: &str) -> Result<Self> {
        let (key, values) = text
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep axis `{text}` must look like key=v1,v2")))?;
        let values = values
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(parse_number)
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub outcome: std::result::Result<RunManifest, String>,
}

/// Cartesian product of the axes. No axes, or an axis without values, gives
/// an empty grid.
pub fn sweep_points(axes: &[SweepAxis]) -> Vec<Vec<f64>> {
    if axes.is_empty() {
        return Vec::new();
    }
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Runs every grid point concurrently into `out/run_NNN` and writes
/// `out/summary.csv`. A failing point is recorded and does not stop the rest.
pub fn cmd_sweep(template: &RunConfig, axes: &[SweepAxis], out: &Path) -> Result<Vec<SweepRow>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let points = sweep_points(axes);
    let rows: Vec<SweepRow> = points
        .into_par_iter()
        .enumerate()
        .map(|(index, values)| {
            let outcome = (|| {
                let mut config = template.clone();
                for (axis, &v) in axes.iter().zip(&values) {
                    config = config.with_override(&axis.key, v)?;
                }
                cmd_run(&config, &out.join(format!("run_{index:03}")))
            })()
            .map_err(|e| e.to_string());
            SweepRow {
                index,
                values,
                outcome,
            }
        })
        .collect();

    let mut header = vec!["run".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(["verdict", "t_low", "t_high", "error"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let lines = rows.iter().map(|row| {
        let mut cells = vec![format!("run_{:03}", row.index)];
        cells.extend(row.values.iter().map(|&v| float(v)));
        match &row.outcome {
            Ok(m) => {
                cells.push(m.verdict.label().into());
                match m.verdict {
                    Verdict::BlowupDetected { t_low, t_high } => {
                        cells.push(float(t_low));
                        cells.push(float(t_high));
                    }
                    _ => cells.extend([String::new(), String::new()]),
                }
                cells.push(String::new());
            }
            Err(e) => cells.extend(["error".into(), String::new(), String::new(), e.clone()]),
        }
        cells
    });
    write_csv(&out.join("summary.csv"), &header, lines)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_axes() {
        let a = SweepAxis::parse("initial_data.amplitude=-5e,-10e").unwrap();
        assert_eq!(a.key, "initial_data.amplitude");
        assert_eq!(a.values.len(), 2);
        assert!(SweepAxis::parse("amplitude").is_err());
        let b = SweepAxis::parse("n_points=256,512,1024").unwrap();
        assert_eq!(sweep_points(&[a.clone(), b]).len(), 6);
        assert!(sweep_points(&[]).is_empty());
        let empty = SweepAxis::parse("t_end=").unwrap();
        assert!(sweep_points(&[a, empty]).is_empty());
    }
}
