//! `peakon`: run, certify and analyze simulations of the peakon system.
//!
//! ```text
//! peakon run --seed-recipe fig1 --out out/fig1
//! peakon predict-blowup --config my.toml
//! peakon besov-profile --snapshot out/fig1/snapshots/snap_00010.csv --s 1
//! peakon sweep --seed-recipe fig1 --param initial_data.amplitude=-5e,-10e,-20e --out out/sweep
//! ```
//!
//! The output directory defaults to `out` and can be set with `PEAKON_OUT_DIR`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use peakon_lab::cli_io::{
    cmd_besov_profile, cmd_predict_blowup, cmd_run, cmd_sweep, parse_config, parse_number,
    recipes, RunConfig, SnapshotField, SweepAxis,
};

#[derive(Parser)]
#[command(version, about = "Peakon system solver and analyzers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write diagnostics, snapshots and a manifest.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate the finite-time blow-up certificate for the initial data.
    PredictBlowup {
        #[command(flatten)]
        source: Source,
        /// Also write `blowup_report.toml` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Littlewood-Paley block norms of a saved snapshot.
    BesovProfile {
        #[arg(long)]
        snapshot: PathBuf,
        /// Regularity index.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        s: String,
        /// Integrability index, `inf` allowed.
        #[arg(long, default_value = "2")]
        p: String,
        /// Summability index, `inf` allowed.
        #[arg(long, default_value = "2")]
        r: String,
        #[arg(long, value_enum, default_value = "n")]
        field: FieldArg,
    },
    /// Run a cartesian parameter grid concurrently.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// `key=v1,v2,...`; repeat for more axes. Keys are config keys or
        /// `initial_data.<parameter>`.
        #[arg(long = "param")]
        params: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "seed_recipe")]
    config: Option<PathBuf>,
    /// One of the shipped reference configurations.
    #[arg(long, value_enum)]
    seed_recipe: Option<Recipe>,
}

#[derive(Args)]
struct Out {
    #[arg(long, env = "PEAKON_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Recipe {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    V,
    N,
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        let text = match (&self.config, self.seed_recipe) {
            (Some(path), _) => fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?,
            (None, Some(r)) => {
                let name = match r {
                    Recipe::Fig1 => "fig1",
                    Recipe::Fig2 => "fig2",
                    Recipe::Fig3 => "fig3",
                };
                recipes::recipe(name)?.to_string()
            }
            (None, None) => bail!("either --config or --seed-recipe is required"),
        };
        Ok(parse_config(&text)?)
    }
}

fn index(text: &str) -> Result<f64> {
    match text.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => Ok(parse_number(other)?),
    }
}

fn write_report(dir: &Path, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("blowup_report.toml");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { source, out } => {
            let config = source.load()?;
            let manifest = cmd_run(&config, &out.out)?;
            println!("{}", manifest.verdict.label());
            println!("wrote {} files to {}", manifest.files.len(), out.out.display());
        }
        Command::PredictBlowup { source, out } => {
            let text = cmd_predict_blowup(&source.load()?)?.to_table().to_string();
            print!("{text}");
            if let Some(dir) = out {
                write_report(&dir, &text)?;
            }
        }
        Command::BesovProfile {
            snapshot,
            s,
            p,
            r,
            field,
        } => {
            let field = match field {
                FieldArg::V => SnapshotField::V,
                FieldArg::N => SnapshotField::N,
            };
            let profile = cmd_besov_profile(&snapshot, index(&s)?, index(&p)?, index(&r)?, field)?;
            print!("{}", profile.to_csv_string());
        }
        Command::Sweep {
            source,
            params,
            out,
        } => {
            let template = source.load()?;
            let axes = params
                .iter()
                .map(|p| SweepAxis::parse(p))
                .collect::<peakon_lab::Result<Vec<_>>>()?;
            let rows = cmd_sweep(&template, &axes, &out.out)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{} runs, {failed} failed; summary in {}",
                rows.len(),
                out.out.join("summary.csv").display()
            );
        }
    }
    Ok(())
}
