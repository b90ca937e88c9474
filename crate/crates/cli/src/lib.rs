//! Command-line front end for `singscat-core`: reads JSON scenes, runs the
//! solver or the cavity simulation, and writes CSV and JSON artifacts.
//!
//! Every run is deterministic. Identical inputs give byte-identical files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::{Overrides, SceneConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "singscat",
    version,
    about = "Spectral singularities of 1D scattering scenes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scene config (JSON object, or an array of objects for a sweep).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory; sweeps write one `run-NNN` subdirectory per scene.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub k_min: Option<f64>,
    #[arg(long, global = true)]
    pub k_max: Option<f64>,
    #[arg(long, global = true)]
    pub k_points: Option<usize>,
    /// Root tolerance for find-ss.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub dx: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Length of the simulated chain.
    #[arg(long, global = true)]
    pub length: Option<f64>,
    /// Accepted for scripts; nothing here draws random numbers.
    #[arg(long, global = true)]
    pub seedless: bool,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflection and transmission amplitudes and |M22| over a k grid.
    Amplitudes,
    /// Locate spectral singularities in the solver window.
    FindSs,
    /// Build a scene with a singularity at a chosen wavenumber.
    Design {
        /// two-delta, lattice-pair or cavity.
        designer: String,
        /// Designer parameter, e.g. `--set k_c=2`. Repeatable.
        #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
    /// Sample a piecewise plane wave on a grid.
    Wave,
    /// Launch the cavity state and record the fidelity trace and spectrum.
    Simulate {
        /// Rerun at half the grid spacing and record the differences.
        #[arg(long)]
        refine: bool,
    },
    /// Fidelity spectrum of the launch state or of a saved checkpoint.
    Spectrum {
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value = value.trim().parse().map_err(|e| format!("{name}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            k_min: self.k_min,
            k_max: self.k_max,
            k_points: self.k_points,
            tolerance: self.tolerance,
            dx: self.dx,
            dt: self.dt,
            length: self.length,
        }
    }

    fn scenes(&self) -> Result<Vec<SceneConfig>, CliError> {
        let mut scenes = match &self.config {
            Some(path) => config::load(path)?,
            None => vec![SceneConfig::default()],
        };
        if scenes.is_empty() {
            return Err(CliError::validation("the config list is empty"));
        }
        let o = self.overrides();
        for s in &mut scenes {
            s.apply(&o);
        }
        Ok(scenes)
    }
}

/// What a finished command hands back to `main`.
#[derive(Debug, Default)]
pub struct Report {
    /// Printed to stdout, in scene order.
    pub stdout: Vec<String>,
    /// One message per failed scene.
    pub errors: Vec<String>,
    pub exit_code: i32,
}

fn run_scene(
    cli: &Cli,
    scene: &SceneConfig,
    out: Option<&Path>,
) -> Result<Option<String>, CliError> {
    let dir = || {
        out.map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("out"))
    };
    match &cli.command {
        Command::Amplitudes => commands::amplitudes(scene, &dir()).map(|_| None),
        Command::FindSs => commands::find(scene, out).map(Some),
        Command::Design { .. } => unreachable!("design takes no scene"),
        Command::Wave => commands::wave(scene, &dir()).map(|_| None),
        Command::Simulate { refine } => commands::simulate(scene, &dir(), *refine).map(|_| None),
        Command::Spectrum { checkpoint } => {
            commands::spectrum(scene, &cli.overrides(), checkpoint.as_deref(), &dir()).map(|_| None)
        }
    }
}

pub fn execute(cli: &Cli) -> Report {
    let mut report = Report::default();
    let fail = |report: &mut Report, prefix: String, e: CliError| {
        report.exit_code = report.exit_code.max(e.exit_code());
        report.errors.push(format!("{prefix}{e}"));
    };

    if let Command::Design { designer, params } = &cli.command {
        match commands::design(designer, params, cli.out.as_deref()) {
            Ok(text) => report.stdout.push(text),
            Err(e) => fail(&mut report, String::new(), e),
        }
        return report;
    }

    let scenes = match cli.scenes() {
        Ok(s) => s,
        Err(e) => {
            fail(&mut report, String::new(), e);
            return report;
        }
    };
    let outs: Vec<Option<PathBuf>> = if scenes.len() == 1 {
        vec![cli.out.clone()]
    } else {
        let base = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        (0..scenes.len())
            .map(|i| Some(base.join(format!("run-{i:03}"))))
            .collect()
    };

    let work = || -> Vec<Result<Option<String>, CliError>> {
        scenes
            .par_iter()
            .zip(&outs)
            .map(|(s, o)| run_scene(cli, s, o.as_deref()))
            .collect()
    };
    let results = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool.install(work),
        Err(e) => {
            fail(
                &mut report,
                String::new(),
                CliError::validation(e.to_string()),
            );
            return report;
        }
    };

    let many = scenes.len() > 1;
    for (i, r) in results.into_iter().enumerate() {
        let prefix = if many {
            format!("run-{i:03}: ")
        } else {
            String::new()
        };
        match r {
            Ok(Some(text)) => report.stdout.push(text),
            Ok(None) => {}
            Err(e) => fail(&mut report, prefix, e),
        }
    }
    report
}
