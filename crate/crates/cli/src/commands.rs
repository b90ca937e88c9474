//! One function per subcommand. Each validates the whole scene before doing
//! any work, writes its files into `out`, and returns what goes to stdout.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use singscat_core::cavity::{
    k_spectrum, run, ResolvedSimulation, SimulationConfig, SimulationOutcome, SimulationState,
    SpectrumGrid,
};
use singscat_core::scatter::{Medium, ScatteringCenter};
use singscat_core::solver::{find_ss, DesignParams, DesignerRegistry};
use singscat_core::wavefield::{
    cavity_wave, check_eigenfunction, continuous_centers, initial_cavity_state, jost_wave,
    two_delta_ss_wave, PiecewiseWave, SubstitutionReport,
};
use singscat_core::Error;

use crate::config::{CenterConfig, Overrides, SceneConfig, SolverConfig, WaveSource};
use crate::error::CliError;
use crate::output::{read_checkpoint, write_checkpoint, write_csv, write_json};

#[derive(Serialize)]
struct Manifest<'a, D: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    /// Input for an identical rerun, with every default filled in.
    config: &'a SceneConfig,
    derived: D,
    outputs: &'a [&'a str],
}

fn write_manifest<D: Serialize>(
    out: &Path,
    command: &str,
    config: &SceneConfig,
    derived: D,
    outputs: &[&str],
) -> Result<(), CliError> {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        derived,
        outputs,
    };
    write_json(&out.join("manifest.json"), &m)
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// The scene with its solver section resolved.
fn with_solver(scene: &SceneConfig) -> SceneConfig {
    let s = scene.resolved_solver();
    SceneConfig {
        model: Some(scene.medium()),
        solver: SolverConfig {
            k_min: Some(s.k_min),
            k_max: Some(s.k_max),
            grid_points: Some(s.grid_points),
            tolerance: Some(s.tolerance),
        },
        sim: SimulationConfig::default(),
        ..scene.clone()
    }
}

fn sim_config(r: &ResolvedSimulation) -> SimulationConfig {
    SimulationConfig {
        gamma: Some(r.gamma),
        a: Some(r.a),
        k_c: Some(r.k_c),
        dx: Some(r.dx),
        dt: Some(r.dt),
        length: Some(r.length),
        t_end: Some(r.t_end),
        record_interval: Some(r.record_interval),
        window: Some(r.window),
        epsilon: Some(r.epsilon),
        plateau: Some(r.plateau),
        fidelity: Some(r.fidelity),
        spectrum: Some(r.spectrum),
    }
}

/// The scene with its simulation section resolved.
fn with_sim(scene: &SceneConfig, r: &ResolvedSimulation) -> SceneConfig {
    SceneConfig {
        sim: sim_config(r),
        solver: SolverConfig::default(),
        ..scene.clone()
    }
}

pub fn amplitudes(scene: &SceneConfig, out: &Path) -> Result<(), CliError> {
    let composite = scene.composite()?;
    if composite.wall().is_some() {
        return Err(CliError::validation(
            "a scene with a hard wall has no scattering amplitudes; use find-ss",
        ));
    }
    let solver = scene.resolved_solver();
    let grid = solver.grid();
    for &k in &grid {
        composite.medium().check_wavenumber(k)?;
    }

    let mut rows = Vec::with_capacity(grid.len());
    let mut singular = Vec::new();
    let mut min_m22 = (f64::INFINITY, f64::NAN);
    for &k in &grid {
        let m22 = composite.m22(k)?.norm();
        if m22 < min_m22.0 {
            min_m22 = (m22, k);
        }
        match composite.amplitudes(k) {
            Ok(a) => rows.push(vec![
                k,
                a.r_left.re,
                a.r_left.im,
                a.r_right.re,
                a.r_right.im,
                a.t_left.re,
                a.t_left.im,
                a.t_right.re,
                a.t_right.im,
                m22,
            ]),
            Err(Error::SingularAmplitude { .. }) => {
                singular.push(k);
                let mut row = vec![f64::NAN; 10];
                row[0] = k;
                row[9] = m22;
                rows.push(row);
            }
            Err(e) => return Err(e.into()),
        }
    }

    ensure_dir(out)?;
    write_csv(
        &out.join("amplitudes.csv"),
        &[
            "k", "r_L_re", "r_L_im", "r_R_re", "r_R_im", "t_L_re", "t_L_im", "t_R_re", "t_R_im",
            "abs_m22",
        ],
        &rows,
    )?;
    write_manifest(
        out,
        "amplitudes",
        &with_solver(scene),
        json!({
            "min_abs_m22": min_m22.0,
            "min_abs_m22_k": min_m22.1,
            "singular_k": singular,
        }),
        &["amplitudes.csv"],
    )
}

pub fn find(scene: &SceneConfig, out: Option<&Path>) -> Result<String, CliError> {
    let report = find_ss(&scene.query()?)?;
    if let Some(out) = out {
        ensure_dir(out)?;
        write_json(&out.join("ss.json"), &report.results)?;
        write_manifest(
            out,
            "find-ss",
            &with_solver(scene),
            json!({ "count": report.results.len(), "skipped": report.skipped }),
            &["ss.json"],
        )?;
    }
    Ok(serde_json::to_string_pretty(&report.results)?)
}

/// Runs a registered designer and returns a scene config that reproduces
/// the design, with a solver window around `k_c`.
pub fn design(
    name: &str,
    params: &[(String, f64)],
    out: Option<&Path>,
) -> Result<String, CliError> {
    let registry = DesignerRegistry::builtin();
    if registry.get(name).is_none() {
        return Err(CliError::validation(format!(
            "unknown designer {name:?}; available: {}",
            registry.names().join(", ")
        )));
    }
    let mut p = DesignParams::new();
    for (key, value) in params {
        p.insert(key, *value);
    }
    let d = registry.design(name, &p)?;

    let (k_min, k_max) = match d.medium {
        Medium::Continuous => (0.5 * d.k_c, 1.5 * d.k_c),
        Medium::Lattice { .. } => (
            (0.5 * d.k_c).max(0.01),
            (1.5 * d.k_c).min(std::f64::consts::PI - 0.01),
        ),
    };
    let mut scene = SceneConfig {
        model: Some(d.medium),
        centers: d.centers.iter().map(CenterConfig::from_center).collect(),
        solver: SolverConfig {
            k_min: Some(k_min),
            k_max: Some(k_max),
            ..Default::default()
        },
        ..Default::default()
    };
    if name == "cavity" {
        scene.sim.gamma = d.values.get("gamma").copied();
        scene.sim.a = d.values.get("a").copied();
        scene.sim.k_c = Some(d.k_c);
    }
    // Refuse to emit a scene that would not load back.
    scene.query()?;

    if let Some(out) = out {
        ensure_dir(out)?;
        write_json(&out.join("scene.json"), &scene)?;
        write_manifest(
            out,
            "design",
            &scene,
            json!({
                "designer": d.designer,
                "parameters": params.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
                "k_c": d.k_c,
                "values": d.values,
            }),
            &["scene.json"],
        )?;
    }
    Ok(serde_json::to_string_pretty(&scene)?)
}

fn build_wave(
    scene: &SceneConfig,
    source: WaveSource,
) -> Result<(PiecewiseWave, Option<SubstitutionReport>), CliError> {
    let imaginary = ScatteringCenter::imaginary_delta;
    Ok(match source {
        WaveSource::Jost { k } => {
            let composite = scene.composite()?;
            let wave = jost_wave(&composite, k)?;
            let check = match composite.medium() {
                Medium::Continuous => Some(check_eigenfunction(
                    &wave,
                    &continuous_centers(&composite)?,
                )?),
                Medium::Lattice { .. } => None,
            };
            (wave, check)
        }
        WaveSource::TwoDelta { v1, v2, x1, x2 } => {
            let wave = two_delta_ss_wave(v1, v2, x1, x2)?;
            let check = check_eigenfunction(&wave, &[imaginary(x1, v1), imaginary(x2, v2)])?;
            (wave, Some(check))
        }
        WaveSource::Cavity { k, gamma, a } => {
            let wave = cavity_wave(k, gamma, a)?;
            let centers = [ScatteringCenter::hard_wall(0.0), imaginary(a, gamma)];
            let check = check_eigenfunction(&wave, &centers)?;
            (wave, Some(check))
        }
        WaveSource::Initial { k_c, a } => (initial_cavity_state(k_c, a)?, None),
    })
}

pub fn wave(scene: &SceneConfig, out: &Path) -> Result<(), CliError> {
    let cfg = scene
        .wave
        .ok_or_else(|| CliError::validation("the wave command needs a \"wave\" section"))?;
    if !(cfg.x_min < cfg.x_max) || cfg.points < 2 {
        return Err(CliError::validation(
            "wave: need x_min < x_max and at least 2 points",
        ));
    }
    let (wave, check) = build_wave(scene, cfg.source)?;
    let h = (cfg.x_max - cfg.x_min) / (cfg.points - 1) as f64;
    let xs: Vec<f64> = (0..cfg.points).map(|i| cfg.x_min + i as f64 * h).collect();
    let rows: Vec<Vec<f64>> = wave
        .sample(&xs)?
        .into_iter()
        .map(|(x, z)| vec![x, z.re, z.im, z.norm_sqr()])
        .collect();

    ensure_dir(out)?;
    write_csv(&out.join("wave.csv"), &["x", "re", "im", "abs2"], &rows)?;
    write_manifest(
        out,
        "wave",
        &SceneConfig {
            model: Some(scene.medium()),
            solver: SolverConfig::default(),
            sim: SimulationConfig::default(),
            ..scene.clone()
        },
        json!({
            "k": wave.k(),
            "regions": wave.regions(),
            "substitution_residual": check,
        }),
        &["wave.csv"],
    )
}

fn trace_rows(o: &SimulationOutcome) -> Vec<Vec<f64>> {
    let t = &o.trace;
    (0..t.len())
        .map(|i| {
            vec![
                t.times[i],
                t.values[i].re,
                t.values[i].im,
                t.values[i].norm(),
                t.norms[i],
            ]
        })
        .collect()
}

fn spectrum_rows(k: &[f64], magnitude: &[f64]) -> Vec<Vec<f64>> {
    k.iter().zip(magnitude).map(|(&k, &m)| vec![k, m]).collect()
}

/// `|F|` of `fine` linearly interpolated at `t`.
fn interpolate(fine: &SimulationOutcome, t: f64) -> Option<f64> {
    let times = &fine.trace.times;
    let i = times.partition_point(|&s| s < t);
    let f = |j: usize| fine.trace.values[j].norm();
    match i {
        _ if i == times.len() => None,
        0 => (times[0] == t).then(|| f(0)),
        _ => {
            let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
            Some((1.0 - w) * f(i - 1) + w * f(i))
        }
    }
}

/// Differences between a run and its rerun on a grid with half the spacing
/// and a quarter of the time step.
fn refinement(coarse: &SimulationOutcome) -> Result<serde_json::Value, CliError> {
    let r = &coarse.resolved;
    let fine_cfg = ResolvedSimulation {
        dx: 0.5 * r.dx,
        dt: 0.25 * r.dt,
        ..r.clone()
    };
    let fine = run(&fine_cfg)?;
    let max_delta = coarse
        .trace
        .times
        .iter()
        .zip(&coarse.trace.values)
        .filter_map(|(&t, v)| interpolate(&fine, t).map(|f| (v.norm() - f).abs()))
        .fold(0.0, f64::max);
    Ok(json!({
        "dx": fine_cfg.dx,
        "dt": fine_cfg.dt,
        "t_f": fine.relaxation.t_f(),
        "peak_k": fine.spectrum.peak_k,
        "fwhm": fine.spectrum.fwhm,
        "delta_peak_k": fine.spectrum.peak_k - coarse.spectrum.peak_k,
        "delta_fwhm": fine.spectrum.fwhm.zip(coarse.spectrum.fwhm).map(|(f, c)| f - c),
        "max_delta_abs_fidelity": max_delta,
    }))
}

pub fn simulate(scene: &SceneConfig, out: &Path, refine: bool) -> Result<(), CliError> {
    let resolved = scene.sim.resolve()?;
    let outcome = run(&resolved)?;
    let refined = if refine {
        Some(refinement(&outcome)?)
    } else {
        None
    };

    ensure_dir(out)?;
    write_csv(
        &out.join("trace.csv"),
        &["t", "re_f", "im_f", "abs_f", "norm"],
        &trace_rows(&outcome),
    )?;
    write_csv(
        &out.join("spectrum.csv"),
        &["k", "abs_f"],
        &spectrum_rows(&outcome.spectrum.k, &outcome.spectrum.magnitude),
    )?;
    write_checkpoint(
        &out.join("checkpoint.csv"),
        &outcome.model,
        &outcome.final_state,
    )?;
    let m = &outcome.model;
    write_manifest(
        out,
        "simulate",
        &with_sim(scene, &resolved),
        json!({
            "k_c": resolved.k_c,
            "t_f": outcome.relaxation.t_f(),
            "relaxation": outcome.relaxation,
            "peak_k": outcome.spectrum.peak_k,
            "peak_value": outcome.spectrum.peak_value,
            "fwhm": outcome.spectrum.fwhm,
            "spectrum_time": outcome.spectrum_time,
            "n_sites": m.n_sites,
            "gain_site": m.gain_site,
            "steps": resolved.steps(),
            "guard_time": m.guard_time(),
            "final_norm": outcome.final_state.norm(),
            "refinement": refined,
        }),
        &["trace.csv", "spectrum.csv", "checkpoint.csv"],
    )?;

    if outcome.relaxation.t_f().is_none() {
        return Err(CliError::NotConverged(format!(
            "|F| did not settle within {} over a {}-unit window by t = {}",
            resolved.epsilon, resolved.window, resolved.t_end
        )));
    }
    Ok(())
}

/// `|F(k)|` over a wavenumber grid for the launch state, or for a saved
/// field when `checkpoint` is given.
pub fn spectrum(
    scene: &SceneConfig,
    overrides: &Overrides,
    checkpoint: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let mut sim = scene.sim.clone();
    if overrides.k_min.is_some() || overrides.k_max.is_some() || overrides.k_points.is_some() {
        let base = sim.resolve()?.spectrum;
        sim.spectrum = Some(SpectrumGrid {
            k_min: overrides.k_min.unwrap_or(base.k_min),
            k_max: overrides.k_max.unwrap_or(base.k_max),
            points: overrides.k_points.unwrap_or(base.points),
        });
    }
    let resolved = sim.resolve()?;
    let model = resolved.model()?;
    let state = match checkpoint {
        Some(path) => read_checkpoint(path, &model)?,
        None => {
            SimulationState::from_wave(&model, &initial_cavity_state(resolved.k_c, resolved.a)?)?
        }
    };
    let s = k_spectrum(
        &model,
        &state,
        &resolved.spectrum.values(),
        resolved.fidelity,
    )?;

    ensure_dir(out)?;
    write_csv(
        &out.join("spectrum.csv"),
        &["k", "abs_f"],
        &spectrum_rows(&s.k, &s.magnitude),
    )?;
    write_manifest(
        out,
        "spectrum",
        &with_sim(scene, &resolved),
        json!({
            "t": state.t(),
            "checkpoint": checkpoint.map(|p| p.display().to_string()),
            "peak_k": s.peak_k,
            "peak_value": s.peak_value,
            "fwhm": s.fwhm,
        }),
        &["spectrum.csv"],
    )
}
