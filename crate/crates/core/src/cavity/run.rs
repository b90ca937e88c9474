use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    build_lattice, check_resolution, k_spectrum, overlap, relaxation_time, CrankNicolson,
    FidelityKind, FidelityTrace, LatticeModel, PlateauCriterion, Probe, Relaxation,
    SimulationState, Spectrum,
};
use crate::error::{Error, Result};
use crate::wavefield::initial_cavity_state;

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_A: f64 = 10.25 * PI;
pub const DEFAULT_SITES_PER_CAVITY: f64 = 2048.0;
pub const DEFAULT_DT_FACTOR: f64 = 0.25;
pub const DEFAULT_LENGTH_FACTOR: f64 = 8.0;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_WINDOW: f64 = 5.0;
pub const DEFAULT_RECORD_INTERVAL: f64 = 0.01;
pub const DEFAULT_SPECTRUM_POINTS: usize = 1001;

/// Simulation settings as written by a user; unset fields take defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Gain strength, default 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Cavity length, default 10.25π.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Wavenumber of the launched state and the fidelity, default 2γ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_c: Option<f64>,
    /// Site spacing, default a/2048.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    /// Time step, default dx²/4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Truncation length, default 8a.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// End time, default the reflection guard of the chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Time between fidelity samples, default 0.01.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_interval: Option<f64>,
    /// Plateau window, default 5.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Plateau tolerance, default 1e-3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauCriterion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityKind>,
    /// Wavenumbers for the spectrum, default 1001 points on [k_c/2, 3k_c/2].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl SpectrumGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.k_min + (self.k_max - self.k_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.k_min > 0.0 && self.k_max > self.k_min && self.k_max.is_finite()) {
            return Err(Error::invalid(format!(
                "spectrum range must satisfy 0 < k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.points < 3 {
            return Err(Error::invalid("spectrum needs at least 3 points"));
        }
        Ok(())
    }
}

/// Every setting of a run, defaults expanded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSimulation {
    pub gamma: f64,
    pub a: f64,
    pub k_c: f64,
    pub dx: f64,
    pub dt: f64,
    pub length: f64,
    pub t_end: f64,
    pub record_interval: f64,
    pub window: f64,
    pub epsilon: f64,
    pub plateau: PlateauCriterion,
    pub fidelity: FidelityKind,
    pub spectrum: SpectrumGrid,
}

impl SimulationConfig {
    pub fn resolve(&self) -> Result<ResolvedSimulation> {
        let gamma = self.gamma.unwrap_or(DEFAULT_GAMMA);
        let a = self.a.unwrap_or(DEFAULT_A);
        let k_c = match self.k_c {
            Some(k) => k,
            None if gamma > 0.0 => 2.0 * gamma,
            None => {
                return Err(Error::invalid(
                    "k_c has no default without gain; set it explicitly",
                ))
            }
        };
        if !(k_c > 0.0 && k_c.is_finite()) {
            return Err(Error::invalid(format!("k_c must be positive, got {k_c}")));
        }
        let dx = self.dx.unwrap_or(a / DEFAULT_SITES_PER_CAVITY);
        let dt = self.dt.unwrap_or(DEFAULT_DT_FACTOR * dx * dx);
        let length = self.length.unwrap_or(DEFAULT_LENGTH_FACTOR * a);
        let model = build_lattice(gamma, a, length, dx)?;
        check_resolution(k_c, dx)?;
        let t_end = self.t_end.unwrap_or_else(|| model.guard_time());
        let spectrum = self.spectrum.unwrap_or(SpectrumGrid {
            k_min: 0.5 * k_c,
            k_max: 1.5 * k_c,
            points: DEFAULT_SPECTRUM_POINTS,
        });
        spectrum.validate()?;
        let resolved = ResolvedSimulation {
            gamma,
            a,
            k_c,
            dx,
            dt,
            length,
            t_end,
            record_interval: self.record_interval.unwrap_or(DEFAULT_RECORD_INTERVAL),
            window: self.window.unwrap_or(DEFAULT_WINDOW),
            epsilon: self.epsilon.unwrap_or(DEFAULT_EPSILON),
            plateau: self.plateau.unwrap_or_default(),
            fidelity: self.fidelity.unwrap_or_default(),
            spectrum,
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

impl ResolvedSimulation {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.record_interval > 0.0) {
            return Err(Error::invalid("record interval must be positive"));
        }
        if !(self.window >= 0.0 && self.window.is_finite()) {
            return Err(Error::invalid("window must be non-negative"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<LatticeModel> {
        build_lattice(self.gamma, self.a, self.length, self.dx)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    pub fn record_stride(&self) -> usize {
        (self.record_interval / self.dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub resolved: ResolvedSimulation,
    pub model: LatticeModel,
    pub trace: FidelityTrace,
    pub relaxation: Relaxation,
    /// Spectrum at `t_f`, or at the end of the run without a plateau.
    pub spectrum: Spectrum,
    pub spectrum_time: f64,
    pub final_state: SimulationState,
}

/// Number of recorded samples between kept snapshots, used to rebuild the
/// state at `t_f` without storing every record.
const SNAPSHOT_EVERY: usize = 100;

/// The state after `target` steps, evolved from the latest snapshot at or
/// before it. Replaying performs the same arithmetic as the original run.
fn replay(
    model: &LatticeModel,
    stepper: &mut CrankNicolson,
    snapshots: &[(usize, SimulationState)],
    target: usize,
) -> Result<SimulationState> {
    let (from, snap) = snapshots
        .iter()
        .rev()
        .find(|(s, _)| *s <= target)
        .ok_or_else(|| Error::invalid(format!("no snapshot precedes step {target}")))?;
    let mut s = snap.clone();
    stepper.advance(model, &mut s, target - from, *from)?;
    Ok(s)
}

/// Launches the initial cavity state and records `F(k_c, t)` until `t_end`.
pub fn run(cfg: &ResolvedSimulation) -> Result<SimulationOutcome> {
    let model = cfg.model()?;
    let wave = initial_cavity_state(cfg.k_c, cfg.a)?;
    let initial = SimulationState::from_wave(&model, &wave)?;
    let probe = Probe::cavity(&model, cfg.k_c)?;
    let mut stepper = CrankNicolson::new(&model, cfg.dt)?;

    let total = cfg.steps();
    let stride = cfg.record_stride();
    let mut trace = FidelityTrace::new(cfg.k_c);
    let mut snapshots: Vec<(usize, SimulationState)> = vec![(0, initial.clone())];
    let mut state = initial;
    trace.push(
        0.0,
        overlap(&model, &state, &probe, cfg.fidelity)?,
        state.norm(),
    )?;

    let mut step = 0;
    let mut record = 0;
    while step < total {
        let n = stride.min(total - step);
        stepper.advance(&model, &mut state, n, step)?;
        step += n;
        record += 1;
        let t = step as f64 * cfg.dt;
        trace.push(
            t,
            overlap(&model, &state, &probe, cfg.fidelity)?,
            state.norm(),
        )?;
        if record % SNAPSHOT_EVERY == 0 {
            snapshots.push((step, state.clone()));
        }
    }

    let relaxation = relaxation_time(&trace, cfg.window, cfg.epsilon, cfg.plateau)?;
    let at_tf = match relaxation {
        Relaxation::Converged { index, .. } => replay(
            &model,
            &mut stepper,
            &snapshots,
            (index * stride).min(total),
        )?,
        Relaxation::NotConverged { .. } => state.clone(),
    };
    let spectrum = k_spectrum(&model, &at_tf, &cfg.spectrum.values(), cfg.fidelity)?;
    Ok(SimulationOutcome {
        resolved: cfg.clone(),
        model,
        trace,
        relaxation,
        spectrum,
        spectrum_time: at_tf.t(),
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_expand() {
        let r = SimulationConfig::default().resolve().unwrap();
        assert_eq!(r.gamma, 1.0);
        assert_eq!(r.k_c, 2.0);
        assert_eq!(r.dx, DEFAULT_A / 2048.0);
        assert_eq!(r.length, 8.0 * DEFAULT_A);
        assert_eq!(r.dt, 0.25 * r.dx * r.dx);
        assert_eq!(r.spectrum.k_min, 1.0);
    }

    #[test]
    fn hermitian_run_needs_explicit_k() {
        let cfg = SimulationConfig {
            gamma: Some(0.0),
            ..Default::default()
        };
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<SimulationConfig>(r#"{"gama": 1.0}"#);
        assert!(err.is_err());
    }

    #[test]
    fn short_run_is_reproducible() {
        let cfg = SimulationConfig {
            gamma: Some(1.0),
            a: Some(2.25 * PI),
            dx: Some(2.25 * PI / 128.0),
            t_end: Some(1.0),
            record_interval: Some(0.05),
            window: Some(0.2),
            epsilon: Some(0.5),
            spectrum: Some(SpectrumGrid {
                k_min: 1.0,
                k_max: 3.0,
                points: 41,
            }),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.spectrum, b.spectrum);
        assert_eq!(a.trace.len(), 21);
        let t_f = a.relaxation.t_f().unwrap();
        assert!((a.spectrum_time - t_f).abs() < 1e-12);
    }

    #[test]
    fn replay_matches_direct_evolution() {
        let model = build_lattice(1.0, 2.0, 6.0, 0.05).unwrap();
        let init =
            SimulationState::from_wave(&model, &initial_cavity_state(2.0, 2.0).unwrap()).unwrap();
        let dt = 1e-3;
        let mut stepper = CrankNicolson::new(&model, dt).unwrap();
        let mut snapshots = vec![(0, init.clone())];
        let mut s = init.clone();
        for k in 1..=3 {
            stepper.advance(&model, &mut s, 40, 0).unwrap();
            snapshots.push((40 * k, s.clone()));
        }
        let replayed = replay(&model, &mut stepper, &snapshots, 97).unwrap();
        let direct = super::super::evolve(&model, &init, dt, 97).unwrap();
        assert_eq!(replayed.amplitudes(), direct.amplitudes());
    }
}
