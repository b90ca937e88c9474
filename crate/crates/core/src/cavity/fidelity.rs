use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LatticeModel, SimulationState};
use crate::error::{Error, Result};
use crate::wavefield::cavity_wave;

/// How the overlap with the reference wave is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityKind {
    /// `∫Ψ*ψᵏ / ∫|Ψ|²`, linear in the reference wave.
    #[default]
    Plain,
    /// `∫Ψ*ψᵏ / (‖Ψ‖·‖ψᵏ‖)` with both norms over the chain, bounded by 1.
    Symmetric,
}

/// The reference wave `cavity_wave(k)` sampled on the chain sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    k: f64,
    samples: Vec<Complex64>,
    norm: f64,
}

impl Probe {
    pub fn cavity(model: &LatticeModel, k: f64) -> Result<Self> {
        let wave = cavity_wave(k, model.gamma, model.a)?;
        let samples = (0..model.n_sites)
            .map(|i| wave.evaluate(model.x(i)))
            .collect::<Result<Vec<_>>>()?;
        let norm = model.dx * samples.iter().map(|z| z.norm_sqr()).sum::<f64>();
        Ok(Self { k, samples, norm })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `dx·Σ|ψᵏⱼ|²` over the chain.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

pub fn overlap(
    model: &LatticeModel,
    state: &SimulationState,
    probe: &Probe,
    kind: FidelityKind,
) -> Result<Complex64> {
    let norm = state.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let num: Complex64 = model.dx
        * state
            .amplitudes()
            .iter()
            .zip(&probe.samples)
            .map(|(p, w)| p.conj() * w)
            .sum::<Complex64>();
    Ok(match kind {
        FidelityKind::Plain => num / norm,
        FidelityKind::Symmetric => num / (norm * probe.norm).sqrt(),
    })
}

/// `F(k, t)` with the reference wave `cavity_wave(k)` of the model.
pub fn fidelity(model: &LatticeModel, state: &SimulationState, k: f64) -> Result<Complex64> {
    overlap(model, state, &Probe::cavity(model, k)?, FidelityKind::Plain)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub k: f64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// State norm at each recorded time.
    pub norms: Vec<f64>,
}

impl FidelityTrace {
    pub fn new(k: f64) -> Self {
        Self {
            k,
            times: Vec::new(),
            values: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, value: Complex64, norm: f64) -> Result<()> {
        if self.times.last().is_some_and(|&last| t <= last) {
            return Err(Error::invalid(format!(
                "trace times must increase, got {t}"
            )));
        }
        self.times.push(t);
        self.values.push(value);
        self.norms.push(norm);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }
}

/// How the spread of `|F|` over a window is compared with ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateauCriterion {
    /// `max - min < ε`.
    Absolute,
    /// `(max - min)/mean < ε`.
    #[default]
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Relaxation {
    Converged {
        t_f: f64,
        index: usize,
        spread: f64,
    },
    /// No window met the criterion; the smallest spread seen is reported.
    NotConverged {
        best_t: f64,
        best_spread: f64,
    },
}

impl Relaxation {
    pub fn t_f(&self) -> Option<f64> {
        match *self {
            Relaxation::Converged { t_f, .. } => Some(t_f),
            Relaxation::NotConverged { .. } => None,
        }
    }
}

/// Smallest recorded `t` for which `|F|` varies by less than `epsilon` over
/// `[t, t + window]`. Only windows fully covered by the trace count.
pub fn relaxation_time(
    trace: &FidelityTrace,
    window: f64,
    epsilon: f64,
    criterion: PlateauCriterion,
) -> Result<Relaxation> {
    if !(window >= 0.0 && window.is_finite()) {
        return Err(Error::invalid(format!(
            "window must be non-negative, got {window}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if trace.is_empty() {
        return Err(Error::invalid("empty fidelity trace"));
    }
    let t = &trace.times;
    let f = trace.magnitudes();
    let n = t.len();
    let t_last = t[n - 1];
    let slack = 1e-9 * window.max(1.0);

    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + f[i];
    }
    // Monotone deques of indices for the sliding max and min.
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut end = 0;
    let mut best = (t[0], f64::INFINITY);
    for start in 0..n {
        if t[start] + window > t_last + slack {
            break;
        }
        while end < n && t[end] <= t[start] + window + slack {
            while maxq.back().is_some_and(|&j| f[j] <= f[end]) {
                maxq.pop_back();
            }
            maxq.push_back(end);
            while minq.back().is_some_and(|&j| f[j] >= f[end]) {
                minq.pop_back();
            }
            minq.push_back(end);
            end += 1;
        }
        while maxq.front().is_some_and(|&j| j < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < start) {
            minq.pop_front();
        }
        let raw = f[maxq[0]] - f[minq[0]];
        let spread = match criterion {
            PlateauCriterion::Absolute => raw,
            PlateauCriterion::Relative => {
                let mean = (prefix[end] - prefix[start]) / (end - start) as f64;
                if mean > 0.0 {
                    raw / mean
                } else {
                    f64::INFINITY
                }
            }
        };
        if spread < epsilon {
            return Ok(Relaxation::Converged {
                t_f: t[start],
                index: start,
                spread,
            });
        }
        if spread < best.1 {
            best = (t[start], spread);
        }
    }
    Ok(Relaxation::NotConverged {
        best_t: best.0,
        best_spread: best.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub k: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// Peak position refined by a parabola through the largest sample and
    /// its neighbours.
    pub peak_k: f64,
    pub peak_value: f64,
    /// Full width at half maximum from linearly interpolated crossings;
    /// `None` if the peak does not fall below half inside the grid.
    pub fwhm: Option<f64>,
}

pub fn k_spectrum(
    model: &LatticeModel,
    state: &SimulationState,
    k_grid: &[f64],
    kind: FidelityKind,
) -> Result<Spectrum> {
    if k_grid.is_empty() {
        return Err(Error::invalid("empty k grid"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("k grid must be strictly increasing"));
    }
    let magnitude = k_grid
        .par_iter()
        .map(|&k| Ok(overlap(model, state, &Probe::cavity(model, k)?, kind)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(k_grid.to_vec(), magnitude))
}

fn summarize(k: Vec<f64>, magnitude: Vec<f64>) -> Spectrum {
    let n = k.len();
    let ip = magnitude
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let peak_value = magnitude[ip];
    let mut peak_k = k[ip];
    if ip > 0 && ip + 1 < n {
        let (y0, y1, y2) = (magnitude[ip - 1], magnitude[ip], magnitude[ip + 1]);
        let curvature = y0 - 2.0 * y1 + y2;
        if curvature < 0.0 {
            let shift = 0.5 * (y0 - y2) / curvature;
            let h = if shift < 0.0 {
                k[ip] - k[ip - 1]
            } else {
                k[ip + 1] - k[ip]
            };
            peak_k += shift * h;
        }
    }
    let half = 0.5 * peak_value;
    let crossing = |i: usize, j: usize| {
        let (ya, yb) = (magnitude[i], magnitude[j]);
        k[i] + (half - ya) / (yb - ya) * (k[j] - k[i])
    };
    let left = (0..ip)
        .rev()
        .find(|&i| magnitude[i] < half)
        .map(|i| crossing(i, i + 1));
    let right = (ip + 1..n)
        .find(|&i| magnitude[i] < half)
        .map(|i| crossing(i - 1, i));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };
    Spectrum {
        k,
        magnitude,
        peak_k,
        peak_value,
        fwhm,
    }
}
