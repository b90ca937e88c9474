//! Locating spectral singularities on the real wavenumber axis, and building
//! systems that have one at a prescribed wavenumber.
//!
//! The search scans `|D(k)|` on a uniform grid, where `D` is the composite's
//! [`ss_determinant`](crate::scatter::Composite::ss_determinant), brackets
//! every local minimum between its grid neighbours and refines it by
//! golden-section search. `D` is complex on the real axis, so there is no
//! sign change to bisect on; a zero shows up as a minimum of the modulus.
//! A refined minimum is accepted when `|D| < tolerance`.

mod design;

pub use design::{
    design_cavity, design_lattice_pair, design_two_delta, CavityDesign, Design, DesignParams,
    Designer, DesignerRegistry, LatticePairDesign, TwoDeltaDesign,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scatter::{Composite, Medium};

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const GOLDEN_ITERATIONS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct SsQuery {
    pub composite: Composite,
    pub k_min: f64,
    pub k_max: f64,
    pub grid_points: usize,
    pub tolerance: f64,
}

impl SsQuery {
    pub fn new(composite: Composite, k_min: f64, k_max: f64) -> Self {
        Self {
            composite,
            k_min,
            k_max,
            grid_points: DEFAULT_GRID_POINTS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_min < self.k_max) || !self.k_min.is_finite() || !self.k_max.is_finite() {
            return Err(Error::invalid(format!(
                "need k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.k_min <= 0.0 {
            return Err(Error::invalid("k_min must be positive"));
        }
        if let Medium::Lattice { .. } = self.composite.medium() {
            if self.k_max >= std::f64::consts::PI {
                return Err(Error::invalid("lattice windows must end below π"));
            }
        }
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points must be at least 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }

    fn grid_step(&self) -> f64 {
        (self.k_max - self.k_min) / (self.grid_points - 1) as f64
    }

    fn grid(&self) -> Vec<f64> {
        let h = self.grid_step();
        (0..self.grid_points)
            .map(|i| {
                if i + 1 == self.grid_points {
                    self.k_max
                } else {
                    self.k_min + i as f64 * h
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsResult {
    pub k_c: f64,
    /// `|D(k_c)|`.
    pub residual: f64,
    /// Order of the zero estimated from how fast `|D|` grows away from it.
    /// Informational only.
    pub multiplicity_hint: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub k: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SsReport {
    /// Accepted singularities in ascending `k_c`.
    pub results: Vec<SsResult>,
    /// Grid points where the determinant could not be evaluated.
    pub skipped: Vec<SkippedPoint>,
}

/// `r_R^A · r_L^B · e^{2ik·separation} - 1`, which vanishes exactly when the
/// two centers' reflections close into a self-sustained loop.
pub fn matching_residual(
    r_right_a: Complex64,
    r_left_b: Complex64,
    separation: f64,
    k: f64,
) -> Result<Complex64> {
    if !(separation > 0.0) || !separation.is_finite() {
        return Err(Error::invalid(format!(
            "separation must be positive, got {separation}"
        )));
    }
    if !k.is_finite() || !r_right_a.is_finite() || !r_left_b.is_finite() {
        return Err(Error::invalid("matching residual needs finite inputs"));
    }
    Ok(r_right_a * r_left_b * Complex64::from_polar(1.0, 2.0 * k * separation) - 1.0)
}

fn modulus_at(composite: &Composite, k: f64) -> Result<f64> {
    let d = composite.ss_determinant(k)?;
    if d.is_finite() {
        Ok(d.norm())
    } else {
        Err(Error::SingularAmplitude { k })
    }
}

pub fn find_ss(query: &SsQuery) -> Result<SsReport> {
    query.validate()?;
    let comp = &query.composite;
    // Configuration errors surface once here instead of at every grid point.
    comp.ss_determinant(query.k_min)?;

    let grid = query.grid();
    let values: Vec<Result<f64>> = grid.par_iter().map(|&k| modulus_at(comp, k)).collect();

    let mut report = SsReport::default();
    let f: Vec<f64> = grid
        .iter()
        .zip(values)
        .map(|(&k, v)| match v {
            Ok(v) => v,
            Err(e) => {
                report.skipped.push(SkippedPoint {
                    k,
                    reason: e.to_string(),
                });
                f64::NAN
            }
        })
        .collect();

    let n = grid.len();
    let mut brackets = Vec::new();
    for i in 0..n {
        if f[i].is_nan() {
            continue;
        }
        let left = if i > 0 { f[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { f[i + 1] } else { f64::INFINITY };
        // Poles next to a point are skipped, not treated as walls of a minimum.
        if left.is_nan() || right.is_nan() {
            continue;
        }
        if f[i] <= left && f[i] < right {
            brackets.push((grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)]));
        }
    }

    let objective = |k: f64| modulus_at(comp, k).unwrap_or(f64::INFINITY);
    let step = query.grid_step();
    let mut found: Vec<SsResult> = Vec::new();
    for (lo, hi) in brackets {
        let (k_c, residual) = golden_section(&objective, lo, hi);
        if residual >= query.tolerance {
            continue;
        }
        let hint = multiplicity_hint(&objective, k_c, step, query.k_min, query.k_max);
        let candidate = SsResult {
            k_c,
            residual,
            multiplicity_hint: hint,
        };
        match found.last_mut() {
            Some(prev) if (prev.k_c - k_c).abs() < 0.5 * step => {
                if residual < prev.residual {
                    *prev = candidate;
                }
            }
            _ => found.push(candidate),
        }
    }
    found.sort_by(|a, b| a.k_c.total_cmp(&b.k_c));
    report.results = found;
    Ok(report)
}

/// Golden-section minimization on `[lo, hi]`; returns the best point seen.
fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = (lo, f(lo));
    let consider = |x: f64, v: f64, best: &mut (f64, f64)| {
        if v < best.1 {
            *best = (x, v);
        }
    };
    let fhi = f(hi);
    consider(hi, fhi, &mut best);

    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    consider(x1, f1, &mut best);
    consider(x2, f2, &mut best);
    for _ in 0..GOLDEN_ITERATIONS {
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            consider(x1, f1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            consider(x2, f2, &mut best);
        }
    }
    best
}

/// `|D| ~ c|k - k_c|^m` near a zero of order `m`; compare two stencil radii.
fn multiplicity_hint(f: &impl Fn(f64) -> f64, k_c: f64, step: f64, k_min: f64, k_max: f64) -> u32 {
    let h = (0.25 * step).min(1e-3 * k_c.abs().max(1e-3));
    let sample = |d: f64| {
        let a = if k_c - d > k_min {
            f(k_c - d)
        } else {
            f64::NAN
        };
        let b = if k_c + d < k_max {
            f(k_c + d)
        } else {
            f64::NAN
        };
        match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (true, false) => a,
            (false, true) => b,
            (false, false) => f64::NAN,
        }
    };
    let near = sample(h);
    let far = sample(2.0 * h);
    if !(near > 0.0 && far > 0.0) {
        return 1;
    }
    let order = (far / near).log2().round();
    if order.is_finite() && order >= 1.0 {
        order as u32
    } else {
        1
    }
}
