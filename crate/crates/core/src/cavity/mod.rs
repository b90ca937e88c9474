//! Time evolution of a state launched inside the wall-plus-gain cavity.
//!
//! The half line `x > 0` with a hard wall at the origin and `iγδ(x - a)` is
//! cut at `x = L` and discretized on sites `xⱼ = j·dx`, `j = 1..=N`, with
//! `ψ₀ = ψ_{N+1} = 0`. The kinetic term becomes the chain `2κ` on site and
//! `-κ` between neighbours with `κ = 1/(2dx²)`, and the delta becomes the
//! on-site term `iγ/dx` at the site nearest `a`. Nothing absorbs at `x = L`,
//! so runs are meant to stop before radiation comes back from the cut.

mod fidelity;
mod run;

pub use fidelity::{
    fidelity, k_spectrum, overlap, relaxation_time, FidelityKind, FidelityTrace, PlateauCriterion,
    Probe, Relaxation, Spectrum,
};
pub use run::{run, ResolvedSimulation, SimulationConfig, SimulationOutcome, SpectrumGrid};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavefield::PiecewiseWave;

/// Largest `k·dx` accepted for the wavenumbers of interest.
pub const MAX_K_DX: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeModel {
    pub n_sites: usize,
    pub dx: f64,
    pub kappa: f64,
    /// 1-based index of the site carrying `iγ/dx`.
    pub gain_site: usize,
    pub gamma: f64,
    pub a: f64,
    pub length: f64,
}

/// Builds the truncated cavity chain. `k_c = 2γ` is checked against the
/// resolution guard; other wavenumbers can be checked with
/// [`check_resolution`].
pub fn build_lattice(gamma: f64, a: f64, length: f64, dx: f64) -> Result<LatticeModel> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::invalid(format!(
            "γ must be finite and non-negative, got {gamma}"
        )));
    }
    if !(a > 0.0 && a < length && length.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < a < L, got a = {a}, L = {length}"
        )));
    }
    if !(dx > 0.0 && dx < a) {
        return Err(Error::invalid(format!("dx must lie in (0, a), got {dx}")));
    }
    check_resolution(2.0 * gamma, dx)?;
    let n_sites = (length / dx * (1.0 + 1e-12)).floor() as usize;
    let gain_site = (a / dx).round() as usize;
    if gain_site == 0 || gain_site >= n_sites {
        return Err(Error::invalid(format!(
            "gain site {gain_site} does not fit inside the {n_sites}-site chain"
        )));
    }
    Ok(LatticeModel {
        n_sites,
        dx,
        kappa: 0.5 / (dx * dx),
        gain_site,
        gamma,
        a,
        length,
    })
}

pub fn check_resolution(k: f64, dx: f64) -> Result<()> {
    if k * dx < MAX_K_DX {
        Ok(())
    } else {
        Err(Error::Resolution(format!(
            "k·dx = {} for k = {k}, dx = {dx}; it must stay below {MAX_K_DX}",
            k * dx
        )))
    }
}

impl LatticeModel {
    /// Position of the 0-based amplitude index `i`.
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_sites).map(|i| self.x(i)).collect()
    }

    pub fn diagonal(&self, i: usize) -> Complex64 {
        let mut h = Complex64::new(2.0 * self.kappa, 0.0);
        if i + 1 == self.gain_site {
            h += Complex64::new(0.0, self.gamma / self.dx);
        }
        h
    }

    pub fn is_hermitian(&self) -> bool {
        self.gamma == 0.0
    }

    /// Largest group velocity on the chain, `2κ·dx`.
    pub fn max_group_velocity(&self) -> f64 {
        2.0 * self.kappa * self.dx
    }

    /// Time for the fastest lattice wave to cross from the gain site to the
    /// truncation point.
    pub fn guard_time(&self) -> f64 {
        (self.length - self.a) / self.max_group_velocity()
    }

    /// `Hψ` for the chain, used for stationarity checks.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    psi[i - 1]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let right = if i + 1 < n {
                    psi[i + 1]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                self.diagonal(i) * psi[i] - self.kappa * (left + right)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    amplitudes: Vec<Complex64>,
    t: f64,
    norm: f64,
}

impl SimulationState {
    pub fn new(model: &LatticeModel, amplitudes: Vec<Complex64>, t: f64) -> Result<Self> {
        if amplitudes.len() != model.n_sites {
            return Err(Error::invalid(format!(
                "state has {} amplitudes for a {}-site chain",
                amplitudes.len(),
                model.n_sites
            )));
        }
        let norm = discrete_norm(&amplitudes, model.dx);
        Ok(Self {
            amplitudes,
            t,
            norm,
        })
    }

    /// Samples `wave` on the chain sites at `t = 0`.
    pub fn from_wave(model: &LatticeModel, wave: &PiecewiseWave) -> Result<Self> {
        let amps = (0..model.n_sites)
            .map(|i| wave.evaluate(model.x(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, amps, 0.0)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `dx·Σ|ψⱼ|²`.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

fn discrete_norm(psi: &[Complex64], dx: f64) -> f64 {
    dx * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Crank–Nicolson stepping `(1 + i·dt·H/2)ψⁿ⁺¹ = (1 - i·dt·H/2)ψⁿ`.
///
/// The left-hand side is factorized once from each end. Steps alternate
/// between the two factorizations so that the back substitution of one step
/// and the elimination of the next run in the same direction and can share a
/// sweep; both recurrences are then in flight together. With `o` the
/// off-diagonal, `bᵢ` the right-hand diagonal and `pᵢ` the pivots, the
/// left-to-right variant is `yᵢ = (bᵢψᵢ - o(ψᵢ₋₁ + ψᵢ₊₁) - o·yᵢ₋₁)/pᵢ`
/// followed by `ψᵢ = yᵢ - (o/pᵢ)ψᵢ₊₁`; the other is its mirror image.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    dt: f64,
    /// `bᵢ/pᵢ` and `o/pᵢ` for elimination from the left.
    diag_lr: Vec<Complex64>,
    c_lr: Vec<Complex64>,
    /// The same for elimination from the right.
    diag_rl: Vec<Complex64>,
    c_rl: Vec<Complex64>,
    forward: Vec<Complex64>,
    backward: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(model: &LatticeModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let n = model.n_sites;
        let half = Complex64::new(0.0, 0.5 * dt);
        let off = -half * model.kappa;
        let d: Vec<Complex64> = (0..n).map(|i| 1.0 + half * model.diagonal(i)).collect();
        let factor = |order: &mut dyn Iterator<Item = usize>| -> Result<(Vec<_>, Vec<_>)> {
            let mut diag = vec![Complex64::new(0.0, 0.0); n];
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            let mut prev_c = Complex64::new(0.0, 0.0);
            for i in order {
                let pivot = d[i] - off * prev_c;
                if !(pivot.norm() > 1e-12 * d[i].norm()) {
                    return Err(Error::IntegratorBreakdown {
                        step: 0,
                        site: i + 1,
                        reason: format!("vanishing pivot {pivot} in the tridiagonal factorization"),
                    });
                }
                let inv = 1.0 / pivot;
                prev_c = off * inv;
                c[i] = prev_c;
                diag[i] = (2.0 - d[i]) * inv;
            }
            Ok((diag, c))
        };
        let (diag_lr, c_lr) = factor(&mut (0..n))?;
        let (diag_rl, c_rl) = factor(&mut (0..n).rev())?;
        Ok(Self {
            dt,
            diag_lr,
            c_lr,
            diag_rl,
            c_rl,
            forward: vec![Complex64::new(0.0, 0.0); n],
            backward: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `psi` in place by one step.
    pub fn step(&mut self, psi: &mut [Complex64]) {
        self.steps(psi, 1);
    }

    /// Advances `psi` in place by `count` steps.
    pub fn steps(&mut self, psi: &mut [Complex64], count: usize) {
        let n = self.c_lr.len();
        assert_eq!(psi.len(), n, "state length does not match the chain");
        if count == 0 || n == 0 {
            return;
        }
        let zero = Complex64::new(0.0, 0.0);
        let (bl, cl) = (&self.diag_lr[..n], &self.c_lr[..n]);
        let (br, cr) = (&self.diag_rl[..n], &self.c_rl[..n]);
        let (y, z) = (&mut self.forward[..n], &mut self.backward[..n]);

        // Elimination from the left for the first step.
        let mut prev = zero;
        let mut left = zero;
        for i in 0..n {
            let here = psi[i];
            let right = if i + 1 < n { psi[i + 1] } else { zero };
            let u = bl[i] * here - cl[i] * (left + right);
            prev = u - cl[i] * prev;
            y[i] = prev;
            left = here;
        }

        for s in 1..=count {
            let last = s == count;
            if s % 2 == 1 {
                // Substitute right to left out of `y`.
                let mut a_mid = y[n - 1];
                if last {
                    psi[n - 1] = a_mid;
                    for i in (0..n - 1).rev() {
                        a_mid = y[i] - cl[i] * a_mid;
                        psi[i] = a_mid;
                    }
                    break;
                }
                // Eliminate from the right one site behind.
                let mut a_hi = zero;
                let mut zp = zero;
                for i in (0..n - 1).rev() {
                    let a = y[i] - cl[i] * a_mid;
                    let j = i + 1;
                    let u = br[j] * a_mid - cr[j] * (a + a_hi);
                    zp = u - cr[j] * zp;
                    z[j] = zp;
                    a_hi = a_mid;
                    a_mid = a;
                }
                let u = br[0] * a_mid - cr[0] * a_hi;
                z[0] = u - cr[0] * zp;
            } else {
                // Substitute left to right out of `z`.
                let mut p_mid = z[0];
                if last {
                    psi[0] = p_mid;
                    for i in 1..n {
                        p_mid = z[i] - cr[i] * p_mid;
                        psi[i] = p_mid;
                    }
                    break;
                }
                // Eliminate from the left one site behind.
                let mut p_lo = zero;
                let mut yp = zero;
                for i in 1..n {
                    let p = z[i] - cr[i] * p_mid;
                    let j = i - 1;
                    let u = bl[j] * p_mid - cl[j] * (p_lo + p);
                    yp = u - cl[j] * yp;
                    y[j] = yp;
                    p_lo = p_mid;
                    p_mid = p;
                }
                let u = bl[n - 1] * p_mid - cl[n - 1] * p_lo;
                y[n - 1] = u - cl[n - 1] * yp;
            }
        }
    }

    /// Advances `state` by `steps` steps. `first_step` only labels
    /// diagnostics.
    pub fn advance(
        &mut self,
        model: &LatticeModel,
        state: &mut SimulationState,
        steps: usize,
        first_step: usize,
    ) -> Result<()> {
        self.steps(&mut state.amplitudes, steps);
        state.t += steps as f64 * self.dt;
        state.norm = discrete_norm(&state.amplitudes, model.dx);
        if !state.norm.is_finite() {
            let site = state
                .amplitudes
                .iter()
                .position(|z| !z.is_finite())
                .map_or(0, |i| i + 1);
            return Err(Error::IntegratorBreakdown {
                step: first_step + steps,
                site,
                reason: "state became non-finite".into(),
            });
        }
        Ok(())
    }
}

pub fn evolve(
    model: &LatticeModel,
    state: &SimulationState,
    dt: f64,
    steps: usize,
) -> Result<SimulationState> {
    let mut stepper = CrankNicolson::new(model, dt)?;
    let mut next = state.clone();
    stepper.advance(model, &mut next, steps, 0)?;
    Ok(next)
}
