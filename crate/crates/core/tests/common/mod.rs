//! Independent reference computations shared by the integration tests.
//!
//! Nothing here uses transfer matrices: amplitudes come from solving the
//! boundary conditions of the piecewise solution as one dense linear system.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expi(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// `(r_L, t_L, r_R, t_R)` in the global frame.
#[derive(Debug, Clone, Copy)]
pub struct OracleAmplitudes {
    pub r_left: Complex64,
    pub t_left: Complex64,
    pub r_right: Complex64,
    pub t_right: Complex64,
}

fn solve(a: DMatrix<Complex64>, b: DVector<Complex64>) -> Option<DVector<Complex64>> {
    a.lu().solve(&b)
}

/// Deltas `sⱼδ(x - xⱼ)` at increasing positions. Unknowns are the plane-wave
/// coefficients `(c₊, c₋)` of all `n + 1` regions; each delta contributes
/// continuity and `ψ'(x⁺) - ψ'(x⁻) = 2sψ(x)`, and two rows fix the
/// incoming waves.
pub fn delta_chain(deltas: &[(f64, Complex64)], k: f64) -> Option<OracleAmplitudes> {
    let n = deltas.len();
    let size = 2 * (n + 1);
    let ik = c(0.0, k);
    let build = |from_left: bool| {
        let mut a = DMatrix::<Complex64>::zeros(size, size);
        let mut b = DVector::<Complex64>::zeros(size);
        for (j, &(x, s)) in deltas.iter().enumerate() {
            let (ep, em) = (expi(k * x), expi(-k * x));
            let (l, r) = (2 * j, 2 * (j + 1));
            let row = 2 * j;
            // ψ(x⁺) - ψ(x⁻) = 0
            a[(row, r)] = ep;
            a[(row, r + 1)] = em;
            a[(row, l)] = -ep;
            a[(row, l + 1)] = -em;
            // ψ'(x⁺) - ψ'(x⁻) - 2sψ(x⁻) = 0
            a[(row + 1, r)] = ik * ep;
            a[(row + 1, r + 1)] = -ik * em;
            a[(row + 1, l)] = -ik * ep - 2.0 * s * ep;
            a[(row + 1, l + 1)] = ik * em - 2.0 * s * em;
        }
        let (p0, mn) = (0, 2 * n + 1);
        a[(2 * n, p0)] = c(1.0, 0.0);
        a[(2 * n + 1, mn)] = c(1.0, 0.0);
        if from_left {
            b[2 * n] = c(1.0, 0.0);
        } else {
            b[2 * n + 1] = c(1.0, 0.0);
        }
        solve(a, b)
    };
    let left = build(true)?;
    let right = build(false)?;
    Some(OracleAmplitudes {
        r_left: left[1],
        t_left: left[2 * n],
        r_right: right[2 * n],
        t_right: right[1],
    })
}

/// Scattering off sites `(j, Vⱼ)` of a chain with hopping `κ`, by direct
/// solution of `-κ(ψⱼ₋₁ + ψⱼ₊₁) + Vⱼψⱼ = Eψⱼ` on the window between the
/// outermost sites, matched to free waves outside.
pub fn lattice_chain(sites: &[(i64, Complex64)], hopping: f64, k: f64) -> Option<OracleAmplitudes> {
    let lo = sites.iter().map(|s| s.0).min()?;
    let hi = sites.iter().map(|s| s.0).max()?;
    let energy = -2.0 * hopping * k.cos();
    // ψ on [lo - 1, hi + 1], then the two amplitudes.
    let width = (hi - lo + 3) as usize;
    let size = width + 2;
    let idx = |j: i64| (j - lo + 1) as usize;
    let (amp_a, amp_b) = (width, width + 1);
    let build = |from_left: bool| {
        let mut a = DMatrix::<Complex64>::zeros(size, size);
        let mut b = DVector::<Complex64>::zeros(size);
        let mut row = 0;
        for j in lo..=hi {
            let v: Complex64 = sites.iter().filter(|s| s.0 == j).map(|s| s.1).sum();
            a[(row, idx(j - 1))] = c(-hopping, 0.0);
            a[(row, idx(j + 1))] = c(-hopping, 0.0);
            a[(row, idx(j))] = v - energy;
            row += 1;
        }
        // Free form on the two outermost sites of each side.
        for j in [lo - 1, lo] {
            a[(row, idx(j))] = c(1.0, 0.0);
            if from_left {
                a[(row, amp_a)] = -expi(-k * j as f64);
                b[row] = expi(k * j as f64);
            } else {
                a[(row, amp_a)] = -expi(-k * j as f64);
            }
            row += 1;
        }
        for j in [hi, hi + 1] {
            a[(row, idx(j))] = c(1.0, 0.0);
            if from_left {
                a[(row, amp_b)] = -expi(k * j as f64);
            } else {
                a[(row, amp_b)] = -expi(k * j as f64);
                b[row] = expi(-k * j as f64);
            }
            row += 1;
        }
        solve(a, b)
    };
    let left = build(true)?;
    let right = build(false)?;
    Some(OracleAmplitudes {
        r_left: left[amp_a],
        t_left: left[amp_b],
        r_right: right[amp_b],
        t_right: right[amp_a],
    })
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// A random configuration of up to `max` deltas with complex strengths.
pub fn random_deltas(rng: &mut impl Rng, max: usize) -> Vec<(f64, Complex64)> {
    let n = rng.gen_range(1..=max);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.into_iter()
        .map(|x| (x, c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))))
        .collect()
}
