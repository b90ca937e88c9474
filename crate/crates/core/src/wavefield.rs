//! Piecewise plane-wave eigenfunctions.
//!
//! A [`PiecewiseWave`] stores, for each region, the coefficients of
//! `c₊e^{ikx} + c₋e^{-ikx}`. Closed forms written with `cos`/`sin` are
//! converted to exponentials when built, so evaluation, derivatives,
//! overlaps and Wronskians all work on one representation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scatter::{Composite, Medium, ScatteringCenter};

/// Tolerance on `k_c(x₂ - x₁)/π` being an integer for the two-delta form.
const GEOMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_lo: f64,
    pub x_hi: f64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

impl Region {
    fn value(&self, k: f64, x: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, k * x);
        self.c_plus * e + self.c_minus / e
    }

    fn derivative(&self, k: f64, x: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, k * x);
        Complex64::i() * k * (self.c_plus * e - self.c_minus / e)
    }

    fn second_derivative(&self, k: f64, x: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, k * x);
        -k * k * self.c_plus * e - k * k * self.c_minus / e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseWave {
    k: f64,
    regions: Vec<Region>,
}

impl PiecewiseWave {
    /// Regions must be non-empty, ordered and contiguous. Only the outermost
    /// bounds may be infinite.
    pub fn new(k: f64, regions: Vec<Region>) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        if regions.is_empty() {
            return Err(Error::invalid("a wave needs at least one region"));
        }
        for (i, r) in regions.iter().enumerate() {
            if !(r.x_lo < r.x_hi) {
                return Err(Error::invalid(format!(
                    "region {i} is empty: [{}, {}]",
                    r.x_lo, r.x_hi
                )));
            }
            if !r.c_plus.is_finite() || !r.c_minus.is_finite() {
                return Err(Error::invalid(format!(
                    "region {i} has non-finite coefficients"
                )));
            }
            if i > 0 && regions[i - 1].x_hi != r.x_lo {
                return Err(Error::invalid(format!(
                    "regions {} and {i} are not contiguous",
                    i - 1
                )));
            }
        }
        Ok(Self { k, regions })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.regions[0].x_lo,
            self.regions[self.regions.len() - 1].x_hi,
        )
    }

    /// Interior region boundaries.
    pub fn interfaces(&self) -> Vec<f64> {
        self.regions[1..].iter().map(|r| r.x_lo).collect()
    }

    fn locate(&self, x: f64, side: Side) -> Result<&Region> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) || x.is_infinite() {
            return Err(Error::Domain { x, lo, hi });
        }
        let idx = match side {
            // Region i owns [x_lo, x_hi); the last one also owns its x_hi.
            Side::Right => self
                .regions
                .iter()
                .position(|r| x < r.x_hi)
                .unwrap_or(self.regions.len() - 1),
            Side::Left => self
                .regions
                .iter()
                .position(|r| x <= r.x_hi)
                .unwrap_or(self.regions.len() - 1),
        };
        Ok(&self.regions[idx])
    }

    /// Value at `x`. At an interface the region to the right is used.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        self.evaluate_from(x, Side::Right)
    }

    /// One-sided limit at `x`.
    pub fn evaluate_from(&self, x: f64, side: Side) -> Result<Complex64> {
        Ok(self.locate(x, side)?.value(self.k, x))
    }

    pub fn derivative_from(&self, x: f64, side: Side) -> Result<Complex64> {
        Ok(self.locate(x, side)?.derivative(self.k, x))
    }

    pub fn second_derivative(&self, x: f64) -> Result<Complex64> {
        Ok(self.locate(x, Side::Right)?.second_derivative(self.k, x))
    }

    pub fn sample(&self, xs: &[f64]) -> Result<Vec<(f64, Complex64)>> {
        xs.iter().map(|&x| Ok((x, self.evaluate(x)?))).collect()
    }

    /// Coefficients of the waves travelling inwards from ±∞: `c₊` of an
    /// unbounded left region and `c₋` of an unbounded right region. A bounded
    /// side contributes zero.
    pub fn incoming(&self) -> (Complex64, Complex64) {
        let first = &self.regions[0];
        let last = &self.regions[self.regions.len() - 1];
        let zero = Complex64::new(0.0, 0.0);
        (
            if first.x_lo == f64::NEG_INFINITY {
                first.c_plus
            } else {
                zero
            },
            if last.x_hi == f64::INFINITY {
                last.c_minus
            } else {
                zero
            },
        )
    }

    /// `∫ conj(self)·other dx` over the finite window `[lo, hi]`, exact for
    /// the stored plane waves. The window must lie in both domains.
    pub fn inner_product(&self, other: &PiecewiseWave, lo: f64, hi: f64) -> Result<Complex64> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "overlap window must be finite and non-empty, got [{lo}, {hi}]"
            )));
        }
        for w in [self, other] {
            let (d_lo, d_hi) = w.domain();
            if lo < d_lo || hi > d_hi {
                return Err(Error::Domain {
                    x: if lo < d_lo { lo } else { hi },
                    lo: d_lo,
                    hi: d_hi,
                });
            }
        }
        let mut cuts: Vec<f64> = self
            .interfaces()
            .into_iter()
            .chain(other.interfaces())
            .filter(|&x| x > lo && x < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut total = Complex64::new(0.0, 0.0);
        for pair in cuts.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            let mid = 0.5 * (u + v);
            let a = self.locate(mid, Side::Right)?;
            let b = other.locate(mid, Side::Right)?;
            let (k1, k2) = (self.k, other.k);
            let terms = [
                (a.c_plus.conj() * b.c_plus, k2 - k1),
                (a.c_plus.conj() * b.c_minus, -k2 - k1),
                (a.c_minus.conj() * b.c_plus, k2 + k1),
                (a.c_minus.conj() * b.c_minus, k1 - k2),
            ];
            for (coef, q) in terms {
                if coef != Complex64::new(0.0, 0.0) {
                    total += coef * phase_integral(q, u, v);
                }
            }
        }
        Ok(total)
    }

    pub fn norm_squared(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.inner_product(self, lo, hi)?.re)
    }
}

/// `∫_u^v e^{iqx} dx` without cancellation for small `q(v - u)`.
fn phase_integral(q: f64, u: f64, v: f64) -> Complex64 {
    let len = v - u;
    let theta = q * len;
    let factor = if theta.abs() < 1e-8 {
        Complex64::new(1.0 - theta * theta / 6.0, theta / 2.0)
    } else {
        let half = (0.5 * theta).sin();
        Complex64::new(theta.sin(), 2.0 * half * half) / theta
    };
    len * Complex64::from_polar(1.0, q * u) * factor
}

/// The Jost solution that is `e^{-ikx}` left of every center, carried to the
/// right through the transfer matrices. With a leading hard wall the left
/// region is `sin k(x - x_w)` instead. At a spectral singularity the right
/// region is purely outgoing.
///
/// For lattice composites coordinates are site indices and the wave is only
/// meaningful on integer sites.
pub fn jost_wave(composite: &Composite, k: f64) -> Result<PiecewiseWave> {
    composite.medium().check_wavenumber(k)?;
    let (x_start, start) = match composite.wall() {
        None => (
            f64::NEG_INFINITY,
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        ),
        Some(xw) => {
            let half_i = Complex64::new(0.0, 2.0);
            (
                xw,
                (
                    Complex64::from_polar(1.0, -k * xw) / half_i,
                    -Complex64::from_polar(1.0, k * xw) / half_i,
                ),
            )
        }
    };
    let coeffs = composite.region_coefficients(k, start)?;
    let mut bounds: Vec<f64> = vec![x_start];
    bounds.extend(
        composite
            .scatterers()
            .iter()
            .map(ScatteringCenter::position),
    );
    bounds.push(f64::INFINITY);
    let regions = coeffs
        .iter()
        .enumerate()
        .map(|(i, &(c_plus, c_minus))| Region {
            x_lo: bounds[i],
            x_hi: bounds[i + 1],
            c_plus,
            c_minus,
        })
        .collect();
    PiecewiseWave::new(k, regions)
}

/// The coalesced solution of two imaginary deltas `iV₁δ(x-x₁) + iV₂δ(x-x₂)`
/// at `k_c = V₁ + V₂`: `e^{-ik_c x}` on the left, `cos k_c ξ + iβ sin k_c ξ`
/// between (with `ξ = x - x₁`, `β = (V₁-V₂)/(V₁+V₂)`), outgoing on the right.
/// The phase is fixed by a unit `e^{-ik_c x}` coefficient on the left.
pub fn two_delta_ss_wave(v1: f64, v2: f64, x1: f64, x2: f64) -> Result<PiecewiseWave> {
    let k = v1 + v2;
    if !(k > 0.0) {
        return Err(Error::Precondition(format!(
            "V₁ + V₂ must be positive, got {k}"
        )));
    }
    let turns = k * (x2 - x1) / std::f64::consts::PI;
    if x2 < x1 || (turns - turns.round()).abs() > GEOMETRY_TOLERANCE * turns.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "(V₁+V₂)(x₂-x₁)/π = {turns} is not a non-negative integer"
        )));
    }
    let beta = (v1 - v2) / k;
    let back = Complex64::from_polar(1.0, -2.0 * k * x1);
    let zero = Complex64::new(0.0, 0.0);
    let left = Region {
        x_lo: f64::NEG_INFINITY,
        x_hi: x1,
        c_plus: zero,
        c_minus: Complex64::new(1.0, 0.0),
    };
    let right_start = if turns.round() == 0.0 { x1 } else { x2 };
    let right = Region {
        x_lo: right_start,
        x_hi: f64::INFINITY,
        c_plus: back,
        c_minus: zero,
    };
    let mut regions = vec![left];
    if turns.round() > 0.0 {
        regions.push(Region {
            x_lo: x1,
            x_hi: x2,
            c_plus: 0.5 * (1.0 + beta) * back,
            c_minus: Complex64::new(0.5 * (1.0 - beta), 0.0),
        });
    }
    regions.push(right);
    PiecewiseWave::new(k, regions)
}

/// Scattering solution of the wall-plus-gain cavity (wall at 0, `iγδ(x-a)`):
/// `sin kx` inside and `sin kx + (2iγ/k) sin k(x-a) sin ka` outside.
pub fn cavity_wave(k: f64, gamma: f64, a: f64) -> Result<PiecewiseWave> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!(
            "cavity length must be positive, got {a}"
        )));
    }
    let inside_plus = Complex64::new(0.0, -0.5);
    let inside_minus = Complex64::new(0.0, 0.5);
    let g = gamma / k * (k * a).sin();
    let regions = vec![
        Region {
            x_lo: 0.0,
            x_hi: a,
            c_plus: inside_plus,
            c_minus: inside_minus,
        },
        Region {
            x_lo: a,
            x_hi: f64::INFINITY,
            c_plus: inside_plus + g * Complex64::from_polar(1.0, -k * a),
            c_minus: inside_minus - g * Complex64::from_polar(1.0, k * a),
        },
    ];
    PiecewiseWave::new(k, regions)
}

/// `(e^{ik_c x} - e^{-ik_c x})/√Λ` on `(0, a)`, zero beyond, with unit norm.
/// This is a launch profile, not an eigenfunction: it jumps at `x = a`.
pub fn initial_cavity_state(k_c: f64, a: f64) -> Result<PiecewiseWave> {
    if !(k_c > 0.0 && k_c.is_finite()) {
        return Err(Error::invalid(format!("k_c must be positive, got {k_c}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!(
            "cavity length must be positive, got {a}"
        )));
    }
    // ∫₀^a |2i sin k_c x|² dx
    let lambda = 2.0 * a - (2.0 * k_c * a).sin() / k_c;
    let c = 1.0 / lambda.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    PiecewiseWave::new(
        k_c,
        vec![
            Region {
                x_lo: 0.0,
                x_hi: a,
                c_plus: Complex64::new(c, 0.0),
                c_minus: Complex64::new(-c, 0.0),
            },
            Region {
                x_lo: a,
                x_hi: f64::INFINITY,
                c_plus: zero,
                c_minus: zero,
            },
        ],
    )
}

/// Largest residuals found by [`check_eigenfunction`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubstitutionReport {
    /// `|-ψ''/2 - k²ψ/2|` at sample points inside regions.
    pub helmholtz: f64,
    /// Value mismatch across interfaces.
    pub continuity: f64,
    /// `|ψ'(x₀⁺) - ψ'(x₀⁻) - 2sψ(x₀)|` at deltas (`s = 0` elsewhere).
    pub jump: f64,
    /// `|ψ(x_w)|` at a hard wall.
    pub wall: f64,
}

impl SubstitutionReport {
    pub fn max(&self) -> f64 {
        self.helmholtz
            .max(self.continuity)
            .max(self.jump)
            .max(self.wall)
    }
}

/// Substitutes `wave` into `-ψ''/2 + Σ sⱼδ(x-xⱼ)ψ = (k²/2)ψ` with the given
/// continuous deltas and hard wall. Lattice sites are not supported.
pub fn check_eigenfunction(
    wave: &PiecewiseWave,
    centers: &[ScatteringCenter],
) -> Result<SubstitutionReport> {
    let k = wave.k();
    let mut report = SubstitutionReport::default();

    for r in wave.regions() {
        let probes = match (r.x_lo.is_finite(), r.x_hi.is_finite()) {
            (true, true) => [r.x_lo, 0.5 * (r.x_lo + r.x_hi), r.x_hi],
            (true, false) => [r.x_lo, r.x_lo + 1.0, r.x_lo + 10.0],
            (false, true) => [r.x_hi - 10.0, r.x_hi - 1.0, r.x_hi],
            (false, false) => [-1.0, 0.0, 1.0],
        };
        for x in probes {
            let res = -0.5 * r.second_derivative(k, x) - 0.5 * k * k * r.value(k, x);
            report.helmholtz = report.helmholtz.max(res.norm());
        }
    }

    let mut points = wave.interfaces();
    for c in centers {
        match *c {
            ScatteringCenter::ContinuousDelta { position, .. } => points.push(position),
            ScatteringCenter::HardWall { position } => {
                let psi = wave.evaluate_from(position, Side::Right)?;
                report.wall = report.wall.max(psi.norm());
            }
            ScatteringCenter::LatticeSite { .. } => {
                return Err(Error::invalid(
                    "the substitution check applies to continuous scenes only",
                ))
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    for x in points {
        let left = wave.evaluate_from(x, Side::Left)?;
        let right = wave.evaluate_from(x, Side::Right)?;
        report.continuity = report.continuity.max((right - left).norm());
        let strength: Complex64 = centers
            .iter()
            .filter_map(|c| match *c {
                ScatteringCenter::ContinuousDelta { position, strength } if position == x => {
                    Some(strength)
                }
                _ => None,
            })
            .sum();
        let jump = wave.derivative_from(x, Side::Right)? - wave.derivative_from(x, Side::Left)?;
        report.jump = report.jump.max((jump - 2.0 * strength * right).norm());
    }
    Ok(report)
}

/// Continuous-medium centers from a composite, for use with
/// [`check_eigenfunction`].
pub fn continuous_centers(composite: &Composite) -> Result<Vec<ScatteringCenter>> {
    match composite.medium() {
        Medium::Continuous => Ok(composite.centers()),
        Medium::Lattice { .. } => Err(Error::invalid(
            "the substitution check applies to continuous scenes only",
        )),
    }
}
