use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wavenumbers closer than this are treated as the same evaluation point.
pub const WAVENUMBER_MATCH: f64 = 1e-12;

/// Reflection and transmission amplitudes of a scatterer at wavenumber `k`.
///
/// `left`/`right` name the side the wave is incident from. Amplitudes are the
/// plane-wave coefficients in the frame they were computed in: single-center
/// formulas place the center at the origin, while amplitudes read off a
/// transfer matrix refer to the global coordinate. [`shifted`](Self::shifted)
/// converts between the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub r_left: Complex64,
    pub r_right: Complex64,
    pub t_left: Complex64,
    pub t_right: Complex64,
    pub k: f64,
}

impl ScatteringAmplitudes {
    pub fn free(k: f64) -> Self {
        Self::reciprocal(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), k)
    }

    pub fn reciprocal(r: Complex64, t: Complex64, k: f64) -> Self {
        Self {
            r_left: r,
            r_right: r,
            t_left: t,
            t_right: t,
            k,
        }
    }

    /// `|r|² + |t|²` for left incidence; equals one for lossless scatterers.
    pub fn flux_left(&self) -> f64 {
        self.r_left.norm_sqr() + self.t_left.norm_sqr()
    }

    /// Moves a scatterer defined at the origin to `x0`.
    pub fn shifted(&self, x0: f64) -> Self {
        let phase = Complex64::from_polar(1.0, 2.0 * self.k * x0);
        Self {
            r_left: self.r_left * phase,
            r_right: self.r_right / phase,
            ..*self
        }
    }
}

/// 2×2 transfer matrix mapping plane-wave coefficients `(A, B)` of
/// `A e^{ikx} + B e^{-ikx}` on the left of a scatterer to those on its right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub k: f64,
}

impl TransferMatrix {
    pub fn identity(k: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m11: one,
            m12: zero,
            m21: zero,
            m22: one,
            k,
        }
    }

    /// Matrix of a point scatterer at `x0` with reciprocal amplitudes in the
    /// form `1/t = 1 + u`, `r/t = -u`. Both the continuous delta and the
    /// lattice site reduce to this shape, which stays finite at amplitude poles.
    pub(crate) fn point(u: Complex64, x0: f64, k: f64) -> Self {
        let phase = Complex64::from_polar(1.0, 2.0 * k * x0);
        Self {
            m11: 1.0 - u,
            m12: -u / phase,
            m21: u * phase,
            m22: 1.0 + u,
            k,
        }
    }

    /// Builds the matrix from scattering amplitudes of a center whose
    /// amplitudes are quoted relative to its own position `x0`.
    pub fn from_amplitudes(amps: &ScatteringAmplitudes, x0: f64) -> Result<Self> {
        let t_r = amps.t_right;
        if t_r.norm() == 0.0 || !t_r.is_finite() {
            return Err(Error::SingularAmplitude { k: amps.k });
        }
        let phase = Complex64::from_polar(1.0, 2.0 * amps.k * x0);
        Ok(Self {
            m11: amps.t_left - amps.r_right * amps.r_left / t_r,
            m12: amps.r_right / (phase * t_r),
            m21: -phase * amps.r_left / t_r,
            m22: 1.0 / t_r,
            k: amps.k,
        })
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `outer · inner`; `outer` is the scatterer further to the right.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if (outer.k - inner.k).abs() > WAVENUMBER_MATCH {
            return Err(Error::IncompatibleWavenumber {
                outer: outer.k,
                inner: inner.k,
            });
        }
        Ok(Self {
            m11: outer.m11 * inner.m11 + outer.m12 * inner.m21,
            m12: outer.m11 * inner.m12 + outer.m12 * inner.m22,
            m21: outer.m21 * inner.m11 + outer.m22 * inner.m21,
            m22: outer.m21 * inner.m12 + outer.m22 * inner.m22,
            k: outer.k,
        })
    }

    pub fn apply(&self, coeffs: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let (a, b) = coeffs;
        (self.m11 * a + self.m12 * b, self.m21 * a + self.m22 * b)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return Err(Error::SingularAmplitude { k: self.k });
        }
        Ok(Self {
            m11: self.m22 / det,
            m12: -self.m12 / det,
            m21: -self.m21 / det,
            m22: self.m11 / det,
            k: self.k,
        })
    }

    /// Global-frame amplitudes encoded by the matrix. Fails where `m22 = 0`,
    /// which is exactly a spectral singularity.
    pub fn amplitudes(&self) -> Result<ScatteringAmplitudes> {
        if self.m22.norm() == 0.0 || !self.m22.is_finite() {
            return Err(Error::SingularAmplitude { k: self.k });
        }
        Ok(ScatteringAmplitudes {
            r_left: -self.m21 / self.m22,
            r_right: self.m12 / self.m22,
            t_left: self.det() / self.m22,
            t_right: 1.0 / self.m22,
            k: self.k,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .map(|d| d.norm())
        .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn compose_with_identity_is_noop() {
        let m = TransferMatrix::point(c(0.3, -0.2), 1.7, 0.9);
        let id = TransferMatrix::identity(0.9);
        assert_eq!(TransferMatrix::compose(&id, &m).unwrap(), m);
        assert_eq!(TransferMatrix::compose(&m, &id).unwrap(), m);
    }

    #[test]
    fn compose_rejects_mismatched_k() {
        let a = TransferMatrix::identity(1.0);
        let b = TransferMatrix::identity(1.0 + 1e-9);
        assert!(matches!(
            TransferMatrix::compose(&a, &b),
            Err(Error::IncompatibleWavenumber { .. })
        ));
    }

    #[test]
    fn point_matrix_is_unimodular() {
        let m = TransferMatrix::point(c(-0.7, 2.1), -3.3, 1.4);
        assert!((m.det() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn amplitudes_round_trip_through_eq3_form() {
        let m = TransferMatrix::point(c(0.25, 0.4), 0.0, 2.0);
        let amps = m.amplitudes().unwrap();
        let back = TransferMatrix::from_amplitudes(&amps, 0.0).unwrap();
        assert!(m.max_abs_diff(&back) < 1e-14);
    }

    #[test]
    fn amplitudes_fail_at_m22_zero() {
        let m = TransferMatrix::point(c(-1.0, 0.0), 0.0, 1.0);
        assert_eq!(m.m22, c(0.0, 0.0));
        assert!(matches!(
            m.amplitudes(),
            Err(Error::SingularAmplitude { .. })
        ));
    }

    #[test]
    fn inverse_undoes_matrix() {
        let m = TransferMatrix::point(c(0.1, 0.9), 0.4, 0.6);
        let p = TransferMatrix::compose(&m, &m.inverse().unwrap()).unwrap();
        assert!(p.max_abs_diff(&TransferMatrix::identity(0.6)) < 1e-14);
    }
}
