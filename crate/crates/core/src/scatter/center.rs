use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ScatteringAmplitudes, TransferMatrix};
use crate::error::{Error, Result};

/// Relative size below which an amplitude denominator counts as a pole.
const POLE_TOLERANCE: f64 = 1e-14;

/// The background a center is embedded in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Medium {
    /// Free space with `H = -½∂²ₓ`.
    Continuous,
    /// Tight-binding chain with hopping `-κ` and dispersion `E = -2κ cos k`.
    Lattice { hopping: f64 },
}

impl Medium {
    pub fn check_wavenumber(&self, k: f64) -> Result<()> {
        match self {
            Medium::Continuous if k > 0.0 && k.is_finite() => Ok(()),
            Medium::Continuous => Err(Error::invalid(format!(
                "wavenumber must be positive, got {k}"
            ))),
            Medium::Lattice { .. } if k > 0.0 && k < PI => Ok(()),
            Medium::Lattice { .. } => Err(Error::invalid(format!(
                "lattice wavenumber must lie in (0, π), got {k}"
            ))),
        }
    }

    /// Largest admissible wavenumber (exclusive).
    pub fn k_upper(&self) -> f64 {
        match self {
            Medium::Continuous => f64::INFINITY,
            Medium::Lattice { .. } => PI,
        }
    }
}

/// A single scattering center.
///
/// Strengths multiply the potential directly: a continuous delta of strength
/// `s` is the potential `s·δ(x - x0)`, so the imaginary delta `iVδ` has
/// `strength = iV`. A lattice site adds `s·|j⟩⟨j|` to the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScatteringCenter {
    ContinuousDelta {
        position: f64,
        strength: Complex64,
    },
    HardWall {
        position: f64,
    },
    LatticeSite {
        position: i64,
        strength: Complex64,
        hopping: f64,
    },
}

impl ScatteringCenter {
    pub fn imaginary_delta(position: f64, v: f64) -> Self {
        ScatteringCenter::ContinuousDelta {
            position,
            strength: Complex64::new(0.0, v),
        }
    }

    pub fn delta(position: f64, strength: Complex64) -> Self {
        ScatteringCenter::ContinuousDelta { position, strength }
    }

    pub fn hard_wall(position: f64) -> Self {
        ScatteringCenter::HardWall { position }
    }

    pub fn site(position: i64, strength: Complex64, hopping: f64) -> Self {
        ScatteringCenter::LatticeSite {
            position,
            strength,
            hopping,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ScatteringCenter::ContinuousDelta { .. } => "continuous-delta",
            ScatteringCenter::HardWall { .. } => "hard-wall",
            ScatteringCenter::LatticeSite { .. } => "lattice-site",
        }
    }

    pub fn position(&self) -> f64 {
        match *self {
            ScatteringCenter::ContinuousDelta { position, .. } => position,
            ScatteringCenter::HardWall { position } => position,
            ScatteringCenter::LatticeSite { position, .. } => position as f64,
        }
    }

    pub fn strength(&self) -> Option<Complex64> {
        match *self {
            ScatteringCenter::ContinuousDelta { strength, .. } => Some(strength),
            ScatteringCenter::LatticeSite { strength, .. } => Some(strength),
            ScatteringCenter::HardWall { .. } => None,
        }
    }

    /// `None` for a hard wall, which fits either medium.
    pub fn medium(&self) -> Option<Medium> {
        match *self {
            ScatteringCenter::ContinuousDelta { .. } => Some(Medium::Continuous),
            ScatteringCenter::LatticeSite { hopping, .. } => Some(Medium::Lattice { hopping }),
            ScatteringCenter::HardWall { .. } => None,
        }
    }

    pub fn is_hard_wall(&self) -> bool {
        matches!(self, ScatteringCenter::HardWall { .. })
    }

    pub fn is_hermitian(&self) -> bool {
        self.strength().map_or(true, |s| s.im == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{} has non-finite {what}",
                    self.kind_name()
                )))
            }
        };
        finite(self.position(), "position")?;
        if let Some(s) = self.strength() {
            finite(s.re, "strength")?;
            finite(s.im, "strength")?;
        }
        if let ScatteringCenter::LatticeSite { hopping, .. } = *self {
            if !(hopping > 0.0 && hopping.is_finite()) {
                return Err(Error::invalid(format!(
                    "hopping must be positive, got {hopping}"
                )));
            }
        }
        Ok(())
    }

    /// Amplitudes of the center placed at the origin.
    pub fn amplitudes(&self, k: f64) -> Result<ScatteringAmplitudes> {
        match *self {
            ScatteringCenter::ContinuousDelta { strength, .. } => {
                delta_amplitudes_complex(strength, k)
            }
            ScatteringCenter::LatticeSite {
                strength, hopping, ..
            } => lattice_amplitudes(strength, hopping, k),
            ScatteringCenter::HardWall { .. } => {
                let r = Complex64::new(-1.0, 0.0);
                Ok(ScatteringAmplitudes {
                    r_left: r,
                    r_right: r,
                    t_left: Complex64::new(0.0, 0.0),
                    t_right: Complex64::new(0.0, 0.0),
                    k,
                })
            }
        }
    }

    /// The center's transfer matrix, phases included for its position.
    ///
    /// Deltas and sites use the closed form `1/t = 1 + u`, `r/t = -u`, so the
    /// matrix stays finite at amplitude poles (where `m22` simply vanishes).
    pub fn transfer_matrix(&self, k: f64) -> Result<TransferMatrix> {
        match *self {
            ScatteringCenter::ContinuousDelta { position, strength } => {
                Medium::Continuous.check_wavenumber(k)?;
                let u = Complex64::i() * strength / k;
                Ok(TransferMatrix::point(u, position, k))
            }
            ScatteringCenter::LatticeSite {
                position,
                strength,
                hopping,
            } => {
                Medium::Lattice { hopping }.check_wavenumber(k)?;
                let u = Complex64::i() * strength / (2.0 * hopping * k.sin());
                Ok(TransferMatrix::point(u, position as f64, k))
            }
            ScatteringCenter::HardWall { .. } => Err(Error::UnsupportedAsMatrix),
        }
    }
}

/// Amplitudes of the imaginary delta `iVδ(x)`: `r = V/(k-V)`, `t = k/(k-V)`.
pub fn delta_amplitudes(v: f64, k: f64) -> Result<ScatteringAmplitudes> {
    delta_amplitudes_complex(Complex64::new(0.0, v), k)
}

/// Amplitudes of `s·δ(x)` for complex `s`: `t = k/(k+is)`, `r = t - 1`.
pub fn delta_amplitudes_complex(strength: Complex64, k: f64) -> Result<ScatteringAmplitudes> {
    Medium::Continuous.check_wavenumber(k)?;
    let den = k + Complex64::i() * strength;
    if den.norm() <= POLE_TOLERANCE * (k + strength.norm()) {
        return Err(Error::SingularAmplitude { k });
    }
    let r = -Complex64::i() * strength / den;
    let t = k / den;
    Ok(ScatteringAmplitudes::reciprocal(r, t, k))
}

/// Amplitudes of a single site potential `V|0⟩⟨0|` on a chain with hopping `κ`:
/// `r = -iV/(2κ sin k + iV)`, `t = 2κ sin k/(2κ sin k + iV)`.
pub fn lattice_amplitudes(v: Complex64, hopping: f64, k: f64) -> Result<ScatteringAmplitudes> {
    if !(hopping > 0.0) {
        return Err(Error::invalid(format!(
            "hopping must be positive, got {hopping}"
        )));
    }
    Medium::Lattice { hopping }.check_wavenumber(k)?;
    let s = 2.0 * hopping * k.sin();
    let den = s + Complex64::i() * v;
    if den.norm() <= POLE_TOLERANCE * (s + v.norm()) {
        return Err(Error::SingularAmplitude { k });
    }
    let r = -Complex64::i() * v / den;
    let t = s / den;
    Ok(ScatteringAmplitudes::reciprocal(r, t, k))
}

/// Lattice energy of wavenumber `k`.
pub fn lattice_energy(hopping: f64, k: f64) -> f64 {
    -2.0 * hopping * k.cos()
}
