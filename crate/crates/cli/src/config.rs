//! The JSON scene format.
//!
//! A config file holds one scene object, or an array of them for a sweep.
//! Every object rejects unknown keys.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use singscat_core::cavity::SimulationConfig;
use singscat_core::scatter::{Composite, Medium, ScatteringCenter};
use singscat_core::solver::{SsQuery, DEFAULT_GRID_POINTS, DEFAULT_TOLERANCE};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Defaults to the continuous medium.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Medium>,
    pub centers: Vec<CenterConfig>,
    #[serde(skip_serializing_if = "is_default")]
    pub solver: SolverConfig,
    #[serde(skip_serializing_if = "is_default")]
    pub sim: SimulationConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveConfig>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// A strength given as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strength {
    Real(f64),
    Complex([f64; 2]),
}

impl Strength {
    pub fn value(self) -> Complex64 {
        match self {
            Strength::Real(re) => Complex64::new(re, 0.0),
            Strength::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn from_value(z: Complex64) -> Self {
        Strength::Complex([z.re, z.im])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CenterConfig {
    /// `s·δ(x - position)`; use `[0, V]` for the gain delta `iVδ`.
    Delta {
        position: f64,
        strength: Strength,
    },
    Wall {
        position: f64,
    },
    /// On-site term of a lattice scene; the hopping comes from the model.
    Site {
        position: i64,
        strength: Strength,
    },
}

impl CenterConfig {
    pub fn from_center(c: &ScatteringCenter) -> Self {
        match *c {
            ScatteringCenter::ContinuousDelta { position, strength } => CenterConfig::Delta {
                position,
                strength: Strength::from_value(strength),
            },
            ScatteringCenter::HardWall { position } => CenterConfig::Wall { position },
            ScatteringCenter::LatticeSite {
                position, strength, ..
            } => CenterConfig::Site {
                position,
                strength: Strength::from_value(strength),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSolver {
    pub k_min: f64,
    pub k_max: f64,
    pub grid_points: usize,
    pub tolerance: f64,
}

/// Which wave the `wave` command samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WaveSource {
    /// The Jost solution of the scene's own centers.
    Jost { k: f64 },
    /// Outgoing solution of two imaginary deltas `iV₁δ(x-x₁) + iV₂δ(x-x₂)`.
    TwoDelta { v1: f64, v2: f64, x1: f64, x2: f64 },
    /// Cavity solution with a wall at 0 and `iγδ(x-a)`.
    Cavity { k: f64, gamma: f64, a: f64 },
    /// Normalized launch state of the cavity simulation.
    Initial { k_c: f64, a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub source: WaveSource,
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default = "default_wave_points")]
    pub points: usize,
}

fn default_wave_points() -> usize {
    1001
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_points: Option<usize>,
    pub tolerance: Option<f64>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub length: Option<f64>,
}

impl SceneConfig {
    pub fn medium(&self) -> Medium {
        self.model.unwrap_or(Medium::Continuous)
    }

    pub fn apply(&mut self, o: &Overrides) {
        let s = &mut self.solver;
        s.k_min = o.k_min.or(s.k_min);
        s.k_max = o.k_max.or(s.k_max);
        s.grid_points = o.k_points.or(s.grid_points);
        s.tolerance = o.tolerance.or(s.tolerance);
        self.sim.dx = o.dx.or(self.sim.dx);
        self.sim.dt = o.dt.or(self.sim.dt);
        self.sim.length = o.length.or(self.sim.length);
    }

    pub fn scatter_centers(&self) -> Result<Vec<ScatteringCenter>, CliError> {
        let medium = self.medium();
        self.centers
            .iter()
            .enumerate()
            .map(|(i, c)| match (*c, medium) {
                (CenterConfig::Delta { position, strength }, Medium::Continuous) => {
                    Ok(ScatteringCenter::delta(position, strength.value()))
                }
                (CenterConfig::Wall { position }, _) => Ok(ScatteringCenter::hard_wall(position)),
                (CenterConfig::Site { position, strength }, Medium::Lattice { hopping }) => {
                    Ok(ScatteringCenter::site(position, strength.value(), hopping))
                }
                (CenterConfig::Delta { .. }, Medium::Lattice { .. }) => Err(CliError::validation(
                    format!("centers[{i}]: a delta needs a continuous model; use kind \"site\""),
                )),
                (CenterConfig::Site { .. }, Medium::Continuous) => Err(CliError::validation(
                    format!("centers[{i}]: a site needs a lattice model"),
                )),
            })
            .collect()
    }

    pub fn composite(&self) -> Result<Composite, CliError> {
        Ok(Composite::in_medium(
            self.medium(),
            self.scatter_centers()?,
        )?)
    }

    pub fn resolved_solver(&self) -> ResolvedSolver {
        let (lo, hi) = match self.medium() {
            Medium::Continuous => (0.05, 5.0),
            Medium::Lattice { .. } => (0.05, PI - 0.05),
        };
        ResolvedSolver {
            k_min: self.solver.k_min.unwrap_or(lo),
            k_max: self.solver.k_max.unwrap_or(hi),
            grid_points: self.solver.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
            tolerance: self.solver.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        }
    }

    pub fn query(&self) -> Result<SsQuery, CliError> {
        let s = self.resolved_solver();
        let query = SsQuery {
            grid_points: s.grid_points,
            tolerance: s.tolerance,
            ..SsQuery::new(self.composite()?, s.k_min, s.k_max)
        };
        query.validate()?;
        Ok(query)
    }
}

impl ResolvedSolver {
    /// Evenly spaced wavenumbers including both ends.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        if n == 1 {
            return vec![self.k_min];
        }
        let h = (self.k_max - self.k_min) / (n - 1) as f64;
        (0..n).map(|i| self.k_min + i as f64 * h).collect()
    }
}

/// Reads one scene or a list of scenes. Errors name the offending field and
/// position in the file.
pub fn load(path: &Path) -> Result<Vec<SceneConfig>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<Vec<SceneConfig>, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if value.is_array() {
        from_str_at::<Vec<SceneConfig>>(text)
    } else {
        from_str_at::<SceneConfig>(text).map(|s| vec![s])
    }
}

fn from_str_at<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            inner.to_string()
        } else {
            format!("{path}: {inner}")
        }
    })
}
