//! Inverse design: place centers so that a spectral singularity sits at a
//! requested wavenumber. Each recipe is a [`Designer`] registered by name in a
//! [`DesignerRegistry`], so front ends can select one at runtime.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scatter::{Medium, ScatteringCenter};

/// Below this, `1 - cos 2k_c a` or `sin 2k_c a` count as zero.
const DEGENERACY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoDeltaDesign {
    pub k_c: f64,
    /// Imaginary strength of the left delta (`iV₁δ`).
    pub v1: f64,
    pub v2: f64,
    pub spacing: f64,
}

impl TwoDeltaDesign {
    pub fn centers(&self, x1: f64) -> Vec<ScatteringCenter> {
        vec![
            ScatteringCenter::imaginary_delta(x1, self.v1),
            ScatteringCenter::imaginary_delta(x1 + self.spacing, self.v2),
        ]
    }
}

/// Two imaginary deltas with `V₁ + V₂ = k_c` and `k_c·spacing = mπ`.
pub fn design_two_delta(k_c: f64, split: f64, m: u32) -> Result<TwoDeltaDesign> {
    if !(k_c > 0.0 && k_c.is_finite()) {
        return Err(Error::invalid(format!("k_c must be positive, got {k_c}")));
    }
    if !(0.0..=1.0).contains(&split) {
        return Err(Error::invalid(format!(
            "split must lie in [0, 1], got {split}"
        )));
    }
    Ok(TwoDeltaDesign {
        k_c,
        v1: split * k_c,
        v2: (1.0 - split) * k_c,
        spacing: m as f64 * PI / k_c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePairDesign {
    pub k_c: f64,
    /// Gain `iγ` on the left site.
    pub gamma: f64,
    /// Real potential on the right site.
    pub v: f64,
    pub separation: i64,
    pub hopping: f64,
}

impl LatticePairDesign {
    pub fn centers(&self, j1: i64) -> Vec<ScatteringCenter> {
        vec![
            ScatteringCenter::site(j1, Complex64::new(0.0, self.gamma), self.hopping),
            ScatteringCenter::site(
                j1 + self.separation,
                Complex64::new(self.v, 0.0),
                self.hopping,
            ),
        ]
    }
}

/// Gain site `iγ` and real site `V` a distance `a` apart on a chain, with
/// `γ = 2κ sin k_c / (1 - cos 2k_c a)` and `V = -2κ sin k_c / tan 2k_c a`.
pub fn design_lattice_pair(k_c: f64, a: i64, hopping: f64) -> Result<LatticePairDesign> {
    if !(k_c > 0.0 && k_c < PI) {
        return Err(Error::invalid(format!("k_c must lie in (0, π), got {k_c}")));
    }
    if a < 1 {
        return Err(Error::invalid(format!(
            "separation must be at least one site, got {a}"
        )));
    }
    if !(hopping > 0.0 && hopping.is_finite()) {
        return Err(Error::invalid(format!(
            "hopping must be positive, got {hopping}"
        )));
    }
    let phase = 2.0 * k_c * a as f64;
    let one_minus_cos = 1.0 - phase.cos();
    let sin = phase.sin();
    if one_minus_cos.abs() < DEGENERACY || sin.abs() < DEGENERACY {
        return Err(Error::DegenerateGeometry(format!(
            "2·k_c·a = {phase} is a multiple of π"
        )));
    }
    let drive = 2.0 * hopping * k_c.sin();
    Ok(LatticePairDesign {
        k_c,
        gamma: drive / one_minus_cos,
        v: -drive * phase.cos() / sin,
        separation: a,
        hopping,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityDesign {
    pub gamma: f64,
    pub n: u32,
    pub k_c: f64,
    /// Distance from the wall to the gain delta.
    pub a: f64,
}

impl CavityDesign {
    pub fn centers(&self) -> Vec<ScatteringCenter> {
        vec![
            ScatteringCenter::hard_wall(0.0),
            ScatteringCenter::imaginary_delta(self.a, self.gamma),
        ]
    }
}

/// Hard wall at the origin plus `iγδ(x - a)`: `k_c = 2γ`, `k_c·a = (n + ½)π`.
pub fn design_cavity(gamma: f64, n: u32) -> Result<CavityDesign> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let k_c = 2.0 * gamma;
    Ok(CavityDesign {
        gamma,
        n,
        k_c,
        a: (n as f64 + 0.5) * PI / k_c,
    })
}

/// Named numeric parameters handed to a [`Designer`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DesignParams(BTreeMap<String, f64>);

impl DesignParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_owned(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_owned(), value);
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.0
            .get(name)
            .copied()
            .ok_or_else(|| Error::invalid(format!("missing design parameter `{name}`")))
    }

    fn get_or(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }

    fn get_count(&self, name: &str) -> Result<u32> {
        let v = self.get(name)?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(Error::invalid(format!(
                "parameter `{name}` must be a non-negative integer, got {v}"
            )));
        }
        Ok(v as u32)
    }

    fn check_known(&self, designer: &dyn Designer) -> Result<()> {
        let known = designer.parameters();
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::invalid(format!(
                "unknown parameter `{k}` for designer `{}` (expected one of {known:?})",
                designer.name()
            ))),
            None => Ok(()),
        }
    }
}

/// Output of a designer: a ready-to-scan scene and the values that define it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub designer: String,
    pub k_c: f64,
    pub medium: Medium,
    pub centers: Vec<ScatteringCenter>,
    pub values: BTreeMap<String, f64>,
}

pub trait Designer: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Accepted parameter names; anything else is rejected.
    fn parameters(&self) -> &'static [&'static str];
    fn design(&self, params: &DesignParams) -> Result<Design>;
}

struct TwoDelta;

impl Designer for TwoDelta {
    fn name(&self) -> &'static str {
        "two-delta"
    }

    fn summary(&self) -> &'static str {
        "two imaginary deltas; params k_c, split in [0,1], m (spacing mπ/k_c), optional x1"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["k_c", "split", "m", "x1"]
    }

    fn design(&self, params: &DesignParams) -> Result<Design> {
        params.check_known(self)?;
        let d = design_two_delta(
            params.get("k_c")?,
            params.get("split")?,
            params.get_count("m")?,
        )?;
        let x1 = params.get_or("x1", 0.0);
        Ok(Design {
            designer: self.name().into(),
            k_c: d.k_c,
            medium: Medium::Continuous,
            centers: d.centers(x1),
            values: BTreeMap::from([
                ("v1".into(), d.v1),
                ("v2".into(), d.v2),
                ("spacing".into(), d.spacing),
                ("x1".into(), x1),
            ]),
        })
    }
}

struct LatticePair;

impl Designer for LatticePair {
    fn name(&self) -> &'static str {
        "lattice-pair"
    }

    fn summary(&self) -> &'static str {
        "gain site iγ and real site V on a chain; params k_c in (0,π), a (sites), kappa, optional j1"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["k_c", "a", "kappa", "j1"]
    }

    fn design(&self, params: &DesignParams) -> Result<Design> {
        params.check_known(self)?;
        let a = params.get_count("a")? as i64;
        let j1 = params.get_or("j1", 0.0);
        if j1.fract() != 0.0 {
            return Err(Error::invalid("j1 must be an integer site index"));
        }
        let d = design_lattice_pair(params.get("k_c")?, a, params.get("kappa")?)?;
        Ok(Design {
            designer: self.name().into(),
            k_c: d.k_c,
            medium: Medium::Lattice { hopping: d.hopping },
            centers: d.centers(j1 as i64),
            values: BTreeMap::from([
                ("gamma".into(), d.gamma),
                ("v".into(), d.v),
                ("a".into(), a as f64),
                ("j1".into(), j1),
            ]),
        })
    }
}

struct Cavity;

impl Designer for Cavity {
    fn name(&self) -> &'static str {
        "cavity"
    }

    fn summary(&self) -> &'static str {
        "hard wall at 0 and gain delta iγ at a; params gamma, n (node count)"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["gamma", "n"]
    }

    fn design(&self, params: &DesignParams) -> Result<Design> {
        params.check_known(self)?;
        let d = design_cavity(params.get("gamma")?, params.get_count("n")?)?;
        Ok(Design {
            designer: self.name().into(),
            k_c: d.k_c,
            medium: Medium::Continuous,
            centers: d.centers(),
            values: BTreeMap::from([("a".into(), d.a), ("gamma".into(), d.gamma)]),
        })
    }
}

/// Designers addressable by name.
pub struct DesignerRegistry {
    designers: Vec<Box<dyn Designer>>,
}

impl DesignerRegistry {
    pub fn empty() -> Self {
        Self {
            designers: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(TwoDelta));
        reg.register(Box::new(LatticePair));
        reg.register(Box::new(Cavity));
        reg
    }

    /// Adds a designer, replacing any existing one with the same name.
    pub fn register(&mut self, designer: Box<dyn Designer>) {
        self.designers.retain(|d| d.name() != designer.name());
        self.designers.push(designer);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Designer> {
        self.designers
            .iter()
            .find(|d| d.name() == name)
            .map(|d| d.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.designers.iter().map(|d| d.name()).collect()
    }

    pub fn design(&self, name: &str, params: &DesignParams) -> Result<Design> {
        self.get(name)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown designer `{name}` (available: {})",
                    self.names().join(", ")
                ))
            })?
            .design(params)
    }
}

impl Default for DesignerRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_delta() {
        let d = design_two_delta(1.0, 0.5, 1).unwrap();
        assert_eq!((d.v1, d.v2), (0.5, 0.5));
        assert!((d.spacing - PI).abs() < 1e-15);
    }

    #[test]
    fn full_split_leaves_null_delta() {
        let d = design_two_delta(2.0, 1.0, 1).unwrap();
        assert_eq!((d.v1, d.v2), (2.0, 0.0));
    }

    #[test]
    fn two_delta_rejects_bad_input() {
        assert!(design_two_delta(0.0, 0.5, 1).is_err());
        assert!(design_two_delta(1.0, 1.5, 1).is_err());
    }

    #[test]
    fn lattice_pair_reference_point() {
        let d = design_lattice_pair(PI / 3.0, 1, 1.0).unwrap();
        assert!((d.gamma - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((d.v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_pair_degenerate_half_band() {
        assert!(matches!(
            design_lattice_pair(PI / 2.0, 1, 1.0),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn cavity_reference_point() {
        let d = design_cavity(1.0, 20).unwrap();
        assert_eq!(d.k_c, 2.0);
        assert!((d.a - 10.25 * PI).abs() < 1e-13);
        let d = design_cavity(0.5, 0).unwrap();
        assert_eq!(d.k_c, 1.0);
        assert!((d.a - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn registry_dispatch() {
        let reg = DesignerRegistry::builtin();
        assert_eq!(reg.names(), vec!["two-delta", "lattice-pair", "cavity"]);
        let d = reg
            .design(
                "cavity",
                &DesignParams::new().with("gamma", 1.0).with("n", 20.0),
            )
            .unwrap();
        assert_eq!(d.k_c, 2.0);
        assert_eq!(d.centers.len(), 2);
        assert!(reg.design("nope", &DesignParams::new()).is_err());
    }

    #[test]
    fn registry_rejects_unknown_and_fractional_params() {
        let reg = DesignerRegistry::builtin();
        let p = DesignParams::new()
            .with("gamma", 1.0)
            .with("n", 2.0)
            .with("typo", 1.0);
        assert!(reg.design("cavity", &p).is_err());
        let p = DesignParams::new().with("gamma", 1.0).with("n", 2.5);
        assert!(reg.design("cavity", &p).is_err());
    }
}
