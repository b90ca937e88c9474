use num_complex::Complex64;

use super::center::{Medium, ScatteringCenter};
use super::matrix::{ScatteringAmplitudes, TransferMatrix};
use crate::error::{Error, Result};

/// Centers closer than this (relative to their coordinate) are merged.
const COINCIDENCE: f64 = 1e-12;

/// An ordered, validated collection of scattering centers sharing one medium.
///
/// Positions are strictly increasing. Centers given at the same position are
/// merged by adding their strengths, which is exact: the point-scatterer
/// matrices at one position commute and compose additively. A hard wall may
/// only appear once, as the leftmost center.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    wall: Option<f64>,
    scatterers: Vec<ScatteringCenter>,
    medium: Medium,
}

impl Composite {
    /// Infers the medium from the centers (continuous when there are none).
    pub fn new(centers: Vec<ScatteringCenter>) -> Result<Self> {
        let medium = centers
            .iter()
            .find_map(ScatteringCenter::medium)
            .unwrap_or(Medium::Continuous);
        Self::in_medium(medium, centers)
    }

    pub fn in_medium(medium: Medium, centers: Vec<ScatteringCenter>) -> Result<Self> {
        if let Medium::Lattice { hopping } = medium {
            if !(hopping > 0.0 && hopping.is_finite()) {
                return Err(Error::invalid(format!(
                    "hopping must be positive, got {hopping}"
                )));
            }
        }
        let mut wall = None;
        let mut scatterers: Vec<ScatteringCenter> = Vec::with_capacity(centers.len());
        for (idx, center) in centers.into_iter().enumerate() {
            center.validate()?;
            if let Some(m) = center.medium() {
                if !same_medium(m, medium) {
                    return Err(Error::invalid(format!(
                        "center {idx} ({}) does not belong to medium {medium:?}",
                        center.kind_name()
                    )));
                }
            }
            if center.is_hard_wall() {
                if idx != 0 {
                    return Err(Error::invalid(
                        "a hard wall is only supported as the leftmost center",
                    ));
                }
                let x = center.position();
                if matches!(medium, Medium::Lattice { .. }) && x.fract() != 0.0 {
                    return Err(Error::invalid("a lattice hard wall must sit on a site"));
                }
                wall = Some(x);
                continue;
            }
            let x = center.position();
            if let Some(w) = wall {
                if x <= w + COINCIDENCE * w.abs().max(1.0) {
                    return Err(Error::invalid(format!(
                        "center {idx} at {x} is not to the right of the hard wall at {w}"
                    )));
                }
            }
            match scatterers.last_mut() {
                Some(prev) if coincident(prev.position(), x) => merge_into(prev, &center),
                Some(prev) if x < prev.position() => {
                    return Err(Error::invalid(format!(
                        "center positions must increase: {x} follows {}",
                        prev.position()
                    )))
                }
                _ => scatterers.push(center),
            }
        }
        Ok(Self {
            wall,
            scatterers,
            medium,
        })
    }

    pub fn medium(&self) -> Medium {
        self.medium
    }

    /// Position of the leading hard wall, if any.
    pub fn wall(&self) -> Option<f64> {
        self.wall
    }

    /// All centers except the wall, left to right.
    pub fn scatterers(&self) -> &[ScatteringCenter] {
        &self.scatterers
    }

    pub fn centers(&self) -> Vec<ScatteringCenter> {
        self.wall
            .map(ScatteringCenter::hard_wall)
            .into_iter()
            .chain(self.scatterers.iter().copied())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.wall.is_none() && self.scatterers.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.scatterers.iter().all(ScatteringCenter::is_hermitian)
    }

    /// Product of the matrices of `scatterers[range]`, rightmost outermost.
    pub fn partial_matrix(&self, range: std::ops::Range<usize>, k: f64) -> Result<TransferMatrix> {
        self.medium.check_wavenumber(k)?;
        self.scatterers[range]
            .iter()
            .try_fold(TransferMatrix::identity(k), |acc, c| {
                TransferMatrix::compose(&c.transfer_matrix(k)?, &acc)
            })
    }

    /// Full transfer matrix. Unavailable when a hard wall is present.
    pub fn transfer_matrix(&self, k: f64) -> Result<TransferMatrix> {
        if self.wall.is_some() {
            return Err(Error::UnsupportedAsMatrix);
        }
        self.partial_matrix(0..self.scatterers.len(), k)
    }

    pub fn m22(&self, k: f64) -> Result<Complex64> {
        Ok(self.transfer_matrix(k)?.m22)
    }

    pub fn amplitudes(&self, k: f64) -> Result<ScatteringAmplitudes> {
        self.transfer_matrix(k)?.amplitudes()
    }

    /// Quantity whose real-axis zeros are the spectral singularities.
    ///
    /// Without a wall this is `m22`. With a wall at `x_w` the left region is
    /// pinned to `sin k(x - x_w)`, and the outgoing-only condition on the right
    /// becomes `m22 - m21·e^{-2ikx_w} = 0` for the matrix of the other centers.
    pub fn ss_determinant(&self, k: f64) -> Result<Complex64> {
        match self.wall {
            None => self.m22(k),
            Some(xw) => {
                let m = self.partial_matrix(0..self.scatterers.len(), k)?;
                Ok(m.m22 - m.m21 * Complex64::from_polar(1.0, -2.0 * k * xw))
            }
        }
    }

    /// Wronskian `f₊f₋' - f₊'f₋` of the Jost solutions `f₊ ~ e^{ikx}` (x → +∞)
    /// and `f₋ ~ e^{-ikx}` (x → -∞).
    ///
    /// Evaluated in the middle region by propagating `f₋` from the left and
    /// `f₊` from the right. Equals `-2ik·m22`; on a lattice the Casoratian
    /// is used and the prefactor becomes `-2i sin k`.
    pub fn jost_wronskian(&self, k: f64) -> Result<Complex64> {
        if self.wall.is_some() {
            return Err(Error::UnsupportedAsMatrix);
        }
        let n = self.scatterers.len();
        let split = n / 2;
        let left = self.partial_matrix(0..split, k)?;
        let right = self.partial_matrix(split..n, k)?;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let (a_minus, b_minus) = left.apply((zero, one));
        let (a_plus, b_plus) = right.inverse()?.apply((one, zero));
        Ok(2.0 * Complex64::i() * self.wronskian_scale(k) * (a_minus * b_plus - a_plus * b_minus))
    }

    fn wronskian_scale(&self, k: f64) -> f64 {
        match self.medium {
            Medium::Continuous => k,
            Medium::Lattice { .. } => k.sin(),
        }
    }

    /// Plane-wave coefficients in each of the `n + 1` regions delimited by the
    /// scatterers, starting from `start` in the leftmost region.
    pub fn region_coefficients(
        &self,
        k: f64,
        start: (Complex64, Complex64),
    ) -> Result<Vec<(Complex64, Complex64)>> {
        self.medium.check_wavenumber(k)?;
        let mut out = Vec::with_capacity(self.scatterers.len() + 1);
        out.push(start);
        let mut cur = start;
        for c in &self.scatterers {
            cur = c.transfer_matrix(k)?.apply(cur);
            out.push(cur);
        }
        Ok(out)
    }

    /// `|r_R^A · r_L^B|` for the split `A = centers[..split]`, `B = centers[split..]`
    /// (wall included in `A` when present). A spectral singularity requires
    /// this to equal one.
    pub fn reflection_product(&self, k: f64, split: usize) -> Result<f64> {
        let n = self.scatterers.len();
        let wall_offset = usize::from(self.wall.is_some());
        if split == 0 || split >= n + wall_offset {
            return Err(Error::invalid(format!(
                "split {split} must leave centers on both sides"
            )));
        }
        let inner_split = split - wall_offset;
        let a = self.partial_matrix(0..inner_split, k)?;
        let r_right_a = match self.wall {
            None => a.amplitudes()?.r_right,
            Some(xw) => {
                // Right incidence onto wall + A: the left region is sin k(x - x_w).
                let (up, down) = a.apply((
                    Complex64::from_polar(1.0, -k * xw),
                    -Complex64::from_polar(1.0, k * xw),
                ));
                if down.norm() == 0.0 {
                    return Err(Error::SingularAmplitude { k });
                }
                up / down
            }
        };
        let b = self.partial_matrix(inner_split..n, k)?;
        Ok(r_right_a.norm() * b.amplitudes()?.r_left.norm())
    }
}

fn same_medium(a: Medium, b: Medium) -> bool {
    match (a, b) {
        (Medium::Continuous, Medium::Continuous) => true,
        (Medium::Lattice { hopping: h1 }, Medium::Lattice { hopping: h2 }) => {
            (h1 - h2).abs() <= 1e-12 * h1.abs().max(h2.abs())
        }
        _ => false,
    }
}

fn coincident(a: f64, b: f64) -> bool {
    (a - b).abs() <= COINCIDENCE * a.abs().max(b.abs()).max(1.0)
}

fn merge_into(prev: &mut ScatteringCenter, next: &ScatteringCenter) {
    match (prev, next) {
        (
            ScatteringCenter::ContinuousDelta { strength, .. },
            ScatteringCenter::ContinuousDelta { strength: s2, .. },
        ) => *strength += *s2,
        (
            ScatteringCenter::LatticeSite { strength, .. },
            ScatteringCenter::LatticeSite { strength: s2, .. },
        ) => *strength += *s2,
        _ => unreachable!("media are checked before merging"),
    }
}

/// `m22` of the composite formed by `centers` (at least one, no hard wall).
pub fn composite_m22(centers: &[ScatteringCenter], k: f64) -> Result<Complex64> {
    if centers.is_empty() {
        return Err(Error::invalid("a composite needs at least one center"));
    }
    Composite::new(centers.to_vec())?.m22(k)
}

pub fn jost_wronskian(centers: &[ScatteringCenter], k: f64) -> Result<Complex64> {
    Composite::new(centers.to_vec())?.jost_wronskian(k)
}

pub fn compose(outer: &TransferMatrix, inner: &TransferMatrix) -> Result<TransferMatrix> {
    TransferMatrix::compose(outer, inner)
}

pub fn transfer_matrix(center: &ScatteringCenter, k: f64) -> Result<TransferMatrix> {
    center.transfer_matrix(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_delta_m22() {
        let (v, k) = (0.8, 2.5);
        let m22 = composite_m22(&[ScatteringCenter::imaginary_delta(1.3, v)], k).unwrap();
        assert!((m22 - c(1.0 - v / k, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_delta_ss_geometry_zeroes_m22() {
        let centers = [
            ScatteringCenter::imaginary_delta(0.0, 0.5),
            ScatteringCenter::imaginary_delta(PI, 0.5),
        ];
        assert!(composite_m22(&centers, 1.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn two_center_product_matches_matching_form() {
        let a = ScatteringCenter::delta(-0.4, c(0.2, 0.9));
        let b = ScatteringCenter::delta(1.1, c(-0.3, 0.35));
        let k = 1.37;
        let m22 = composite_m22(&[a, b], k).unwrap();
        let aa = a.amplitudes(k).unwrap();
        let ab = b.amplitudes(k).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * k * (1.1 + 0.4));
        let closed = (1.0 - phase * aa.r_right * ab.r_left) / (aa.t_right * ab.t_right);
        assert!((m22 - closed).norm() < 1e-12);
    }

    #[test]
    fn empty_list_rejected_by_free_function() {
        assert!(composite_m22(&[], 1.0).is_err());
        assert_eq!(
            Composite::new(vec![]).unwrap().m22(1.0).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn coincident_deltas_merge() {
        let comp = Composite::new(vec![
            ScatteringCenter::imaginary_delta(2.0, 0.3),
            ScatteringCenter::imaginary_delta(2.0, 0.45),
        ])
        .unwrap();
        assert_eq!(comp.scatterers().len(), 1);
        assert_eq!(comp.scatterers()[0].strength(), Some(c(0.0, 0.75)));
        let unmerged = TransferMatrix::compose(
            &ScatteringCenter::imaginary_delta(2.0, 0.45)
                .transfer_matrix(0.9)
                .unwrap(),
            &ScatteringCenter::imaginary_delta(2.0, 0.3)
                .transfer_matrix(0.9)
                .unwrap(),
        )
        .unwrap();
        assert!(comp.transfer_matrix(0.9).unwrap().max_abs_diff(&unmerged) < 1e-14);
    }

    #[test]
    fn decreasing_positions_rejected() {
        let err = Composite::new(vec![
            ScatteringCenter::imaginary_delta(1.0, 0.3),
            ScatteringCenter::imaginary_delta(0.0, 0.3),
        ]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn wall_must_lead() {
        let err = Composite::new(vec![
            ScatteringCenter::imaginary_delta(1.0, 0.3),
            ScatteringCenter::hard_wall(2.0),
        ]);
        assert!(err.is_err());
        let ok = Composite::new(vec![
            ScatteringCenter::hard_wall(0.0),
            ScatteringCenter::imaginary_delta(1.0, 0.3),
        ])
        .unwrap();
        assert_eq!(ok.wall(), Some(0.0));
        assert_eq!(ok.m22(1.0), Err(Error::UnsupportedAsMatrix));
    }

    #[test]
    fn mixed_media_rejected() {
        let err = Composite::new(vec![
            ScatteringCenter::imaginary_delta(0.0, 0.3),
            ScatteringCenter::site(3, c(0.2, 0.0), 1.0),
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn free_space_wronskian() {
        let comp = Composite::new(vec![]).unwrap();
        for k in [0.3, 1.0, 4.0] {
            assert!((comp.jost_wronskian(k).unwrap() - c(0.0, -2.0 * k)).norm() < 1e-14);
        }
    }

    #[test]
    fn wronskian_vanishes_at_two_delta_ss() {
        let comp = Composite::new(vec![
            ScatteringCenter::imaginary_delta(0.0, 0.5),
            ScatteringCenter::imaginary_delta(PI, 0.5),
        ])
        .unwrap();
        assert!(comp.jost_wronskian(1.0).unwrap().norm() < 1e-10);
    }

    #[test]
    fn cavity_determinant_vanishes_at_design_point() {
        let gamma = 1.0;
        let a = 10.25 * PI;
        let comp = Composite::new(vec![
            ScatteringCenter::hard_wall(0.0),
            ScatteringCenter::imaginary_delta(a, gamma),
        ])
        .unwrap();
        assert!(comp.ss_determinant(2.0 * gamma).unwrap().norm() < 1e-12);
        assert!(comp.ss_determinant(1.9).unwrap().norm() > 1e-3);
    }

    #[test]
    fn reflection_product_is_unity_at_ss() {
        let comp = Composite::new(vec![
            ScatteringCenter::imaginary_delta(0.0, 0.6),
            ScatteringCenter::imaginary_delta(PI, 0.4),
        ])
        .unwrap();
        assert!((comp.reflection_product(1.0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(comp.reflection_product(1.0, 0).is_err());
    }
}
