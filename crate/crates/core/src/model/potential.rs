//! Real even trigonometric polynomials on the doubled cell.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::geometry::first_nonzero_positive;

/// Coefficients smaller than this fraction of the largest one are dropped.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// `Q(x) = sum_m a_m exp(i pi sum_i m_i x_i / a_i)` with `a_m = a_{-m}` real.
///
/// Only one representative of each orbit `{m, -m}` is stored: the one whose
/// first nonzero component is positive. `Q` is real, centrally symmetric and
/// `2 a_i`-periodic in each coordinate by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPotential {
    sides: Vec<f64>,
    coeffs: BTreeMap<Vec<i64>, f64>,
}

pub(crate) fn canonical(m: &[i64]) -> Vec<i64> {
    if m.iter().all(|&v| v == 0) || first_nonzero_positive(m) {
        m.to_vec()
    } else {
        m.iter().map(|v| -v).collect()
    }
}

impl TrigPotential {
    pub fn zero(sides: Vec<f64>) -> Self {
        Self {
            sides,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(sides: Vec<f64>, value: f64) -> Self {
        let n = sides.len();
        Self::from_orbits(sides, [(vec![0; n], value)]).expect("constant potential is valid")
    }

    /// Build from orbit coefficients: each `(m, a)` sets `a_m = a_{-m} += a`.
    pub fn from_orbits<I>(sides: Vec<f64>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, f64)>,
    {
        if let Some(a) = sides.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "side length {a} must be positive and finite"
            )));
        }
        let n = sides.len();
        let mut coeffs = BTreeMap::new();
        for (m, a) in terms {
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.len(),
                });
            }
            if !a.is_finite() {
                return Err(Error::NonFinite(m));
            }
            *coeffs.entry(canonical(&m)).or_insert(0.0) += a;
        }
        let mut p = Self { sides, coeffs };
        p.prune();
        Ok(p)
    }

    fn prune(&mut self) {
        let max = self.coeffs.values().fold(0.0f64, |acc, a| acc.max(a.abs()));
        let cut = DROP_TOLERANCE * max;
        self.coeffs.retain(|_, a| a.abs() > cut && *a != 0.0);
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Canonical orbit representatives and their coefficients.
    pub fn orbits(&self) -> impl Iterator<Item = (&[i64], f64)> + '_ {
        self.coeffs.iter().map(|(m, &a)| (m.as_slice(), a))
    }

    /// Every exponential term, both members of each orbit.
    pub fn terms(&self) -> Vec<(Vec<i64>, f64)> {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for (m, &a) in &self.coeffs {
            out.push((m.clone(), a));
            if m.iter().any(|&v| v != 0) {
                out.push((m.iter().map(|v| -v).collect(), a));
            }
        }
        out
    }

    pub fn coefficient(&self, m: &[i64]) -> f64 {
        self.coeffs.get(&canonical(m)).copied().unwrap_or(0.0)
    }

    pub fn num_orbits(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest `|m_i|` present in dimension `i`.
    pub fn max_harmonic(&self, i: usize) -> i64 {
        self.coeffs.keys().map(|m| m[i].abs()).max().unwrap_or(0)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.eval(x))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(m, &a)| {
                if m.iter().all(|&v| v == 0) {
                    a
                } else {
                    let phase: f64 = m
                        .iter()
                        .zip(x)
                        .zip(&self.sides)
                        .map(|((&m, x), s)| m as f64 * x / s)
                        .sum();
                    2.0 * a * (PI * phase).cos()
                }
            })
            .sum()
    }

    /// Average over the doubled cell, i.e. `a_0`.
    pub fn mean(&self) -> f64 {
        self.coefficient(&vec![0; self.dim()])
    }

    pub fn subtract_mean(&self) -> Self {
        let mut p = self.clone();
        p.coeffs.remove(&vec![0; self.dim()]);
        p
    }

    pub fn shifted(&self, gamma: f64) -> Self {
        let mut p = self.clone();
        *p.coeffs.entry(vec![0; self.dim()]).or_insert(0.0) += gamma;
        p.prune();
        p
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.coeffs.values_mut().for_each(|a| *a *= s);
        p.prune();
        p
    }

    pub fn sum(&self, other: &TrigPotential) -> Result<Self> {
        self.check_same_cell(other)?;
        let mut p = self.clone();
        for (m, a) in &other.coeffs {
            *p.coeffs.entry(m.clone()).or_insert(0.0) += a;
        }
        p.prune();
        Ok(p)
    }

    pub(crate) fn check_same_cell(&self, other: &TrigPotential) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        for (a, b) in self.sides.iter().zip(&other.sides) {
            if (a - b).abs() > 1e-12 * a.max(*b) {
                return Err(Error::InvalidInput(format!(
                    "side lengths differ: {a} vs {b}"
                )));
            }
        }
        Ok(())
    }

    /// True when `a_m` is unchanged by flipping the sign of any single
    /// component, i.e. `Q` is even in each coordinate separately.
    pub fn is_coordinatewise_even(&self) -> bool {
        self.coeffs.iter().all(|(m, &a)| {
            (0..m.len()).all(|i| {
                if m[i] == 0 {
                    return true;
                }
                let mut f = m.clone();
                f[i] = -f[i];
                let b = self.coefficient(&f);
                (a - b).abs() <= 1e-13 * a.abs().max(b.abs())
            })
        })
    }

    pub(crate) fn require_coordinatewise_even(&self) -> Result<()> {
        if self.is_coordinatewise_even() {
            Ok(())
        } else {
            Err(Error::NotCoordinatewiseEven)
        }
    }

    /// `d^2 Q / dx_i^2`, exact.
    pub fn second_derivative(&self, i: usize) -> Self {
        let w = PI / self.sides[i];
        let mut p = self.clone();
        for (m, a) in p.coeffs.iter_mut() {
            let k = m[i] as f64 * w;
            *a *= -k * k;
        }
        p.prune();
        p
    }

    pub fn laplacian(&self) -> Self {
        let mut p = self.clone();
        for (m, a) in p.coeffs.iter_mut() {
            let k2: f64 = m
                .iter()
                .zip(&self.sides)
                .map(|(&m, s)| (m as f64 * PI / s).powi(2))
                .sum();
            *a *= -k2;
        }
        p.prune();
        p
    }

    /// Restriction to the hyperplane `x_i = 0` (`at_far = false`) or
    /// `x_i = a_i` (`at_far = true`), as a potential in the remaining
    /// coordinates.
    pub fn restrict(&self, i: usize, at_far: bool) -> Self {
        let mut sides = self.sides.clone();
        sides.remove(i);
        let terms = self.terms().into_iter().map(|(m, a)| {
            let sign = if at_far && m[i] % 2 != 0 { -1.0 } else { 1.0 };
            let mut rest = m;
            rest.remove(i);
            (rest, sign * a)
        });
        let mut acc: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (m, a) in terms {
            *acc.entry(m).or_insert(0.0) += a;
        }
        let mut coeffs = BTreeMap::new();
        for (m, a) in acc {
            if m.iter().all(|&v| v == 0) || first_nonzero_positive(&m) {
                coeffs.insert(m, a);
            }
        }
        let mut p = Self { sides, coeffs };
        p.prune();
        p
    }

    /// Potential of one coordinate: the terms whose index vanishes off
    /// dimension `i`, as a 1D potential on side `a_i`.
    pub fn coordinate_profile(&self, i: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(m, _)| m.iter().enumerate().all(|(j, &v)| j == i || v == 0))
            .map(|(m, &a)| (vec![m[i]], a))
            .collect();
        Self {
            sides: vec![self.sides[i]],
            coeffs,
        }
    }

    /// `sum |a_m|` over all terms; bounds `sup |Q|`.
    pub fn sup_bound(&self) -> f64 {
        self.terms().iter().map(|(_, a)| a.abs()).sum()
    }

    /// `(1/|R_0|) int_{R_0} Q^2` by Parseval.
    pub fn mean_square(&self) -> f64 {
        self.terms().iter().map(|(_, a)| a * a).sum()
    }

    /// Stable content hash of the coefficient table.
    pub fn content_hash(&self) -> String {
        let mut s = String::new();
        for a in &self.sides {
            let _ = write!(s, "{a:.17e};");
        }
        for (m, a) in &self.coeffs {
            let _ = write!(s, "{m:?}={a:.17e};");
        }
        let digest = Sha256::digest(s.as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn product_cos() -> TrigPotential {
        TrigPotential::from_orbits(vec![1.0, 1.0], [(vec![1, 1], 0.25), (vec![1, -1], 0.25)])
            .unwrap()
    }

    #[test]
    fn orbit_storage_is_canonical() {
        let p = TrigPotential::from_orbits(vec![1.0], [(vec![-2], 0.5)]).unwrap();
        assert_eq!(p.orbits().next().unwrap().0, &[2]);
        assert_eq!(p.coefficient(&[-2]), 0.5);
        assert_eq!(p.terms().len(), 2);
    }

    #[test]
    fn evaluation_is_real_periodic_even() {
        let p = product_cos();
        assert_relative_eq!(p.eval(&[0.25, 0.25]), 0.5, epsilon = 1e-15);
        let x = [0.3, 0.7];
        assert_relative_eq!(p.eval(&x), p.eval(&[-0.3, -0.7]), epsilon = 1e-14);
        assert_relative_eq!(p.eval(&x), p.eval(&[2.3, 0.7]), epsilon = 1e-14);
        assert_relative_eq!(p.eval(&x), p.eval(&[0.3, -1.3]), epsilon = 1e-14);
        assert!(p.evaluate(&[0.1]).is_err());
    }

    #[test]
    fn mean_handling() {
        let p = TrigPotential::from_orbits(vec![1.0], [(vec![0], 3.0), (vec![1], 0.5)]).unwrap();
        assert_eq!(p.mean(), 3.0);
        assert_eq!(p.subtract_mean().mean(), 0.0);
        assert_eq!(product_cos().mean(), 0.0);
        assert_eq!(p.subtract_mean().subtract_mean(), p.subtract_mean());
    }

    #[test]
    fn coordinatewise_evenness() {
        assert!(product_cos().is_coordinatewise_even());
        let half = TrigPotential::from_orbits(vec![1.0, 1.0], [(vec![1, -1], 0.25)]).unwrap();
        assert!(!half.is_coordinatewise_even());
    }

    #[test]
    fn derivatives_are_exact() {
        let p = TrigPotential::from_orbits(vec![1.0], [(vec![1], 0.5)]).unwrap();
        assert_relative_eq!(p.laplacian().eval(&[0.0]), -PI * PI, epsilon = 1e-13);
        assert_relative_eq!(
            p.second_derivative(0).eval(&[0.3]),
            -PI * PI * (PI * 0.3).cos(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn restriction_to_faces() {
        // q = cos(pi x1) cos(pi x2) + 0.3 cos(2 pi x1)
        let p = product_cos()
            .sum(&TrigPotential::from_orbits(vec![1.0, 1.0], [(vec![2, 0], 0.15)]).unwrap())
            .unwrap();
        for (i, far) in [(0, false), (0, true), (1, false), (1, true)] {
            let r = p.restrict(i, far);
            for s in [0.0, 0.17, 0.5, 0.83] {
                let mut x = vec![s, s];
                x[i] = if far { 1.0 } else { 0.0 };
                assert_relative_eq!(r.eval(&[s]), p.eval(&x), epsilon = 1e-14);
            }
        }
        let corner = p.restrict(0, true).restrict(0, false);
        assert_relative_eq!(corner.eval(&[]), p.eval(&[1.0, 0.0]), epsilon = 1e-14);
    }

    #[test]
    fn drop_tolerance_prunes() {
        let p = TrigPotential::from_orbits(vec![1.0], [(vec![1], 1.0), (vec![2], 1e-17)]).unwrap();
        assert_eq!(p.num_orbits(), 1);
        assert!(TrigPotential::from_orbits(vec![1.0], [(vec![1], f64::NAN)]).is_err());
    }

    #[test]
    fn hash_is_stable_and_discriminating() {
        assert_eq!(product_cos().content_hash(), product_cos().content_hash());
        assert_ne!(
            product_cos().content_hash(),
            product_cos().scaled(2.0).content_hash()
        );
    }
}
