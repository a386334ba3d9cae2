//! Trigonometric Galerkin bases and their closed-form potential couplings.
//!
//! Every basis function is a finite sum of exponentials
//! `exp(i h pi x / (2a))` with integer `h`, so the integral of a product of
//! two basis functions against a trigonometric potential reduces to
//! Kronecker deltas on `h`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free::FreeSpectrum1D;
use crate::model::{Bc, BoxProblem, TrigPotential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    DD,
    DN,
    ND,
    NN,
    Periodic,
    Antiperiodic,
}

impl BasisKind {
    pub fn from_bc(left: Bc, right: Bc) -> Self {
        match (left, right) {
            (Bc::Dirichlet, Bc::Dirichlet) => BasisKind::DD,
            (Bc::Dirichlet, Bc::Neumann) => BasisKind::DN,
            (Bc::Neumann, Bc::Dirichlet) => BasisKind::ND,
            (Bc::Neumann, Bc::Neumann) => BasisKind::NN,
        }
    }

    /// Interval kinds live on `[0, a]`; the others on `[-a, a]`.
    pub fn is_interval(self) -> bool {
        !matches!(self, BasisKind::Periodic | BasisKind::Antiperiodic)
    }
}

/// An orthonormal trigonometric basis of `size` functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis1D {
    pub kind: BasisKind,
    pub length: f64,
    pub size: usize,
}

pub const MIN_BASIS_SIZE: usize = 4;

impl Basis1D {
    pub fn new(kind: BasisKind, length: f64, size: usize) -> Result<Self> {
        if size < MIN_BASIS_SIZE {
            return Err(Error::InvalidInput(format!(
                "basis size {size} below minimum {MIN_BASIS_SIZE}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!(
                "basis length {length} must be positive"
            )));
        }
        Ok(Self { kind, length, size })
    }

    /// Angular frequency of function `k` (so `-u'' = omega^2 u`).
    pub fn frequency(&self, k: usize) -> f64 {
        let d = PI / self.length;
        let (n, half) = self.index_parts(k);
        (n as f64 + if half { 0.5 } else { 0.0 }) * d
    }

    /// Integer and half-integer parts of the frequency in units of `pi/a`,
    /// plus which trigonometric factor the function uses.
    fn index_parts(&self, k: usize) -> (usize, bool) {
        match self.kind {
            BasisKind::DD => (k + 1, false),
            BasisKind::NN => (k, false),
            BasisKind::DN | BasisKind::ND => (k, true),
            BasisKind::Periodic => (k.div_ceil(2), false),
            BasisKind::Antiperiodic => (k / 2, true),
        }
    }

    fn is_sine(&self, k: usize) -> bool {
        match self.kind {
            BasisKind::DD | BasisKind::DN => true,
            BasisKind::NN | BasisKind::ND => false,
            BasisKind::Periodic => k > 0 && k % 2 == 0,
            BasisKind::Antiperiodic => k % 2 == 1,
        }
    }

    fn norm(&self, k: usize) -> f64 {
        let a = self.length;
        match self.kind {
            BasisKind::NN if k == 0 => (1.0 / a).sqrt(),
            BasisKind::Periodic if k == 0 => (0.5 / a).sqrt(),
            BasisKind::Periodic | BasisKind::Antiperiodic => (1.0 / a).sqrt(),
            _ => (2.0 / a).sqrt(),
        }
    }

    /// Doubled frequency in units of `pi/(2a)`.
    fn half_units(&self, k: usize) -> i64 {
        let (n, half) = self.index_parts(k);
        2 * n as i64 + i64::from(half)
    }

    /// Exponential components `(h, c)` with `phi_k(x) = sum c exp(i h pi x/(2a))`.
    pub fn components(&self, k: usize) -> Vec<(i64, Complex64)> {
        let h = self.half_units(k);
        let c = self.norm(k);
        if h == 0 {
            return vec![(0, Complex64::new(c, 0.0))];
        }
        if self.is_sine(k) {
            vec![
                (h, Complex64::new(0.0, -c / 2.0)),
                (-h, Complex64::new(0.0, c / 2.0)),
            ]
        } else {
            vec![
                (h, Complex64::new(c / 2.0, 0.0)),
                (-h, Complex64::new(c / 2.0, 0.0)),
            ]
        }
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        let w = self.frequency(k) * x;
        let c = self.norm(k);
        if self.is_sine(k) {
            c * w.sin()
        } else {
            c * w.cos()
        }
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        (0..self.size).map(|k| self.eval(k, x)).collect()
    }

    /// Interval bases integrate over `[0,a]`, half of the symmetric doubled
    /// cell on which the exponential identity holds.
    fn weight(&self) -> f64 {
        if self.kind.is_interval() {
            0.5
        } else {
            1.0
        }
    }

    /// `T[j][k] = int phi_j exp(i pi m x / a) phi_k dx`, row-major `size x size`.
    pub fn coupling(&self, m: i64) -> Vec<Complex64> {
        let n = self.size;
        let comps: Vec<_> = (0..n).map(|k| self.components(k)).collect();
        let scale = self.weight() * 2.0 * self.length;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for k in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (h1, c1) in &comps[j] {
                    for (h2, c2) in &comps[k] {
                        if h2 - h1 + 2 * m == 0 {
                            s += c1.conj() * c2;
                        }
                    }
                }
                out[j * n + k] = s * scale;
            }
        }
        out
    }

    pub fn free_spectrum(&self, stiffness: f64) -> FreeSpectrum1D {
        FreeSpectrum1D::new(self.kind, self.length, stiffness)
    }
}

/// How each dimension of a box problem is discretized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Face conditions of the box on `[0, a_i]`.
    IntervalFaces,
    /// Periodic doubled cell in every dimension.
    TorusPeriodic,
    /// Doubled cell, antiperiodic in the flagged dimensions.
    TorusAntiperiodic(Vec<bool>),
}

/// Tensor product basis with a common stiffness factor on the Laplacian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBasis {
    pub factors: Vec<Basis1D>,
    pub stiffness: f64,
}

impl ProductBasis {
    pub fn new(factors: Vec<Basis1D>, stiffness: f64) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        if !(stiffness.is_finite() && stiffness > 0.0) {
            return Err(Error::InvalidInput(format!(
                "stiffness {stiffness} must be positive"
            )));
        }
        Ok(Self { factors, stiffness })
    }

    pub fn single(b: Basis1D) -> Self {
        Self {
            factors: vec![b],
            stiffness: 1.0,
        }
    }

    /// Basis for a box in the given mode with `sizes[i]` functions per dimension.
    pub fn for_box(b: &BoxProblem, sizes: &[usize], mode: &Mode) -> Result<Self> {
        if sizes.len() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                got: sizes.len(),
            });
        }
        let kinds: Vec<BasisKind> = match mode {
            Mode::IntervalFaces => b
                .bc()
                .iter()
                .map(|&(l, r)| BasisKind::from_bc(l, r))
                .collect(),
            Mode::TorusPeriodic => vec![BasisKind::Periodic; b.dim()],
            Mode::TorusAntiperiodic(flags) => {
                if flags.len() != b.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: b.dim(),
                        got: flags.len(),
                    });
                }
                flags
                    .iter()
                    .map(|&f| {
                        if f {
                            BasisKind::Antiperiodic
                        } else {
                            BasisKind::Periodic
                        }
                    })
                    .collect()
            }
        };
        let factors = kinds
            .into_iter()
            .zip(b.sides())
            .zip(sizes)
            .map(|((k, &a), &s)| Basis1D::new(k, a, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn size(&self) -> usize {
        self.factors.iter().map(|f| f.size).product()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.size).collect()
    }

    /// Multi-index of flat index `j`; the last dimension varies fastest.
    pub fn multi_index(&self, mut j: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            idx[i] = j % f.size;
            j /= f.size;
        }
        idx
    }

    pub fn free_eigenvalue(&self, j: usize) -> f64 {
        let idx = self.multi_index(j);
        self.stiffness
            * self
                .factors
                .iter()
                .zip(&idx)
                .map(|(f, &k)| f.frequency(k).powi(2))
                .sum::<f64>()
    }

    /// Values of every product basis function at `x`.
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![1.0];
        for (f, &xi) in self.factors.iter().zip(x) {
            let v = f.eval_all(xi);
            out = out
                .iter()
                .flat_map(|a| v.iter().map(move |b| a * b))
                .collect();
        }
        out
    }

    pub fn free_spectra(&self) -> Vec<FreeSpectrum1D> {
        self.factors
            .iter()
            .map(|f| f.free_spectrum(self.stiffness))
            .collect()
    }

    /// Measure of the region the basis lives on.
    pub fn domain_volume(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                if f.kind.is_interval() {
                    f.length
                } else {
                    2.0 * f.length
                }
            })
            .product()
    }

    /// Potential mode indices rescaled to this basis' frequency units.
    pub(crate) fn rescale(&self, p: &TrigPotential) -> Result<Vec<(Vec<i64>, f64)>> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        let ratios: Vec<f64> = self
            .factors
            .iter()
            .zip(p.sides())
            .map(|(f, s)| f.length / s)
            .collect();
        p.terms()
            .into_iter()
            .map(|(m, a)| {
                let scaled = m
                    .iter()
                    .zip(&ratios)
                    .zip(p.sides().iter().zip(&self.factors))
                    .map(|((&mi, r), (s, f))| {
                        let v = mi as f64 * r;
                        let k = v.round();
                        if (v - k).abs() > 1e-9 * v.abs().max(1.0) {
                            Err(Error::IncompatiblePeriod {
                                potential: 2.0 * s / mi.abs() as f64,
                                basis: f.length,
                            })
                        } else {
                            Ok(k as i64)
                        }
                    })
                    .collect::<Result<Vec<i64>>>()?;
                Ok((scaled, a))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use gauss_quad::GaussLegendre;
    use std::num::NonZeroUsize;

    fn gl(n: usize) -> GaussLegendre {
        GaussLegendre::new(NonZeroUsize::new(n).unwrap())
    }

    fn all_kinds() -> [BasisKind; 6] {
        [
            BasisKind::DD,
            BasisKind::DN,
            BasisKind::ND,
            BasisKind::NN,
            BasisKind::Periodic,
            BasisKind::Antiperiodic,
        ]
    }

    fn domain(b: &Basis1D) -> (f64, f64) {
        if b.kind.is_interval() {
            (0.0, b.length)
        } else {
            (-b.length, b.length)
        }
    }

    #[test]
    fn bases_are_orthonormal() {
        let q = gl(64);
        for kind in all_kinds() {
            let b = Basis1D::new(kind, 1.3, 8).unwrap();
            let (lo, hi) = domain(&b);
            for j in 0..8 {
                for k in 0..8 {
                    let v = q.integrate(lo, hi, |x| b.eval(j, x) * b.eval(k, x));
                    let e = if j == k { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-12, "{kind:?} {j} {k}: {v}");
                }
            }
        }
    }

    #[test]
    fn components_reproduce_values() {
        for kind in all_kinds() {
            let b = Basis1D::new(kind, 0.8, 6).unwrap();
            for k in 0..6 {
                for x in [0.1, 0.37, 0.75] {
                    let s: Complex64 = b
                        .components(k)
                        .iter()
                        .map(|(h, c)| {
                            c * Complex64::from_polar(1.0, *h as f64 * PI * x / (2.0 * b.length))
                        })
                        .sum();
                    assert!((s.re - b.eval(k, x)).abs() < 1e-14 && s.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn boundary_conditions_hold() {
        let a = 1.0;
        let h = 1e-6;
        for (kind, left_d, right_d) in [
            (BasisKind::DD, true, true),
            (BasisKind::DN, true, false),
            (BasisKind::ND, false, true),
            (BasisKind::NN, false, false),
        ] {
            let b = Basis1D::new(kind, a, 5).unwrap();
            for k in 0..5 {
                let (v0, va) = (b.eval(k, 0.0), b.eval(k, a));
                let d0 = (b.eval(k, h) - b.eval(k, -h)) / (2.0 * h);
                let da = (b.eval(k, a + h) - b.eval(k, a - h)) / (2.0 * h);
                assert!(if left_d { v0.abs() } else { d0.abs() } < 1e-8);
                assert!(if right_d { va.abs() } else { da.abs() } < 1e-8);
            }
        }
    }

    #[test]
    fn closed_form_coupling_matches_quadrature() {
        let q = gl(64);
        for kind in all_kinds() {
            let b = Basis1D::new(kind, 1.0, 7).unwrap();
            let (lo, hi) = domain(&b);
            for m in [0i64, 1, 2, 3] {
                let t = b.coupling(m);
                let t_neg = b.coupling(-m);
                for j in 0..7 {
                    for k in 0..7 {
                        let cosine = q.integrate(lo, hi, |x| {
                            b.eval(j, x) * (PI * m as f64 * x).cos() * b.eval(k, x)
                        });
                        let sym = (t[j * 7 + k] + t_neg[j * 7 + k]) * 0.5;
                        assert!((sym.re - cosine).abs() < 1e-12, "{kind:?} m={m} ({j},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn dd_entry_for_cos_two_pi() {
        // <phi_1, cos(2 pi x) phi_1> on [0,1] = -1/2.
        let b = Basis1D::new(BasisKind::DD, 1.0, 4).unwrap();
        let t = b.coupling(2);
        let t2 = b.coupling(-2);
        assert_relative_eq!((t[0] + t2[0]).re / 2.0, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn product_indexing() {
        let b = BoxProblem::dirichlet(vec![1.0, 2.0]).unwrap();
        let p = ProductBasis::for_box(&b, &[4, 5], &Mode::IntervalFaces).unwrap();
        assert_eq!(p.size(), 20);
        assert_eq!(p.multi_index(7), vec![1, 2]);
        assert_relative_eq!(p.free_eigenvalue(7), PI * PI * (4.0 + 9.0 / 4.0));
        let v = p.eval_all(&[0.3, 0.7]);
        assert_relative_eq!(v[7], p.factors[0].eval(1, 0.3) * p.factors[1].eval(2, 0.7));
    }

    #[test]
    fn rescaling_checks_period() {
        let b = Basis1D::new(BasisKind::DD, 1.0, 4).unwrap();
        let p = TrigPotential::from_orbits(vec![0.5], [(vec![1], 0.5)]).unwrap();
        let r = ProductBasis::single(b.clone()).rescale(&p).unwrap();
        assert!(r.iter().any(|(m, _)| m == &vec![2]));
        let bad = TrigPotential::from_orbits(vec![0.7], [(vec![1], 0.5)]).unwrap();
        assert!(ProductBasis::single(b).rescale(&bad).is_err());
    }
}
