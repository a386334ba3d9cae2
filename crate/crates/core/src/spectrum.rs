//! Galerkin assembly, spectra and truncated heat kernels.

use std::collections::BTreeMap;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::ProductBasis;
use crate::error::{Error, Result};
use crate::free::ProductFree;
use crate::linalg::symmetric_eigen;
use crate::model::TrigPotential;

/// Default ceiling on the product basis size.
pub const DEFAULT_CAP: usize = 20_000;

/// Fraction of computed eigenvalues treated as accurate.
pub const TRUST_FRACTION: usize = 4;

/// Eigenvalues ascending, optional eigenvectors in the product basis, and
/// the data needed to bound what was truncated.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub vectors: Option<Mat<f64>>,
    pub basis: ProductBasis,
    pub potential_hash: String,
    /// Bound on `sup |q|` used by the tail estimates.
    pub sup_bound: f64,
    /// Number of leading eigenvalues fed to traces and kernels.
    pub trusted: usize,
}

pub type Spectrum1D = Spectrum;
pub type SpectrumND = Spectrum;

/// Kernel value with a bound on the omitted part of the eigen-sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
}

#[derive(Serialize)]
pub struct SpectrumExport<'a> {
    pub eigenvalues: &'a [f64],
    pub trusted: usize,
    pub basis: &'a ProductBasis,
    pub potential_hash: &'a str,
}

/// Matrix of `c (-Laplacian) + V` in the product basis. Potential entries
/// are closed-form sums of Kronecker deltas; only the upper triangle is
/// computed and mirrored, so the result is exactly symmetric.
pub fn assemble(p: &TrigPotential, basis: &ProductBasis, cap: usize) -> Result<Mat<f64>> {
    let n = basis.size();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let terms = basis.rescale(p)?;
    let dim = basis.dim();
    for (i, f) in basis.factors.iter().enumerate() {
        let reach = terms
            .iter()
            .map(|(m, _)| m[i].unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        if reach >= f.size {
            log::warn!(
                "basis size {} in dimension {i} does not resolve potential harmonic {reach}",
                f.size
            );
        }
    }

    // One coupling table per dimension and distinct mode index.
    let mut tables: Vec<BTreeMap<i64, Vec<Complex64>>> = vec![BTreeMap::new(); dim];
    for (m, _) in &terms {
        for i in 0..dim {
            tables[i]
                .entry(m[i])
                .or_insert_with(|| basis.factors[i].coupling(m[i]));
        }
    }
    let term_tables: Vec<(Vec<&Vec<Complex64>>, f64)> = terms
        .iter()
        .map(|(m, a)| ((0..dim).map(|i| &tables[i][&m[i]]).collect(), *a))
        .collect();

    let sizes = basis.sizes();
    let idx: Vec<Vec<usize>> = (0..n).map(|j| basis.multi_index(j)).collect();
    let mut mat = Mat::<f64>::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let mut acc = Complex64::new(0.0, 0.0);
            'terms: for (tabs, a) in &term_tables {
                let mut prod = Complex64::new(*a, 0.0);
                for i in 0..dim {
                    let v = tabs[i][idx[r][i] * sizes[i] + idx[c][i]];
                    if v.re == 0.0 && v.im == 0.0 {
                        continue 'terms;
                    }
                    prod *= v;
                }
                acc += prod;
            }
            let mut v = acc.re;
            if r == c {
                v += basis.free_eigenvalue(r);
            }
            mat[(r, c)] = v;
            mat[(c, r)] = v;
        }
    }
    Ok(mat)
}

/// Diagonalize an assembled matrix.
pub fn solve_matrix(
    m: &Mat<f64>,
    basis: &ProductBasis,
    p: &TrigPotential,
    vectors: bool,
) -> Result<Spectrum> {
    if m.nrows() != basis.size() {
        return Err(Error::DimensionMismatch {
            expected: basis.size(),
            got: m.nrows(),
        });
    }
    let (eigenvalues, vectors) = symmetric_eigen(m, vectors)?;
    let trusted = (eigenvalues.len() / TRUST_FRACTION).max(1);
    Ok(Spectrum {
        eigenvalues,
        vectors,
        basis: basis.clone(),
        potential_hash: p.content_hash(),
        sup_bound: p.sup_bound(),
        trusted,
    })
}

pub fn solve(p: &TrigPotential, basis: &ProductBasis, vectors: bool) -> Result<Spectrum> {
    let m = assemble(p, basis, DEFAULT_CAP)?;
    solve_matrix(&m, basis, p, vectors)
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trusted_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.trusted]
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    pub fn free(&self) -> ProductFree {
        ProductFree::new(self.basis.free_spectra())
    }

    pub fn export(&self) -> SpectrumExport<'_> {
        SpectrumExport {
            eigenvalues: &self.eigenvalues,
            trusted: self.trusted,
            basis: &self.basis,
            potential_hash: &self.potential_hash,
        }
    }

    /// `sum_j e^{-mu_j t}` over the trusted eigenvalues.
    pub fn partial_trace(&self, t: f64) -> f64 {
        self.trusted_eigenvalues()
            .iter()
            .map(|m| (-m * t).exp())
            .sum()
    }

    /// Certified bound on the trace of the omitted eigenvalues. Min-max gives
    /// `mu_j >= lambda_j - sup|q|` against the free spectrum `lambda_j`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        (self.sup_bound * t).exp() * self.free().tail_beyond(self.trusted, t)
    }

    /// Trusted eigenfunctions evaluated at `x`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.vectors.as_ref().ok_or(Error::MissingEigenvectors)?;
        if x.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                got: x.len(),
            });
        }
        let phi = self.basis.eval_all(x);
        Ok((0..self.trusted)
            .map(|j| {
                let col = u.col(j);
                phi.iter().enumerate().map(|(i, v)| v * col[i]).sum()
            })
            .collect())
    }

    /// Truncated kernel from precomputed projections.
    pub fn kernel_from(&self, t: f64, px: &[f64], py: &[f64]) -> f64 {
        self.trusted_eigenvalues()
            .iter()
            .zip(px.iter().zip(py))
            .map(|(m, (a, b))| (-m * t).exp() * a * b)
            .sum()
    }

    /// Bound on the omitted part of the kernel eigen-sum:
    /// `sum_{j>J} e^{-mu_j t} phi_j(x)^2 <= e^{-mu_{J+1} (t-s)} G(s, x, x)`
    /// for `0 < s < t`, with `G(s) <= e^{sup|q| s}` times the free diagonal.
    /// The smallest value over `s = t/2, t/4, ..., t/2^12` is returned.
    pub fn kernel_tail_bound(&self, t: f64) -> f64 {
        let free = self.free();
        let next = free.nth_value(self.trusted + 1) - self.sup_bound;
        (1..=12)
            .map(|k| {
                let s = t / 2f64.powi(k);
                (-next * (t - s) + self.sup_bound * s).exp() * free.diagonal_bound(s)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn kernel(&self, t: f64, x: &[f64], y: &[f64]) -> Result<KernelValue> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        let px = self.project(x)?;
        let py = self.project(y)?;
        Ok(KernelValue {
            value: self.kernel_from(t, &px, &py),
            tail_bound: self.kernel_tail_bound(t),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis1D, BasisKind, Mode};
    use crate::model::{build_potential, BoxProblem, CosineSpec};
    use gauss_quad::GaussLegendre;
    use std::f64::consts::PI;
    use std::num::NonZeroUsize;

    #[test]
    fn closed_form_matches_quadrature_assembly_2d() {
        let b = BoxProblem::dirichlet(vec![1.0, 1.5]).unwrap();
        let basis = ProductBasis::for_box(&b, &[5, 4], &Mode::IntervalFaces).unwrap();
        let p = build_potential(&CosineSpec::new(
            vec![1.0, 1.5],
            [(vec![1, 1], 1.0), (vec![2, 0], 0.3), (vec![0, 3], -0.4)],
        ))
        .unwrap();
        let m = assemble(&p, &basis, DEFAULT_CAP).unwrap();
        let gl = GaussLegendre::new(NonZeroUsize::new(48).unwrap());
        let n = basis.size();
        for r in 0..n {
            for c in 0..n {
                let quad = gl.integrate(0.0, 1.0, |x| {
                    gl.integrate(0.0, 1.5, |y| {
                        let f = basis.eval_all(&[x, y]);
                        f[r] * p.eval(&[x, y]) * f[c]
                    })
                });
                let free = if r == c {
                    basis.free_eigenvalue(r)
                } else {
                    0.0
                };
                assert!((m[(r, c)] - free - quad).abs() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn product_cosine_diagonal_entry_vanishes() {
        let b = BoxProblem::dirichlet(vec![1.0, 1.0]).unwrap();
        let basis = ProductBasis::for_box(&b, &[4, 4], &Mode::IntervalFaces).unwrap();
        let p = build_potential(&CosineSpec::new(vec![1.0, 1.0], [(vec![1, 1], 1.0)])).unwrap();
        let m = assemble(&p, &basis, DEFAULT_CAP).unwrap();
        assert!((m[(0, 0)] - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let basis = ProductBasis::single(Basis1D::new(BasisKind::DD, 1.0, 50).unwrap());
        let p = TrigPotential::zero(vec![1.0]);
        assert!(matches!(
            assemble(&p, &basis, 10),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn free_dd_kernel_matches_direct_sum() {
        let basis = ProductBasis::single(Basis1D::new(BasisKind::DD, 1.0, 200).unwrap());
        let s = solve(&TrigPotential::zero(vec![1.0]), &basis, true).unwrap();
        let k = s.kernel(0.1, &[0.5], &[0.5]).unwrap();
        let direct: f64 = (1..=50)
            .map(|k| {
                2.0 * (k as f64 * PI / 2.0).sin().powi(2) * (-(k * k) as f64 * PI * PI / 10.0).exp()
            })
            .sum();
        assert!((k.value - direct).abs() < 1e-12);
        assert!((k.value - 0.745_693_231_264_826).abs() < 1e-12);
        assert!(k.tail_bound < 1e-100);
        assert!(s.kernel(0.0, &[0.5], &[0.5]).is_err());
        let edge = s.kernel(0.1, &[1.0], &[0.3]).unwrap();
        assert!(edge.value.abs() < 1e-10);
    }

    #[test]
    fn missing_vectors_are_reported() {
        let basis = ProductBasis::single(Basis1D::new(BasisKind::DD, 1.0, 8).unwrap());
        let s = solve(&TrigPotential::zero(vec![1.0]), &basis, false).unwrap();
        assert!(matches!(
            s.kernel(0.1, &[0.2], &[0.3]),
            Err(Error::MissingEigenvectors)
        ));
    }
}
