//! One-dimensional problems `-c u'' + V u` in trigonometric bases.

use faer::Mat;

use crate::basis::{Basis1D, BasisKind, ProductBasis};
use crate::error::{Error, Result};
use crate::model::{Bc, DirectionalComponent, TrigPotential};
use crate::spectrum::{assemble, solve_matrix, KernelValue, Spectrum1D, DEFAULT_CAP};

/// Default basis size for 1D problems.
pub const DEFAULT_K: usize = 128;

fn product(basis: &Basis1D, stiffness: f64) -> Result<ProductBasis> {
    ProductBasis::new(vec![basis.clone()], stiffness)
}

pub fn assemble_1d(v: &TrigPotential, basis: &Basis1D, stiffness: f64) -> Result<Mat<f64>> {
    if v.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: v.dim(),
        });
    }
    assemble(v, &product(basis, stiffness)?, DEFAULT_CAP)
}

pub fn solve_1d(
    v: &TrigPotential,
    basis: &Basis1D,
    stiffness: f64,
    vectors: bool,
) -> Result<Spectrum1D> {
    let m = assemble_1d(v, basis, stiffness)?;
    solve_matrix(&m, &product(basis, stiffness)?, v, vectors)
}

/// Interval problem on `[0, a]` with the given end conditions, `a` taken
/// from the potential.
pub fn solve_interval(
    v: &TrigPotential,
    bc: (Bc, Bc),
    size: usize,
    vectors: bool,
) -> Result<Spectrum1D> {
    let basis = Basis1D::new(BasisKind::from_bc(bc.0, bc.1), v.sides()[0], size)?;
    solve_1d(v, &basis, 1.0, vectors)
}

/// Periodic (`antiperiodic = false`) or antiperiodic problem on `[-a, a]`.
pub fn solve_doubled(
    v: &TrigPotential,
    antiperiodic: bool,
    size: usize,
    vectors: bool,
) -> Result<Spectrum1D> {
    let kind = if antiperiodic {
        BasisKind::Antiperiodic
    } else {
        BasisKind::Periodic
    };
    let basis = Basis1D::new(kind, v.sides()[0], size)?;
    solve_1d(v, &basis, 1.0, vectors)
}

/// Spectrum of `-|delta|^2 d^2/ds^2 + Q_delta(s)`, periodic on `[0, 1]`.
pub fn directional_spectrum(comp: &DirectionalComponent, size: usize) -> Result<Spectrum1D> {
    let basis = Basis1D::new(BasisKind::Periodic, 0.5, size)?;
    let stiffness = comp.dual_norm * comp.dual_norm;
    solve_1d(&comp.profile(), &basis, stiffness, false)
}

pub fn kernel_1d(spec: &Spectrum1D, t: f64, x: f64, y: f64) -> Result<KernelValue> {
    spec.kernel(t, &[x], &[y])
}
