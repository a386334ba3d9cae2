//! Box and torus problems in two and three dimensions.

use faer::Mat;

use crate::basis::{Basis1D, BasisKind, Mode, ProductBasis};
use crate::eig1d::solve_1d;
use crate::error::{Error, Result};
use crate::model::{BoxProblem, TrigPotential};
use crate::spectrum::{assemble, solve_matrix, KernelValue, SpectrumND, TRUST_FRACTION};

pub fn assemble_nd(
    p: &TrigPotential,
    b: &BoxProblem,
    sizes: &[usize],
    mode: &Mode,
    cap: usize,
) -> Result<(Mat<f64>, ProductBasis)> {
    if p.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: p.dim(),
        });
    }
    if *mode == Mode::IntervalFaces {
        p.require_coordinatewise_even()?;
    }
    let basis = ProductBasis::for_box(b, sizes, mode)?;
    let m = assemble(p, &basis, cap)?;
    Ok((m, basis))
}

pub fn solve_nd(
    p: &TrigPotential,
    b: &BoxProblem,
    sizes: &[usize],
    mode: &Mode,
    vectors: bool,
) -> Result<SpectrumND> {
    let (m, basis) = assemble_nd(p, b, sizes, mode, crate::spectrum::DEFAULT_CAP)?;
    solve_matrix(&m, &basis, p, vectors)
}

/// Split `q(x) = sum_i q_i(x_i)` into its coordinate profiles; the constant
/// goes to the first one.
pub fn separable_profiles(p: &TrigPotential) -> Result<Vec<TrigPotential>> {
    if p.orbits()
        .any(|(m, _)| m.iter().filter(|&&v| v != 0).count() > 1)
    {
        return Err(Error::InvalidInput(
            "potential is not a sum of coordinate profiles".into(),
        ));
    }
    Ok((0..p.dim())
        .map(|i| {
            let prof = p.coordinate_profile(i);
            if i == 0 {
                prof
            } else {
                prof.subtract_mean()
            }
        })
        .collect())
}

/// Embed coordinate profiles back into one potential on `sides`.
pub fn combine_profiles(profiles: &[TrigPotential], sides: &[f64]) -> Result<TrigPotential> {
    let n = sides.len();
    let mut terms = Vec::new();
    for (i, prof) in profiles.iter().enumerate() {
        for (m, a) in prof.orbits() {
            let mut full = vec![0; n];
            full[i] = m[0];
            terms.push((full, a));
        }
    }
    TrigPotential::from_orbits(sides.to_vec(), terms)
}

/// The `count` smallest sums of 1D eigenvalues for a separable potential.
///
/// Only sums whose every index lies in the trusted range of its 1D solve
/// are used; a sum is reliable when it lies below the smallest sum that
/// would require an untrusted index.
pub fn separable_spectrum(
    profiles: &[TrigPotential],
    b: &BoxProblem,
    sizes: &[usize],
    count: usize,
) -> Result<SpectrumND> {
    let n = b.dim();
    if profiles.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: profiles.len(),
        });
    }
    if sizes.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sizes.len(),
        });
    }
    let mut spectra = Vec::with_capacity(n);
    let mut factors = Vec::with_capacity(n);
    for i in 0..n {
        let (l, r) = b.bc()[i];
        let basis = Basis1D::new(BasisKind::from_bc(l, r), b.sides()[i], sizes[i])?;
        spectra.push(solve_1d(&profiles[i], &basis, 1.0, false)?);
        factors.push(basis);
    }
    let lows: f64 = spectra.iter().map(|s| s.eigenvalues[0]).sum();
    let ceiling = spectra
        .iter()
        .map(|s| {
            let t = (s.eigenvalues.len() / TRUST_FRACTION).max(1);
            s.eigenvalues[t] - s.eigenvalues[0] + lows
        })
        .fold(f64::INFINITY, f64::min);

    let mut sums = vec![0.0];
    for s in &spectra {
        let t = (s.eigenvalues.len() / TRUST_FRACTION).max(1);
        let mut next = Vec::new();
        for &acc in &sums {
            for &mu in &s.eigenvalues[..t] {
                next.push(acc + mu);
            }
        }
        sums = next;
    }
    // Partial sums of the remaining dimensions are at least their minima.
    sums.retain(|&v| v < ceiling);
    sums.sort_by(f64::total_cmp);
    if count > sums.len() {
        return Err(Error::CountTooLarge {
            requested: count,
            available: sums.len(),
        });
    }
    sums.truncate(count);

    let combined = combine_profiles(profiles, b.sides())?;
    let basis = ProductBasis::new(factors, 1.0)?;
    Ok(SpectrumND {
        eigenvalues: sums,
        vectors: None,
        basis,
        potential_hash: combined.content_hash(),
        sup_bound: profiles.iter().map(|p| p.sup_bound()).sum(),
        trusted: count,
    })
}

/// Largest count `separable_spectrum` can certify for these inputs.
pub fn separable_capacity(
    profiles: &[TrigPotential],
    b: &BoxProblem,
    sizes: &[usize],
) -> Result<usize> {
    match separable_spectrum(profiles, b, sizes, usize::MAX) {
        Err(Error::CountTooLarge { available, .. }) => Ok(available),
        Err(e) => Err(e),
        Ok(s) => Ok(s.len()),
    }
}

pub fn kernel_nd(spec: &SpectrumND, t: f64, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    spec.kernel(t, x, y)
}
