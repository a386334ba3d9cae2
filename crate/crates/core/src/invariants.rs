//! Spectral invariants of a potential and comparisons between them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Mode;
use crate::eig1d::{directional_spectrum, solve_interval, DEFAULT_K};
use crate::eignd::solve_nd;
use crate::error::{Error, Result};
use crate::heat::{fit_spectrum, AsymptoticFit, Exponent, FitWindow};
use crate::model::{directional_decomposition, reduce_potential, BoxProblem, TrigPotential};

/// Eigenvalues kept per 1D invariant.
pub const DEFAULT_J: usize = 20;
/// Number of smallest radii for the reduced-square sums.
pub const DEFAULT_RADII: usize = 8;
/// Relative tolerance for grouping lattice vectors by length.
pub const GROUPING_TOLERANCE: f64 = 1e-12;
pub const SPECTRUM_TOLERANCE: f64 = 1e-8;
pub const INTEGRAL_TOLERANCE: f64 = 1e-10;
pub const HEAT_TOLERANCE: f64 = 1e-6;
pub const SEPARABLE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatFitParams {
    pub sizes: Vec<usize>,
    pub window: FitWindow,
}

impl Default for HeatFitParams {
    fn default() -> Self {
        Self {
            sizes: vec![32, 32],
            window: FitWindow::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BundleParams {
    pub j: usize,
    pub size_1d: usize,
    pub radii: usize,
    pub heat: Option<HeatFitParams>,
}

impl Default for BundleParams {
    fn default() -> Self {
        Self {
            j: DEFAULT_J,
            size_1d: DEFAULT_K,
            radii: DEFAULT_RADII,
            heat: None,
        }
    }
}

impl BundleParams {
    pub fn validate(&self) -> Result<()> {
        if self.j == 0 {
            return Err(Error::InvalidInput("j must be positive".into()));
        }
        if self.radii < 5 {
            return Err(Error::InvalidInput(
                "at least 5 radii are needed for the separability check".into(),
            ));
        }
        if self.size_1d < 4 * self.j {
            return Err(Error::InvalidInput(format!(
                "size_1d {} cannot certify {} eigenvalues",
                self.size_1d, self.j
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalInvariant {
    pub direction: Vec<i64>,
    pub dual_norm: f64,
    pub eigenvalues: Vec<f64>,
    /// Direction has more than one nonzero component, the case the
    /// isospectral theorems cover.
    pub guaranteed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateInvariant {
    pub axis: usize,
    pub bc: String,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSquareSum {
    /// `|d|^2` shared by the group.
    pub radius_sq: f64,
    /// Half-set representatives `k` with `d = (2 k_1 a_1, ..., 2 k_n a_n)`.
    pub vectors: Vec<Vec<i64>>,
    /// `sum over the group of int_{R_0} q_d^2`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantBundle {
    pub problem: BoxProblem,
    pub potential_hash: String,
    pub params: BundleParams,
    pub mean_integral: f64,
    pub directional: Vec<DirectionalInvariant>,
    pub coordinate: Vec<CoordinateInvariant>,
    pub q_d_sums: Vec<ReducedSquareSum>,
    pub heat_coeffs: Option<AsymptoticFit>,
}

/// `int_{R_0} q_d^2` over the doubled cell, by Parseval.
pub fn reduced_square_integral(p: &TrigPotential, k: &[i64]) -> Result<f64> {
    let qd = reduce_potential(p, k)?;
    let volume: f64 = p.sides().iter().map(|a| 2.0 * a).product();
    Ok(volume * qd.mean_square())
}

fn half_set(k: &[i64]) -> bool {
    k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

fn all_vectors(n: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-r..=r).filter(|&c| c != 0).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.retain(|k| half_set(k));
    out
}

/// Lattice vectors with no zero component, grouped by `|d|^2`, smallest
/// `count` groups.
pub fn radius_groups(sides: &[f64], count: usize) -> Vec<(f64, Vec<Vec<i64>>)> {
    let norm = |k: &[i64]| -> f64 {
        k.iter()
            .zip(sides)
            .map(|(&k, a)| 4.0 * (k * k) as f64 * a * a)
            .sum()
    };
    let min_side = sides.iter().fold(f64::INFINITY, |m, a| m.min(a * a));
    let base: f64 = sides.iter().map(|a| 4.0 * a * a).sum();
    let mut r = 1;
    loop {
        let mut ks = all_vectors(sides.len(), r);
        ks.sort_by(|a, b| norm(a).total_cmp(&norm(b)).then(a.cmp(b)));
        let mut groups: Vec<(f64, Vec<Vec<i64>>)> = Vec::new();
        for k in ks {
            let v = norm(&k);
            match groups.last_mut() {
                Some(g) if (v - g.0).abs() <= GROUPING_TOLERANCE * v => g.1.push(k),
                _ => groups.push((v, vec![k])),
            }
        }
        // Any vector outside the search box has |d|^2 above this.
        let outside = base - 4.0 * min_side + 4.0 * min_side * ((r + 1) * (r + 1)) as f64;
        if groups.len() > count && groups[count].0 < outside * (1.0 - GROUPING_TOLERANCE) {
            groups.truncate(count);
            return groups;
        }
        r += 1;
    }
}

pub fn q_d_sums(p: &TrigPotential, count: usize) -> Result<Vec<ReducedSquareSum>> {
    let q = p.subtract_mean();
    radius_groups(p.sides(), count)
        .into_iter()
        .map(|(radius_sq, vectors)| {
            let value = vectors
                .iter()
                .map(|k| reduced_square_integral(&q, k))
                .sum::<Result<f64>>()?;
            Ok(ReducedSquareSum {
                radius_sq,
                vectors,
                value,
            })
        })
        .collect()
}

fn leading(eigs: &[f64], trusted: usize, j: usize) -> Result<Vec<f64>> {
    if trusted < j {
        return Err(Error::CountTooLarge {
            requested: j,
            available: trusted,
        });
    }
    Ok(eigs[..j].to_vec())
}

/// Every invariant component of `p` on the box `b`.
pub fn bundle(p: &TrigPotential, b: &BoxProblem, params: &BundleParams) -> Result<InvariantBundle> {
    params.validate()?;
    if p.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: p.dim(),
        });
    }
    p.require_coordinatewise_even()?;
    let q = p.subtract_mean();
    let j = params.j;

    let directional = directional_decomposition(&q)?
        .par_iter()
        .map(|c| {
            let s = directional_spectrum(c, params.size_1d)?;
            Ok(DirectionalInvariant {
                direction: c.direction.clone(),
                dual_norm: c.dual_norm,
                eigenvalues: leading(&s.eigenvalues, s.trusted, j)?,
                guaranteed: c.nonzero_components() > 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let coordinate = (0..b.dim())
        .into_par_iter()
        .map(|i| {
            let (l, r) = b.bc()[i];
            let s = solve_interval(&p.coordinate_profile(i), (l, r), params.size_1d, false)?;
            Ok(CoordinateInvariant {
                axis: i,
                bc: format!("{}{}", l.letter(), r.letter()),
                eigenvalues: leading(&s.eigenvalues, s.trusted, j)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let heat_coeffs = match &params.heat {
        None => None,
        Some(h) => {
            let spec = solve_nd(p, b, &h.sizes, &Mode::IntervalFaces, false)?;
            let n = b.dim() as i32;
            let exps = Exponent::range(Exponent(-n), Exponent(1));
            let guards = [Exponent(2), Exponent(3)];
            Some(fit_spectrum(&spec, &exps, &guards, None, &h.window)?.0)
        }
    };

    Ok(InvariantBundle {
        problem: b.clone(),
        potential_hash: p.content_hash(),
        params: params.clone(),
        mean_integral: b.volume() * p.mean(),
        directional,
        coordinate,
        q_d_sums: q_d_sums(p, params.radii)?,
        heat_coeffs,
    })
}

/// Periodic spectrum on `[0,1]` of `-|delta|^2 d^2/ds^2` with no potential.
fn free_directional(dual_norm: f64, j: usize) -> Vec<f64> {
    let w = 2.0 * PI * dual_norm;
    (0..j)
        .map(|i| i.div_ceil(2) as f64 * w)
        .map(|v| v * v)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentMatch {
    pub component: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub components: Vec<ComponentMatch>,
    pub consistent: bool,
    /// Largest `deviation / tolerance` over all components.
    pub separation: f64,
    pub verdict: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTolerances {
    pub spectrum: f64,
    pub integral: f64,
    pub heat: f64,
}

impl Default for CompareTolerances {
    fn default() -> Self {
        Self {
            spectrum: SPECTRUM_TOLERANCE,
            integral: INTEGRAL_TOLERANCE,
            heat: HEAT_TOLERANCE,
        }
    }
}

fn spectrum_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn compare(
    a: &InvariantBundle,
    b: &InvariantBundle,
    tol: &CompareTolerances,
) -> Result<ComparisonReport> {
    if a.problem != b.problem {
        return Err(Error::ParameterMismatch(
            "bundles use different boxes".into(),
        ));
    }
    if a.params != b.params {
        return Err(Error::ParameterMismatch(
            "bundles use different parameters".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut push = |component: String, dev: f64, tolerance: f64| {
        rows.push(ComponentMatch {
            component,
            max_deviation: dev,
            tolerance,
            matched: dev <= tolerance,
        });
    };

    push(
        "mean_integral".into(),
        (a.mean_integral - b.mean_integral).abs(),
        tol.integral,
    );

    let j = a.params.j;
    let mut dirs: BTreeMap<
        Vec<i64>,
        (Option<&DirectionalInvariant>, Option<&DirectionalInvariant>),
    > = BTreeMap::new();
    for d in &a.directional {
        dirs.entry(d.direction.clone()).or_default().0 = Some(d);
    }
    for d in &b.directional {
        dirs.entry(d.direction.clone()).or_default().1 = Some(d);
    }
    for (dir, pair) in dirs {
        let spectra = match pair {
            (Some(x), Some(y)) => (x.eigenvalues.clone(), y.eigenvalues.clone()),
            (Some(x), None) => (x.eigenvalues.clone(), free_directional(x.dual_norm, j)),
            (None, Some(y)) => (free_directional(y.dual_norm, j), y.eigenvalues.clone()),
            (None, None) => unreachable!("entry came from one of the bundles"),
        };
        push(
            format!("directional{dir:?}"),
            spectrum_deviation(&spectra.0, &spectra.1),
            tol.spectrum,
        );
    }

    for (x, y) in a.coordinate.iter().zip(&b.coordinate) {
        push(
            format!("coordinate[{}]", x.axis),
            spectrum_deviation(&x.eigenvalues, &y.eigenvalues),
            tol.spectrum,
        );
    }

    for (x, y) in a.q_d_sums.iter().zip(&b.q_d_sums) {
        push(
            format!("q_d_sum[r2={}]", x.radius_sq),
            (x.value - y.value).abs(),
            tol.integral,
        );
    }

    if let (Some(fa), Some(fb)) = (&a.heat_coeffs, &b.heat_coeffs) {
        for e in fa.compared() {
            let (x, y) = (fa.get(e).unwrap_or(0.0), fb.get(e).unwrap_or(0.0));
            push(
                format!("heat_coeff[{e}]"),
                (x - y).abs() / x.abs().max(1.0),
                tol.heat,
            );
        }
    }

    let consistent = rows.iter().all(|r| r.matched);
    let worst = rows
        .iter()
        .max_by(|x, y| (x.max_deviation / x.tolerance).total_cmp(&(y.max_deviation / y.tolerance)));
    let separation = worst.map_or(0.0, |w| w.max_deviation / w.tolerance);
    let verdict = if consistent {
        "consistent with isospectrality".to_string()
    } else {
        format!(
            "separated by invariant {}",
            worst.map_or("", |w| w.component.as_str())
        )
    };
    Ok(ComparisonReport {
        components: rows,
        consistent,
        separation,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub consistent: bool,
    pub tolerance: f64,
    pub radii_checked: usize,
    pub largest: f64,
    /// Smallest radius with a sum above tolerance.
    pub separating_radius_sq: Option<f64>,
    pub verdict: String,
}

pub fn separability_diagnosis(bundle: &InvariantBundle, tol: f64) -> SeparabilityReport {
    let first = bundle.q_d_sums.iter().find(|s| s.value > tol);
    let largest = bundle.q_d_sums.iter().map(|s| s.value).fold(0.0, f64::max);
    SeparabilityReport {
        consistent: first.is_none(),
        tolerance: tol,
        radii_checked: bundle.q_d_sums.len(),
        largest,
        separating_radius_sq: first.map(|s| s.radius_sq),
        verdict: match first {
            None => "consistent with separable".into(),
            Some(s) => format!("separated at r^2 = {}", s.radius_sq),
        },
    }
}
