//! Directional decomposition, reduced potentials and the reflection generator.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::geometry::gcd;
use crate::model::potential::TrigPotential;

/// One primitive direction of the dual lattice and its 1D profile
/// `Q_delta(s) = sum_k b_k cos(2 pi k s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalComponent {
    pub direction: Vec<i64>,
    /// `b_k` for `k = 0, 1, ...`; `b_0` is always zero.
    pub series: Vec<f64>,
    /// `|delta|` with `delta_i = m_i / (2 a_i)`.
    pub dual_norm: f64,
    /// `delta` itself.
    pub dual: Vec<f64>,
}

impl DirectionalComponent {
    pub fn evaluate(&self, s: f64) -> f64 {
        self.series
            .iter()
            .enumerate()
            .map(|(k, b)| b * (2.0 * PI * k as f64 * s).cos())
            .sum()
    }

    /// `delta . x`.
    pub fn phase(&self, x: &[f64]) -> f64 {
        self.dual.iter().zip(x).map(|(d, x)| d * x).sum()
    }

    /// The profile as a 1D potential of period 1 (side 1/2).
    pub fn profile(&self) -> TrigPotential {
        let orbits = self
            .series
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, b)| (vec![k as i64], b / 2.0));
        TrigPotential::from_orbits(vec![0.5], orbits).expect("profile coefficients are finite")
    }

    /// Index of the only nonzero component, if there is exactly one.
    pub fn coordinate_axis(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..self.direction.len())
            .filter(|&i| self.direction[i] != 0)
            .collect();
        (nz.len() == 1).then(|| nz[0])
    }

    pub fn nonzero_components(&self) -> usize {
        self.direction.iter().filter(|&&v| v != 0).count()
    }
}

/// Split a zero-mean potential into directional profiles, one per primitive
/// direction in its support, ordered by direction.
pub fn directional_decomposition(p: &TrigPotential) -> Result<Vec<DirectionalComponent>> {
    let mean = p.mean();
    if mean != 0.0 {
        return Err(Error::NonzeroMean(mean));
    }
    let mut acc: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for (m, a) in p.orbits() {
        let g = m.iter().fold(0, |g, &v| gcd(g, v));
        let dir: Vec<i64> = m.iter().map(|v| v / g).collect();
        let series = acc.entry(dir).or_default();
        let k = g as usize;
        if series.len() <= k {
            series.resize(k + 1, 0.0);
        }
        series[k] += 2.0 * a;
    }
    Ok(acc
        .into_iter()
        .map(|(direction, series)| {
            let dual: Vec<f64> = direction
                .iter()
                .zip(p.sides())
                .map(|(&m, a)| m as f64 / (2.0 * a))
                .collect();
            let dual_norm = dual.iter().map(|d| d * d).sum::<f64>().sqrt();
            DirectionalComponent {
                direction,
                series,
                dual_norm,
                dual,
            }
        })
        .collect())
}

/// Average of `Q` along the lattice vector `d = (2 k_1 a_1, ..., 2 k_n a_n)`:
/// keeps exactly the modes with `m . k = 0`.
pub fn reduce_potential(p: &TrigPotential, k: &[i64]) -> Result<TrigPotential> {
    if k.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: k.len(),
        });
    }
    if k.iter().all(|&v| v == 0) {
        return Err(Error::InvalidInput(
            "reduction direction must be nonzero".into(),
        ));
    }
    let kept = p
        .orbits()
        .filter(|(m, _)| m.iter().zip(k).map(|(m, k)| m * k).sum::<i64>() == 0)
        .map(|(m, a)| (m.to_vec(), a));
    TrigPotential::from_orbits(p.sides().to_vec(), kept)
}

/// Extension of `q(a_1 - x_1, ..., a_n - x_n)`.
pub fn reflect_potential(p: &TrigPotential) -> Result<TrigPotential> {
    p.require_coordinatewise_even()?;
    let flipped = p.orbits().map(|(m, a)| {
        let parity: i64 = m.iter().sum();
        (m.to_vec(), if parity % 2 == 0 { a } else { -a })
    });
    TrigPotential::from_orbits(p.sides().to_vec(), flipped)
}
