use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Points whose tail bound exceeds this fraction of the value are flagged.
pub const RELIABILITY: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTracePoint {
    pub t: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub reliable: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceSeries {
    pub points: Vec<HeatTracePoint>,
}

impl HeatTraceSeries {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn all_reliable(&self) -> bool {
        self.points.iter().all(|p| p.reliable)
    }
}

pub fn tail_bound(spec: &Spectrum, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(spec.tail_bound(t))
}

/// `sum_j e^{-mu_j t}` over the trusted eigenvalues at each time.
pub fn trace_series(spec: &Spectrum, t_grid: &[f64]) -> Result<HeatTraceSeries> {
    if let Some(&t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::NonPositiveTime(t));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing".into(),
        ));
    }
    let points = t_grid
        .iter()
        .map(|&t| {
            let value = spec.partial_trace(t);
            let tail = spec.tail_bound(t);
            HeatTracePoint {
                t,
                value,
                tail_bound: tail,
                reliable: tail <= RELIABILITY * value,
            }
        })
        .collect();
    Ok(HeatTraceSeries { points })
}

/// `n` log-spaced times from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Smallest `t` (to 0.1% relative) with `tail_bound(t) <= rel * value(t)`.
pub fn reliable_t_min(spec: &Spectrum, rel: f64) -> f64 {
    let ok = |t: f64| spec.tail_bound(t) <= rel * spec.partial_trace(t);
    let mut hi = 1e-3;
    while !ok(hi) {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while ok(lo) && lo > 1e-12 {
        lo /= 2.0;
    }
    while hi / lo > 1.001 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis1D, BasisKind, ProductBasis};
    use crate::model::TrigPotential;
    use crate::spectrum::solve;

    fn free_dd(k: usize) -> Spectrum {
        let b = ProductBasis::single(Basis1D::new(BasisKind::DD, 1.0, k).unwrap());
        solve(&TrigPotential::zero(vec![1.0]), &b, false).unwrap()
    }

    #[test]
    fn free_interval_value() {
        let s = free_dd(512);
        let series = trace_series(&s, &[0.01]).unwrap();
        let p = series.points[0];
        let direct: f64 = (1..400)
            .map(|k| (-((k * k) as f64) * std::f64::consts::PI.powi(2) * 0.01).exp())
            .sum();
        assert!((p.value - direct).abs() < 1e-12);
        assert!((p.value - 2.3209).abs() < 1e-4);
        assert!(p.reliable);
        assert!(p.value + p.tail_bound >= direct);
    }

    #[test]
    fn grid_validation() {
        let s = free_dd(16);
        assert!(trace_series(&s, &[0.1, 0.05]).is_err());
        assert!(trace_series(&s, &[0.0, 0.05]).is_err());
        assert!(trace_series(&s, &[]).unwrap().points.is_empty());
    }

    #[test]
    fn small_times_are_flagged() {
        let s = free_dd(16);
        let series = trace_series(&s, &[1e-4, 1.0]).unwrap();
        assert!(!series.points[0].reliable);
        assert!(series.points[1].reliable);
    }

    #[test]
    fn t_min_is_tight() {
        let s = free_dd(128);
        let t = reliable_t_min(&s, 1e-9);
        assert!(s.tail_bound(t) <= 1e-9 * s.partial_trace(t));
        assert!(s.tail_bound(t * 0.99) > 1e-9 * s.partial_trace(t * 0.99));
        let g = log_grid(t, 8.0 * t, 5);
        assert!((g[4] - 8.0 * t).abs() < 1e-15 && g.windows(2).all(|w| w[1] > w[0]));
    }
}
