use std::collections::BTreeMap;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::{log_grid, reliable_t_min, trace_series, Expansion, Exponent, HeatTraceSeries};
use crate::spectrum::Spectrum;

/// Fits with a larger scaled condition number are refused.
pub const MAX_CONDITION: f64 = 1e10;

/// Log-spaced sampling window `[t_min, span * t_min]`, where `t_min` is the
/// smallest time with `tail_bound <= eps * value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitWindow {
    pub eps: f64,
    pub span: f64,
    pub points: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            eps: 1e-9,
            span: 8.0,
            points: 40,
        }
    }
}

impl FitWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidInput(format!(
                "window eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if !(self.span > 1.0 && self.span.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "window span must exceed 1, got {}",
                self.span
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidInput("window needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn grid(&self, spec: &Spectrum) -> Result<Vec<f64>> {
        self.validate()?;
        let t_min = reliable_t_min(spec, self.eps);
        Ok(log_grid(t_min, self.span * t_min, self.points))
    }
}

/// Sample the trace of `spec` on `window` and fit it.
pub fn fit_spectrum(
    spec: &Spectrum,
    exponents: &[Exponent],
    guards: &[Exponent],
    subtract_known: Option<&Expansion>,
    window: &FitWindow,
) -> Result<(AsymptoticFit, HeatTraceSeries)> {
    let series = trace_series(spec, &window.grid(spec)?)?;
    let fit = fit_expansion(&series, exponents, guards, subtract_known)?;
    Ok((fit, series))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Every fitted exponent, compared ones first in increasing order, then guards.
    pub exponents: Vec<Exponent>,
    /// Exponents fitted only to absorb the remainder.
    pub guards: Vec<Exponent>,
    pub fitted: BTreeMap<Exponent, f64>,
    pub std_errors: BTreeMap<Exponent, f64>,
    /// Known terms subtracted before fitting.
    pub subtracted: Expansion,
    pub predicted: Option<Expansion>,
    /// Weighted residual norm.
    pub residual: f64,
    pub condition: f64,
    pub t_range: (f64, f64),
    pub points: usize,
}

impl AsymptoticFit {
    pub fn compared(&self) -> Vec<Exponent> {
        self.exponents
            .iter()
            .copied()
            .filter(|e| !self.guards.contains(e))
            .collect()
    }

    pub fn get(&self, e: Exponent) -> Option<f64> {
        self.fitted.get(&e).copied()
    }
}

/// Weighted least squares of `values - known(t)` on `{t^e}` with weights
/// `1/value` and column scaling; solved through the SVD.
pub fn fit_samples(
    ts: &[f64],
    values: &[f64],
    exponents: &[Exponent],
    guards: &[Exponent],
    known: Option<&Expansion>,
) -> Result<AsymptoticFit> {
    let mut all: Vec<Exponent> = exponents.to_vec();
    all.extend(guards.iter().copied().filter(|g| !exponents.contains(g)));
    if all.is_empty() {
        return Err(Error::InvalidInput("no exponents to fit".into()));
    }
    let mut sorted = exponents.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != exponents.len() {
        return Err(Error::InvalidInput("fit exponents must be distinct".into()));
    }
    if let Some(k) = known {
        if let Some(e) = all.iter().find(|e| k.get(**e).is_some()) {
            return Err(Error::InvalidInput(format!(
                "exponent {e} is both fitted and subtracted"
            )));
        }
    }
    let (m, p) = (ts.len(), all.len());
    if ts.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: ts.len(),
            got: values.len(),
        });
    }
    if m < 2 * p {
        return Err(Error::TooFewPoints {
            need: 2 * p,
            got: m,
        });
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "fit needs positive finite values, got {v}"
        )));
    }

    let mut a = Mat::<f64>::from_fn(m, p, |i, j| ts[i].powf(all[j].value()) / values[i]);
    let rhs: Vec<f64> = (0..m)
        .map(|i| (values[i] - known.map_or(0.0, |k| k.evaluate(ts[i]))) / values[i])
        .collect();
    let scale: Vec<f64> = (0..p)
        .map(|j| (0..m).map(|i| a[(i, j)].powi(2)).sum::<f64>().sqrt())
        .collect();
    for j in 0..p {
        for i in 0..m {
            a[(i, j)] /= scale[j];
        }
    }
    let svd = a.thin_svd().map_err(|_| Error::Eigen)?;
    let s: Vec<f64> = (0..p).map(|j| svd.S().column_vector()[j]).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let (u, v) = (svd.U(), svd.V());
    let mut x = vec![0.0; p];
    for k in 0..p {
        let proj: f64 = (0..m).map(|i| u[(i, k)] * rhs[i]).sum::<f64>() / s[k];
        for j in 0..p {
            x[j] += v[(j, k)] * proj;
        }
    }
    let resid: Vec<f64> = (0..m)
        .map(|i| rhs[i] - (0..p).map(|j| a[(i, j)] * x[j]).sum::<f64>())
        .collect();
    let residual = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
    let dof = (m - p).max(1) as f64;
    let sigma2 = residual * residual / dof;

    let mut fitted = BTreeMap::new();
    let mut std_errors = BTreeMap::new();
    for j in 0..p {
        let var: f64 = (0..p).map(|k| (v[(j, k)] / s[k]).powi(2)).sum::<f64>() * sigma2;
        fitted.insert(all[j], x[j] / scale[j]);
        std_errors.insert(all[j], var.sqrt() / scale[j]);
    }
    Ok(AsymptoticFit {
        exponents: all,
        guards: guards
            .iter()
            .copied()
            .filter(|g| !exponents.contains(g))
            .collect(),
        fitted,
        std_errors,
        subtracted: known.cloned().unwrap_or_default(),
        predicted: None,
        residual,
        condition,
        t_range: (ts[0], ts[m - 1]),
        points: m,
    })
}

/// Fit a heat-trace series; every point must be reliable.
pub fn fit_expansion(
    series: &HeatTraceSeries,
    exponents: &[Exponent],
    guards: &[Exponent],
    subtract_known: Option<&Expansion>,
) -> Result<AsymptoticFit> {
    if let Some(p) = series.points.iter().find(|p| !p.reliable) {
        return Err(Error::TailTooLarge {
            t: p.t,
            tail: p.tail_bound,
        });
    }
    fit_samples(
        &series.times(),
        &series.values(),
        exponents,
        guards,
        subtract_known,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub exponent: Exponent,
    pub fitted: f64,
    pub predicted: f64,
    pub std_error: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    /// Whether `tolerance` is relative or absolute.
    pub relative: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitComparison {
    pub rows: Vec<FitRow>,
    pub pass: bool,
}

/// Per-exponent deviation of a fit from predicted coefficients. Tolerances
/// map an exponent to `(tolerance, relative)`; unlisted exponents use
/// `default`.
pub fn compare_fit(
    fit: &AsymptoticFit,
    predicted: &Expansion,
    tolerances: &BTreeMap<Exponent, (f64, bool)>,
    default: (f64, bool),
) -> Result<FitComparison> {
    let compared = fit.compared();
    let missing: Vec<String> = compared
        .iter()
        .filter(|e| predicted.get(**e).is_none())
        .map(|e| e.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::ExponentMismatch(format!(
            "no prediction for t^{}",
            missing.join(", t^")
        )));
    }
    let rows: Vec<FitRow> = compared
        .iter()
        .map(|&e| {
            let f = fit.fitted[&e];
            let p = predicted.get(e).unwrap_or(0.0);
            let abs = (f - p).abs();
            let rel = if p != 0.0 {
                abs / p.abs()
            } else if abs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let (tol, relative) = tolerances.get(&e).copied().unwrap_or(default);
            let pass = if relative { rel <= tol } else { abs <= tol };
            FitRow {
                exponent: e,
                fitted: f,
                predicted: p,
                std_error: fit.std_errors[&e],
                abs_deviation: abs,
                rel_deviation: rel,
                tolerance: tol,
                relative,
                pass,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(FitComparison { rows, pass })
}
