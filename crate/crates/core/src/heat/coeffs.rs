//! Closed-form small-time heat coefficients on boxes.
//!
//! Each coefficient is a sum over strata of the box (interior, faces,
//! edges, vertices). A stratum bounded by faces with signs `eps` (Dirichlet
//! `-1`, Neumann `+1`) carries `(-1)^k prod eps` times its all-Dirichlet
//! value, `k` the codimension.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::Exponent;
use crate::model::{BoxProblem, TrigPotential};

/// Coefficients of `sum_e c_e t^e`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Expansion(pub BTreeMap<Exponent, f64>);

impl Expansion {
    pub fn get(&self, e: Exponent) -> Option<f64> {
        self.0.get(&e).copied()
    }

    pub fn add(&mut self, e: Exponent, v: f64) {
        *self.0.entry(e).or_insert(0.0) += v;
    }

    pub fn exponents(&self) -> Vec<Exponent> {
        self.0.keys().copied().collect()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.0.iter().map(|(e, c)| c * t.powf(e.value())).sum()
    }

    /// Keep exponents `<= max`.
    pub fn truncated(&self, max: Exponent) -> Self {
        Expansion(
            self.0
                .iter()
                .filter(|(e, _)| **e <= max)
                .map(|(e, c)| (*e, *c))
                .collect(),
        )
    }
}

/// Three-dimensional constants of the strata expansion. `GAMMA_42` is
/// the edge coefficient of `int_e q`.
pub const GAMMA_0: f64 = -1.0 / (2.0 * PI);
pub const GAMMA_1: f64 = -1.0 / (8.0 * PI);
pub const GAMMA_21: f64 = -1.0 / (4.0 * PI);
pub const GAMMA_22: f64 = 1.0 / 16.0;
pub const GAMMA_31: f64 = 1.0 / (16.0 * PI);
pub const GAMMA_32: f64 = -1.0 / 64.0;
pub const GAMMA_41: f64 = 1.0 / (32.0 * PI);
pub const GAMMA_42: f64 = -1.0 / 64.0;
pub const GAMMA_51: f64 = -1.0 / (64.0 * PI);
pub const GAMMA_52: f64 = 1.0 / (128.0 * PI);
pub const GAMMA_53: f64 = 1.0 / 128.0;

/// One stratum's contribution to one coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub exponent: Exponent,
    /// Adjacent faces as `(dimension, far side)`; empty for the interior.
    pub faces: Vec<(usize, bool)>,
    pub label: String,
    pub value: f64,
}

struct Stratum {
    faces: Vec<(usize, bool)>,
    /// `(-1)^k prod eps`.
    mu: f64,
    /// Restriction of the potential to the stratum.
    q: TrigPotential,
    /// Restriction of the normal second derivative (faces only).
    qnn: Option<TrigPotential>,
    measure: f64,
}

fn strata(b: &BoxProblem, p: &TrigPotential, codim: usize) -> Vec<Stratum> {
    let n = b.dim();
    let mut out = Vec::new();
    let mut dims: Vec<usize> = (0..codim).collect();
    loop {
        for mask in 0u32..(1 << codim) {
            let faces: Vec<(usize, bool)> = dims
                .iter()
                .enumerate()
                .map(|(k, &i)| (i, mask & (1 << k) != 0))
                .collect();
            let mut mu = if codim % 2 == 0 { 1.0 } else { -1.0 };
            let mut q = p.clone();
            let mut qnn = (codim == 1).then(|| p.second_derivative(dims[0]));
            // Restrict highest dimensions first so lower indices stay valid.
            for &(i, far) in faces.iter().rev() {
                let (l, r) = b.bc()[i];
                mu *= if far { r.sign() } else { l.sign() };
                q = q.restrict(i, far);
                qnn = qnn.map(|d| d.restrict(i, far));
            }
            let measure: f64 = (0..n)
                .filter(|i| !dims.contains(i))
                .map(|i| b.sides()[i])
                .product();
            out.push(Stratum {
                faces,
                mu,
                q,
                qnn,
                measure,
            });
        }
        // Next combination of `codim` dimensions out of `n`.
        let mut k = codim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if dims[k] < n - codim + k {
                dims[k] += 1;
                for j in k + 1..codim {
                    dims[j] = dims[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `int q` over a stratum (coordinatewise-even restriction).
fn integral(s: &Stratum) -> f64 {
    s.measure * s.q.mean()
}

fn integral_sq(s: &Stratum) -> f64 {
    s.measure * s.q.mean_square()
}

fn corner_value(s: &Stratum) -> f64 {
    s.q.eval(&[])
}

/// Stratum-by-stratum contributions to the small-time heat coefficients.
pub fn predicted_contributions(b: &BoxProblem, p: &TrigPotential) -> Result<Vec<Contribution>> {
    let n = b.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.dim(),
        });
    }
    for (a, s) in b.sides().iter().zip(p.sides()) {
        if (a - s).abs() > 1e-12 * a {
            return Err(Error::InvalidInput(format!(
                "potential side {s} differs from box side {a}"
            )));
        }
    }
    p.require_coordinatewise_even()?;

    let vol = b.volume();
    let q_int = vol * p.mean();
    let q_sq = vol * p.mean_square();
    let sqpi = PI.sqrt();
    let mut out = Vec::new();
    let mut push = |twice: i32, faces: &[(usize, bool)], label: &str, value: f64| {
        out.push(Contribution {
            exponent: Exponent(twice),
            faces: faces.to_vec(),
            label: label.into(),
            value,
        });
    };

    match n {
        1 => {
            push(-1, &[], "|R|", vol / (2.0 * sqpi));
            push(1, &[], "int q", -q_int / (2.0 * sqpi));
            push(3, &[], "int q^2", q_sq / (4.0 * sqpi));
            for s in strata(b, p, 1) {
                let qc = corner_value(&s);
                let qnn = s.qnn.as_ref().map_or(0.0, |d| d.eval(&[]));
                push(0, &s.faces, "endpoint", -s.mu / 4.0);
                push(2, &s.faces, "q(endpoint)", s.mu * qc / 4.0);
                push(
                    4,
                    &s.faces,
                    "q^2, q'' at endpoint",
                    -s.mu * (qc * qc / 8.0 - qnn / 16.0),
                );
            }
        }
        2 => {
            push(-2, &[], "|R|", vol / (4.0 * PI));
            push(0, &[], "int q", -q_int / (4.0 * PI));
            push(2, &[], "int q^2", q_sq / (8.0 * PI));
            for s in strata(b, p, 1) {
                let qnn = s.qnn.as_ref().expect("faces carry normal derivatives");
                push(-1, &s.faces, "|face|", -s.mu * s.measure / (8.0 * sqpi));
                push(
                    1,
                    &s.faces,
                    "int_face q",
                    s.mu * integral(&s) / (8.0 * sqpi),
                );
                let val = -integral_sq(&s) / (16.0 * sqpi) + s.measure * qnn.mean() / (32.0 * sqpi);
                push(3, &s.faces, "int_face q^2, d_nn q", s.mu * val);
            }
            for s in strata(b, p, 2) {
                push(0, &s.faces, "corner", s.mu / 16.0);
                push(2, &s.faces, "q(corner)", -s.mu * corner_value(&s) / 16.0);
            }
        }
        3 => {
            push(-3, &[], "|R|", GAMMA_0 * (-1.0 / (4.0 * sqpi)) * vol);
            push(-1, &[], "int q", GAMMA_21 * q_int / (2.0 * sqpi));
            push(1, &[], "int q^2", 2.0 / sqpi * GAMMA_41 * q_sq);
            for s in strata(b, p, 1) {
                let qnn = s.qnn.as_ref().expect("faces carry normal derivatives");
                push(-2, &s.faces, "|face|", s.mu * GAMMA_1 / 2.0 * s.measure);
                push(0, &s.faces, "int_face q", s.mu * GAMMA_31 * integral(&s));
                let val = GAMMA_51 * integral_sq(&s) + GAMMA_52 * s.measure * qnn.mean();
                push(2, &s.faces, "int_face q^2, d_nn q", s.mu * 2.0 * val);
            }
            for s in strata(b, p, 2) {
                push(
                    -1,
                    &s.faces,
                    "|edge|",
                    s.mu * GAMMA_22 * s.measure / (2.0 * sqpi),
                );
                push(
                    1,
                    &s.faces,
                    "int_edge q",
                    s.mu * 2.0 / sqpi * GAMMA_42 * integral(&s),
                );
            }
            for s in strata(b, p, 3) {
                push(0, &s.faces, "vertex", s.mu * GAMMA_32);
                push(
                    2,
                    &s.faces,
                    "q(vertex)",
                    s.mu * 2.0 * GAMMA_53 * corner_value(&s),
                );
            }
        }
        _ => return Err(Error::UnsupportedDimension(n)),
    }
    Ok(out)
}

/// Heat coefficients `c_e` of `sum e^{-mu_j t} ~ sum_e c_e t^e` for the
/// box with its face conditions: orders `t^{-1/2}..t^2` in 1D,
/// `t^{-1}..t^{3/2}` in 2D and `t^{-3/2}..t^1` in 3D.
pub fn predicted_coefficients(b: &BoxProblem, p: &TrigPotential) -> Result<Expansion> {
    let mut e = Expansion::default();
    for c in predicted_contributions(b, p)? {
        e.add(c.exponent, c.value);
    }
    Ok(e)
}

/// Product of two expansions, truncated at `max`.
pub fn multiply_expansions(a: &Expansion, b: &Expansion, max: Exponent) -> Expansion {
    let mut out = Expansion::default();
    for (ea, ca) in &a.0 {
        for (eb, cb) in &b.0 {
            let e = Exponent(ea.0 + eb.0);
            if e <= max {
                out.add(e, ca * cb);
            }
        }
    }
    out
}

/// `e^{-gamma t}` times an expansion, truncated at `max`.
pub fn gaussian_shift(a: &Expansion, gamma: f64, max: Exponent) -> Expansion {
    let lowest = a.0.keys().next().map_or(0, |e| e.0);
    let mut series = Expansion::default();
    let mut term = 1.0;
    let mut k = 0;
    while lowest + 2 * k <= max.0 {
        series.add(Exponent::int(k), term);
        k += 1;
        term *= -gamma / k as f64;
    }
    multiply_expansions(a, &series, max)
}
