//! Finite cosine series on the box, the user-facing potential format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::potential::{canonical, TrigPotential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineTerm {
    pub m: Vec<i64>,
    pub c: f64,
}

/// `q(x) = sum_m c_m prod_i cos(pi m_i x_i / a_i)` on the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineSpec {
    pub sides: Vec<f64>,
    #[serde(default)]
    pub terms: Vec<CosineTerm>,
}

impl CosineSpec {
    pub fn new(sides: Vec<f64>, terms: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Self {
        let terms = terms
            .into_iter()
            .map(|(m, c)| CosineTerm { m, c })
            .collect();
        Self { sides, terms }
    }

    pub fn zero(sides: Vec<f64>) -> Self {
        Self {
            sides,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidInput(
                "cosine series needs at least one side".into(),
            ));
        }
        if let Some(a) = self.sides.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "side length {a} must be positive and finite"
            )));
        }
        for t in &self.terms {
            if t.m.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.m.len(),
                });
            }
            if t.m.iter().any(|&v| v < 0) {
                return Err(Error::InvalidInput(format!(
                    "cosine index {:?} has a negative component",
                    t.m
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::NonFinite(t.m.clone()));
            }
        }
        Ok(())
    }

    /// Direct evaluation of the cosine sum.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                t.c * t
                    .m
                    .iter()
                    .zip(x)
                    .zip(&self.sides)
                    .map(|((&m, x), a)| (std::f64::consts::PI * m as f64 * x / a).cos())
                    .product::<f64>()
            })
            .sum())
    }

    /// Inverse of [`build_potential`] for coordinatewise-even potentials.
    pub fn from_potential(p: &TrigPotential) -> Result<Self> {
        p.require_coordinatewise_even()?;
        let terms = p
            .terms()
            .into_iter()
            .filter(|(m, _)| m.iter().all(|&v| v >= 0))
            .map(|(m, a)| {
                let nnz = m.iter().filter(|&&v| v != 0).count() as i32;
                CosineTerm {
                    c: a * 2f64.powi(nnz),
                    m,
                }
            })
            .collect();
        Ok(Self {
            sides: p.sides().to_vec(),
            terms,
        })
    }
}

/// Even `2 a_i`-periodic extension of a cosine series.
///
/// Each product of cosines expands into `2^p` exponentials of weight
/// `c_m 2^{-p}`, `p` the number of nonzero indices.
pub fn build_potential(spec: &CosineSpec) -> Result<TrigPotential> {
    spec.validate()?;
    let mut orbits = Vec::new();
    for t in &spec.terms {
        let nz: Vec<usize> = (0..t.m.len()).filter(|&i| t.m[i] != 0).collect();
        let w = t.c * 0.5f64.powi(nz.len() as i32);
        for mask in 0u32..(1 << nz.len()) {
            let mut m = t.m.clone();
            for (bit, &i) in nz.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    m[i] = -m[i];
                }
            }
            if canonical(&m) == m {
                orbits.push((m, w));
            }
        }
    }
    TrigPotential::from_orbits(spec.sides.clone(), orbits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_cosine() {
        let p = build_potential(&CosineSpec::new(vec![1.0], [(vec![1], 1.0)])).unwrap();
        assert_eq!(p.coefficient(&[1]), 0.5);
        assert_eq!(p.coefficient(&[-1]), 0.5);
        assert_relative_eq!(p.eval(&[0.0]), 1.0);
        assert!(p.eval(&[2.5]).abs() < 1e-15);
        assert_relative_eq!(p.eval(&[2.5]), p.eval(&[0.5]), epsilon = 1e-15);
    }

    #[test]
    fn product_expands_into_four_exponentials() {
        let p = build_potential(&CosineSpec::new(vec![1.0, 1.0], [(vec![1, 1], 1.0)])).unwrap();
        for m in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert_eq!(p.coefficient(&m), 0.25);
        }
        assert_eq!(p.num_orbits(), 2);
    }

    #[test]
    fn constant_term() {
        let p = build_potential(&CosineSpec::new(vec![1.0, 2.0], [(vec![0, 0], 3.0)])).unwrap();
        assert_eq!(p.mean(), 3.0);
        assert_eq!(p.num_orbits(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_potential(&CosineSpec::new(vec![1.0, 1.0], [(vec![1], 1.0)])).is_err());
        assert!(build_potential(&CosineSpec::new(vec![1.0], [(vec![1], f64::INFINITY)])).is_err());
        assert!(build_potential(&CosineSpec::new(vec![1.0], [(vec![-1], 1.0)])).is_err());
    }

    #[test]
    fn json_shape() {
        let s: CosineSpec =
            serde_json::from_str(r#"{"sides":[1.0,2.0],"terms":[{"m":[1,1],"c":0.5}]}"#).unwrap();
        assert_eq!(s.terms[0].m, vec![1, 1]);
        let back: CosineSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn round_trip_through_potential() {
        let s = CosineSpec::new(
            vec![1.0, 1.5],
            [(vec![1, 2], 0.7), (vec![3, 0], -0.2), (vec![0, 0], 1.0)],
        );
        let p = build_potential(&s).unwrap();
        let back = build_potential(&CosineSpec::from_potential(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
