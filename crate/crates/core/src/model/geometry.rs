//! Boxes, face conditions and the rectangular period lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition imposed on one face of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bc {
    #[serde(rename = "D", alias = "Dirichlet", alias = "dirichlet")]
    Dirichlet,
    #[serde(rename = "N", alias = "Neumann", alias = "neumann")]
    Neumann,
}

impl Bc {
    /// Image sign: reflecting across a Dirichlet face flips the sign of the
    /// kernel, across a Neumann face it does not.
    pub fn sign(self) -> f64 {
        match self {
            Bc::Dirichlet => -1.0,
            Bc::Neumann => 1.0,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Bc::Dirichlet => 'D',
            Bc::Neumann => 'N',
        }
    }
}

/// The box `R = [0,a_1] x ... x [0,a_n]` with a condition on each face.
///
/// `bc[i] = (alpha_i, beta_i)` are the conditions on `x_i = 0` and
/// `x_i = a_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxProblemRepr", into = "BoxProblemRepr")]
pub struct BoxProblem {
    sides: Vec<f64>,
    bc: Vec<(Bc, Bc)>,
}

#[derive(Serialize, Deserialize)]
struct BoxProblemRepr {
    sides: Vec<f64>,
    #[serde(default)]
    bc: Option<Vec<(Bc, Bc)>>,
}

impl TryFrom<BoxProblemRepr> for BoxProblem {
    type Error = Error;
    fn try_from(r: BoxProblemRepr) -> Result<Self> {
        let n = r.sides.len();
        let bc =
            r.bc.unwrap_or_else(|| vec![(Bc::Dirichlet, Bc::Dirichlet); n]);
        BoxProblem::new(r.sides, bc)
    }
}

impl From<BoxProblem> for BoxProblemRepr {
    fn from(b: BoxProblem) -> Self {
        BoxProblemRepr {
            sides: b.sides,
            bc: Some(b.bc),
        }
    }
}

impl BoxProblem {
    pub fn new(sides: Vec<f64>, bc: Vec<(Bc, Bc)>) -> Result<Self> {
        let n = sides.len();
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if bc.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bc.len(),
            });
        }
        if let Some(a) = sides.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "side length {a} must be positive and finite"
            )));
        }
        Ok(Self { sides, bc })
    }

    pub fn dirichlet(sides: Vec<f64>) -> Result<Self> {
        let n = sides.len();
        Self::new(sides, vec![(Bc::Dirichlet, Bc::Dirichlet); n])
    }

    pub fn uniform(sides: Vec<f64>, bc: Bc) -> Result<Self> {
        let n = sides.len();
        Self::new(sides, vec![(bc, bc); n])
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn bc(&self) -> &[(Bc, Bc)] {
        &self.bc
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Volume of the doubled cell `[-a_1,a_1] x ... x [-a_n,a_n]`.
    pub fn doubled_volume(&self) -> f64 {
        self.sides.iter().map(|a| 2.0 * a).product()
    }

    /// Total (n-1)-dimensional measure of the boundary.
    pub fn boundary_measure(&self) -> f64 {
        let v = self.volume();
        self.sides.iter().map(|a| 2.0 * v / a).sum()
    }

    /// Lattice vector `(2 k_1 a_1, ..., 2 k_n a_n)`.
    pub fn lattice_vector(&self, k: &[i64]) -> Result<Vec<f64>> {
        if k.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: k.len(),
            });
        }
        Ok(k.iter()
            .zip(&self.sides)
            .map(|(&k, a)| 2.0 * k as f64 * a)
            .collect())
    }

    /// Squared length of the lattice vector with integer coordinates `k`.
    pub fn lattice_norm_sq(&self, k: &[i64]) -> f64 {
        k.iter()
            .zip(&self.sides)
            .map(|(&k, a)| 4.0 * (k * k) as f64 * a * a)
            .sum()
    }

    /// The same box seen through `x_i -> a_i - x_i`: every face pair swaps.
    pub fn reflected(&self) -> Self {
        Self {
            sides: self.sides.clone(),
            bc: self.bc.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    pub fn with_bc(&self, bc: Vec<(Bc, Bc)>) -> Result<Self> {
        Self::new(self.sides.clone(), bc)
    }

    /// Short tag such as `DD/DN`.
    pub fn bc_tag(&self) -> String {
        self.bc
            .iter()
            .map(|(a, b)| format!("{}{}", a.letter(), b.letter()))
            .collect::<Vec<_>>()
            .join("/")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrrationalityReport {
    pub bound: i64,
    /// A nonzero integer vector `p` with `sum p_i a_i^2 = 0` to tolerance,
    /// of smallest max-norm among those found.
    pub relation: Option<Vec<i64>>,
}

impl IrrationalityReport {
    pub fn independent(&self) -> bool {
        self.relation.is_none()
    }
}

/// Search for integer relations among the squared side lengths.
///
/// Finite floating sides cannot decide linear independence over the
/// rationals; the report only says whether a relation with coefficients
/// bounded by `bound` exists at relative tolerance `1e-12`.
pub fn irrationality_scan(b: &BoxProblem, bound: i64) -> Result<IrrationalityReport> {
    if bound < 1 {
        return Err(Error::InvalidInput(
            "relation bound must be at least 1".into(),
        ));
    }
    let sq: Vec<f64> = b.sides().iter().map(|a| a * a).collect();
    let n = sq.len();
    let last = sq[n - 1];
    let mut best: Option<Vec<i64>> = None;

    // Enumerate the first n-1 coefficients; the last one is forced.
    let mut head = vec![-bound; n - 1];
    loop {
        let partial: f64 = head.iter().zip(&sq).map(|(&p, s)| p as f64 * s).sum();
        let p_last = (-partial / last).round();
        if p_last.abs() <= bound as f64 {
            let mut p = head.clone();
            p.push(p_last as i64);
            if p.iter().any(|&v| v != 0) && first_nonzero_positive(&p) {
                let scale = p
                    .iter()
                    .zip(&sq)
                    .map(|(&p, s)| (p as f64 * s).abs())
                    .fold(0.0, f64::max);
                let resid = (partial + p_last * last).abs();
                if resid <= 1e-12 * scale {
                    let norm = p.iter().map(|v| v.abs()).max().unwrap_or(0);
                    let better = match &best {
                        None => true,
                        Some(q) => norm < q.iter().map(|v| v.abs()).max().unwrap_or(0),
                    };
                    if better {
                        best = Some(p);
                    }
                }
            }
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == head.len() {
                return Ok(IrrationalityReport {
                    bound,
                    relation: best,
                });
            }
            head[i] += 1;
            if head[i] <= bound {
                break;
            }
            head[i] = -bound;
            i += 1;
        }
    }
}

pub(crate) fn first_nonzero_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}
