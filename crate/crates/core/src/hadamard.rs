//! Hadamard parametrix coefficients `a_nu(x, y)` for `-Laplacian + Q`.
//!
//! `a_0 = 1`, `a_1` and `a_2` in closed integral form in any dimension, and
//! the transport recursion
//! `a_nu(x, y) = int_0^1 s^(nu-1) [a_(nu-1)'' - Q a_(nu-1)](y + s(x - y), y) ds`
//! in one dimension.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::TrigPotential;

/// Nodes per wavelength along the integration segment.
pub const NODES_PER_WAVELENGTH: usize = 32;
/// Default highest order handled by a table.
pub const DEFAULT_NU_MAX: usize = 4;
/// Chebyshev grid sizes tried by the one-dimensional recursion.
pub const GRID_SIZES: [usize; 6] = [16, 24, 32, 48, 64, 96];
/// Agreement between successive grids that ends refinement early.
pub const GRID_TOLERANCE: f64 = 1e-12;
/// Agreement that still counts as converged once all grids are used.
pub const GRID_ACCEPT: f64 = 1e-8;

/// Relative size below which trailing Chebyshev coefficients are dropped.
const CHOP: f64 = 1e-14;

/// Largest angular frequency of `Q` along any direction.
pub fn max_frequency(p: &TrigPotential) -> f64 {
    p.orbits()
        .map(|(m, _)| {
            m.iter()
                .zip(p.sides())
                .map(|(&k, &a)| (PI * k as f64 / a).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn segment_rule(p: &TrigPotential, length: f64, min_order: usize) -> GaussLegendre {
    let waves = max_frequency(p) * length / (2.0 * PI);
    let n = (NODES_PER_WAVELENGTH * (waves.ceil() as usize).max(1)).max(min_order);
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive order"))
}

fn check_points(p: &TrigPotential, x: &[f64], y: &[f64]) -> Result<()> {
    for v in [x, y] {
        if v.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

fn on_segment(x: &[f64], y: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| b + s * (a - b)).collect()
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn segment_mean(p: &TrigPotential, x: &[f64], y: &[f64], gl: &GaussLegendre) -> f64 {
    gl.integrate(0.0, 1.0, |s| p.eval(&on_segment(x, y, s)))
}

/// `a_1(x, y) = -int_0^1 Q(y + s(x - y)) ds`.
pub fn a1(p: &TrigPotential, x: &[f64], y: &[f64]) -> Result<f64> {
    check_points(p, x, y)?;
    let gl = segment_rule(p, distance(x, y), NODES_PER_WAVELENGTH);
    Ok(-segment_mean(p, x, y, &gl))
}

/// `a_2(x, y) = -int_0^1 s(1-s) (Laplacian Q)(y + s(x-y)) ds + (int_0^1 Q)^2 / 2`.
pub fn a2(p: &TrigPotential, x: &[f64], y: &[f64]) -> Result<f64> {
    check_points(p, x, y)?;
    let gl = segment_rule(p, distance(x, y), NODES_PER_WAVELENGTH);
    let lap = p.laplacian();
    let first = gl.integrate(0.0, 1.0, |s| s * (1.0 - s) * lap.eval(&on_segment(x, y, s)));
    let mean = segment_mean(p, x, y, &gl);
    Ok(-first + 0.5 * mean * mean)
}

/// Chebyshev points of the second kind on `[c - h, c + h]`; derivatives go
/// through the Chebyshev coefficients.
struct ChebGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half: f64,
    /// `cos(pi j k / n)` for `j, k = 0..=n`.
    cosines: Vec<Vec<f64>>,
}

impl ChebGrid {
    fn new(n: usize, center: f64, half: f64) -> Self {
        let cosines: Vec<Vec<f64>> = (0..=n)
            .map(|j| {
                (0..=n)
                    .map(|k| (PI * ((j * k) % (2 * n)) as f64 / n as f64).cos())
                    .collect()
            })
            .collect();
        let weights = (0..=n)
            .map(|j| {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    w / 2.0
                } else {
                    w
                }
            })
            .collect();
        ChebGrid {
            nodes: (0..=n).map(|j| center + half * cosines[j][1]).collect(),
            weights,
            half,
            cosines,
        }
    }

    fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..=n)
            .map(|k| {
                let s: f64 = (0..=n)
                    .map(|j| {
                        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                        w * f[j] * self.cosines[j][k]
                    })
                    .sum();
                let c = 2.0 * s / n as f64;
                if k == 0 || k == n {
                    c / 2.0
                } else {
                    c
                }
            })
            .collect()
    }

    fn diff(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut a = self.coefficients(f);
        // Drop the rounding-level tail so it is not amplified.
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep = a
            .iter()
            .rposition(|v| v.abs() > CHOP * scale)
            .map_or(0, |k| k + 1);
        a[keep..].iter_mut().for_each(|v| *v = 0.0);
        let mut b = vec![0.0; n + 2];
        for k in (1..=n).rev() {
            b[k - 1] = b[k + 1] + 2.0 * k as f64 * a[k];
        }
        b[0] /= 2.0;
        (0..=n)
            .map(|j| (0..n).map(|k| b[k] * self.cosines[j][k]).sum::<f64>() / self.half)
            .collect()
    }

    fn interp(&self, f: &[f64], z: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&zj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(f) {
            let d = z - zj;
            if d == 0.0 {
                return fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

/// Values of `z -> a_k(z, y)` for `k = 0..=nu` on one grid.
fn recursion_on_grid(
    p: &TrigPotential,
    nu: usize,
    y: f64,
    grid: &ChebGrid,
    gl: &GaussLegendre,
) -> Vec<Vec<f64>> {
    let q: Vec<f64> = grid.nodes.iter().map(|&z| p.eval(&[z])).collect();
    let mut levels = vec![vec![1.0; grid.nodes.len()]];
    for k in 1..=nu {
        let prev = &levels[k - 1];
        let d2 = grid.diff(&grid.diff(prev));
        let g: Vec<f64> = d2
            .iter()
            .zip(&q)
            .zip(prev)
            .map(|((a, b), c)| a - b * c)
            .collect();
        let next = grid
            .nodes
            .iter()
            .map(|&z| {
                gl.integrate(0.0, 1.0, |s| {
                    s.powi(k as i32 - 1) * grid.interp(&g, y + s * (z - y))
                })
            })
            .collect();
        levels.push(next);
    }
    levels
}

fn recursion_grid(x: f64, y: f64, n: usize) -> ChebGrid {
    ChebGrid::new(n, 0.5 * (x + y), (0.5 * (x - y).abs()).max(0.5))
}

/// Converged value of `a_nu(x, y)` in one dimension with the final grid
/// difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecursionValue {
    pub value: f64,
    pub grid_size: usize,
    pub refinement_delta: f64,
}

/// `a_nu(x, y)` from the transport recursion, refining the Chebyshev grid
/// until two successive sizes agree.
pub fn a_nu_1d_detailed(p: &TrigPotential, nu: usize, x: f64, y: f64) -> Result<RecursionValue> {
    if p.dim() != 1 {
        return Err(Error::UnsupportedDimension(p.dim()));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidInput("non-finite evaluation point".into()));
    }
    if nu == 0 {
        return Ok(RecursionValue {
            value: 1.0,
            grid_size: 0,
            refinement_delta: 0.0,
        });
    }
    let half = (0.5 * (x - y).abs()).max(0.5);
    let gl = segment_rule(p, 2.0 * half, 64);
    let mut prev: Option<f64> = None;
    let mut best: Option<RecursionValue> = None;
    for &n in &GRID_SIZES {
        let grid = recursion_grid(x, y, n);
        let levels = recursion_on_grid(p, nu, y, &grid, &gl);
        let v = grid.interp(&levels[nu], x);
        if let Some(pv) = prev {
            let delta = (v - pv).abs();
            let cand = RecursionValue {
                value: v,
                grid_size: n,
                refinement_delta: delta,
            };
            if delta <= GRID_TOLERANCE * v.abs().max(1.0) {
                return Ok(cand);
            }
            if best.map_or(true, |b| delta < b.refinement_delta) {
                best = Some(cand);
            }
        }
        prev = Some(v);
    }
    match best {
        Some(b) if b.refinement_delta <= GRID_ACCEPT * b.value.abs().max(1.0) => Ok(b),
        Some(b) => Err(Error::NoConvergence(format!(
            "a_{nu}({x}, {y}): grids disagree by {:.3e}",
            b.refinement_delta
        ))),
        None => Err(Error::NoConvergence("no grid refinement performed".into())),
    }
}

pub fn a_nu_1d(p: &TrigPotential, nu: usize, x: f64, y: f64) -> Result<f64> {
    a_nu_1d_detailed(p, nu, x, y).map(|r| r.value)
}

/// Largest `|nu a_nu + (x - y) d_x a_nu + Q a_(nu-1) - d_x^2 a_(nu-1)|`
/// over the grid points between `y` and `x`.
pub fn recursion_residual_1d(
    p: &TrigPotential,
    nu: usize,
    x: f64,
    y: f64,
    n: usize,
) -> Result<f64> {
    if p.dim() != 1 {
        return Err(Error::UnsupportedDimension(p.dim()));
    }
    if nu == 0 {
        return Err(Error::InvalidInput("the recursion starts at nu = 1".into()));
    }
    let half = (0.5 * (x - y).abs()).max(0.5);
    let gl = segment_rule(p, 2.0 * half, 64);
    let grid = recursion_grid(x, y, n);
    let levels = recursion_on_grid(p, nu, y, &grid, &gl);
    let (cur, prev) = (&levels[nu], &levels[nu - 1]);
    let d_cur = grid.diff(cur);
    let d2_prev = grid.diff(&grid.diff(prev));
    let (lo, hi) = (x.min(y), x.max(y));
    let mut worst = 0.0f64;
    for (j, &z) in grid.nodes.iter().enumerate() {
        if z < lo - 1e-12 || z > hi + 1e-12 {
            continue;
        }
        let r = nu as f64 * cur[j] + (z - y) * d_cur[j] + p.eval(&[z]) * prev[j] - d2_prev[j];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Odd-order derivative estimates of `h(x) = a_nu(c + b x, c + x)` at `0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaclaurinReport {
    pub nu: usize,
    pub base: f64,
    pub b: f64,
    pub step: f64,
    /// `(order, |estimate|)` for orders 1, 3, 5.
    pub odd_derivatives: Vec<(usize, f64)>,
    pub max_magnitude: f64,
}

/// Antisymmetric central stencils on `+-k delta`, `k = 1..=3`.
const ODD_STENCILS: [(usize, [f64; 3]); 3] = [
    (1, [0.5, 0.0, 0.0]),
    (3, [-1.0, 0.5, 0.0]),
    (5, [2.5, -2.0, 0.5]),
];

/// Default finite-difference step of the Maclaurin check.
pub const MACLAURIN_STEP: f64 = 0.2;

pub fn even_maclaurin_check(
    p: &TrigPotential,
    nu: usize,
    base: f64,
    b: f64,
) -> Result<MaclaurinReport> {
    even_maclaurin_check_with_step(p, nu, base, b, MACLAURIN_STEP)
}

/// Central differences at steps `delta` and `2 delta`, combined by one
/// Richardson step.
pub fn even_maclaurin_check_with_step(
    p: &TrigPotential,
    nu: usize,
    base: f64,
    b: f64,
    delta: f64,
) -> Result<MaclaurinReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {delta}"
        )));
    }
    if !p.is_coordinatewise_even() {
        return Err(Error::NotCoordinatewiseEven);
    }
    let h = |x: f64| a_nu_1d(p, nu, base + b * x, base + x);
    let odd = |step: f64| -> Result<Vec<f64>> {
        let mut diffs = [0.0; 3];
        for (k, d) in diffs.iter_mut().enumerate() {
            let x = (k + 1) as f64 * step;
            *d = h(x)? - h(-x)?;
        }
        Ok(ODD_STENCILS
            .iter()
            .map(|(order, w)| {
                w.iter().zip(&diffs).map(|(a, b)| a * b).sum::<f64>() / step.powi(*order as i32)
            })
            .collect())
    };
    let fine = odd(delta)?;
    let coarse = odd(2.0 * delta)?;
    let odd_derivatives: Vec<(usize, f64)> = ODD_STENCILS
        .iter()
        .zip(fine.iter().zip(&coarse))
        .map(|((order, _), (f, c))| (*order, ((4.0 * f - c) / 3.0).abs()))
        .collect();
    let max_magnitude = odd_derivatives.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(MaclaurinReport {
        nu,
        base,
        b,
        step: delta,
        odd_derivatives,
        max_magnitude,
    })
}

/// Parametrix coefficients for one potential.
#[derive(Clone, Debug, Serialize)]
pub struct HadamardTable {
    pub nu_max: usize,
    pub dim: usize,
    pub quadrature_per_wavelength: usize,
    #[serde(skip)]
    potential: TrigPotential,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub nu: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
}

impl HadamardTable {
    pub fn new(p: &TrigPotential, nu_max: usize) -> Result<Self> {
        if p.dim() > 1 && nu_max > 2 {
            return Err(Error::InvalidInput(format!(
                "orders above 2 need one dimension, got dimension {}",
                p.dim()
            )));
        }
        Ok(HadamardTable {
            nu_max,
            dim: p.dim(),
            quadrature_per_wavelength: NODES_PER_WAVELENGTH,
            potential: p.clone(),
        })
    }

    /// Exponent `nu + (1 - n)/2` of `e_nu`.
    pub fn e_exponent(&self, nu: usize) -> f64 {
        nu as f64 + (1.0 - self.dim as f64) / 2.0
    }

    /// Prefactor `2^(-2 nu - 1) pi^((1 - n)/2)` of `e_nu`.
    pub fn e_prefactor(&self, nu: usize) -> f64 {
        2f64.powi(-2 * nu as i32 - 1) * PI.powf((1.0 - self.dim as f64) / 2.0)
    }

    pub fn eval(&self, nu: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        if nu > self.nu_max {
            return Err(Error::InvalidInput(format!(
                "order {nu} exceeds table maximum {}",
                self.nu_max
            )));
        }
        match nu {
            0 => {
                check_points(&self.potential, x, y)?;
                Ok(1.0)
            }
            1 => a1(&self.potential, x, y),
            2 if self.dim > 1 => a2(&self.potential, x, y),
            _ => {
                check_points(&self.potential, x, y)?;
                a_nu_1d(&self.potential, nu, x[0], y[0])
            }
        }
    }

    /// Every order at every `(x, y)` pair, orders fastest.
    pub fn dump(&self, points: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<TableRow>> {
        let mut rows = Vec::with_capacity(points.len() * (self.nu_max + 1));
        for (x, y) in points {
            for nu in 0..=self.nu_max {
                rows.push(TableRow {
                    nu,
                    x: x.clone(),
                    y: y.clone(),
                    value: self.eval(nu, x, y)?,
                });
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_potential, CosineSpec};

    fn cos1(a: f64, m: i64, c: f64) -> TrigPotential {
        build_potential(&CosineSpec::new(vec![a], [(vec![m], c)])).unwrap()
    }

    #[test]
    fn constant_potential() {
        let p = TrigPotential::constant(vec![1.0, 2.0], 0.7);
        assert!((a1(&p, &[0.1, 0.2], &[0.9, 1.7]).unwrap() + 0.7).abs() < 1e-14);
        assert!((a2(&p, &[0.1, 0.2], &[0.9, 1.7]).unwrap() - 0.245).abs() < 1e-14);
        let q = TrigPotential::constant(vec![1.0], 0.7);
        let mut fact = 1.0;
        for nu in 1..=4 {
            fact *= nu as f64;
            let v = a_nu_1d(&q, nu, 0.3, -0.4).unwrap();
            assert!(
                (v - (-0.7f64).powi(nu as i32) / fact).abs() < 1e-10,
                "nu={nu}"
            );
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = cos1(1.0, 1, 1.0);
        assert!(a1(&p, &[1.0], &[0.0]).unwrap().abs() < 1e-14);
        assert!((a1(&p, &[0.3], &[0.3]).unwrap() + (PI * 0.3).cos()).abs() < 1e-14);
        let v = a2(&p, &[0.0], &[0.0]).unwrap();
        assert!((v - (0.5 + PI * PI / 6.0)).abs() < 1e-12);
        let x = 0.37;
        let diag = a2(&p, &[x], &[x]).unwrap();
        let qx = (PI * x).cos();
        assert!((diag - (0.5 * qx * qx + PI * PI * qx / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn recursion_matches_closed_forms() {
        let p = build_potential(&CosineSpec::new(
            vec![1.0],
            [(vec![1], 0.8), (vec![2], -0.3)],
        ))
        .unwrap();
        for &(x, y) in &[(0.3, 0.8), (-0.4, 0.2), (0.7, 0.7), (1.3, -0.2)] {
            let r1 = a_nu_1d(&p, 1, x, y).unwrap();
            assert!((r1 - a1(&p, &[x], &[y]).unwrap()).abs() < 1e-10);
            let r2 = a_nu_1d(&p, 2, x, y).unwrap();
            assert!((r2 - a2(&p, &[x], &[y]).unwrap()).abs() < 1e-8, "({x},{y})");
        }
    }

    #[test]
    fn recursion_residual_small() {
        let p = cos1(1.0, 2, 0.5);
        for nu in 1..=3 {
            let r = recursion_residual_1d(&p, nu, 0.9, 0.1, 48).unwrap();
            assert!(r < 1e-6, "nu={nu} r={r}");
        }
    }

    #[test]
    fn central_symmetry() {
        let p = build_potential(&CosineSpec::new(
            vec![1.0],
            [(vec![1], 0.8), (vec![3], 0.2)],
        ))
        .unwrap();
        for nu in 1..=3 {
            let a = a_nu_1d(&p, nu, 0.3, 0.65).unwrap();
            let b = a_nu_1d(&p, nu, -0.3, -0.65).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn even_maclaurin_property() {
        let p = cos1(1.0, 1, 1.0);
        let r = even_maclaurin_check(&p, 1, 0.0, -1.0).unwrap();
        assert!(r.max_magnitude <= 1e-7, "{r:?}");
        let r = even_maclaurin_check(&p, 2, 1.0, -1.0).unwrap();
        assert!(r.max_magnitude <= 1e-6, "{r:?}");
        let c = TrigPotential::constant(vec![1.0], 0.4);
        let r = even_maclaurin_check(&c, 3, 0.0, 0.5).unwrap();
        assert!(r.max_magnitude <= 1e-9, "{r:?}");
    }

    #[test]
    fn odd_function_is_detected() {
        // h(x) = a_1(x + 0.25, x + 0.25) = -cos(pi (x + 0.25)) has a nonzero slope.
        let p = cos1(1.0, 1, 1.0);
        let r = even_maclaurin_check(&p, 1, 0.25, 1.0).unwrap();
        assert!(r.odd_derivatives[0].1 > 1.0);
    }

    #[test]
    fn table_metadata_and_limits() {
        let p = TrigPotential::constant(vec![1.0, 1.0], 1.0);
        let t = HadamardTable::new(&p, 2).unwrap();
        assert_eq!(t.e_exponent(1), 0.5);
        assert!((t.e_prefactor(0) - 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!(HadamardTable::new(&p, 3).is_err());
        assert!(t.eval(3, &[0.0, 0.0], &[0.0, 0.0]).is_err());
        let rows = t.dump(&[(vec![0.1, 0.2], vec![0.3, 0.4])]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].value, 1.0);
        assert!((rows[2].value - 0.5).abs() < 1e-14);
        assert!(a1(&p, &[0.0], &[0.0, 0.0]).is_err());
    }
}
