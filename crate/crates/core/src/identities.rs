//! Reflection, image, pairing, quadrupling, factorization and telescoping
//! identities checked on truncated heat kernels and traces.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis1D, BasisKind, Mode, ProductBasis};
use crate::error::{Error, Result};
use crate::model::{reduce_potential, Bc, BoxProblem, TrigPotential};
use crate::spectrum::{solve, Spectrum};

/// Sample times in units of `a^2`.
pub const DEFAULT_TIMES: [f64; 3] = [0.05, 0.1, 0.2];
pub const DEFAULT_SAMPLES: usize = 25;
/// Largest kernel or trace tail accepted by default.
pub const DEFAULT_MAX_TAIL: f64 = 1e-9;
/// Residuals at or below this are roundoff and count as converged.
pub const REFINEMENT_FLOOR: f64 = 1e-12;
/// Required residual reduction when the basis size doubles.
pub const REFINEMENT_FACTOR: f64 = 10.0;

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityOptions {
    /// Absolute sample times.
    pub times: Vec<f64>,
    pub tolerance: f64,
    pub max_tail: f64,
    /// Basis size per dimension on the box side; doubled cells use the
    /// matching resolution.
    pub size: usize,
}

impl IdentityOptions {
    pub fn new(times: Vec<f64>, tolerance: f64, size: usize) -> Self {
        Self {
            times,
            tolerance,
            max_tail: DEFAULT_MAX_TAIL,
            size,
        }
    }

    /// Default times scaled by `a^2`.
    pub fn scaled(a: f64, tolerance: f64, size: usize) -> Self {
        Self::new(
            DEFAULT_TIMES.iter().map(|t| t * a * a).collect(),
            tolerance,
            size,
        )
    }

    /// Same options without the tail budget, for deliberately coarse runs.
    pub fn unbudgeted(&self) -> Self {
        Self {
            max_tail: f64::INFINITY,
            ..self.clone()
        }
    }

    pub fn with_size(&self, size: usize) -> Self {
        Self {
            size,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::InvalidInput("no sample times".into()));
        }
        if let Some(&t) = self.times.iter().find(|t| !(**t > 0.0)) {
            return Err(Error::NonPositiveTime(t));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub samples: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub lhs: String,
    pub rhs: String,
    pub size: usize,
    /// Largest truncation tail met while evaluating either side.
    pub max_tail: f64,
}

impl IdentityReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &str,
        samples: String,
        residual: f64,
        opts: &IdentityOptions,
        lhs: &str,
        rhs: &str,
        max_tail: f64,
    ) -> Self {
        Self {
            name: name.into(),
            samples,
            residual,
            tolerance: opts.tolerance,
            pass: residual <= opts.tolerance,
            lhs: lhs.into(),
            rhs: rhs.into(),
            size: opts.size,
            max_tail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub name: String,
    pub coarse_size: usize,
    pub fine_size: usize,
    pub coarse_residual: f64,
    pub fine_residual: f64,
    pub ratio: f64,
    pub floor: f64,
    pub pass: bool,
}

/// Passes when the fine residual is at least `REFINEMENT_FACTOR` smaller,
/// or already at the roundoff floor.
pub fn refinement(coarse: &IdentityReport, fine: &IdentityReport) -> RefinementReport {
    let ratio = coarse.residual / fine.residual.max(f64::MIN_POSITIVE);
    RefinementReport {
        name: coarse.name.clone(),
        coarse_size: coarse.size,
        fine_size: fine.size,
        coarse_residual: coarse.residual,
        fine_residual: fine.residual,
        ratio,
        floor: REFINEMENT_FLOOR,
        pass: fine.residual <= (coarse.residual / REFINEMENT_FACTOR).max(REFINEMENT_FLOOR),
    }
}

/// Halton points in `(0,1)^dim`, starting at index `offset + 1`.
pub fn halton(dim: usize, count: usize, offset: u64) -> Result<Vec<Vec<f64>>> {
    if dim > HALTON_BASES.len() {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok((0..count as u64)
        .map(|i| {
            HALTON_BASES[..dim]
                .iter()
                .map(|&b| radical_inverse(offset + i + 1, b))
                .collect()
        })
        .collect())
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while n > 0 {
        r += f * (n % base) as f64;
        n /= base;
        f *= inv;
    }
    r
}

/// Pairs `(x, y)` of Halton points in the open box `prod (0, a_i)`.
pub fn sample_pairs(sides: &[f64], count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let n = sides.len();
    Ok(halton(2 * n, count, seed)?
        .into_iter()
        .map(|u| {
            let x = (0..n).map(|i| u[i] * sides[i]).collect();
            let y = (0..n).map(|i| u[n + i] * sides[i]).collect();
            (x, y)
        })
        .collect())
}

fn describe(points: &[(Vec<f64>, Vec<f64>)], opts: &IdentityOptions) -> String {
    format!(
        "{} point pairs x {} times {:?}",
        points.len(),
        opts.times.len(),
        opts.times
    )
}

/// Read-mostly store of solved spectra keyed by potential, basis and
/// whether eigenvectors were kept.
#[derive(Default)]
pub struct SolveCache {
    map: RwLock<HashMap<String, Arc<Spectrum>>>,
}

impl SolveCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve(
        &self,
        p: &TrigPotential,
        basis: &ProductBasis,
        vectors: bool,
    ) -> Result<Arc<Spectrum>> {
        let key = format!("{}|{:?}|{}", p.content_hash(), basis, vectors);
        if let Some(s) = self.map.read().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(solve(p, basis, vectors)?);
        Ok(self
            .map
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(s)
            .clone())
    }
}

/// Size of a doubled-cell basis with the same top frequency as an
/// interval basis of `size` functions.
pub fn doubled_size(antiperiodic: bool, size: usize) -> usize {
    if antiperiodic {
        2 * size
    } else {
        2 * size + 1
    }
}

fn kernel_tail(s: &Spectrum, t: f64, budget: f64) -> Result<f64> {
    let tail = s.kernel_tail_bound(t);
    if tail > budget {
        return Err(Error::TailTooLarge { t, tail });
    }
    Ok(tail)
}

fn trace_tail(s: &Spectrum, t: f64, budget: f64) -> Result<f64> {
    let tail = s.tail_bound(t);
    if tail > budget {
        return Err(Error::TailTooLarge { t, tail });
    }
    Ok(tail)
}

fn one_d(p: &TrigPotential) -> Result<()> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.dim(),
        });
    }
    Ok(())
}

fn single(kind: BasisKind, length: f64, size: usize) -> Result<ProductBasis> {
    Ok(ProductBasis::single(Basis1D::new(kind, length, size)?))
}

/// Interval kernel against signed images of the periodic (equal faces) or
/// antiperiodic (mixed faces) kernel on `[-a, a]`.
pub fn reflection_identity_1d(
    cache: &SolveCache,
    p: &TrigPotential,
    bc: (Bc, Bc),
    points: &[(f64, f64)],
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    one_d(p)?;
    opts.validate()?;
    p.require_coordinatewise_even()?;
    let a = p.sides()[0];
    let anti = bc.0 != bc.1;
    let kind = if anti {
        BasisKind::Antiperiodic
    } else {
        BasisKind::Periodic
    };
    let lhs = cache.solve(
        p,
        &single(BasisKind::from_bc(bc.0, bc.1), a, opts.size)?,
        true,
    )?;
    let rhs = cache.solve(p, &single(kind, a, doubled_size(anti, opts.size))?, true)?;
    let sign = bc.0.sign();

    let mut residual = 0.0f64;
    let mut tail = 0.0f64;
    for &t in &opts.times {
        tail = tail
            .max(kernel_tail(&lhs, t, opts.max_tail)?)
            .max(kernel_tail(&rhs, t, opts.max_tail)?);
        for &(x, y) in points {
            let left = lhs.kernel_from(t, &lhs.project(&[x])?, &lhs.project(&[y])?);
            let py = rhs.project(&[y])?;
            let right = rhs.kernel_from(t, &rhs.project(&[x])?, &py)
                + sign * rhs.kernel_from(t, &rhs.project(&[-x])?, &py);
            residual = residual.max((left - right).abs());
        }
    }
    let name = format!("reflection_1d_{}{}", bc.0.letter(), bc.1.letter());
    let pairs: Vec<_> = points.iter().map(|&(x, y)| (vec![x], vec![y])).collect();
    Ok(IdentityReport::new(
        &name,
        describe(&pairs, opts),
        residual,
        opts,
        "interval eigen-sum on [0,a]",
        if anti {
            "antiperiodic eigen-sum on [-a,a] with images"
        } else {
            "periodic eigen-sum on [-a,a] with images"
        },
        tail,
    ))
}

/// Torus flags for a box: antiperiodic where the two faces differ.
pub fn torus_mode(b: &BoxProblem) -> Mode {
    let flags: Vec<bool> = b.bc().iter().map(|(l, r)| l != r).collect();
    if flags.iter().any(|&f| f) {
        Mode::TorusAntiperiodic(flags)
    } else {
        Mode::TorusPeriodic
    }
}

/// Sign patterns `eps` in `{+1,-1}^n` with weights `s(eps)`; reflecting
/// coordinate `i` contributes the sign of its left face.
pub fn image_signs(b: &BoxProblem) -> Vec<(Vec<f64>, f64)> {
    let n = b.dim();
    (0..1usize << n)
        .map(|mask| {
            let eps: Vec<f64> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let s = (0..n)
                .filter(|i| eps[*i] < 0.0)
                .map(|i| b.bc()[i].0.sign())
                .product();
            (eps, s)
        })
        .collect()
}

fn torus_sizes(b: &BoxProblem, size: usize) -> Vec<usize> {
    b.bc()
        .iter()
        .map(|(l, r)| doubled_size(l != r, size))
        .collect()
}

/// Box kernel against the signed image sum of the doubled-cell kernel.
pub fn torus_image_identity_2d(
    cache: &SolveCache,
    p: &TrigPotential,
    b: &BoxProblem,
    points: &[(Vec<f64>, Vec<f64>)],
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    if b.dim() != 2 {
        return Err(Error::UnsupportedDimension(b.dim()));
    }
    opts.validate()?;
    p.require_coordinatewise_even()?;
    let n = b.dim();
    let lhs = cache.solve(
        p,
        &ProductBasis::for_box(b, &vec![opts.size; n], &Mode::IntervalFaces)?,
        true,
    )?;
    let rhs = cache.solve(
        p,
        &ProductBasis::for_box(b, &torus_sizes(b, opts.size), &torus_mode(b))?,
        true,
    )?;
    let images = image_signs(b);

    let mut residual = 0.0f64;
    let mut tail = 0.0f64;
    for &t in &opts.times {
        tail = tail
            .max(kernel_tail(&lhs, t, opts.max_tail)?)
            .max(kernel_tail(&rhs, t, opts.max_tail)?);
    }
    for (x, y) in points {
        let lx = lhs.project(x)?;
        let ly = lhs.project(y)?;
        let ry = rhs.project(y)?;
        let rx = images
            .iter()
            .map(|(eps, s)| {
                let ex: Vec<f64> = x.iter().zip(eps).map(|(a, e)| a * e).collect();
                Ok((rhs.project(&ex)?, *s))
            })
            .collect::<Result<Vec<_>>>()?;
        for &t in &opts.times {
            let left = lhs.kernel_from(t, &lx, &ly);
            let right: f64 = rx
                .iter()
                .map(|(px, s)| s * rhs.kernel_from(t, px, &ry))
                .sum();
            residual = residual.max((left - right).abs());
        }
    }
    Ok(IdentityReport::new(
        &format!("torus_image_2d_{}", b.bc_tag()),
        describe(points, opts),
        residual,
        opts,
        "box eigen-sum with face conditions",
        "signed image sum of the doubled-cell eigen-sum",
        tail,
    ))
}

/// `Tr_DD + Tr_NN = Tr_per` and `Tr_DN + Tr_ND = Tr_anti`.
pub fn trace_pairing_identity(
    cache: &SolveCache,
    p: &TrigPotential,
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    one_d(p)?;
    opts.validate()?;
    p.require_coordinatewise_even()?;
    let a = p.sides()[0];
    let k = opts.size;
    let get = |kind, size| cache.solve(p, &single(kind, a, size)?, false);
    let dd = get(BasisKind::DD, k)?;
    let nn = get(BasisKind::NN, k)?;
    let dn = get(BasisKind::DN, k)?;
    let nd = get(BasisKind::ND, k)?;
    let per = get(BasisKind::Periodic, doubled_size(false, k))?;
    let anti = get(BasisKind::Antiperiodic, doubled_size(true, k))?;

    let mut residual = 0.0f64;
    let mut tail = 0.0f64;
    for &t in &opts.times {
        for s in [&dd, &nn, &dn, &nd, &per, &anti] {
            tail = tail.max(trace_tail(s, t, opts.max_tail)?);
        }
        let even = dd.partial_trace(t) + nn.partial_trace(t) - per.partial_trace(t);
        let odd = dn.partial_trace(t) + nd.partial_trace(t) - anti.partial_trace(t);
        residual = residual.max(even.abs()).max(odd.abs());
    }
    Ok(IdentityReport::new(
        "trace_pairing",
        format!("times {:?}", opts.times),
        residual,
        opts,
        "Tr_DD + Tr_NN and Tr_DN + Tr_ND from interval solves",
        "Tr_per and Tr_anti from doubled-cell solves",
        tail,
    ))
}

/// Uniform periodic grid on `[-a, a)` with `m` points.
fn periodic_grid(a: f64, m: usize) -> Vec<f64> {
    let h = 2.0 * a / m as f64;
    (0..m).map(|i| -a + (i as f64 + 0.5) * h).collect()
}

/// `int phi_j(eps x) phi_j(x) dx` over the doubled cell for the trusted
/// eigenfunctions, by the trapezoid rule on a tensor grid of `m` points per
/// dimension. The rule is exact for the trigonometric polynomials involved
/// once `m` exceeds twice the top basis frequency.
fn reflected_overlaps(s: &Spectrum, eps: &[f64], m: usize) -> Result<Vec<f64>> {
    let u = s.vectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let grids: Vec<Vec<f64>> = s
        .basis
        .factors
        .iter()
        .map(|f| periodic_grid(f.length, m))
        .collect();
    let weight: f64 = s
        .basis
        .factors
        .iter()
        .map(|f| 2.0 * f.length / m as f64)
        .product();
    let n = s.basis.size();
    let rows = m.pow(s.basis.dim() as u32);
    let point = |r: usize| -> Vec<f64> {
        let mut idx = r;
        let mut x = vec![0.0; grids.len()];
        for i in (0..grids.len()).rev() {
            x[i] = grids[i][idx % m];
            idx /= m;
        }
        x
    };
    let mut psi = Mat::<f64>::zeros(rows, n);
    let mut psi_eps = Mat::<f64>::zeros(rows, n);
    for r in 0..rows {
        let x = point(r);
        let ex: Vec<f64> = x.iter().zip(eps).map(|(a, e)| a * e).collect();
        for (c, v) in s.basis.eval_all(&x).into_iter().enumerate() {
            psi[(r, c)] = v;
        }
        for (c, v) in s.basis.eval_all(&ex).into_iter().enumerate() {
            psi_eps[(r, c)] = v;
        }
    }
    let uj = u.as_ref().subcols(0, s.trusted);
    let phi = &psi * uj;
    let phi_eps = &psi_eps * uj;
    Ok((0..s.trusted)
        .map(|j| {
            weight
                * (0..rows)
                    .map(|r| phi[(r, j)] * phi_eps[(r, j)])
                    .sum::<f64>()
        })
        .collect())
}

/// `4 Tr_box(t) = sum_eps s(eps) int G_tor(t, eps x, x) dx` for an
/// all-Dirichlet rectangle.
pub fn trace_quadrupling_2d(
    cache: &SolveCache,
    p: &TrigPotential,
    b: &BoxProblem,
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    if b.dim() != 2 {
        return Err(Error::UnsupportedDimension(b.dim()));
    }
    if b.bc()
        .iter()
        .any(|&(l, r)| l != Bc::Dirichlet || r != Bc::Dirichlet)
    {
        return Err(Error::InvalidInput(
            "trace quadrupling needs Dirichlet faces".into(),
        ));
    }
    opts.validate()?;
    p.require_coordinatewise_even()?;
    let n = b.dim();
    let boxed = cache.solve(
        p,
        &ProductBasis::for_box(b, &vec![opts.size; n], &Mode::IntervalFaces)?,
        false,
    )?;
    let tsize = doubled_size(false, opts.size);
    let torus = cache.solve(
        p,
        &ProductBasis::for_box(b, &vec![tsize; n], &Mode::TorusPeriodic)?,
        true,
    )?;
    let m = 2 * tsize;
    let overlaps = image_signs(b)
        .into_iter()
        .map(|(eps, s)| Ok((reflected_overlaps(&torus, &eps, m)?, s)))
        .collect::<Result<Vec<_>>>()?;
    let volume = torus.basis.domain_volume();

    let mut residual = 0.0f64;
    let mut tail = 0.0f64;
    for &t in &opts.times {
        tail = tail
            .max(trace_tail(&boxed, t, opts.max_tail)?)
            .max(volume * kernel_tail(&torus, t, opts.max_tail / volume)?);
        let left = 4.0 * boxed.partial_trace(t);
        let right: f64 = overlaps
            .iter()
            .map(|(o, s)| {
                s * torus
                    .trusted_eigenvalues()
                    .iter()
                    .zip(o)
                    .map(|(mu, v)| (-mu * t).exp() * v)
                    .sum::<f64>()
            })
            .sum();
        residual = residual.max((left - right).abs());
    }
    Ok(IdentityReport::new(
        "trace_quadrupling_2d",
        format!("times {:?}, {m}^2 quadrature grid", opts.times),
        residual,
        opts,
        "4 Tr of the Dirichlet box",
        "signed diagonal integrals of the doubled-cell eigen-sum",
        tail,
    ))
}

/// Free periodic kernel of `-d^2/dx^2` on a circle of length `2a`, as the
/// image sum of Gaussians.
pub fn periodized_gaussian(t: f64, delta: f64, a: f64) -> f64 {
    let period = 2.0 * a;
    let d = delta - period * (delta / period).round();
    let norm = 1.0 / (4.0 * PI * t).sqrt();
    let mut sum = (-d * d / (4.0 * t)).exp();
    for k in 1.. {
        let lo = d - period * k as f64;
        let hi = d + period * k as f64;
        let term = (-lo * lo / (4.0 * t)).exp() + (-hi * hi / (4.0 * t)).exp();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    norm * sum
}

/// For a coordinate direction `axis`, the doubled-cell kernel of the
/// reduced potential equals a periodized Gaussian along `axis` times the
/// periodic kernel of the transverse profile. The 1D factor is solved at
/// four times the resolution so its trusted range covers the 2D one.
pub fn factorization_identity(
    cache: &SolveCache,
    p: &TrigPotential,
    b: &BoxProblem,
    axis: usize,
    points: &[(Vec<f64>, Vec<f64>)],
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    if b.dim() != 2 {
        return Err(Error::UnsupportedDimension(b.dim()));
    }
    if axis >= 2 {
        return Err(Error::InvalidInput(format!("axis {axis} out of range")));
    }
    opts.validate()?;
    let mut k = vec![0i64; 2];
    k[axis] = 1;
    let qd = reduce_potential(p, &k)?;
    let other = 1 - axis;
    let tsize = doubled_size(false, opts.size);
    let lhs = cache.solve(
        &qd,
        &ProductBasis::for_box(b, &[tsize, tsize], &Mode::TorusPeriodic)?,
        true,
    )?;
    let profile = qd.coordinate_profile(other);
    let h = cache.solve(
        &profile,
        &single(BasisKind::Periodic, b.sides()[other], 4 * tsize)?,
        true,
    )?;
    let a_axis = b.sides()[axis];

    let mut residual = 0.0f64;
    let mut tail = 0.0f64;
    for &t in &opts.times {
        tail = tail
            .max(kernel_tail(&lhs, t, opts.max_tail)?)
            .max(kernel_tail(&h, t, opts.max_tail)?);
    }
    for (x, y) in points {
        let lx = lhs.project(x)?;
        let ly = lhs.project(y)?;
        let hx = h.project(&[x[other]])?;
        let hy = h.project(&[y[other]])?;
        for &t in &opts.times {
            let left = lhs.kernel_from(t, &lx, &ly);
            let right =
                periodized_gaussian(t, x[axis] - y[axis], a_axis) * h.kernel_from(t, &hx, &hy);
            residual = residual.max((left - right).abs());
        }
    }
    Ok(IdentityReport::new(
        &format!("factorization_axis{axis}"),
        describe(points, opts),
        residual,
        opts,
        "doubled-cell eigen-sum of the reduced potential",
        "periodized Gaussian times transverse periodic eigen-sum",
        tail,
    ))
}

/// `Tr_per(t) - int_{-b}^{b} G_per(t, -x, x) dx = 2 Tr_DD(t)`: even
/// eigenfunctions cancel, odd ones (the Dirichlet spectrum on `[0,b]`)
/// count twice.
pub fn telescoped_dirichlet_trace(
    cache: &SolveCache,
    p: &TrigPotential,
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    one_d(p)?;
    opts.validate()?;
    p.require_coordinatewise_even()?;
    let b = p.sides()[0];
    let dd = cache.solve(p, &single(BasisKind::DD, b, opts.size)?, false)?;
    let psize = doubled_size(false, opts.size);
    let per = cache.solve(p, &single(BasisKind::Periodic, b, psize)?, true)?;
    let m = 2 * psize;
    let overlap = reflected_overlaps(&per, &[-1.0], m)?;

    let mut residual = 0.0f64;
    let mut tail = 0.0f64;
    for &t in &opts.times {
        tail = tail
            .max(trace_tail(&dd, t, opts.max_tail)?)
            .max(trace_tail(&per, t, opts.max_tail)?)
            .max(2.0 * b * kernel_tail(&per, t, opts.max_tail / (2.0 * b))?);
        let reflected: f64 = per
            .trusted_eigenvalues()
            .iter()
            .zip(&overlap)
            .map(|(mu, v)| (-mu * t).exp() * v)
            .sum();
        let left = per.partial_trace(t) - reflected;
        residual = residual.max((left - 2.0 * dd.partial_trace(t)).abs());
    }
    Ok(IdentityReport::new(
        "telescoped_dirichlet",
        format!("times {:?}, {m}-point quadrature", opts.times),
        residual,
        opts,
        "Tr_per minus the reflected diagonal integral on [-b,b]",
        "2 Tr_DD on [0,b]",
        tail,
    ))
}
