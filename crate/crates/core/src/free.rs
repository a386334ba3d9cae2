//! Free (zero potential) spectra of the basis kinds and certified tail sums.

use std::f64::consts::PI;

use crate::basis::BasisKind;

/// Free spectrum of `-c d^2/dx^2` for one basis kind, as levels with
/// multiplicities in increasing order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeSpectrum1D {
    pub kind: BasisKind,
    pub length: f64,
    pub stiffness: f64,
}

/// Exponent beyond which a term is negligible against the leading one.
const CUTOFF: f64 = 46.0;

impl FreeSpectrum1D {
    pub fn new(kind: BasisKind, length: f64, stiffness: f64) -> Self {
        Self {
            kind,
            length,
            stiffness,
        }
    }

    fn spacing(&self) -> f64 {
        PI / self.length
    }

    /// Frequency and multiplicity of level `k`.
    pub fn level(&self, k: usize) -> (f64, f64) {
        let d = self.spacing();
        let k = k as f64;
        match self.kind {
            BasisKind::DD => ((k + 1.0) * d, 1.0),
            BasisKind::NN => (k * d, 1.0),
            BasisKind::DN | BasisKind::ND => ((k + 0.5) * d, 1.0),
            BasisKind::Periodic => (k * d, if k == 0.0 { 1.0 } else { 2.0 }),
            BasisKind::Antiperiodic => ((k + 0.5) * d, 2.0),
        }
    }

    pub fn eigen_level(&self, k: usize) -> (f64, f64) {
        let (w, m) = self.level(k);
        (self.stiffness * w * w, m)
    }

    pub fn lowest(&self) -> f64 {
        self.eigen_level(0).0
    }

    /// First level index whose eigenvalue exceeds `cut`.
    fn first_above(&self, cut: f64) -> usize {
        let guess = if cut > 0.0 {
            ((cut / self.stiffness).sqrt() / self.spacing()) as usize
        } else {
            0
        };
        let mut k = guess.saturating_sub(2);
        while self.eigen_level(k).0 <= cut {
            k += 1;
        }
        while k > 0 && self.eigen_level(k - 1).0 > cut {
            k -= 1;
        }
        k
    }

    /// Number of eigenvalues `<= cut`, with multiplicity.
    pub fn count_le(&self, cut: f64) -> f64 {
        (0..self.first_above(cut))
            .map(|k| self.eigen_level(k).1)
            .sum()
    }

    /// Upper bound for `sum_{lambda > cut} e^{-lambda t}`: direct summation
    /// plus an integral bound on the remainder.
    pub fn sum_above(&self, cut: f64, t: f64) -> f64 {
        let c = self.stiffness;
        let d = self.spacing();
        let k0 = self.first_above(cut);
        let lead = self.eigen_level(k0).0;
        let mut sum = 0.0;
        let mut k = k0;
        loop {
            let (lam, mult) = self.eigen_level(k);
            if (lam - lead) * t > CUTOFF && k > k0 {
                let w = self.level(k).0;
                // sum_{j>=0} e^{-c (w + j d)^2 t} <= e^{-c w^2 t} (1 + 1/(2 c w t d))
                sum += 2.0 * (-lam * t).exp() * (1.0 + 1.0 / (2.0 * c * w * t * d));
                return sum;
            }
            sum += mult * (-lam * t).exp();
            k += 1;
        }
    }

    pub fn full_sum(&self, t: f64) -> f64 {
        self.sum_above(f64::NEG_INFINITY, t)
    }

    /// Bound on the diagonal of the free heat kernel at time `t`.
    pub fn diagonal_bound(&self, t: f64) -> f64 {
        2.0 / (4.0 * PI * self.stiffness * t).sqrt() + 1.0 / self.length
    }
}

/// Free spectrum of a tensor product: eigenvalues are sums over dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFree {
    pub dims: Vec<FreeSpectrum1D>,
}

fn tolerance(cut: f64) -> f64 {
    1e-9 * cut.abs().max(1.0)
}

impl ProductFree {
    pub fn new(dims: Vec<FreeSpectrum1D>) -> Self {
        Self { dims }
    }

    pub fn lowest(&self) -> f64 {
        self.dims.iter().map(|d| d.lowest()).sum()
    }

    pub fn count_le(&self, cut: f64) -> f64 {
        count_rec(&self.dims, cut + tolerance(cut))
    }

    pub fn sum_above(&self, cut: f64, t: f64) -> f64 {
        sum_rec(&self.dims, cut + tolerance(cut), t)
    }

    pub fn full_sum(&self, t: f64) -> f64 {
        self.dims.iter().map(|d| d.full_sum(t)).product()
    }

    /// All distinct level sums `<= cut` with multiplicities, ascending.
    pub fn enumerate(&self, cut: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        enum_rec(&self.dims, cut + tolerance(cut), 0.0, 1.0, &mut out);
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
        for (lam, mult) in out {
            match merged.last_mut() {
                Some(last) if (lam - last.0).abs() <= 1e-12 * lam.abs().max(1.0) => last.1 += mult,
                _ => merged.push((lam, mult)),
            }
        }
        merged
    }

    /// The `j`-th eigenvalue (1-based, counted with multiplicity).
    pub fn nth_value(&self, j: usize) -> f64 {
        assert!(j >= 1);
        let step = self
            .dims
            .iter()
            .map(|d| d.stiffness * d.spacing().powi(2))
            .fold(0.0, f64::max);
        let mut cut = self.lowest() + step;
        while self.count_le(cut) < j as f64 {
            cut = 2.0 * cut + step;
        }
        let mut acc = 0.0;
        for (lam, mult) in self.enumerate(cut) {
            acc += mult;
            if acc >= j as f64 {
                return lam;
            }
        }
        unreachable!("count_le guarantees enough levels")
    }

    /// Upper bound for `sum_{j > count} e^{-lambda_j t}`.
    pub fn tail_beyond(&self, count: usize, t: f64) -> f64 {
        if count == 0 {
            return self.full_sum(t);
        }
        let lam = self.nth_value(count);
        let ties = self.count_le(lam) - count as f64;
        self.sum_above(lam, t) + ties.max(0.0) * (-lam * t).exp()
    }

    pub fn diagonal_bound(&self, t: f64) -> f64 {
        self.dims.iter().map(|d| d.diagonal_bound(t)).product()
    }
}

fn count_rec(dims: &[FreeSpectrum1D], cut: f64) -> f64 {
    match dims.split_first() {
        None => {
            if cut >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Some((d, rest)) => {
            let mut total = 0.0;
            let mut k = 0;
            loop {
                let (lam, mult) = d.eigen_level(k);
                if lam > cut {
                    return total;
                }
                total += mult * count_rec(rest, cut - lam);
                k += 1;
            }
        }
    }
}

fn sum_rec(dims: &[FreeSpectrum1D], cut: f64, t: f64) -> f64 {
    match dims.split_first() {
        None => {
            if 0.0 > cut {
                1.0
            } else {
                0.0
            }
        }
        Some((d, rest)) => {
            let rest_full: f64 = rest.iter().map(|r| r.full_sum(t)).product();
            let mut total = d.sum_above(cut, t) * rest_full;
            let mut k = 0;
            loop {
                let (lam, mult) = d.eigen_level(k);
                if lam > cut {
                    return total;
                }
                total += mult * (-lam * t).exp() * sum_rec(rest, cut - lam, t);
                k += 1;
            }
        }
    }
}

fn enum_rec(dims: &[FreeSpectrum1D], cut: f64, base: f64, mult: f64, out: &mut Vec<(f64, f64)>) {
    match dims.split_first() {
        None => out.push((base, mult)),
        Some((d, rest)) => {
            let mut k = 0;
            loop {
                let (lam, m) = d.eigen_level(k);
                if lam > cut {
                    return;
                }
                enum_rec(rest, cut - lam, base + lam, mult * m, out);
                k += 1;
            }
        }
    }
}
