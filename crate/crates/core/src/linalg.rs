//! Dense symmetric eigensolver wrapper.

use std::collections::BTreeMap;

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest `|M_ij - M_ji|` relative to `max |M_ij|`.
pub fn asymmetry(m: &Mat<f64>) -> f64 {
    let n = m.nrows();
    let mut scale = 0.0f64;
    let mut diff = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(m[(i, j)].abs());
            if i > j {
                diff = diff.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Index sets of the connected components of the nonzero pattern of `m`,
/// each sorted, ordered by smallest index.
pub fn decoupled_blocks(m: &Mat<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..n {
        for r in 0..c {
            if m[(r, c)] != 0.0 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigenvalues ascending and, optionally, orthonormal eigenvectors as
/// columns with the first significant component of each made positive.
/// Decoupled blocks are diagonalized separately.
pub fn symmetric_eigen(m: &Mat<f64>, vectors: bool) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| Mat::zeros(0, 0))));
    }
    let blocks = decoupled_blocks(m);
    if blocks.len() == 1 {
        return dense_eigen(m, vectors);
    }
    let parts: Vec<(Vec<f64>, Option<Mat<f64>>)> = blocks
        .par_iter()
        .map(|idx| {
            let sub = Mat::<f64>::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
            dense_eigen(&sub, vectors)
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<(f64, usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(b, (vals, _))| vals.iter().enumerate().map(move |(k, &v)| (v, b, k)))
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let vals: Vec<f64> = order.iter().map(|o| o.0).collect();
    let vecs = vectors.then(|| {
        let mut u = Mat::<f64>::zeros(n, n);
        for (dst, &(_, b, k)) in order.iter().enumerate() {
            let local = parts[b].1.as_ref().expect("block vectors");
            for (i, &row) in blocks[b].iter().enumerate() {
                u[(row, dst)] = local[(i, k)];
            }
        }
        u
    });
    Ok((vals, vecs))
}

fn dense_eigen(m: &Mat<f64>, vectors: bool) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    if !vectors {
        let mut vals = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::Eigen)?;
        vals.sort_by(f64::total_cmp);
        return Ok((vals, None));
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let vals: Vec<f64> = order.iter().map(|&j| s[j]).collect();
    let mut vecs = Mat::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.col(src);
        let sign = (0..n)
            .map(|i| col[i])
            .find(|v| v.abs() > 1e-10)
            .map_or(1.0, |v| v.signum());
        for i in 0..n {
            vecs[(i, dst)] = sign * col[i];
        }
    }
    Ok((vals, Some(vecs)))
}
