use alloc::vec::Vec;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, fix_sign, norm2, Mat};
use crate::rng::seeded;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Residual tolerance relative to the largest eigenvalue.
pub const DEFAULT_TOL_EIG: f64 = 1e-10;

/// Matrices up to this size are decomposed in full by Jacobi.
const DENSE_LIMIT: usize = 128;
const MAX_SUBSPACE_ITERS: usize = 300;
const START_SEED: u64 = 0x5f3c_9a1e_77d2_0b41;

#[derive(Debug, Clone)]
pub struct TopEigen {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// `max_j ‖A v_j − λ_j v_j‖₂`
    pub max_residual: f64,
    pub iterations: usize,
}

/// Top-`k` eigenpairs of a symmetric positive semi-definite matrix.
///
/// Small matrices are decomposed in full by Jacobi rotations. Larger ones use
/// block subspace iteration with Rayleigh-Ritz on a block of `k + max(k, 16)`
/// vectors; the Hankel spectra decay exponentially so a handful of sweeps is
/// enough. Every returned pair satisfies `‖A v − λ v‖ ≤ tol_eig · λ_1`.
pub fn eig_sym_topk(a: &Mat, k: usize, tol_eig: f64) -> Result<TopEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::domain("eig_sym_topk: matrix is not square"));
    }
    if k == 0 || k > n {
        return Err(Error::domain("eig_sym_topk: need 1 <= k <= matrix size"));
    }
    if !(tol_eig > 0.0) {
        return Err(Error::domain("eig_sym_topk: tolerance must be positive"));
    }
    let block = (k + k.max(16)).min(n);
    let out = if n <= DENSE_LIMIT || block == n { dense_topk(a, k)? } else { subspace_topk(a, k, block, tol_eig)? };
    let scale = out.values[0].abs().max(f64::MIN_POSITIVE);
    if out.max_residual > tol_eig * scale {
        return Err(Error::Numeric { context: "eig_sym_topk", residual: out.max_residual / scale });
    }
    Ok(out)
}

fn residual(a: &Mat, lambda: f64, v: &[f64]) -> f64 {
    let mut av = a.matvec(v);
    linalg::axpy(-lambda, v, &mut av);
    norm2(&av)
}

fn dense_topk(a: &Mat, k: usize) -> Result<TopEigen> {
    let e = linalg::sym_eigen(a)?;
    let values = e.values[..k].to_vec();
    let vectors: Vec<Vec<f64>> = (0..k).map(|j| e.vector(j)).collect();
    let max_residual = values.iter().zip(&vectors).map(|(&l, v)| residual(a, l, v)).fold(0.0, f64::max);
    Ok(TopEigen { values, vectors, max_residual, iterations: 1 })
}

fn subspace_topk(a: &Mat, k: usize, p: usize, tol: f64) -> Result<TopEigen> {
    let n = a.rows();
    let mut rng = seeded(START_SEED);
    let mut gaussian = move || -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let mut q = Mat::zeros(n, p);
    for j in 0..p {
        let col = gaussian();
        for i in 0..n {
            q[(i, j)] = col[i];
        }
    }
    linalg::orthonormalize_columns(&mut q, |_| gaussian());

    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut last: Option<(Vec<f64>, Mat, Mat, f64)> = None;
    let mut iterations = 0;
    for it in 1..=MAX_SUBSPACE_ITERS {
        iterations = it;
        let z = a.matmul(&q);
        // Rayleigh quotient Qᵀ A Q
        let mut b = Mat::zeros(p, p);
        for i in 0..n {
            let qi = q.row(i);
            let zi = z.row(i);
            for (r, &qv) in qi.iter().enumerate() {
                if qv != 0.0 {
                    linalg::axpy(qv, zi, b.row_mut(r));
                }
            }
        }
        for r in 0..p {
            for c in r + 1..p {
                let m = 0.5 * (b[(r, c)] + b[(c, r)]);
                b[(r, c)] = m;
                b[(c, r)] = m;
            }
        }
        let ritz = linalg::sym_eigen(&b)?;
        let x = q.matmul(&ritz.vectors);
        let ax = z.matmul(&ritz.vectors);
        let scale = ritz.values[0].abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let mut r2 = 0.0;
            for i in 0..n {
                let d = ax[(i, j)] - ritz.values[j] * x[(i, j)];
                r2 += d * d;
            }
            worst = worst.max(r2.sqrt());
        }
        let done = worst <= 1e-3 * tol * scale;
        if worst < 0.9 * best {
            best = worst;
            stalled = 0;
        } else {
            stalled += 1;
        }
        last = Some((ritz.values, x, ax, worst));
        if done || (stalled >= 3 && best <= tol * scale) {
            break;
        }
        q = last.as_ref().map(|l| l.2.clone()).unwrap_or_else(|| z.clone());
        linalg::orthonormalize_columns(&mut q, |_| gaussian());
    }
    let (values, x, _, _) = last.expect("at least one iteration");
    let mut vectors = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = x.column(j);
        let nrm = norm2(&v);
        v.iter_mut().for_each(|c| *c /= nrm);
        fix_sign(&mut v);
        vectors.push(v);
    }
    let values: Vec<f64> = values[..k].to_vec();
    let mut max_residual: f64 = 0.0;
    for (l, v) in values.iter().zip(&vectors) {
        max_residual = max_residual.max(residual(a, *l, v));
    }
    Ok(TopEigen { values, vectors, max_residual, iterations })
}
