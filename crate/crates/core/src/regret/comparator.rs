use alloc::vec::Vec;

use crate::filterbank::FilterBank;
use crate::lds::Sequence;
use crate::learner::{baseline, precompute_features, slot_kernels, PredictorSpec};
use crate::linalg::{cholesky, cholesky_inverse, cholesky_solve, lu_solve, sym_eigen, Mat};
use crate::rng::data_hash;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub const DEFAULT_TOL_OPT: f64 = 1e-9;
const MAX_OUTER: usize = 80;
const MAX_NEWTON: usize = 60;
const MU_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cholesky,
    /// Eigen-decomposition pseudo-inverse, used when the normal equations are singular.
    MinimumNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorDiagnostics {
    pub method: SolveMethod,
    /// Newton steps of the barrier method; 0 when the unconstrained solution
    /// was already feasible.
    pub iterations: usize,
    /// `‖∇f(M) + 2ΛM‖_F / (1 + ‖∇f(0)‖_F)` at the returned point.
    pub kkt_residual: f64,
    /// Bound `slots · μ` on the suboptimality of the returned point.
    pub duality_gap: f64,
    pub multipliers: Vec<f64>,
    /// Slots whose norm constraint is binding.
    pub active: Vec<usize>,
    /// Largest diagonal shift added when a Newton system was numerically singular.
    pub ridge: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorResult {
    pub spec: PredictorSpec,
    pub m_star: Vec<Mat>,
    pub total_loss: f64,
    pub step_losses: Vec<f64>,
    pub diagnostics: ComparatorDiagnostics,
    pub data_hash: u64,
}

/// Normal-equation data of the stacked problem `min_W Σ_t ‖r_t - W z_t‖²` with
/// `z_t` the concatenated slot features and `r_t = y_t - p_t`.
struct Normal {
    slots: usize,
    d_in: usize,
    d_out: usize,
    /// `Σ z zᵀ`
    g: Mat,
    /// `Σ r zᵀ`
    r: Mat,
    /// `Σ ‖r‖²`
    c: f64,
    z: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl Normal {
    fn n(&self) -> usize {
        self.slots * self.d_in
    }

    fn block(&self, w: &Mat, s: usize) -> Mat {
        Mat::from_fn(self.d_out, self.d_in, |o, j| w[(o, s * self.d_in + j)])
    }

    fn block_norms(&self, w: &Mat) -> Vec<f64> {
        (0..self.slots).map(|s| self.block(w, s).frobenius_norm()).collect()
    }

    fn step_losses(&self, w: &Mat) -> Vec<f64> {
        self.z
            .iter()
            .zip(&self.targets)
            .map(|(z, r)| {
                let pred = w.matvec(z);
                pred.iter().zip(r).map(|(p, y)| (y - p) * (y - p)).sum()
            })
            .collect()
    }
}

fn normal_equations(spec: &PredictorSpec, bank: &FilterBank, inputs: &Sequence, outputs: &Sequence) -> Result<Normal> {
    if inputs.len() != spec.horizon || outputs.len() != spec.horizon {
        return Err(Error::domain("solve_comparator: data length differs from T"));
    }
    let kernels = slot_kernels(spec, bank)?;
    let features = precompute_features(spec, &kernels, inputs)?;
    let (slots, d_in, d_out) = (spec.slots(), inputs.dim(), outputs.dim());
    let n = slots * d_in;
    let mut g = Mat::zeros(n, n);
    let mut r = Mat::zeros(d_out, n);
    let mut c = 0.0;
    let mut zs = Vec::with_capacity(spec.horizon);
    let mut targets = Vec::with_capacity(spec.horizon);
    for t in 1..=spec.horizon {
        let z: Vec<f64> = features.at(t).concat();
        let p = baseline(spec.variant, outputs, t);
        let target: Vec<f64> = outputs.get(t - 1).iter().zip(&p).map(|(y, p)| y - p).collect();
        for i in 0..n {
            if z[i] != 0.0 {
                let zi = z[i];
                let row = g.row_mut(i);
                for j in i..n {
                    row[j] += zi * z[j];
                }
            }
        }
        for o in 0..d_out {
            let row = r.row_mut(o);
            for j in 0..n {
                row[j] += target[o] * z[j];
            }
        }
        c += target.iter().map(|v| v * v).sum::<f64>();
        zs.push(z);
        targets.push(target);
    }
    for i in 0..n {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    Ok(Normal { slots, d_in, d_out, g, r, c, z: zs, targets })
}

fn unconstrained(ne: &Normal) -> Result<(Mat, SolveMethod)> {
    let n = ne.n();
    if let Some(l) = cholesky(&ne.g) {
        let mut w = Mat::zeros(ne.d_out, n);
        for o in 0..ne.d_out {
            let mut row = ne.r.row(o).to_vec();
            cholesky_solve(&l, &mut row);
            if row.iter().any(|v| !v.is_finite()) {
                return min_norm(ne);
            }
            w.row_mut(o).copy_from_slice(&row);
        }
        return Ok((w, SolveMethod::Cholesky));
    }
    min_norm(ne)
}

fn min_norm(ne: &Normal) -> Result<(Mat, SolveMethod)> {
    let n = ne.n();
    let e = sym_eigen(&ne.g)?;
    let cut = e.values[0].max(0.0) * n as f64 * f64::EPSILON;
    let mut w = Mat::zeros(ne.d_out, n);
    for (j, &lam) in e.values.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        let v = e.vector(j);
        for o in 0..ne.d_out {
            let coef: f64 = ne.r.row(o).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / lam;
            let row = w.row_mut(o);
            for i in 0..n {
                row[i] += coef * v[i];
            }
        }
    }
    Ok((w, SolveMethod::MinimumNorm))
}

/// Full-context comparator: `argmin_{M ∈ K_r} Σ_t ℓ_t(M, T)` for the variant
/// and bank of `spec`, whose context length is overridden by `T`.
pub fn solve_comparator(spec: &PredictorSpec, bank: &FilterBank, inputs: &Sequence, outputs: &Sequence, tol_opt: f64) -> Result<ComparatorResult> {
    let full = spec.with_context(spec.horizon)?;
    solve_comparator_with_context(&full, bank, inputs, outputs, tol_opt)
}

/// As [`solve_comparator`] but keeping the context length of `spec`.
///
/// The unconstrained least-squares solution is returned when it is feasible.
/// Otherwise the constrained problem is solved by a log-barrier method,
/// `min f(W) - μ Σ_i ln(r² - ‖W_i‖²)` for decreasing `μ`, each stage by damped
/// Newton steps. The Hessian is `(2G + Λ) ⊗ I` plus one rank-one term per slot,
/// so a step costs one factorization of an `n × n` matrix and a small
/// `slots × slots` solve. The Gram matrix of spectral features is far too ill
/// conditioned (condition numbers beyond `1e8`) for first-order methods.
pub fn solve_comparator_with_context(spec: &PredictorSpec, bank: &FilterBank, inputs: &Sequence, outputs: &Sequence, tol_opt: f64) -> Result<ComparatorResult> {
    if !(tol_opt > 0.0) {
        return Err(Error::domain("solve_comparator: tol_opt must be positive"));
    }
    let ne = normal_equations(spec, bank, inputs, outputs)?;
    let r = spec.r;
    let slots = ne.slots;
    let (w0, method) = unconstrained(&ne)?;
    let feasible = ne.block_norms(&w0).iter().all(|&n| n <= r);
    let (w, stats) = if feasible {
        (w0, BarrierStats { iterations: 0, mu: 0.0, ridge: 0.0, converged: true })
    } else {
        barrier(&ne, r, w0, tol_opt)
    };
    let norms = ne.block_norms(&w);
    let active: Vec<usize> = (0..slots).filter(|&s| norms[s] >= r * (1.0 - 1e-4)).collect();
    // ∇f = 2(WG - R)
    let wg = w.matmul(&ne.g);
    // Multipliers of binding slots are fitted to the radial part of ∇f, which
    // the barrier only approximates once h_s is tiny; the others use μ/h_s.
    let multipliers: Vec<f64> = (0..slots)
        .map(|s| {
            if active.contains(&s) {
                let mut radial = 0.0;
                for o in 0..ne.d_out {
                    for i in s * ne.d_in..(s + 1) * ne.d_in {
                        radial += 2.0 * (wg[(o, i)] - ne.r[(o, i)]) * w[(o, i)];
                    }
                }
                (-radial / (2.0 * norms[s] * norms[s])).max(0.0)
            } else if stats.mu > 0.0 {
                stats.mu / (r * r - norms[s] * norms[s])
            } else {
                0.0
            }
        })
        .collect();
    let mut kkt = 0.0;
    let mut g0 = 0.0;
    for o in 0..ne.d_out {
        for i in 0..ne.n() {
            let grad = 2.0 * (wg[(o, i)] - ne.r[(o, i)]) + 2.0 * multipliers[i / ne.d_in] * w[(o, i)];
            kkt += grad * grad;
            g0 += 4.0 * ne.r[(o, i)] * ne.r[(o, i)];
        }
    }
    let m_star: Vec<Mat> = (0..slots).map(|s| ne.block(&w, s)).collect();
    let step_losses = ne.step_losses(&w);
    let total_loss = step_losses.iter().sum();
    Ok(ComparatorResult {
        spec: *spec,
        m_star,
        total_loss,
        step_losses,
        diagnostics: ComparatorDiagnostics {
            method,
            iterations: stats.iterations,
            kkt_residual: kkt.sqrt() / (1.0 + g0.sqrt()),
            duality_gap: stats.mu * slots as f64,
            multipliers,
            active,
            ridge: stats.ridge,
            converged: stats.converged,
        },
        data_hash: data_hash(inputs.as_flat(), outputs.as_flat()),
    })
}

struct BarrierStats {
    iterations: usize,
    mu: f64,
    ridge: f64,
    converged: bool,
}

/// `tr(W G Wᵀ) - 2 tr(R Wᵀ) + Σ‖r_t‖²`
fn objective(ne: &Normal, w: &Mat) -> f64 {
    let wg = w.matmul(&ne.g);
    let mut f = ne.c;
    for (a, (b, c)) in w.as_slice().iter().zip(wg.as_slice().iter().zip(ne.r.as_slice())) {
        f += a * (b - 2.0 * c);
    }
    f
}

fn barrier_value(ne: &Normal, w: &Mat, r: f64, mu: f64) -> Option<f64> {
    let mut log_sum = 0.0;
    for n in ne.block_norms(w) {
        let h = r * r - n * n;
        if !(h > 0.0) {
            return None;
        }
        log_sum += h.ln();
    }
    Some(objective(ne, w) - mu * log_sum)
}

/// Newton direction of the barrier objective and the squared Newton decrement.
fn newton_direction(ne: &Normal, w: &Mat, r: f64, mu: f64, min_ridge: f64) -> Option<(Mat, f64, f64)> {
    let (n, d, slots, d_out) = (ne.n(), ne.d_in, ne.slots, ne.d_out);
    let h: Vec<f64> = ne.block_norms(w).iter().map(|v| r * r - v * v).collect();
    let mut grad = w.matmul(&ne.g);
    for o in 0..d_out {
        for i in 0..n {
            grad[(o, i)] = 2.0 * (grad[(o, i)] - ne.r[(o, i)]) + 2.0 * mu / h[i / d] * w[(o, i)];
        }
    }
    let scale = (0..n).map(|i| ne.g[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = min_ridge;
    let a_inv = loop {
        let mut a = ne.g.clone();
        a.scale(2.0);
        for i in 0..n {
            a[(i, i)] += 2.0 * mu / h[i / d] + ridge;
        }
        if let Some(l) = cholesky(&a) {
            break cholesky_inverse(&l);
        }
        ridge = if ridge == 0.0 { 1e-15 * scale } else { ridge * 10.0 };
        if !ridge.is_finite() {
            return None;
        }
    };
    let mut v = grad.matmul(&a_inv);
    v.scale(-1.0);
    let c: Vec<f64> = h.iter().map(|hs| 4.0 * mu / (hs * hs)).collect();
    // Y_s = Ŵ_s A⁻¹, with Ŵ_s equal to W on slot s and zero elsewhere
    let ys: Vec<Mat> = (0..slots)
        .map(|s| {
            let ws = ne.block(w, s);
            let rows = Mat::from_fn(d, n, |a, b| a_inv[(s * d + a, b)]);
            ws.matmul(&rows)
        })
        .collect();
    let slot_dot = |x: &Mat, y: &Mat, j: usize| -> f64 {
        let mut acc = 0.0;
        for o in 0..d_out {
            for i in j * d..(j + 1) * d {
                acc += x[(o, i)] * y[(o, i)];
            }
        }
        acc
    };
    let b: Vec<f64> = (0..slots).map(|j| slot_dot(w, &v, j)).collect();
    let mut k = Mat::identity(slots);
    for j in 0..slots {
        for s in 0..slots {
            k[(j, s)] += slot_dot(w, &ys[s], j) * c[s];
        }
    }
    let beta = lu_solve(k, b)?;
    for s in 0..slots {
        let f = c[s] * beta[s];
        if f != 0.0 {
            for (vi, yi) in v.as_mut_slice().iter_mut().zip(ys[s].as_slice()) {
                *vi -= f * yi;
            }
        }
    }
    let decrement: f64 = -grad.as_slice().iter().zip(v.as_slice()).map(|(g, x)| g * x).sum::<f64>();
    Some((v, decrement, ridge))
}

fn barrier(ne: &Normal, r: f64, start: Mat, tol_opt: f64) -> (Mat, BarrierStats) {
    let slots = ne.slots;
    let mut w = start;
    for s in 0..slots {
        let n = ne.block(&w, s).frobenius_norm();
        if n > 0.9 * r {
            let f = 0.9 * r / n;
            for o in 0..ne.d_out {
                for j in 0..ne.d_in {
                    w[(o, s * ne.d_in + j)] *= f;
                }
            }
        }
    }
    let mut mu = (objective(ne, &w).abs() / slots as f64).max(1e-12);
    let mut stats = BarrierStats { iterations: 0, mu, ridge: 0.0, converged: false };
    for _ in 0..MAX_OUTER {
        for _ in 0..MAX_NEWTON {
            let Some((v, dec, ridge)) = newton_direction(ne, &w, r, mu, 0.0) else { break };
            stats.iterations += 1;
            stats.ridge = stats.ridge.max(ridge);
            if !(dec > 0.0) || dec / 2.0 <= 1e-9 * mu {
                break;
            }
            let cur = barrier_value(ne, &w, r, mu).expect("iterates stay feasible");
            let slack = 1e-14 * (1.0 + cur.abs());
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-14 {
                let mut trial = w.clone();
                for (t, x) in trial.as_mut_slice().iter_mut().zip(v.as_slice()) {
                    *t += step * x;
                }
                if let Some(val) = barrier_value(ne, &trial, r, mu) {
                    if val <= cur - 0.25 * step * dec + slack {
                        w = trial;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        stats.mu = mu;
        let loss = objective(ne, &w).max(0.0);
        if slots as f64 * mu <= tol_opt * (1.0 + loss) {
            stats.converged = true;
            break;
        }
        mu /= MU_FACTOR;
    }
    (w, stats)
}
