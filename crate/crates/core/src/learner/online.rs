use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::features::{precompute_features, slot_kernels, Features};
use super::{PredictorSpec, Variant};
use crate::filterbank::FilterBank;
use crate::lds::Sequence;
use crate::linalg::{norm2, Mat};
use crate::rng::data_hash;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// The learned slot matrices, each `d_out × d_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorState {
    pub m: Vec<Mat>,
    /// Number of updates applied so far.
    pub step: usize,
}

impl PredictorState {
    pub fn zeros(spec: &PredictorSpec, d_in: usize, d_out: usize) -> Self {
        PredictorState { m: vec![Mat::zeros(d_out, d_in); spec.slots()], step: 0 }
    }

    pub fn max_slot_norm(&self) -> f64 {
        self.m.iter().map(Mat::frobenius_norm).fold(0.0, f64::max)
    }
}

/// `y_{t-1}` or `2y_{t-1} - y_{t-2}` with `y_0 = y_{-1} = 0`.
pub fn baseline(variant: Variant, outputs: &Sequence, t: usize) -> Vec<f64> {
    let mut p = vec![0.0; outputs.dim()];
    let weights: &[(usize, f64)] = match variant {
        Variant::Vanilla => &[(1, 1.0)],
        Variant::TwoAr | Variant::Tensor => &[(1, 2.0), (2, -1.0)],
    };
    for &(lag, w) in weights {
        if t > lag {
            for (pi, yi) in p.iter_mut().zip(outputs.get(t - lag - 1)) {
                *pi += w * yi;
            }
        }
    }
    p
}

/// `ŷ_t = p_t + Σ_i M_i X_{t,i}`
pub fn predict(state: &PredictorState, spec: &PredictorSpec, features: &Features, outputs: &Sequence, t: usize) -> Result<Vec<f64>> {
    if t == 0 || t > features.horizon() {
        return Err(Error::domain(format!("predict: t = {t} outside 1..={}", features.horizon())));
    }
    if state.m.len() != features.num_slots() || state.m.iter().any(|m| m.cols() != features.dim() || m.rows() != outputs.dim()) {
        return Err(Error::domain("predict: state does not match feature or output dimensions"));
    }
    let mut y = baseline(spec.variant, outputs, t);
    for (s, m) in state.m.iter().enumerate() {
        m.matvec_acc(features.x(t, s), &mut y);
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub loss: f64,
    /// `∂ℓ/∂M_i = 2(ŷ - y) X_iᵀ`
    pub gradient: Vec<Mat>,
    pub gradient_norm: f64,
}

pub fn loss_and_grad(prediction: &[f64], target: &[f64], features: &[&[f64]]) -> StepOutcome {
    let err: Vec<f64> = prediction.iter().zip(target).map(|(a, b)| a - b).collect();
    let loss = err.iter().map(|e| e * e).sum();
    let mut sq = 0.0;
    let gradient = features
        .iter()
        .map(|x| {
            let g = Mat::from_fn(err.len(), x.len(), |i, j| 2.0 * err[i] * x[j]);
            sq += g.as_slice().iter().map(|v| v * v).sum::<f64>();
            g
        })
        .collect();
    StepOutcome { loss, gradient, gradient_norm: sq.sqrt() }
}

/// `M ← Π(M - η_t ∇)` with `η_t = eta0/√t` and per-slot radial projection onto
/// the Frobenius ball of radius `r`.
pub fn ogd_step(state: &mut PredictorState, spec: &PredictorSpec, gradient: &[Mat], t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::domain("ogd_step: t must be at least 1"));
    }
    if gradient.len() != state.m.len() {
        return Err(Error::domain("ogd_step: gradient has the wrong number of slots"));
    }
    let eta = spec.eta0 / (t as f64).sqrt();
    for (m, g) in state.m.iter_mut().zip(gradient) {
        for (mv, gv) in m.as_mut_slice().iter_mut().zip(g.as_slice()) {
            *mv -= eta * gv;
        }
        project(m, spec.r);
    }
    state.step = t;
    Ok(())
}

fn project(m: &mut Mat, r: f64) {
    let n = m.frobenius_norm();
    if n > r {
        m.scale(r / n);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub spec: PredictorSpec,
    pub d_in: usize,
    pub d_out: usize,
    /// `ℓ_t(M^t, L)` for `t = 1..=T`.
    pub losses: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub prediction_norms: Vec<f64>,
    pub predictions: Sequence,
    pub final_m: Vec<Mat>,
    /// Largest slot norm seen after any update.
    pub max_slot_norm: f64,
    pub data_hash: u64,
}

impl RunRecord {
    pub fn total_loss(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

fn check_data(spec: &PredictorSpec, inputs: &Sequence, outputs: &Sequence) -> Result<()> {
    if inputs.len() != spec.horizon || outputs.len() != spec.horizon {
        return Err(Error::domain(format!(
            "expected {} inputs and outputs, got {} and {}",
            spec.horizon,
            inputs.len(),
            outputs.len()
        )));
    }
    Ok(())
}

/// Predict, observe, update for `t = 1..=T` starting from `M = 0`.
pub fn run_online(spec: &PredictorSpec, bank: &FilterBank, inputs: &Sequence, outputs: &Sequence) -> Result<RunRecord> {
    check_data(spec, inputs, outputs)?;
    let kernels = slot_kernels(spec, bank)?;
    let features = precompute_features(spec, &kernels, inputs)?;
    let mut state = PredictorState::zeros(spec, inputs.dim(), outputs.dim());
    let t_len = spec.horizon;
    let mut losses = Vec::with_capacity(t_len);
    let mut cumulative = Vec::with_capacity(t_len);
    let mut prediction_norms = Vec::with_capacity(t_len);
    let mut predictions = Sequence::zeros(t_len, outputs.dim());
    let mut total = 0.0;
    let mut max_slot_norm: f64 = 0.0;
    for t in 1..=t_len {
        let wrap = |e: Error| Error::Step { step: t, source: Box::new(e) };
        let y_hat = predict(&state, spec, &features, outputs, t).map_err(wrap)?;
        let step = loss_and_grad(&y_hat, outputs.get(t - 1), &features.at(t));
        if !step.loss.is_finite() {
            return Err(wrap(Error::Numeric { context: "run_online: loss", residual: step.loss }));
        }
        ogd_step(&mut state, spec, &step.gradient, t).map_err(wrap)?;
        max_slot_norm = max_slot_norm.max(state.max_slot_norm());
        total += step.loss;
        losses.push(step.loss);
        cumulative.push(total);
        prediction_norms.push(norm2(&y_hat));
        predictions.get_mut(t - 1).copy_from_slice(&y_hat);
    }
    Ok(RunRecord {
        spec: *spec,
        d_in: inputs.dim(),
        d_out: outputs.dim(),
        losses,
        cumulative,
        prediction_norms,
        predictions,
        final_m: state.m,
        max_slot_norm,
        data_hash: data_hash(inputs.as_flat(), outputs.as_flat()),
    })
}

/// Per-step losses `ℓ_t(M, L)` of a fixed parameter `M`.
pub fn fixed_losses(spec: &PredictorSpec, bank: &FilterBank, inputs: &Sequence, outputs: &Sequence, m: &[Mat]) -> Result<Vec<f64>> {
    check_data(spec, inputs, outputs)?;
    let kernels = slot_kernels(spec, bank)?;
    let features = precompute_features(spec, &kernels, inputs)?;
    let state = PredictorState { m: m.to_vec(), step: 0 };
    (1..=spec.horizon)
        .map(|t| {
            let y_hat = predict(&state, spec, &features, outputs, t)?;
            Ok(y_hat.iter().zip(outputs.get(t - 1)).map(|(a, b)| (a - b) * (a - b)).sum())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::{build_filter_bank, build_tensor_bank, DEFAULT_TOL_EIG};
    use crate::lds::{gen_inputs, hug_band, make_random_system, sample_region, simulate, DKind, InputKind};
    use crate::rng::seeded;
    use rand::Rng;

    fn bank_for(spec: &PredictorSpec) -> FilterBank {
        match spec.variant {
            Variant::Tensor => build_tensor_bank(spec.horizon, spec.k, DEFAULT_TOL_EIG).unwrap(),
            v => build_filter_bank(spec.horizon, spec.windowed_slots(), v.bank_kind(), DEFAULT_TOL_EIG).unwrap(),
        }
    }

    fn data(t_len: usize, d_in: usize, d_out: usize, seed: u64) -> (Sequence, Sequence) {
        let eig = sample_region(&hug_band(t_len, 0.875).unwrap(), 6, seed).unwrap();
        let sys = make_random_system(6, d_in, d_out, &eig, seed, DKind::Zero).unwrap();
        let u = gen_inputs(InputKind::UnitSphere, d_in, t_len, seed).unwrap();
        let y = simulate(&sys, &u, None).unwrap();
        (u.values, y)
    }

    #[test]
    fn baselines() {
        let y = Sequence::from_rows(&[vec![1.0], vec![3.0], vec![4.0]]).unwrap();
        assert_eq!(baseline(Variant::Vanilla, &y, 1), vec![0.0]);
        assert_eq!(baseline(Variant::Vanilla, &y, 3), vec![3.0]);
        assert_eq!(baseline(Variant::TwoAr, &y, 2), vec![2.0]);
        assert_eq!(baseline(Variant::TwoAr, &y, 3), vec![5.0]);
    }

    /// Central differences of the step loss against the analytic gradient.
    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seeded(99);
        let variants = [Variant::Vanilla, Variant::TwoAr, Variant::Tensor];
        for case in 0..21 {
            let variant = variants[case % 3];
            let t_len = 12 + case;
            let k = if variant == Variant::Tensor { 2 } else { 3 + case % 3 };
            let spec = PredictorSpec::new(variant, t_len, 3 + case % t_len.min(7), k, 1.0).unwrap();
            let bank = bank_for(&spec);
            let (d_in, d_out) = (1 + case % 3, 1 + case % 2);
            let (u, y) = data(t_len, d_in, d_out, case as u64);
            let f = precompute_features(&spec, &slot_kernels(&spec, &bank).unwrap(), &u).unwrap();
            let mut state = PredictorState::zeros(&spec, d_in, d_out);
            for m in &mut state.m {
                m.as_mut_slice().iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
            }
            let t = t_len - case % 4;
            let loss = |s: &PredictorState| {
                let p = predict(s, &spec, &f, &y, t).unwrap();
                p.iter().zip(y.get(t - 1)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            };
            let step = loss_and_grad(&predict(&state, &spec, &f, &y, t).unwrap(), y.get(t - 1), &f.at(t));
            let h = 1e-6;
            let mut worst: f64 = 0.0;
            for s in 0..state.m.len() {
                for e in 0..d_in * d_out {
                    let mut plus = state.clone();
                    plus.m[s].as_mut_slice()[e] += h;
                    let mut minus = state.clone();
                    minus.m[s].as_mut_slice()[e] -= h;
                    let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
                    let an = step.gradient[s].as_slice()[e];
                    worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
                }
            }
            assert!(worst < 1e-6, "case {case} {variant:?}: relative error {worst:e}");
        }
    }

    #[test]
    fn projection_and_step_size() {
        let spec = PredictorSpec::new(Variant::Vanilla, 10, 10, 2, 0.5).unwrap().with_eta0(1.0).unwrap();
        let mut state = PredictorState::zeros(&spec, 2, 1);
        let g = vec![Mat::from_vec(1, 2, vec![-0.3, 0.4]), Mat::from_vec(1, 2, vec![3.0, 4.0])];
        ogd_step(&mut state, &spec, &g, 4).unwrap();
        // η_4 = 1/2: the first slot moves to (0.15, -0.2), the second is pulled back to radius 0.5
        assert!((state.m[0][(0, 0)] - 0.15).abs() < 1e-15 && (state.m[0][(0, 1)] + 0.2).abs() < 1e-15);
        assert!((state.m[1].frobenius_norm() - 0.5).abs() < 1e-15);
        assert!((state.m[1][(0, 0)] + 0.3).abs() < 1e-15);
        assert!(ogd_step(&mut state, &spec, &g, 0).is_err());
        assert!(ogd_step(&mut state, &spec, &g[..1], 1).is_err());
    }

    #[test]
    fn run_is_deterministic_and_feasible() {
        for variant in [Variant::Vanilla, Variant::TwoAr, Variant::Tensor] {
            let k = if variant == Variant::Tensor { 3 } else { 6 };
            let spec = PredictorSpec::new(variant, 200, 15, k, 0.3).unwrap().with_eta0(0.5).unwrap();
            let bank = bank_for(&spec);
            let (u, y) = data(200, 2, 2, 3);
            let a = run_online(&spec, &bank, &u, &y).unwrap();
            let b = run_online(&spec, &bank, &u, &y).unwrap();
            assert_eq!(a, b);
            assert!(a.max_slot_norm <= 0.3 + 1e-12);
            assert_eq!(a.losses.len(), 200);
            let sum: f64 = a.losses.iter().sum();
            assert!((a.total_loss() - sum).abs() <= 1e-12 * sum.max(1.0));
        }
    }

    #[test]
    fn zero_parameters_give_baseline_losses() {
        let spec = PredictorSpec::new(Variant::TwoAr, 50, 50, 4, 1.0).unwrap();
        let bank = bank_for(&spec);
        let (u, y) = data(50, 2, 3, 8);
        let m = PredictorState::zeros(&spec, 2, 3).m;
        let losses = fixed_losses(&spec, &bank, &u, &y, &m).unwrap();
        for t in 1..=50 {
            let p = baseline(Variant::TwoAr, &y, t);
            let expect: f64 = p.iter().zip(y.get(t - 1)).map(|(a, b)| (a - b) * (a - b)).sum();
            assert_eq!(losses[t - 1], expect);
        }
    }

    #[test]
    fn wrong_lengths_rejected() {
        let spec = PredictorSpec::new(Variant::Vanilla, 20, 20, 2, 1.0).unwrap();
        let bank = bank_for(&spec);
        let (u, y) = data(19, 1, 1, 0);
        assert!(run_online(&spec, &bank, &u, &y).is_err());
    }
}
