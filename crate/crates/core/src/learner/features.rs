use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{PredictorSpec, Variant};
use crate::filterbank::FilterBank;
use crate::lds::Sequence;
use crate::linalg::axpy;
use crate::{Error, Result};

/// A convolution kernel over past inputs: slot feature at step `t` is
/// `Σ_p coeffs[p] · u_{t - start - p}`, truncated at lag `L` and at `u_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotKernel {
    pub start: usize,
    pub coeffs: Vec<f64>,
}

/// Direct slots first, then the windowed slots with their `σ^{1/4}` weight applied.
pub fn slot_kernels(spec: &PredictorSpec, bank: &FilterBank) -> Result<Vec<SlotKernel>> {
    if bank.kind() != spec.variant.bank_kind() {
        return Err(Error::domain(format!(
            "bank kind {} does not match variant {}",
            bank.kind().as_str(),
            spec.variant.as_str()
        )));
    }
    if bank.horizon() != spec.horizon {
        return Err(Error::domain(format!("bank horizon {} != T = {}", bank.horizon(), spec.horizon)));
    }
    let needed = spec.windowed_slots();
    let enough = match spec.variant {
        Variant::Tensor => bank.k() == spec.k,
        _ => bank.num_filters() >= needed,
    };
    if !enough {
        return Err(Error::domain(format!("bank has {} filters, predictor needs {needed}", bank.num_filters())));
    }
    let mut kernels = Vec::with_capacity(spec.slots());
    for lag in 1..=spec.variant.direct_slots() {
        kernels.push(SlotKernel { start: lag, coeffs: vec![1.0] });
    }
    for i in 0..needed {
        kernels.push(SlotKernel { start: spec.variant.window_start(), coeffs: bank.scaled_filter(i) });
    }
    Ok(kernels)
}

/// All slot features `X_{t,i}` for `t = 1..=T`, computed before the online loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    horizon: usize,
    dim: usize,
    /// One `T × d_in` block per slot.
    slots: Vec<Vec<f64>>,
}

impl Features {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// `X_{t,slot}` for 1-based `t`.
    pub fn x(&self, t: usize, slot: usize) -> &[f64] {
        &self.slots[slot][(t - 1) * self.dim..t * self.dim]
    }

    pub fn at(&self, t: usize) -> Vec<&[f64]> {
        (0..self.slots.len()).map(|s| self.x(t, s)).collect()
    }
}

fn check_inputs(spec: &PredictorSpec, inputs: &Sequence) -> Result<()> {
    if inputs.len() != spec.horizon {
        return Err(Error::domain(format!("{} inputs for horizon {}", inputs.len(), spec.horizon)));
    }
    Ok(())
}

/// Each lag contributes one contiguous `axpy` over all steps, so every feature
/// accumulates its terms in increasing lag order, the same order as
/// [`features_at`].
pub fn precompute_features(spec: &PredictorSpec, kernels: &[SlotKernel], inputs: &Sequence) -> Result<Features> {
    check_inputs(spec, inputs)?;
    let (t_len, d) = (spec.horizon, inputs.dim());
    let u = inputs.as_flat();
    let mut slots = Vec::with_capacity(kernels.len());
    for kernel in kernels {
        let mut block = vec![0.0; t_len * d];
        for (p, &c) in kernel.coeffs.iter().enumerate() {
            let lag = kernel.start + p;
            if lag > spec.context || lag > t_len {
                break;
            }
            // X_t += c·u_{t-lag} for t = lag..=T
            let n = (t_len - lag + 1) * d;
            axpy(c, &u[..n], &mut block[(lag - 1) * d..]);
        }
        slots.push(block);
    }
    Ok(Features { horizon: t_len, dim: d, slots })
}

/// Features of a single step `t` (1-based).
pub fn features_at(spec: &PredictorSpec, kernels: &[SlotKernel], inputs: &Sequence, t: usize) -> Result<Vec<Vec<f64>>> {
    check_inputs(spec, inputs)?;
    if t == 0 || t > spec.horizon {
        return Err(Error::domain(format!("features: t = {t} outside 1..={}", spec.horizon)));
    }
    let d = inputs.dim();
    let mut out = Vec::with_capacity(kernels.len());
    for kernel in kernels {
        let mut x = vec![0.0; d];
        for (p, &c) in kernel.coeffs.iter().enumerate() {
            let lag = kernel.start + p;
            if lag > spec.context || lag > t {
                break;
            }
            axpy(c, inputs.get(t - lag), &mut x);
        }
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::{build_filter_bank, DEFAULT_TOL_EIG};
    use crate::lds::{gen_inputs, InputKind};

    fn setup(variant: Variant, t_len: usize, l: usize, k: usize) -> (PredictorSpec, Vec<SlotKernel>, Sequence) {
        let spec = PredictorSpec::new(variant, t_len, l, k, 1.0).unwrap();
        let bank = match variant {
            Variant::Tensor => crate::filterbank::build_tensor_bank(t_len, k, DEFAULT_TOL_EIG).unwrap(),
            _ => build_filter_bank(t_len, spec.windowed_slots(), variant.bank_kind(), DEFAULT_TOL_EIG).unwrap(),
        };
        let kernels = slot_kernels(&spec, &bank).unwrap();
        let u = gen_inputs(InputKind::UnitSphere, 3, t_len, 5).unwrap().values;
        (spec, kernels, u)
    }

    #[test]
    fn precomputed_matches_pointwise() {
        for (variant, k) in [(Variant::Vanilla, 5), (Variant::TwoAr, 5), (Variant::Tensor, 2)] {
            for l in [1, 4, 40] {
                let (spec, kernels, u) = setup(variant, 40, l, k);
                let f = precompute_features(&spec, &kernels, &u).unwrap();
                for t in 1..=40 {
                    let direct = features_at(&spec, &kernels, &u, t).unwrap();
                    for (s, x) in direct.iter().enumerate() {
                        assert_eq!(f.x(t, s), &x[..], "{variant:?} L={l} t={t} slot={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_step_sees_only_u0() {
        let (spec, kernels, u) = setup(Variant::Vanilla, 16, 16, 3);
        let x = features_at(&spec, &kernels, &u, 1).unwrap();
        for (s, xs) in x.iter().enumerate() {
            for (a, b) in xs.iter().zip(u.get(0)) {
                assert_eq!(*a, kernels[s].coeffs[0] * b);
            }
        }
        // two-ar windows start at lag 3, so only the direct slots are live at t = 2
        let (spec, kernels, u) = setup(Variant::TwoAr, 16, 16, 4);
        let x = features_at(&spec, &kernels, &u, 2).unwrap();
        assert_eq!(x[0], u.get(1));
        assert_eq!(x[1], u.get(0));
        assert!(x[2].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn context_truncates() {
        let (spec, kernels, u) = setup(Variant::Vanilla, 30, 2, 3);
        let x = features_at(&spec, &kernels, &u, 20).unwrap();
        for (s, xs) in x.iter().enumerate() {
            let c = &kernels[s].coeffs;
            for j in 0..3 {
                let expect = c[0] * u.get(19)[j] + c[1] * u.get(18)[j];
                assert!((xs[j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mismatched_bank_rejected() {
        let spec = PredictorSpec::new(Variant::TwoAr, 20, 20, 4, 1.0).unwrap();
        let h = build_filter_bank(20, 4, crate::BankKind::VanillaH, DEFAULT_TOL_EIG).unwrap();
        assert!(slot_kernels(&spec, &h).is_err());
        let n = build_filter_bank(21, 4, crate::BankKind::TwoArN, DEFAULT_TOL_EIG).unwrap();
        assert!(slot_kernels(&spec, &n).is_err());
        let n = build_filter_bank(20, 1, crate::BankKind::TwoArN, DEFAULT_TOL_EIG).unwrap();
        assert!(slot_kernels(&spec, &n).is_err());
    }
}
