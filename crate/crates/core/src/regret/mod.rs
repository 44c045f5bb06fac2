//! Full-context comparator and asymmetric regret.

mod comparator;

pub use comparator::{solve_comparator, solve_comparator_with_context, ComparatorDiagnostics, ComparatorResult, SolveMethod, DEFAULT_TOL_OPT};

use alloc::format;

use crate::learner::RunRecord;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport {
    pub horizon: usize,
    /// `Σ_t ℓ_t(M^t, L)`
    pub learner_loss: f64,
    /// `Σ_t ℓ_t(M*, T)`
    pub comparator_loss: f64,
    pub regret: f64,
    /// `regret / √T`
    pub normalized: f64,
    /// `regret / (√T ln T)`
    pub normalized_log: f64,
}

/// Learner loss minus comparator loss on the same data.
pub fn asymmetric_regret(run: &RunRecord, comparator: &ComparatorResult) -> Result<RegretReport> {
    if run.data_hash != comparator.data_hash {
        return Err(Error::domain(format!(
            "asymmetric_regret: data hash {:016x} of the run differs from {:016x} of the comparator",
            run.data_hash, comparator.data_hash
        )));
    }
    let (a, b) = (&run.spec, &comparator.spec);
    if a.variant != b.variant || a.horizon != b.horizon || a.k != b.k {
        return Err(Error::domain("asymmetric_regret: run and comparator use different predictors"));
    }
    let t = a.horizon as f64;
    let learner_loss = run.total_loss();
    let comparator_loss = comparator.total_loss;
    let regret = learner_loss - comparator_loss;
    Ok(RegretReport {
        horizon: a.horizon,
        learner_loss,
        comparator_loss,
        regret,
        normalized: regret / t.sqrt(),
        normalized_log: regret / (t.sqrt() * t.ln().max(f64::MIN_POSITIVE)),
    })
}

/// `12 · slots^{3/2} · r² · ln T · √T`, the worst-case regret of the online
/// learner against any fixed point of `K_r` on the same losses.
pub fn ogd_regret_bound(slots: usize, r: f64, horizon: usize) -> f64 {
    let t = horizon as f64;
    12.0 * (slots as f64).powf(1.5) * r * r * t.ln() * t.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::{build_filter_bank, DEFAULT_TOL_EIG};
    use crate::lds::{gen_inputs, make_random_system, simulate, DKind, InputKind, Sequence};
    use crate::learner::{run_online, PredictorSpec, Variant};

    #[test]
    fn regret_of_matching_artifacts() {
        let spec = PredictorSpec::new(Variant::Vanilla, 64, 8, 4, 1.0).unwrap();
        let bank = build_filter_bank(64, 4, crate::BankKind::VanillaH, DEFAULT_TOL_EIG).unwrap();
        let sys = make_random_system(4, 2, 2, &[0.3, 0.8, 0.95, 0.999], 1, DKind::Zero).unwrap();
        let u = gen_inputs(InputKind::UnitSphere, 2, 64, 1).unwrap();
        let y = simulate(&sys, &u, None).unwrap();
        let run = run_online(&spec, &bank, &u.values, &y).unwrap();
        let comp = solve_comparator(&spec, &bank, &u.values, &y, DEFAULT_TOL_OPT).unwrap();
        assert_eq!(comp.spec.context, 64);
        let rep = asymmetric_regret(&run, &comp).unwrap();
        assert_eq!(rep.regret, run.total_loss() - comp.total_loss);
        assert!((rep.normalized - rep.regret / 8.0).abs() < 1e-15);

        let other = Sequence::zeros(64, 2);
        let comp0 = solve_comparator(&spec, &bank, &u.values, &other, DEFAULT_TOL_OPT).unwrap();
        assert!(asymmetric_regret(&run, &comp0).is_err());
    }

    #[test]
    fn bound_value() {
        let b = ogd_regret_bound(4, 0.5, 100);
        assert!((b - 12.0 * 8.0 * 0.25 * 100f64.ln() * 10.0).abs() < 1e-9);
    }
}
