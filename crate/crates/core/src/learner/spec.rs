use alloc::format;

use crate::filterbank::BankKind;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Baseline `y_{t-1}`, `k` windowed slots over `H` filters.
    Vanilla,
    /// Baseline `2y_{t-1} - y_{t-2}`, direct slots for `u_{t-1}`, `u_{t-2}` and
    /// `k - 2` windowed slots over `N` filters.
    TwoAr,
    /// Baseline `2y_{t-1} - y_{t-2}`, two direct slots and `k²` windowed slots
    /// over tensor filters.
    Tensor,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::TwoAr => "two-ar",
            Variant::Tensor => "tensor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vanilla" => Some(Variant::Vanilla),
            "two-ar" => Some(Variant::TwoAr),
            "tensor" => Some(Variant::Tensor),
            _ => None,
        }
    }

    pub fn bank_kind(self) -> BankKind {
        match self {
            Variant::Vanilla => BankKind::VanillaH,
            Variant::TwoAr => BankKind::TwoArN,
            Variant::Tensor => BankKind::Tensor,
        }
    }

    /// Number of direct input slots preceding the windowed ones.
    pub fn direct_slots(self) -> usize {
        match self {
            Variant::Vanilla => 0,
            Variant::TwoAr | Variant::Tensor => 2,
        }
    }

    /// Lag of the first entry of a windowed filter.
    pub fn window_start(self) -> usize {
        match self {
            Variant::Vanilla => 1,
            Variant::TwoAr | Variant::Tensor => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorSpec {
    pub variant: Variant,
    pub horizon: usize,
    /// Context length `L`: no feature looks further back than `u_{t-L}`.
    pub context: usize,
    /// Filter count; the component count for tensor predictors.
    pub k: usize,
    /// Per-slot Frobenius radius.
    pub r: f64,
    /// Step sizes are `eta0 / √t`.
    pub eta0: f64,
}

impl PredictorSpec {
    /// Uses the default step scale [`default_eta0`].
    pub fn new(variant: Variant, horizon: usize, context: usize, k: usize, r: f64) -> Result<Self> {
        if horizon == 0 || context == 0 || context > horizon {
            return Err(Error::domain(format!("PredictorSpec: need 1 <= L <= T, got L = {context}, T = {horizon}")));
        }
        let min_k = if variant == Variant::TwoAr { 3 } else { 1 };
        if k < min_k {
            return Err(Error::domain(format!("PredictorSpec: k must be at least {min_k} for {}", variant.as_str())));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain("PredictorSpec: r must be positive and finite"));
        }
        let mut spec = PredictorSpec { variant, horizon, context, k, r, eta0: 0.0 };
        spec.eta0 = default_eta0(spec.slots(), horizon);
        Ok(spec)
    }

    pub fn with_eta0(mut self, eta0: f64) -> Result<Self> {
        if !(eta0 > 0.0) || !eta0.is_finite() {
            return Err(Error::domain("PredictorSpec: eta0 must be positive and finite"));
        }
        self.eta0 = eta0;
        Ok(self)
    }

    /// Same predictor with a different context length, keeping `eta0`.
    pub fn with_context(mut self, context: usize) -> Result<Self> {
        if context == 0 || context > self.horizon {
            return Err(Error::domain("PredictorSpec: need 1 <= L <= T"));
        }
        self.context = context;
        Ok(self)
    }

    /// Total number of learned matrices.
    pub fn slots(&self) -> usize {
        self.variant.direct_slots() + self.windowed_slots()
    }

    pub fn windowed_slots(&self) -> usize {
        match self.variant {
            Variant::Vanilla => self.k,
            Variant::TwoAr => self.k - 2,
            Variant::Tensor => self.k * self.k,
        }
    }
}

/// `L = round(T^q)`, clamped to `1..=T`.
pub fn context_from_q(horizon: usize, q: f64) -> usize {
    let l = (horizon as f64).powf(q).round() as usize;
    l.clamp(1, horizon.max(1))
}

/// `D / G` for the diameter `D = 2√slots·r` and gradient bound
/// `G = 4·slots·r·ln T` of the constraint set, i.e. `1 / (2√slots·ln T)`.
/// `ln T` is floored at 1 so that tiny horizons do not blow the step up.
pub fn default_eta0(slots: usize, horizon: usize) -> f64 {
    let log_t = (horizon as f64).ln().max(1.0);
    1.0 / (2.0 * (slots as f64).sqrt() * log_t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_counts() {
        assert_eq!(PredictorSpec::new(Variant::Vanilla, 64, 8, 24, 1.0).unwrap().slots(), 24);
        assert_eq!(PredictorSpec::new(Variant::TwoAr, 64, 8, 24, 1.0).unwrap().slots(), 24);
        assert_eq!(PredictorSpec::new(Variant::Tensor, 64, 8, 3, 1.0).unwrap().slots(), 11);
    }

    #[test]
    fn invalid_specs() {
        assert!(PredictorSpec::new(Variant::TwoAr, 64, 8, 2, 1.0).is_err());
        assert!(PredictorSpec::new(Variant::Vanilla, 64, 65, 2, 1.0).is_err());
        assert!(PredictorSpec::new(Variant::Vanilla, 64, 0, 2, 1.0).is_err());
        assert!(PredictorSpec::new(Variant::Vanilla, 64, 8, 2, 0.0).is_err());
    }

    #[test]
    fn contexts() {
        assert_eq!(context_from_q(4096, 0.5), 64);
        assert_eq!(context_from_q(4096, 1.0), 4096);
        assert_eq!(context_from_q(4096, 0.0), 1);
        assert_eq!(context_from_q(4096, 0.875), 1448);
    }
}
