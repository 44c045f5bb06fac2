//! File formats, run directories, experiment sweeps and the `sflen` command
//! line on top of [`sflen_core`].
//!
//! Artifacts:
//!
//! - `sf-bank v1` filter banks and `sf-lds v1` systems ([`formats`]);
//! - run directories with `run.csv` (`step,loss,cumulative_loss,prediction_norm`)
//!   and a JSON sidecar ([`rundir`]);
//! - sweep outputs `runs/<q>_<seed>.csv`, `aggregate_<q>.csv`
//!   (`step,mean_loss,smoothed_loss`), `regret.csv` and `manifest.json` ([`sweep`]).

pub mod config;
mod error;
pub mod formats;
pub mod rundir;
pub mod sweep;

pub use config::{ExperimentConfig, RegionSpec, Wrap};
pub use error::{Error, Result};
pub use sweep::{run_sweep, write_sweep, SweepResult};

use sflen_core::filterbank::{build_filter_bank, build_tensor_bank, FilterBank, DEFAULT_TOL_EIG};
use sflen_core::learner::Variant;

/// The bank a predictor of `variant` with parameter `k` reads from.
pub fn bank_for(variant: Variant, horizon: usize, k: usize) -> Result<FilterBank> {
    Ok(match variant {
        Variant::Tensor => build_tensor_bank(horizon, k, DEFAULT_TOL_EIG)?,
        Variant::Vanilla => build_filter_bank(horizon, k, variant.bank_kind(), DEFAULT_TOL_EIG)?,
        Variant::TwoAr => build_filter_bank(horizon, k.saturating_sub(2).max(1), variant.bank_kind(), DEFAULT_TOL_EIG)?,
    })
}

/// Independent RNG streams of one experiment seed: 0 eigenvalues, 1 system, 2 inputs.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(4).wrapping_add(stream)
}
