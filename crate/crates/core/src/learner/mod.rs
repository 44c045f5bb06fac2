//! The general spectral filtering predictor trained online.
//!
//! At step `t` the predictor forms
//!
//! ```text
//! ŷ_t = p_t + Σ_i M_i X_{t,i}
//! ```
//!
//! where `p_t` is the autoregressive baseline and `X_{t,i}` is a convolution of
//! the last `L` inputs with slot `i`'s kernel. The matrices `M_i` are updated by
//! projected online gradient descent on the squared loss.

mod features;
mod online;
mod spec;

pub use features::{features_at, precompute_features, slot_kernels, Features, SlotKernel};
pub use online::{baseline, fixed_losses, loss_and_grad, ogd_step, predict, run_online, PredictorState, RunRecord, StepOutcome};
pub use spec::{context_from_q, default_eta0, PredictorSpec, Variant};
