//! Spectral filtering online predictors with limited context length.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! - [`filterbank`]: Hankel-type matrices `H_T` / `N_T`, their top eigenvectors
//!   (the spectral filters) and tensorized filter banks.
//! - [`lds`]: noiseless diagonal linear dynamical systems, eigenvalue regions,
//!   seeded input generators and the input conditioning check.
//! - [`learner`]: the general spectral filtering predictor trained with projected
//!   online gradient descent, in its vanilla, two-autoregressive and tensor forms.
//! - [`regret`]: the full-context constrained least-squares comparator and the
//!   asymmetric regret of a finished run.
//! - [`aggregate`]: seed averaging and smoothing of loss curves.
//!
//! IO, file formats and the command line live in the `sflen` crate.
//!
//! `sqrt`, `ln`, `powf` and `cos` come from `num_traits::Float` (backed by
//! `libm`). When anything in the build links `std`, its inherent `f64` methods
//! shadow the trait, hence the `allow(unused_imports)` on those imports.
#![no_std]

extern crate alloc;

pub mod aggregate;
mod error;
pub mod filterbank;
pub mod lds;
pub mod learner;
pub mod linalg;
pub mod regret;
mod rng;

pub use error::{Error, Result};
pub use filterbank::{BankKind, FilterBank, HankelKind, HankelMatrix, ImpulseKind};
pub use lds::{EigRegion, InputKind, InputSequence, LdsSystem, Sequence};
pub use learner::{PredictorSpec, RunRecord, Variant};
pub use regret::{ComparatorResult, RegretReport};
pub use rng::data_hash;
