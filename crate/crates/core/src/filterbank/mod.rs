//! Spectral filter construction.
//!
//! The filters are the top eigenvectors of the Hankel-type matrices
//! `H_n = ∫ μ_α μ_αᵀ dα` with `μ_α = (1-α)(1, α, α², …)` and
//! `N_n = ∫ μ̃_α μ̃_αᵀ dα` with `μ̃_α = (1-α)²(1, α, α², …)`, both of which have
//! closed-form entries. Lengths are always explicit: a vanilla bank for horizon
//! `T` uses `H_{T-1}`, a two-autoregressive bank uses `N_{T-2}` and a tensor
//! bank uses Kronecker products of `H_m` filters with `m² ≥ T-2`.

mod bank;
mod eig;
mod hankel;
mod impulse;

pub use bank::{build_filter_bank, build_tensor_bank, tensor_horizon, BankKind, FilterBank};
pub use eig::{eig_sym_topk, TopEigen, DEFAULT_TOL_EIG};
pub use hankel::{build_hankel, hankel_entry, HankelKind, HankelMatrix};
pub use impulse::{impulse_vector, kron, ImpulseKind, ImpulseVector};
