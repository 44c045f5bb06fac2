use alloc::format;
use alloc::vec::Vec;

use super::{build_hankel, eig_sym_topk, kron, HankelKind};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BankKind {
    /// Top eigenvectors of `H_{T-1}`.
    VanillaH,
    /// Top eigenvectors of `N_{T-2}`.
    TwoArN,
    /// Kronecker products of top eigenvectors of `H_m`, `m = ⌈√(T-2)⌉`.
    Tensor,
}

impl BankKind {
    /// Short name used by the text format and the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            BankKind::VanillaH => "h",
            BankKind::TwoArN => "n",
            BankKind::Tensor => "tensor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "h" => Some(BankKind::VanillaH),
            "n" => Some(BankKind::TwoArN),
            "tensor" => Some(BankKind::Tensor),
            _ => None,
        }
    }
}

/// An immutable set of orthonormal spectral filters.
///
/// Filters are stored unscaled; the `σ^{1/4}` weight is applied when features
/// are formed. For tensor banks `eigenvalues[s]` holds the product `σ_i σ_j` of
/// the two component eigenvalues of slot `s = i·k + j` (row-major in `(i, j)`),
/// so the same `σ^{1/4}` rule yields the weight `σ_i^{1/4} σ_j^{1/4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    kind: BankKind,
    horizon: usize,
    k: usize,
    filters: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    scaled: bool,
}

impl FilterBank {
    /// Assemble a bank from stored parts, checking shapes and signs.
    ///
    /// `k` is the number of filters, except for tensor banks where it is the
    /// component count and `k²` filters are expected.
    pub fn from_parts(kind: BankKind, horizon: usize, k: usize, filters: Vec<Vec<f64>>, eigenvalues: Vec<f64>) -> Result<Self> {
        let expected_len = filter_length(kind, horizon)?;
        let expected_count = if kind == BankKind::Tensor { k * k } else { k };
        if k == 0 || filters.len() != expected_count || eigenvalues.len() != expected_count {
            return Err(Error::domain(format!(
                "filter bank: expected {expected_count} filters and eigenvalues, got {} and {}",
                filters.len(),
                eigenvalues.len()
            )));
        }
        if let Some(f) = filters.iter().find(|f| f.len() != expected_len) {
            return Err(Error::domain(format!("filter bank: filter length {} != {expected_len}", f.len())));
        }
        if eigenvalues.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::domain("filter bank: eigenvalues must be finite and non-negative"));
        }
        Ok(FilterBank { kind, horizon, k, filters, eigenvalues, scaled: false })
    }

    pub fn kind(&self) -> BankKind {
        self.kind
    }

    /// The horizon `T` the bank was built for.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Requested filter count (component count for tensor banks).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_filters(&self) -> usize {
        self.filters.len()
    }

    pub fn filter_length(&self) -> usize {
        self.filters[0].len()
    }

    pub fn filter(&self, i: usize) -> &[f64] {
        &self.filters[i]
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Whether the `σ^{1/4}` weights are baked into the stored filters. Always
    /// `false` for banks built here.
    pub fn scaled(&self) -> bool {
        self.scaled
    }

    /// `σ_i^{1/4}`
    pub fn feature_weight(&self, i: usize) -> f64 {
        self.eigenvalues[i].powf(0.25)
    }

    /// `σ_i^{1/4} φ_i`
    pub fn scaled_filter(&self, i: usize) -> Vec<f64> {
        let w = self.feature_weight(i);
        self.filters[i].iter().map(|v| v * w).collect()
    }

    /// `T′ = ⌈√(T-2)⌉² + 2` for tensor banks.
    pub fn tensor_horizon(&self) -> Option<usize> {
        (self.kind == BankKind::Tensor).then(|| tensor_horizon(self.horizon))
    }

    /// Same bank with its filter slots reordered: slot `s` of the result is
    /// slot `order[s]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = alloc::vec![false; self.filters.len()];
        if order.len() != self.filters.len() || order.iter().any(|&i| i >= seen.len() || core::mem::replace(&mut seen[i], true)) {
            return Err(Error::domain("permuted: not a permutation of the filter slots"));
        }
        Ok(FilterBank {
            filters: order.iter().map(|&i| self.filters[i].clone()).collect(),
            eigenvalues: order.iter().map(|&i| self.eigenvalues[i]).collect(),
            ..self.clone()
        })
    }
}

fn filter_length(kind: BankKind, horizon: usize) -> Result<usize> {
    match kind {
        BankKind::VanillaH if horizon >= 2 => Ok(horizon - 1),
        BankKind::TwoArN if horizon >= 3 => Ok(horizon - 2),
        BankKind::Tensor if horizon >= 6 => Ok(tensor_horizon(horizon) - 2),
        _ => Err(Error::domain(format!("filter bank: horizon {horizon} too small for kind {}", kind.as_str()))),
    }
}

/// `⌈√(T-2)⌉² + 2`, for `T ≥ 3`.
pub fn tensor_horizon(horizon: usize) -> usize {
    component_length(horizon) * component_length(horizon) + 2
}

fn component_length(horizon: usize) -> usize {
    let target = horizon.saturating_sub(2);
    let mut m = (target as f64).sqrt() as usize;
    while m * m < target {
        m += 1;
    }
    while m > 0 && (m - 1) * (m - 1) >= target {
        m -= 1;
    }
    m
}

/// Build a vanilla (`H_{T-1}`) or two-autoregressive (`N_{T-2}`) bank of `k` filters.
/// Tensor banks are delegated to [`build_tensor_bank`].
pub fn build_filter_bank(horizon: usize, k: usize, kind: BankKind, tol_eig: f64) -> Result<FilterBank> {
    let (size, hankel) = match kind {
        BankKind::Tensor => return build_tensor_bank(horizon, k, tol_eig),
        BankKind::VanillaH => (filter_length(kind, horizon)?, HankelKind::H),
        BankKind::TwoArN => (filter_length(kind, horizon)?, HankelKind::N),
    };
    if k == 0 || k > size {
        return Err(Error::domain(format!("build_filter_bank: k = {k} must be in 1..={size}")));
    }
    let matrix = build_hankel(size, hankel)?;
    let top = eig_sym_topk(&matrix.entries, k, tol_eig)?;
    // roundoff can leave the tail of the spectrum slightly negative
    let eigenvalues = top.values.iter().map(|s| s.max(0.0)).collect();
    FilterBank::from_parts(kind, horizon, k, top.vectors, eigenvalues)
}

/// Tensorized bank: `k²` filters `φ_i ⊗ φ_j` of length `T′-2` where the `φ` are
/// the top-`k` eigenvectors of `H_m`, `m = √(T′-2)`. Slots are row-major in
/// `(i, j)` and filter entry `a + m·b` equals `φ_i[a] φ_j[b]`.
pub fn build_tensor_bank(horizon: usize, k: usize, tol_eig: f64) -> Result<FilterBank> {
    if horizon < 6 {
        return Err(Error::domain("build_tensor_bank: horizon must be at least 6"));
    }
    let m = component_length(horizon);
    if k == 0 || k > m {
        return Err(Error::domain(format!("build_tensor_bank: k = {k} must be in 1..={m}")));
    }
    let matrix = build_hankel(m, HankelKind::H)?;
    let top = eig_sym_topk(&matrix.entries, k, tol_eig)?;
    let sigma: Vec<f64> = top.values.iter().map(|s| s.max(0.0)).collect();
    let mut filters = Vec::with_capacity(k * k);
    let mut eigenvalues = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            filters.push(kron(&top.vectors[i], &top.vectors[j]));
            eigenvalues.push(sigma[i] * sigma[j]);
        }
    }
    FilterBank::from_parts(BankKind::Tensor, horizon, k, filters, eigenvalues)
}
