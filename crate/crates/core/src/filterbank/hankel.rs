use crate::linalg::Mat;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HankelKind {
    /// `H_n = ∫ μ_α μ_αᵀ dα`
    H,
    /// `N_n = ∫ μ̃_α μ̃_αᵀ dα`
    N,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    pub kind: HankelKind,
    pub entries: Mat,
}

impl HankelMatrix {
    pub fn size(&self) -> usize {
        self.entries.rows()
    }
}

/// Closed form of entry `(i, j)` (1-based), with `s = i + j`:
///
/// - `H`: `∫(1-α)² α^{s-2} dα = 2 / ((s-1) s (s+1))`
/// - `N`: `∫(1-α)⁴ α^{s-2} dα = 24 / ((s-1) s (s+1) (s+2) (s+3))`
///
/// The integer denominator is formed exactly and rounded once.
pub fn hankel_entry(kind: HankelKind, i: usize, j: usize) -> f64 {
    let s = (i + j) as u128;
    match kind {
        HankelKind::H => 2.0 / ((s - 1) * s * (s + 1)) as f64,
        HankelKind::N => 24.0 / ((s - 1) * s * (s + 1) * (s + 2) * (s + 3)) as f64,
    }
}

pub fn build_hankel(n: usize, kind: HankelKind) -> Result<HankelMatrix> {
    if n == 0 {
        return Err(Error::domain("build_hankel: size must be positive"));
    }
    // entries depend on i + j only
    let diag: alloc::vec::Vec<f64> = (2..=2 * n).map(|s| hankel_entry(kind, 1, s - 1)).collect();
    let entries = Mat::from_fn(n, n, |i, j| diag[i + j]);
    Ok(HankelMatrix { kind, entries })
}
