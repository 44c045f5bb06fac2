use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImpulseKind {
    /// One factor of `(1-α)`, the generator of `H`.
    Plain,
    /// Two factors, `(1-α)²`, the generator of `N`.
    Squared,
}

/// Weighted impulse response of the scalar system `x ↦ αx` unrolled for `n` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseVector {
    pub alpha: f64,
    pub kind: ImpulseKind,
    pub values: Vec<f64>,
}

impl ImpulseVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn impulse_vector(alpha: f64, n: usize, kind: ImpulseKind) -> Result<ImpulseVector> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("impulse_vector: alpha must lie in [0, 1]"));
    }
    if n == 0 {
        return Err(Error::domain("impulse_vector: length must be positive"));
    }
    let weight = match kind {
        ImpulseKind::Plain => 1.0 - alpha,
        ImpulseKind::Squared => (1.0 - alpha) * (1.0 - alpha),
    };
    let mut values = Vec::with_capacity(n);
    let mut power = 1.0;
    for _ in 0..n {
        values.push(weight * power);
        power *= alpha;
    }
    Ok(ImpulseVector { alpha, kind, values })
}

/// Kronecker product with the *first* factor varying fastest:
/// `out[i + a.len() * j] = a[i] * b[j]`.
///
/// With this layout `μ_{α,L²} = (1-α^L)⁻¹ · kron(μ_{α,L}, μ_{α^L,L})`, i.e. the
/// first factor acts inside chunks of length `a.len()` and the second across chunks.
pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &bj in b {
        out.extend(a.iter().map(|&ai| ai * bj));
    }
    out
}
