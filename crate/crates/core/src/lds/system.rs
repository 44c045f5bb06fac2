use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand_distr::{Distribution, StandardNormal};

use super::{InputSequence, Sequence};
use crate::linalg::{spectral_norm, Mat};
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DKind {
    Zero,
    Identity,
}

impl DKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DKind::Zero => "zero",
            DKind::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(DKind::Zero),
            "identity" => Some(DKind::Identity),
            _ => None,
        }
    }
}

/// `(A, B, C, D)` with `A = diag(eigenvalues)`, every eigenvalue in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdsSystem {
    eigenvalues: Vec<f64>,
    b: Mat,
    c: Mat,
    d: Mat,
    norm_b: f64,
    norm_c: f64,
}

impl LdsSystem {
    /// `b` is `d_hidden × d_in`, `c` is `d_out × d_hidden`, `d` is `d_out × d_in`.
    pub fn new(eigenvalues: Vec<f64>, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let h = eigenvalues.len();
        if h == 0 || b.rows() != h || c.cols() != h || d.rows() != c.rows() || d.cols() != b.cols() || b.cols() == 0 || c.rows() == 0 {
            return Err(Error::domain(format!(
                "LdsSystem: inconsistent shapes (d_hidden {h}, B {}x{}, C {}x{}, D {}x{})",
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            )));
        }
        if eigenvalues.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::domain("LdsSystem: eigenvalues must lie in [0, 1]"));
        }
        let norm_b = spectral_norm(&b);
        let norm_c = spectral_norm(&c);
        Ok(LdsSystem { eigenvalues, b, c, d, norm_b, norm_c })
    }

    pub fn d_hidden(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn d_in(&self) -> usize {
        self.b.cols()
    }

    pub fn d_out(&self) -> usize {
        self.c.rows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    pub fn d(&self) -> &Mat {
        &self.d
    }

    pub fn norm_b(&self) -> f64 {
        self.norm_b
    }

    pub fn norm_c(&self) -> f64 {
        self.norm_c
    }
}

fn gaussian_unit_norm(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> Mat {
    let mut m = Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    let n = spectral_norm(&m);
    m.scale(1.0 / n);
    m
}

/// `B` and `C` have i.i.d. standard normal entries rescaled to unit spectral norm.
pub fn make_random_system(d_hidden: usize, d_in: usize, d_out: usize, eigenvalues: &[f64], seed: u64, d_kind: DKind) -> Result<LdsSystem> {
    if eigenvalues.len() != d_hidden {
        return Err(Error::domain(format!("make_random_system: {} eigenvalues for d_hidden {d_hidden}", eigenvalues.len())));
    }
    if d_hidden == 0 || d_in == 0 || d_out == 0 {
        return Err(Error::domain("make_random_system: dimensions must be positive"));
    }
    let mut rng = seeded(seed);
    let b = gaussian_unit_norm(d_hidden, d_in, &mut rng);
    let c = gaussian_unit_norm(d_out, d_hidden, &mut rng);
    let d = match d_kind {
        DKind::Zero => Mat::zeros(d_out, d_in),
        DKind::Identity => Mat::from_fn(d_out, d_in, |i, j| if i == j { 1.0 } else { 0.0 }),
    };
    LdsSystem::new(eigenvalues.to_vec(), b, c, d)
}

/// Outputs `y_1 … y_T` for inputs `u_0 … u_{T-1}`; `x0` defaults to zero.
pub fn simulate(system: &LdsSystem, inputs: &InputSequence, x0: Option<&[f64]>) -> Result<Sequence> {
    run(system, inputs, x0, None)
}

/// As [`simulate`], adding i.i.d. `N(0, std²)` noise to every state and output
/// coordinate.
pub fn simulate_noisy(system: &LdsSystem, inputs: &InputSequence, x0: Option<&[f64]>, std: f64, seed: u64) -> Result<Sequence> {
    if !(std >= 0.0) {
        return Err(Error::domain("simulate_noisy: std must be non-negative"));
    }
    run(system, inputs, x0, Some((std, seed)))
}

fn run(system: &LdsSystem, inputs: &InputSequence, x0: Option<&[f64]>, noise: Option<(f64, u64)>) -> Result<Sequence> {
    let u = &inputs.values;
    if u.dim() != system.d_in() {
        return Err(Error::domain(format!("simulate: input dimension {} != d_in {}", u.dim(), system.d_in())));
    }
    let h = system.d_hidden();
    let mut x = match x0 {
        Some(x0) if x0.len() != h => return Err(Error::domain("simulate: x0 has the wrong length")),
        Some(x0) => x0.to_vec(),
        None => vec![0.0; h],
    };
    let mut rng = noise.map(|(_, seed)| seeded(seed));
    let std = noise.map_or(0.0, |(s, _)| s);
    let mut y = Sequence::zeros(u.len(), system.d_out());
    let mut bu = vec![0.0; h];
    for s in 0..u.len() {
        let us = u.get(s);
        let out = y.get_mut(s);
        system.c.matvec_acc(&x, out);
        system.d.matvec_acc(us, out);
        bu.iter_mut().for_each(|v| *v = 0.0);
        system.b.matvec_acc(us, &mut bu);
        for i in 0..h {
            x[i] = system.eigenvalues[i] * x[i] + bu[i];
        }
        if let Some(rng) = rng.as_mut() {
            for v in out.iter_mut() {
                *v += std * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
            }
            for v in x.iter_mut() {
                *v += std * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
            }
        }
    }
    Ok(y)
}
