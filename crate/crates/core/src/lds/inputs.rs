use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{LdsSystem, Sequence};
use crate::linalg::{sym_eigen, Mat};
use crate::rng::seeded;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    /// Uniform on the unit sphere of `R^{d_in}`.
    UnitSphere,
    /// Independent entries `±1/√d_in`.
    RademacherScaled,
    /// Every `u_t` equals `(1, …, 1)/√d_in`.
    Constant,
}

impl InputKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InputKind::UnitSphere => "unit-sphere",
            InputKind::RademacherScaled => "rademacher-scaled",
            InputKind::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unit-sphere" => Some(InputKind::UnitSphere),
            "rademacher-scaled" => Some(InputKind::RademacherScaled),
            "constant" => Some(InputKind::Constant),
            _ => None,
        }
    }
}

/// Inputs `u_0 … u_{T-1}`, each of norm at most one, with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    pub values: Sequence,
    /// `None` for sequences that were not generated here.
    pub kind: Option<InputKind>,
    pub seed: Option<u64>,
}

impl InputSequence {
    pub fn from_sequence(values: Sequence) -> Self {
        InputSequence { values, kind: None, seed: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }
}

pub fn gen_inputs(kind: InputKind, d_in: usize, horizon: usize, seed: u64) -> Result<InputSequence> {
    if d_in == 0 || horizon == 0 {
        return Err(Error::domain("gen_inputs: d_in and T must be positive"));
    }
    let mut rng = seeded(seed);
    let scale = 1.0 / (d_in as f64).sqrt();
    let mut data = Vec::with_capacity(d_in * horizon);
    for _ in 0..horizon {
        match kind {
            InputKind::UnitSphere => loop {
                let v: Vec<f64> = (0..d_in).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 1e-150 {
                    data.extend(v.iter().map(|x| x / n));
                    break;
                }
            },
            InputKind::RademacherScaled => {
                data.extend((0..d_in).map(|_| if rng.random::<bool>() { scale } else { -scale }));
            }
            InputKind::Constant => data.extend(core::iter::repeat_n(scale, d_in)),
        }
    }
    Ok(InputSequence { values: Sequence::from_flat(d_in, data)?, kind: Some(kind), seed: Some(seed) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `2 ‖C‖ ‖B‖ / √T`
pub fn conditioning_threshold(system: &LdsSystem, horizon: usize) -> f64 {
    2.0 * system.norm_c() * system.norm_b() / (horizon as f64).sqrt()
}

/// `λ_min(Σ_{t=0}^{T-1} (T - t) u_t u_tᵀ)` against `threshold`.
pub fn conditioning_check(inputs: &InputSequence, threshold: f64) -> Result<Conditioning> {
    let u = &inputs.values;
    let (t_len, d) = (u.len(), u.dim());
    let mut gram = Mat::zeros(d, d);
    for (t, ut) in u.iter().enumerate() {
        let w = (t_len - t) as f64;
        for i in 0..d {
            let wi = w * ut[i];
            let row = gram.row_mut(i);
            for j in 0..d {
                row[j] += wi * ut[j];
            }
        }
    }
    let min_eigenvalue = *sym_eigen(&gram)?.values.last().expect("non-empty");
    Ok(Conditioning { min_eigenvalue, threshold, pass: min_eigenvalue >= threshold })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norms_and_determinism() {
        for kind in [InputKind::UnitSphere, InputKind::RademacherScaled, InputKind::Constant] {
            let u = gen_inputs(kind, 5, 200, 17).unwrap();
            for v in u.values.iter() {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
            assert_eq!(u, gen_inputs(kind, 5, 200, 17).unwrap());
        }
    }

    #[test]
    fn zero_sphere() {
        let u = gen_inputs(InputKind::UnitSphere, 1, 100, 3).unwrap();
        assert!(u.values.as_flat().iter().all(|v| *v == 1.0 || *v == -1.0));
    }

    #[test]
    fn constant_inputs_are_rank_one() {
        let u = gen_inputs(InputKind::Constant, 4, 64, 0).unwrap();
        let c = conditioning_check(&u, 2.0 / 8.0).unwrap();
        assert!(c.min_eigenvalue.abs() < 1e-9);
        assert!(!c.pass);
    }

    #[test]
    fn ones_in_one_dimension() {
        let u = gen_inputs(InputKind::Constant, 1, 50, 0).unwrap();
        let c = conditioning_check(&u, 1.0).unwrap();
        assert_eq!(c.min_eigenvalue, 50.0 * 51.0 / 2.0);
    }

    #[test]
    fn sphere_inputs_well_conditioned() {
        let u = gen_inputs(InputKind::UnitSphere, 8, 1024, 1).unwrap();
        let c = conditioning_check(&u, 2.0 / 32.0).unwrap();
        assert!(c.pass);
        assert!(c.min_eigenvalue > 0.5 * 1024.0 * 1024.0 / 16.0 * 0.5);
    }
}
