use alloc::vec::Vec;
use rand::Rng;

use crate::learner::Variant;
use crate::rng::seeded;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// The `q` at which the hug band is anchored.
pub const HUG_Q: f64 = 7.0 / 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Open intervals exclude both endpoints.
    pub open: bool,
}

impl Interval {
    pub fn is_empty(&self) -> bool {
        if self.open {
            !(self.lo < self.hi)
        } else {
            !(self.lo <= self.hi)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.open {
            self.lo < x && x < self.hi
        } else {
            self.lo <= x && x <= self.hi
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Eigenvalues for which limited-context generalization is not guaranteed.
    BadBand,
    /// Two closed intervals just outside the vanilla bad band.
    HugBand,
    Explicit,
}

/// A set of admissible eigenvalues made of one or two intervals in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigRegion {
    pub kind: RegionKind,
    pub horizon: usize,
    pub q: f64,
    pub components: Vec<Interval>,
}

impl EigRegion {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::domain("interval region must satisfy 0 <= lo <= hi <= 1"));
        }
        Ok(EigRegion {
            kind: RegionKind::Explicit,
            horizon: 0,
            q: f64::NAN,
            components: alloc::vec![Interval { lo, hi, open: false }],
        })
    }

    pub fn is_empty(&self) -> bool {
        self.components.iter().all(Interval::is_empty)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }
}

fn left_edge(horizon: usize, q: f64) -> f64 {
    let t = horizon as f64;
    1.0 - t.ln() / (8.0 * t.powf(q))
}

fn right_edge(horizon: usize, variant: Variant) -> f64 {
    let exponent = match variant {
        Variant::Vanilla => 1.25,
        Variant::TwoAr | Variant::Tensor => 0.25,
    };
    1.0 - 1.0 / (2.0 * (horizon as f64).powf(exponent))
}

/// The open bad band `(1 - ln T/(8 T^q), 1 - 1/(2 T^e))` with `e = 5/4` for the
/// vanilla predictor and `e = 1/4` for the two-autoregressive and tensor ones.
/// The left edge is clipped at 0. The band is empty when the edges cross, which
/// is decided by evaluating the formula rather than by a threshold on `q`.
pub fn region_bounds(horizon: usize, q: f64, variant: Variant) -> Result<EigRegion> {
    if horizon < 2 {
        return Err(Error::domain("region_bounds: T must be at least 2"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain("region_bounds: q must lie in [0, 1]"));
    }
    let band = Interval { lo: left_edge(horizon, q).max(0.0), hi: right_edge(horizon, variant), open: true };
    Ok(EigRegion { kind: RegionKind::BadBand, horizon, q, components: alloc::vec![band] })
}

/// `[0.9 a, a] ∪ [b, 1]` with `a = 1 - ln T/(8 T^q)` and `b = 1 - 1/(2 T^{5/4})`.
pub fn hug_band(horizon: usize, q: f64) -> Result<EigRegion> {
    let bad = region_bounds(horizon, q, Variant::Vanilla)?;
    let a = bad.components[0].lo;
    let b = bad.components[0].hi;
    Ok(EigRegion {
        kind: RegionKind::HugBand,
        horizon,
        q,
        components: alloc::vec![Interval { lo: 0.9 * a, hi: a, open: false }, Interval { lo: b, hi: 1.0, open: false }],
    })
}

/// Uniform samples. With two components the first `⌈count/2⌉` values come from
/// the first component and the rest from the second.
pub fn sample_region(region: &EigRegion, count: usize, seed: u64) -> Result<Vec<f64>> {
    if region.is_empty() || region.components.iter().any(Interval::is_empty) {
        return Err(Error::domain("sample_region: region has an empty component"));
    }
    let mut rng = seeded(seed);
    let parts = region.components.len();
    let mut out = Vec::with_capacity(count);
    for (c, comp) in region.components.iter().enumerate() {
        let n = if parts == 1 {
            count
        } else if c == 0 {
            count.div_ceil(2)
        } else {
            count - count.div_ceil(2)
        };
        for _ in 0..n {
            out.push(draw(comp, &mut rng)?);
        }
    }
    Ok(out)
}

fn draw(comp: &Interval, rng: &mut impl Rng) -> Result<f64> {
    for _ in 0..1000 {
        let u: f64 = rng.random();
        let x = comp.lo + (comp.hi - comp.lo) * u;
        if comp.contains(x) {
            return Ok(x);
        }
    }
    Err(Error::domain("sample_region: open interval too narrow to sample"))
}
