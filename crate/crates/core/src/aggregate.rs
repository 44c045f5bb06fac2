//! Seed averaging and smoothing of per-step loss curves.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub smoothed: Vec<f64>,
    /// Mean of the last `⌈0.05 T⌉` smoothed values.
    pub final_window: f64,
    pub window: usize,
}

/// Pointwise mean over curves of equal length.
pub fn seed_mean(curves: &[&[f64]]) -> Result<Vec<f64>> {
    let first = curves.first().ok_or_else(|| Error::domain("seed_mean: no curves"))?;
    if curves.iter().any(|c| c.len() != first.len()) {
        return Err(Error::domain("seed_mean: curves differ in length"));
    }
    let n = curves.len() as f64;
    Ok((0..first.len()).map(|t| curves.iter().map(|c| c[t]).sum::<f64>() / n).collect())
}

/// Centered moving average: position `t` averages indices
/// `t - (w-1)/2 ..= t + w/2`, truncated at both ends.
pub fn moving_average(x: &[f64], w: usize) -> Result<Vec<f64>> {
    if w == 0 {
        return Err(Error::domain("moving_average: window must be positive"));
    }
    let n = x.len();
    let (back, ahead) = ((w - 1) / 2, w / 2);
    Ok((0..n)
        .map(|t| {
            let window = &x[t.saturating_sub(back)..(t + ahead + 1).min(n)];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect())
}

pub fn final_window_mean(smoothed: &[f64]) -> Result<f64> {
    if smoothed.is_empty() {
        return Err(Error::domain("final_window_mean: empty curve"));
    }
    let n = smoothed.len().div_ceil(20).max(1);
    let tail = &smoothed[smoothed.len() - n..];
    Ok(tail.iter().sum::<f64>() / n as f64)
}

/// `w = max(1, T/100)`
pub fn default_window(horizon: usize) -> usize {
    (horizon / 100).max(1)
}

pub fn aggregate(curves: &[&[f64]], w: usize) -> Result<Aggregate> {
    let mean = seed_mean(curves)?;
    if w > mean.len().max(1) {
        return Err(Error::domain("aggregate: window exceeds the horizon"));
    }
    let smoothed = moving_average(&mean, w)?;
    let final_window = final_window_mean(&smoothed)?;
    Ok(Aggregate { mean, smoothed, final_window, window: w })
}
