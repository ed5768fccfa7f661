//! Central finite differences in time and time-grid utilities.

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockState, C64};

/// Five-point central derivative of an operator-valued function.
pub fn derivative_op(f: impl Fn(f64) -> FockOperator, t: f64, h: f64) -> Result<FockOperator> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let fp2 = f(t + 2.0 * h);
    let fp1 = f(t + h);
    let fm1 = f(t - h);
    let fm2 = f(t - 2.0 * h);
    let num = &(&(&fm2 - &fp2) + &fp1.scale(C64::from(8.0))) - &fm1.scale(C64::from(8.0));
    Ok(num.scale(C64::from(1.0 / (12.0 * h))))
}

/// Spacing of a uniform, strictly increasing grid.
pub fn uniform_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::GridTooCoarse {
            points: times.len(),
            needed: 2,
        });
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    let scale = times[0].abs().max(times[times.len() - 1].abs()).max(h);
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * scale {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(h)
}

/// Indices at which [`state_derivative`] can use a central stencil.
pub fn interior(len: usize) -> std::ops::Range<usize> {
    if len >= 5 {
        2..len - 2
    } else if len >= 3 {
        1..len - 1
    } else {
        0..0
    }
}

/// Central difference of sampled states at index `k`: five-point where the
/// grid allows it, three-point otherwise.
pub fn state_derivative(samples: &[FockState], k: usize, h: f64) -> FockState {
    let n = samples.len();
    if n >= 5 && k >= 2 && k + 2 < n {
        let num = &(&(&samples[k - 2] - &samples[k + 2]) + &samples[k + 1].scale(C64::from(8.0)))
            - &samples[k - 1].scale(C64::from(8.0));
        num.scale(C64::from(1.0 / (12.0 * h)))
    } else {
        (&samples[k + 1] - &samples[k - 1]).scale(C64::from(0.5 / h))
    }
}

/// Same stencil for scalar samples.
pub fn scalar_derivative(samples: &[C64], k: usize, h: f64) -> C64 {
    let n = samples.len();
    if n >= 5 && k >= 2 && k + 2 < n {
        (samples[k - 2] - samples[k + 2] + 8.0 * (samples[k + 1] - samples[k - 1])) / (12.0 * h)
    } else {
        (samples[k + 1] - samples[k - 1]) / (2.0 * h)
    }
}

/// For a grid symmetric about zero, the index of `-times[k]`.
pub fn mirror_index(times: &[f64], k: usize) -> usize {
    times.len() - 1 - k
}

pub fn check_symmetric(times: &[f64]) -> Result<()> {
    let n = times.len();
    let scale = times.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(1.0);
    for k in 0..n {
        if (times[k] + times[n - 1 - k]).abs() > 1e-9 * scale {
            return Err(Error::AsymmetricGrid);
        }
    }
    Ok(())
}

/// `count` points uniformly covering `[start, end]`.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let h = (end - start) / (count - 1) as f64;
    (0..count).map(|k| start + h * k as f64).collect()
}

/// Uniform grid on `[-half_width, half_width]` with `2 * per_side + 1` points.
pub fn symmetric_grid(half_width: f64, per_side: usize) -> Vec<f64> {
    let h = half_width / per_side as f64;
    let n = per_side as i64;
    (-n..=n).map(|k| k as f64 * h).collect()
}
