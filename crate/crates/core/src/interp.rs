//! Windowed sinc interpolation: kernel evaluation, pointwise bandlimited
//! interpolation of discrete buffers, and a general-purpose resampler.
//!
//! The kernel is `h(t, T) = g(t) * sinc(t / T)` where `g` is a compactly
//! supported window vanishing outside `|t| <= L*T/2`. The interpolant of a
//! buffer `x` with period `T` is `x~(t) = sum_n x[n] h(t - nT, T)`; compact
//! support reduces the sum to `n in [ceil(t/T - L/2), floor(t/T + L/2)]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Kaiser shape parameter for the interpolation kernel.
pub const DEFAULT_KAISER_BETA: f64 = 14.769656459379492;

/// Relative snap tolerance for detecting integer grid offsets in `t / T`.
const GRID_SNAP_TOL: f64 = 1e-9;

/// Window family for the interpolation kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Kaiser,
    Hann,
    Rectangular,
}

/// Compactly supported window: zero outside `|t| > L * period / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    /// Kaiser shape parameter; ignored by the other kinds.
    pub beta: f64,
    /// Support half-width in kernel periods.
    pub half_width: u32,
}

impl WindowSpec {
    pub fn new(kind: WindowKind, beta: f64, half_width: u32) -> Result<Self> {
        if half_width < 1 {
            return Err(Error::InvalidHalfWidth);
        }
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
        Ok(Self { kind, beta, half_width })
    }

    /// Kaiser window with the default shape parameter.
    pub fn kaiser(half_width: u32) -> Result<Self> {
        Self::new(WindowKind::Kaiser, DEFAULT_KAISER_BETA, half_width)
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { kind: WindowKind::Kaiser, beta: DEFAULT_KAISER_BETA, half_width: 16 }
    }
}

/// 1-D sample sequence with its sampling period in seconds.
///
/// Indexing outside `[0, len)` reads as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    period: f64,
}

impl SignalBuffer {
    pub fn new(samples: Vec<f64>, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidPeriod(period));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self { samples, period })
    }

    pub fn from_rate(samples: Vec<f64>, rate_hz: f64) -> Result<Self> {
        Self::new(samples, 1.0 / rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn rate_hz(&self) -> f64 {
        1.0 / self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample with implicit zero extension.
    pub fn get(&self, n: i64) -> f64 {
        if n < 0 || n as usize >= self.samples.len() {
            0.0
        } else {
            self.samples[n as usize]
        }
    }
}

/// `sin(pi t) / (pi t)` with the removable singularity at 0.
///
/// Exact zeros at nonzero integers are returned as true zeros so that the
/// cardinal property of the interpolant holds without tolerance.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else if t.fract() == 0.0 {
        0.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Evaluate the window at time `t` for a kernel of the given period.
///
/// Evenness is exact: evaluation goes through `|t|`.
pub fn window_eval(spec: &WindowSpec, t: f64, period: f64) -> f64 {
    let t = t.abs();
    let half_support = spec.half_width as f64 * period / 2.0;
    if t > half_support {
        return 0.0;
    }
    match spec.kind {
        WindowKind::Rectangular => 1.0,
        WindowKind::Hann => {
            // Raised cosine over the full support width L*period.
            0.5 * (1.0 + (PI * t / half_support).cos())
        }
        WindowKind::Kaiser => {
            let u = t / half_support;
            bessel_i0(spec.beta * (1.0 - u * u).max(0.0).sqrt()) / bessel_i0(spec.beta)
        }
    }
}

/// The windowed sinc kernel `h(t, T) = g(t) * sinc(t / T)`.
pub fn windowed_sinc(spec: &WindowSpec, t: f64, period: f64) -> f64 {
    let t = t.abs();
    if t > spec.half_width as f64 * period / 2.0 {
        return 0.0;
    }
    window_eval(spec, t, period) * sinc(t / period)
}

/// Kernel evaluated at a normalized offset `delta = t / period`.
///
/// Used by the layer algorithms, which track offsets as exact rationals.
pub(crate) fn kernel_at_offset(spec: &WindowSpec, delta: f64) -> f64 {
    let delta = delta.abs();
    let half = spec.half_width as f64 / 2.0;
    if delta > half {
        return 0.0;
    }
    let g = match spec.kind {
        WindowKind::Rectangular => 1.0,
        WindowKind::Hann => 0.5 * (1.0 + (PI * delta / half).cos()),
        WindowKind::Kaiser => {
            let u = delta / half;
            bessel_i0(spec.beta * (1.0 - u * u).max(0.0).sqrt()) / bessel_i0(spec.beta)
        }
    };
    g * sinc(delta)
}

/// Snap `u` to the nearest integer when within the grid tolerance.
fn snap_to_grid(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() <= GRID_SNAP_TOL * u.abs().max(1.0) {
        r
    } else {
        u
    }
}

/// Bandlimited interpolation of `x` at continuous time `t` (seconds).
pub fn interpolate(x: &SignalBuffer, spec: &WindowSpec, t: f64) -> f64 {
    interpolate_with_kernel(x, spec, t, x.period(), 1.0)
}

/// Interpolation with an explicit kernel period (for antialiased resampling)
/// and output gain.
fn interpolate_with_kernel(
    x: &SignalBuffer,
    spec: &WindowSpec,
    t: f64,
    kernel_period: f64,
    gain: f64,
) -> f64 {
    let period = x.period();
    let u = snap_to_grid(t / period);
    // Support of h(t - n*period, kernel_period) in n.
    let same_period = kernel_period == period;
    let half_span = spec.half_width as f64 * kernel_period / (2.0 * period);
    let lo = ((u - half_span).ceil() as i64).max(0);
    let hi = ((u + half_span).floor() as i64).min(x.len() as i64 - 1);
    let mut acc = 0.0;
    for n in lo..=hi {
        let h = if same_period {
            // Normalized offsets keep integer grid hits exact.
            kernel_at_offset(spec, u - n as f64)
        } else {
            windowed_sinc(spec, (u - n as f64) * period, kernel_period)
        };
        acc += x.get(n) * h;
    }
    gain * acc
}

/// Resample `x` to a new sampling period.
///
/// With `antialias` set and `out_period > in_period` the kernel runs at the
/// output period (lowpass to the output Nyquist) with gain
/// `in_period / out_period`. Without it the kernel stays at the input period,
/// which for integer ratios reduces to plain decimation.
pub fn resample(
    x: &SignalBuffer,
    out_period: f64,
    spec: &WindowSpec,
    antialias: bool,
) -> Result<SignalBuffer> {
    if !(out_period > 0.0 && out_period.is_finite()) {
        return Err(Error::InvalidPeriod(out_period));
    }
    let in_period = x.period();
    let (kernel_period, gain) = if antialias && out_period > in_period {
        (out_period, in_period / out_period)
    } else {
        (in_period, 1.0)
    };
    let out_len = if x.is_empty() {
        0
    } else {
        snap_to_grid((x.len() - 1) as f64 * in_period / out_period).floor() as usize + 1
    };
    let samples = (0..out_len)
        .map(|m| interpolate_with_kernel(x, spec, m as f64 * out_period, kernel_period, gain))
        .collect();
    SignalBuffer::new(samples, out_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(sinc(3.0), 0.0);
        assert_eq!(sinc(-7.0), 0.0);
        assert_relative_eq!(sinc(0.5), 2.0 / PI, max_relative = 1e-15);
    }

    #[test]
    fn bessel_i0_matches_series_reference() {
        // Independent check: direct partial sum with rationals at small order.
        assert_eq!(bessel_i0(0.0), 1.0);
        // I0(2) = sum (1/k!)^2 = 2.2795853023360673...
        assert_relative_eq!(bessel_i0(2.0), 2.2795853023360673, max_relative = 1e-14);
    }

    #[test]
    fn window_center_and_edge() {
        let spec = WindowSpec::kaiser(8).unwrap();
        assert_eq!(window_eval(&spec, 0.0, 1.0), 1.0);
        // Outside support: exactly zero for every kind.
        for kind in [WindowKind::Kaiser, WindowKind::Hann, WindowKind::Rectangular] {
            let s = WindowSpec::new(kind, 8.0, 4).unwrap();
            assert_eq!(window_eval(&s, 4.0 * 1.0, 1.0), 0.0);
            assert_eq!(window_eval(&s, -5.0, 1.0), 0.0);
        }
        // Kaiser at the support edge: 1 / I0(beta).
        let s = WindowSpec::new(WindowKind::Kaiser, 8.0, 4).unwrap();
        let edge = 4.0 * 1.0 / 2.0;
        assert_relative_eq!(window_eval(&s, edge, 1.0), 1.0 / bessel_i0(8.0), max_relative = 1e-14);
    }

    #[test]
    fn windowed_sinc_values() {
        let spec = WindowSpec::kaiser(8).unwrap();
        assert_eq!(windowed_sinc(&spec, 0.0, 1.0), 1.0);
        for k in 1..=4i32 {
            assert_eq!(windowed_sinc(&spec, k as f64, 1.0), 0.0);
        }
        let t = 0.5;
        let expect = window_eval(&spec, t, 1.0) * 2.0 / PI;
        assert_relative_eq!(windowed_sinc(&spec, t, 1.0), expect, max_relative = 1e-15);
    }

    #[test]
    fn interpolate_impulse() {
        let mut v = vec![0.0; 11];
        v[5] = 1.0;
        let x = SignalBuffer::new(v, 1.0 / 8.0).unwrap();
        let spec = WindowSpec::kaiser(8).unwrap();
        assert_eq!(interpolate(&x, &spec, 5.0 / 8.0), 1.0);
        assert_eq!(interpolate(&x, &spec, 7.0 / 8.0), 0.0);
    }

    #[test]
    fn interpolate_matches_bruteforce() {
        let x = SignalBuffer::new(vec![1.0, 2.0, 3.0, 4.0], 1.0).unwrap();
        let spec = WindowSpec::new(WindowKind::Kaiser, DEFAULT_KAISER_BETA, 2).unwrap();
        let t = 1.5;
        // L=2: n in [ceil(1.5-1), floor(1.5+1)] = {1, 2}.
        let expect: f64 = (1..=2)
            .map(|n| x.get(n) * windowed_sinc(&spec, t - n as f64, 1.0))
            .sum();
        assert_relative_eq!(interpolate(&x, &spec, t), expect, max_relative = 1e-15);
    }

    #[test]
    fn resample_identity_and_decimation() {
        let x = SignalBuffer::new((0..32).map(|i| (i as f64 * 0.3).sin()).collect(), 1.0 / 32.0)
            .unwrap();
        let spec = WindowSpec::kaiser(8).unwrap();
        let same = resample(&x, x.period(), &spec, true).unwrap();
        assert_eq!(same.samples(), x.samples());

        let half = resample(&x, 2.0 / 32.0, &spec, false).unwrap();
        let expect: Vec<f64> = x.samples().iter().step_by(2).copied().collect();
        assert_eq!(half.samples(), &expect[..]);
    }

    #[test]
    fn buffer_rejects_non_finite() {
        assert!(SignalBuffer::new(vec![0.0, f64::NAN], 1.0).is_err());
        assert!(SignalBuffer::new(vec![0.0], 0.0).is_err());
        assert!(SignalBuffer::new(vec![0.0], -1.0).is_err());
    }
}
