//! Sampling-frequency-independent convolutional and transposed
//! convolutional layer forwards for integer and non-integer strides.
//!
//! The convolutional layer cross-correlates the input with the weights,
//! interpolates the result with a windowed sinc kernel, and samples frames
//! every `S' * T'` seconds. The transposed layer is the adjoint map:
//! frames are spread back onto the fine grid through the same kernel and
//! combined with the weights. When the stride is an integer both reduce to
//! plain decimation / zero insertion, and a fast path does exactly that.
//!
//! Frame instants `m * S'` and all floor/ceil sum bounds are computed in
//! exact integer arithmetic on the reduced stride fraction; only kernel
//! evaluations round.

use crate::error::{Error, Result};
use crate::filter_design::WeightMatrix;
use crate::interp::{kernel_at_offset, SignalBuffer, WindowSpec};
use crate::rational::{approximate_ratio, ceil_div, floor_div, RationalStride};

/// Realization of a layer at one target sampling frequency.
#[derive(Debug, Clone)]
pub struct LayerGeometry {
    pub tap_count: usize,
    pub stride: RationalStride,
    pub target_period: f64,
    pub padding: usize,
    pub window: WindowSpec,
    /// Route integer strides through the interpolation path (test mode).
    pub force_interpolation: bool,
}

impl LayerGeometry {
    pub fn new(
        tap_count: usize,
        stride: RationalStride,
        target_period: f64,
        padding: usize,
        window: WindowSpec,
    ) -> Result<Self> {
        if tap_count == 0 {
            return Err(Error::InvalidTapCount(0));
        }
        if !(target_period > 0.0 && target_period.is_finite()) {
            return Err(Error::InvalidPeriod(target_period));
        }
        Ok(Self {
            tap_count,
            stride,
            target_period,
            padding,
            window,
            force_interpolation: false,
        })
    }

    /// Frame period of the encoder output, seconds.
    pub fn frame_period(&self) -> f64 {
        self.stride.as_f64() * self.target_period
    }
}

/// C x M pseudo time-frequency representation with its frame period.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    values: Vec<f64>,
    channels: usize,
    frames: usize,
    frame_period: f64,
}

impl FeatureMap {
    pub fn new(values: Vec<f64>, channels: usize, frames: usize, frame_period: f64) -> Result<Self> {
        if values.len() != channels * frames {
            return Err(Error::ShapeMismatch(format!(
                "feature map: {} values for {}x{}",
                values.len(),
                channels,
                frames
            )));
        }
        if !(frame_period > 0.0 && frame_period.is_finite()) {
            return Err(Error::InvalidPeriod(frame_period));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self { values, channels, frames, frame_period })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame_period(&self) -> f64 {
        self.frame_period
    }

    pub fn row(&self, c: usize) -> &[f64] {
        &self.values[c * self.frames..(c + 1) * self.frames]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            channels: self.channels,
            frames: self.frames,
            frame_period: self.frame_period,
        }
    }
}

/// Target kernel size (real-valued) and exact rational stride for a pair of
/// trained and target sampling periods.
pub fn adjust_geometry(
    k_train: u64,
    s_train: u64,
    train_period: f64,
    target_period: f64,
) -> Result<(f64, RationalStride)> {
    // ratio = T_train / T_target = f_target / f_train, recovered exactly.
    let (p, q) = approximate_ratio(train_period / target_period, 1_000_000)?;
    let k_float = (p as f64 * k_train as f64) / q as f64;
    let stride = RationalStride::new(p * s_train, q)?;
    Ok((k_float, stride))
}

/// Number of frames reachable within a correlation of length `corr_len`:
/// instants `m * S' <= corr_len - 1`, counted exactly.
pub fn frame_count(corr_len: usize, stride: RationalStride) -> usize {
    debug_assert!(corr_len >= 1);
    (((corr_len as i128 - 1) * stride.den() as i128) / stride.num() as i128) as usize + 1
}

/// Frame period `S' * T'` as an exact fraction of seconds, given the target
/// sampling frequency in Hz. Returns a reduced `(numerator, denominator)`.
pub fn frame_period_fraction(stride: RationalStride, sf_hz: u64) -> (u64, u64) {
    let mut num = stride.num();
    let mut den = stride.den() * sf_hz;
    let g = {
        let (mut a, mut b) = (num, den);
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    };
    num /= g;
    den /= g;
    (num, den)
}

/// Dot product accumulated strictly left to right, so results match a
/// naive reference loop bit for bit.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (&av, &bv) in a.iter().zip(b) {
        acc += av * bv;
    }
    acc
}

/// Cross-correlation of a symmetrically zero-padded signal with the weight
/// rows. Output row length is `I = N + 2P - K + 1`; index 0 is the first
/// fully valid window of the padded signal.
pub fn cross_correlate(x: &SignalBuffer, w: &WeightMatrix, padding: usize) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let k = w.tap_count();
    let i_len = n as i64 + 2 * padding as i64 - k as i64 + 1;
    if i_len < 1 {
        return Err(Error::EmptyCorrelation(i_len));
    }
    let i_len = i_len as usize;
    let samples = x.samples();
    // Indices whose window lies fully inside the signal; the rest clamp.
    let full_end = if n >= k { (n - k + padding + 1).min(i_len) } else { 0 };
    let full_lo = padding.min(full_end);
    let mut out = Vec::with_capacity(w.channels());
    for c in 0..w.channels() {
        let row = w.row(c);
        let mut y = vec![0.0; i_len];
        // Four outputs per pass: independent accumulator chains, each one
        // still summed in plain index order.
        let mut i = full_lo;
        while i + 4 <= full_end {
            let b = i - padding;
            let xs = &samples[b..b + k + 3];
            let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
            for (d, &wv) in row.iter().enumerate() {
                a0 += wv * xs[d];
                a1 += wv * xs[d + 1];
                a2 += wv * xs[d + 2];
                a3 += wv * xs[d + 3];
            }
            y[i] = a0;
            y[i + 1] = a1;
            y[i + 2] = a2;
            y[i + 3] = a3;
            i += 4;
        }
        while i < full_end {
            let b = i - padding;
            y[i] = dot(row, &samples[b..b + k]);
            i += 1;
        }
        for i in (0..full_lo).chain(full_end..i_len) {
            // y[i] = sum_d row[d] * x[i - P + d], zero outside the signal.
            let base = i as i64 - padding as i64;
            let d_lo = (-base).clamp(0, k as i64) as usize;
            let d_hi = (n as i64 - base).clamp(d_lo as i64, k as i64) as usize;
            if d_lo == d_hi {
                continue;
            }
            let xs = &samples[(base + d_lo as i64) as usize..(base + d_hi as i64) as usize];
            y[i] = dot(&row[d_lo..d_hi], xs);
        }
        out.push(y);
    }
    Ok(out)
}

/// Kernel at the exact rational offset `numer / den` (in kernel periods).
#[inline]
fn kernel_at_rational(window: &WindowSpec, numer: i128, den: i128) -> f64 {
    let delta = if numer % den == 0 {
        (numer / den) as f64
    } else {
        numer as f64 / den as f64
    };
    kernel_at_offset(window, delta)
}

const KERNEL_TABLE_LIMIT: i128 = 1 << 22;

/// Kernel values at all rational offsets `numer / den` with
/// `|numer| <= span`. Every offset the layer loops touch is such an
/// integer, so one table replaces per-tap window evaluations. `None` when
/// the table would be unreasonably large.
fn kernel_table(window: &WindowSpec, den: i128) -> Option<(Vec<f64>, i128)> {
    let span = window.half_width as i128 * den / 2;
    if 2 * span + 1 > KERNEL_TABLE_LIMIT {
        return None;
    }
    let table = (-span..=span)
        .map(|numer| kernel_at_rational(window, numer, den))
        .collect();
    Some((table, span))
}

#[inline]
fn kernel_lookup(table: &Option<(Vec<f64>, i128)>, window: &WindowSpec, numer: i128, den: i128) -> f64 {
    match table {
        Some((t, span)) => t[(numer + span) as usize],
        None => kernel_at_rational(window, numer, den),
    }
}

/// SFI convolutional layer forward pass.
///
/// Computes the cross-correlation, then samples its windowed sinc
/// interpolant at instants `m * S'` (no antialiasing: the kernel period
/// stays `T'`, emulating plain decimation). Integer strides decimate
/// directly unless `force_interpolation` is set.
pub fn sfi_conv_forward(x: &SignalBuffer, w: &WeightMatrix, geom: &LayerGeometry) -> Result<FeatureMap> {
    validate_geometry(w, geom)?;
    if (x.period() - geom.target_period).abs() > 1e-12 * geom.target_period {
        return Err(Error::ShapeMismatch("signal period does not match layer geometry".into()));
    }
    let corr = cross_correlate(x, w, geom.padding)?;
    let i_len = corr[0].len();
    let frames = frame_count(i_len, geom.stride);
    let num = geom.stride.num() as i128;
    let den = geom.stride.den() as i128;
    let half = geom.window.half_width as i128;

    let fast = geom.stride.is_integer() && !geom.force_interpolation;
    let table = if fast { None } else { kernel_table(&geom.window, den) };
    let mut values = Vec::with_capacity(w.channels() * frames);
    for y in &corr {
        if fast {
            for m in 0..frames {
                values.push(y[m * geom.stride.num() as usize]);
            }
        } else {
            for m in 0..frames {
                let a = m as i128 * num; // t / T' = m * S'
                let i_lo = ceil_div(2 * a - half * den, 2 * den).max(0);
                let i_hi = floor_div(2 * a + half * den, 2 * den).min(i_len as i128 - 1);
                let mut acc = 0.0;
                for i in i_lo..=i_hi {
                    let h = kernel_lookup(&table, &geom.window, a - i * den, den);
                    acc += y[i as usize] * h;
                }
                values.push(acc);
            }
        }
    }
    FeatureMap::new(values, w.channels(), frames, geom.frame_period())
}

/// SFI transposed convolutional layer forward pass (adjoint of
/// [`sfi_conv_forward`] with the same weights and geometry).
///
/// Each channel's frames are interpolated back onto the `T'` grid
/// (`y[i] = sum_m X[m] h(i - m S')`, which for integer strides reduces to
/// inserting `S' - 1` zeros between frames), combined with the weights, and
/// summed over channels into a single output of length `out_len`.
pub fn sfi_transposed_forward(
    x: &FeatureMap,
    w: &WeightMatrix,
    geom: &LayerGeometry,
    out_len: usize,
) -> Result<SignalBuffer> {
    validate_geometry(w, geom)?;
    if x.channels() != w.channels() {
        return Err(Error::ShapeMismatch(format!(
            "feature map has {} channels, weights {}",
            x.channels(),
            w.channels()
        )));
    }
    if out_len == 0 {
        return Err(Error::ShapeMismatch("out_len must be >= 1".into()));
    }
    let k = w.tap_count();
    let padding = geom.padding;
    let i_len = out_len as i64 + 2 * padding as i64 - k as i64 + 1;
    if i_len < 1 {
        return Err(Error::EmptyCorrelation(i_len));
    }
    let i_len = i_len as usize;
    let frames = x.frames();
    let num = geom.stride.num() as i128;
    let den = geom.stride.den() as i128;
    let half = geom.window.half_width as i128;

    let fast = geom.stride.is_integer() && !geom.force_interpolation;
    let table = if fast { None } else { kernel_table(&geom.window, den) };
    let mut out = vec![0.0; out_len];
    let mut upsampled = vec![0.0; i_len];
    // Outputs whose whole tap range hits valid upsampled indices.
    let full_lo = (k - 1).saturating_sub(padding).min(out_len);
    let full_end = (i_len.saturating_sub(padding)).clamp(full_lo, out_len);
    for c in 0..x.channels() {
        let frames_row = x.row(c);
        upsampled.iter_mut().for_each(|v| *v = 0.0);
        if fast {
            let s = geom.stride.num() as usize;
            for (m, &v) in frames_row.iter().enumerate() {
                let i = m * s;
                if i < i_len {
                    upsampled[i] = v;
                }
            }
        } else {
            for (i, u) in upsampled.iter_mut().enumerate() {
                let b = i as i128 * den;
                let m_lo = ceil_div((2 * i as i128 - half) * den, 2 * num).max(0);
                let m_hi = floor_div((2 * i as i128 + half) * den, 2 * num).min(frames as i128 - 1);
                let mut acc = 0.0;
                for m in m_lo..=m_hi {
                    let h = kernel_lookup(&table, &geom.window, b - m * num, den);
                    acc += frames_row[m as usize] * h;
                }
                *u = acc;
            }
        }
        let row = w.row(c);
        // x[q] += sum_d row[d] * y[q + P - d]; same four-outputs-per-pass
        // scheme as cross_correlate, taps summed in plain d order.
        let mut q = full_lo;
        while q + 4 <= full_end {
            let start = q + padding + 1 - k;
            let u = &upsampled[start..start + k + 3];
            let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
            for (d, &wv) in row.iter().enumerate() {
                let idx = k - 1 - d;
                a0 += wv * u[idx];
                a1 += wv * u[idx + 1];
                a2 += wv * u[idx + 2];
                a3 += wv * u[idx + 3];
            }
            out[q] += a0;
            out[q + 1] += a1;
            out[q + 2] += a2;
            out[q + 3] += a3;
            q += 4;
        }
        for q in (q..full_end).chain((0..full_lo).chain(full_end..out_len)) {
            let base = q as i64 + padding as i64;
            let d_lo = (base - i_len as i64 + 1).max(0) as usize;
            let d_hi = (base + 1).clamp(d_lo as i64, k as i64) as usize;
            let mut acc = 0.0;
            for d in d_lo..d_hi {
                acc += row[d] * upsampled[(base - d as i64) as usize];
            }
            out[q] += acc;
        }
    }
    SignalBuffer::new(out, geom.target_period)
}

fn validate_geometry(w: &WeightMatrix, geom: &LayerGeometry) -> Result<()> {
    if w.tap_count() != geom.tap_count {
        return Err(Error::ShapeMismatch(format!(
            "geometry expects {} taps, weights have {}",
            geom.tap_count,
            w.tap_count()
        )));
    }
    if (w.period() - geom.target_period).abs() > 1e-12 * geom.target_period {
        return Err(Error::ShapeMismatch("weight period does not match layer geometry".into()));
    }
    Ok(())
}
