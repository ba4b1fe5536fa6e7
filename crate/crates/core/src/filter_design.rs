//! Analog filter prototypes and discrete-time weight generation.
//!
//! Each channel of the filterbank is a continuous-time modulated Gaussian
//! `f(t) = 2*sqrt(2*sigma^2*pi) * exp(-sigma^2 t^2 / 2) * cos(mu t + phi)`.
//! Weights for a target sampling period are its samples on the target grid,
//! reversed in time (cross-correlation convention) and Riemann-scaled by the
//! period so the discrete response is sampling-frequency invariant.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuous-time prototype parameters of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogFilterParams {
    /// Center angular frequency, rad/s.
    pub mu: f64,
    /// Bandwidth parameter, rad/s.
    pub sigma: f64,
    /// Initial phase, rad.
    pub phi: f64,
}

impl AnalogFilterParams {
    pub fn new(mu: f64, sigma: f64, phi: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite() && mu >= 0.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "analog filter params out of range: mu={mu}, sigma={sigma}, phi={phi}"
            )));
        }
        Ok(Self { mu, sigma, phi })
    }
}

/// Impulse response of the modulated Gaussian prototype at time `t`.
pub fn modulated_gaussian(params: &AnalogFilterParams, t: f64) -> f64 {
    let s2 = params.sigma * params.sigma;
    2.0 * (2.0 * s2 * std::f64::consts::PI).sqrt()
        * (-s2 * t * t / 2.0).exp()
        * (params.mu * t + params.phi).cos()
}

/// Filterbank prototypes plus trained-time geometry in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBankSpec {
    pub filters: Vec<AnalogFilterParams>,
    pub kernel_duration: f64,
    pub stride_duration: f64,
    pub train_period: f64,
}

impl FilterBankSpec {
    pub fn channels(&self) -> usize {
        self.filters.len()
    }

    /// Kernel size in samples at the trained sampling frequency.
    pub fn k_train(&self) -> i64 {
        (self.kernel_duration / self.train_period).round() as i64
    }

    /// Stride in samples at the trained sampling frequency.
    pub fn s_train(&self) -> i64 {
        (self.stride_duration / self.train_period).round() as i64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if self.filters.is_empty() {
            return Err(Error::TooFewChannels { min: 1, got: 0 });
        }
        if !(self.kernel_duration > 0.0 && self.stride_duration > 0.0 && self.train_period > 0.0) {
            return Err(Error::InvalidParameter("non-positive duration in filterbank spec".into()));
        }
        Ok(())
    }
}

/// How to round the real-valued target kernel size to taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    /// Nearest integer, ties away from zero.
    #[default]
    Nearest,
    Floor,
    Ceil,
}

impl RoundingMode {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            RoundingMode::Nearest => x.round(),
            RoundingMode::Floor => x.floor(),
            RoundingMode::Ceil => x.ceil(),
        }
    }
}

/// Discrete layer weights realized at one sampling period.
///
/// Tap index `k` runs `floor(-(K-1)/2) ..= floor((K-1)/2)`; `center_index`
/// is the row offset of `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    taps: Vec<f64>,
    channels: usize,
    tap_count: usize,
    center_index: usize,
    period: f64,
}

impl WeightMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, center_index: usize, period: f64) -> Result<Self> {
        let channels = rows.len();
        if channels == 0 {
            return Err(Error::TooFewChannels { min: 1, got: 0 });
        }
        let tap_count = rows[0].len();
        if tap_count == 0 {
            return Err(Error::InvalidTapCount(0));
        }
        if rows.iter().any(|r| r.len() != tap_count) {
            return Err(Error::ShapeMismatch("ragged weight rows".into()));
        }
        if center_index >= tap_count {
            return Err(Error::ShapeMismatch("center_index out of range".into()));
        }
        Ok(Self { taps: rows.concat(), channels, tap_count, center_index, period })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn tap_count(&self) -> usize {
        self.tap_count
    }

    pub fn center_index(&self) -> usize {
        self.center_index
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Smallest tap index (`k` of the first column).
    pub fn k_min(&self) -> i64 {
        -(self.center_index as i64)
    }

    pub fn row(&self, c: usize) -> &[f64] {
        &self.taps[c * self.tap_count..(c + 1) * self.tap_count]
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let header = serde_json::json!({
            "channels": self.channels,
            "tap_count": self.tap_count,
            "center_index": self.center_index,
            "period": self.period,
        });
        writeln!(w, "{header}")?;
        for v in &self.taps {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut header = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            header.push(byte[0]);
        }
        #[derive(Deserialize)]
        struct Header {
            channels: usize,
            tap_count: usize,
            center_index: usize,
            period: f64,
        }
        let h: Header = serde_json::from_slice(&header)?;
        let mut raw = vec![0u8; h.channels * h.tap_count * 8];
        r.read_exact(&mut raw)?;
        let taps: Vec<f64> = raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if h.center_index >= h.tap_count || h.tap_count == 0 || h.channels == 0 {
            return Err(Error::ShapeMismatch("bad weight header".into()));
        }
        Ok(Self {
            taps,
            channels: h.channels,
            tap_count: h.tap_count,
            center_index: h.center_index,
            period: h.period,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

/// Build a filterbank with linearly spaced center frequencies and adjacent
/// half-power crossover bandwidths; phases start at zero.
pub fn init_filterbank(
    channels: usize,
    f_min_hz: f64,
    f_max_hz: f64,
    kernel_duration: f64,
    stride_duration: f64,
    train_period: f64,
) -> Result<FilterBankSpec> {
    if channels < 2 {
        return Err(Error::TooFewChannels { min: 2, got: channels });
    }
    let nyquist = 0.5 / train_period;
    if !(0.0 <= f_min_hz && f_min_hz < f_max_hz && f_max_hz < nyquist) {
        return Err(Error::InvalidBand { f_min: f_min_hz, f_max: f_max_hz, nyquist });
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mu_lo = two_pi * f_min_hz;
    let mu_hi = two_pi * f_max_hz;
    let spacing = (mu_hi - mu_lo) / (channels - 1) as f64;
    // Adjacent Gaussians cross at half power.
    let sigma = spacing / (2.0 * (2.0 * (2.0f64).ln()).sqrt());
    let filters = (0..channels)
        .map(|c| AnalogFilterParams::new(mu_lo + spacing * c as f64, sigma, 0.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBankSpec { filters, kernel_duration, stride_duration, train_period })
}

/// Sample the prototypes on the target grid to produce layer weights.
///
/// Tap `(c, k)` is `T' * f_c(-k T')`: the time reversal of the impulse
/// response folds into negating the argument.
pub fn generate_weights(
    spec: &FilterBankSpec,
    target_period: f64,
    rounding: RoundingMode,
) -> Result<WeightMatrix> {
    if !(target_period > 0.0 && target_period.is_finite()) {
        return Err(Error::InvalidPeriod(target_period));
    }
    let k_float = spec.kernel_duration / target_period;
    let tap_count = rounding.apply(k_float) as i64;
    if tap_count < 1 {
        return Err(Error::InvalidTapCount(tap_count));
    }
    let k_min = -((tap_count - 1) / 2 + (tap_count - 1) % 2); // floor(-(K-1)/2)
    let rows: Vec<Vec<f64>> = spec
        .filters
        .iter()
        .map(|p| {
            (0..tap_count)
                .map(|j| {
                    let k = k_min + j;
                    target_period * modulated_gaussian(p, -(k as f64) * target_period)
                })
                .collect()
        })
        .collect();
    WeightMatrix::from_rows(rows, (-k_min) as usize, target_period)
}
