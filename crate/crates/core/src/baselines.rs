//! Stride-handling strategies compared in the benchmark harness: the
//! proposed rational-stride path plus the Rounding, Resampling-near and
//! Resampling-trained baselines, all driven through the same weights and
//! pipeline.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::filter_design::FilterBankSpec;
use crate::interp::{resample, SignalBuffer, WindowSpec};
use crate::layers::adjust_geometry;
use crate::pipeline::{apply_mask, decode, encode, realize, MaskSource};
use crate::rational::RationalStride;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Proposed,
    Rounding,
    ResamplingNear,
    ResamplingTrained,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Proposed,
        StrategyKind::Rounding,
        StrategyKind::ResamplingNear,
        StrategyKind::ResamplingTrained,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Proposed => "proposed",
            StrategyKind::Rounding => "rounding",
            StrategyKind::ResamplingNear => "resampling_near",
            StrategyKind::ResamplingTrained => "resampling_trained",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub window: WindowSpec,
}

/// Round a rational stride to the nearest integer, ties away from zero.
pub fn round_stride(stride: RationalStride) -> u64 {
    stride.round()
}

/// Nearest sampling frequency on the grid `f_train * k / s_train` where the
/// stride becomes the integer `k`; ties pick the smaller frequency.
pub fn nearest_integer_stride_sf(f_train_hz: f64, s_train: u64, f_target_hz: f64) -> f64 {
    let step = f_train_hz / s_train as f64;
    let k = (f_target_hz / step).floor().max(1.0);
    let below = k * step;
    let above = (k + 1.0) * step;
    if (f_target_hz - below) <= (above - f_target_hz) {
        below
    } else {
        above
    }
}

/// How a strategy realizes the stride at a target sampling frequency.
#[derive(Debug, Clone, Copy)]
pub struct StrideInfo {
    /// Exact target stride `S'` before any strategy adjustment.
    pub exact: RationalStride,
    /// Stride actually used by the layers, in samples at `internal_sf_hz`.
    pub used: f64,
    /// Sampling frequency the layers run at.
    pub internal_sf_hz: f64,
    /// Frame rate of the encoder output, Hz.
    pub frame_rate_hz: f64,
}

/// Resolve the stride a strategy will use at `f_target_hz`.
pub fn strategy_stride(
    spec: &FilterBankSpec,
    kind: StrategyKind,
    f_target_hz: f64,
) -> Result<StrideInfo> {
    let f_train_hz = 1.0 / spec.train_period;
    let s_train = spec.s_train() as u64;
    let (_, exact) = adjust_geometry(
        spec.k_train() as u64,
        s_train,
        spec.train_period,
        1.0 / f_target_hz,
    )?;
    let info = match kind {
        StrategyKind::Proposed => StrideInfo {
            exact,
            used: exact.as_f64(),
            internal_sf_hz: f_target_hz,
            frame_rate_hz: f_target_hz * exact.den() as f64 / exact.num() as f64,
        },
        StrategyKind::Rounding => {
            let rounded = exact.round();
            StrideInfo {
                exact,
                used: rounded as f64,
                internal_sf_hz: f_target_hz,
                frame_rate_hz: f_target_hz / rounded as f64,
            }
        }
        StrategyKind::ResamplingNear => {
            let f_int = nearest_integer_stride_sf(f_train_hz, s_train, f_target_hz);
            StrideInfo {
                exact,
                used: (f_int * s_train as f64 / f_train_hz).round(),
                internal_sf_hz: f_int,
                frame_rate_hz: f_train_hz / s_train as f64,
            }
        }
        StrategyKind::ResamplingTrained => StrideInfo {
            exact,
            used: s_train as f64,
            internal_sf_hz: f_train_hz,
            frame_rate_hz: f_train_hz / s_train as f64,
        },
    };
    Ok(info)
}

/// Run one strategy end to end: encoder, mask for source 0, decoder, and
/// any resampling the strategy requires. The output has the input's length
/// and sampling frequency.
pub fn run_strategy(
    x: &SignalBuffer,
    spec: &FilterBankSpec,
    cfg: &StrategyConfig,
    mask: &MaskSource,
) -> Result<SignalBuffer> {
    let y = match cfg.kind {
        StrategyKind::Proposed => process_at(x, spec, cfg.window, None, mask)?,
        StrategyKind::Rounding => {
            let (_, exact) = adjust_geometry(
                spec.k_train() as u64,
                spec.s_train() as u64,
                spec.train_period,
                x.period(),
            )?;
            let rounded = RationalStride::from_integer(exact.round())?;
            process_at(x, spec, cfg.window, Some(rounded), mask)?
        }
        StrategyKind::ResamplingNear => {
            let f_int = nearest_integer_stride_sf(
                1.0 / spec.train_period,
                spec.s_train() as u64,
                x.rate_hz(),
            );
            process_resampled(x, spec, cfg.window, 1.0 / f_int, mask)?
        }
        StrategyKind::ResamplingTrained => {
            process_resampled(x, spec, cfg.window, spec.train_period, mask)?
        }
    };
    // Trim or zero-extend to the input length.
    let mut v = y.samples().to_vec();
    v.resize(x.len(), 0.0);
    SignalBuffer::new(v, x.period())
}

fn process_at(
    x: &SignalBuffer,
    spec: &FilterBankSpec,
    window: WindowSpec,
    stride_override: Option<RationalStride>,
    mask: &MaskSource,
) -> Result<SignalBuffer> {
    let mut r = realize(spec, x.period(), window, 0)?;
    if let Some(s) = stride_override {
        r.geometry.stride = s;
    }
    let features = encode(x, &r.weights, &r.geometry)?;
    let masked = apply_mask(&features, mask, 0)?;
    decode(&masked, &r.weights, &r.geometry, x.len())
}

fn process_resampled(
    x: &SignalBuffer,
    spec: &FilterBankSpec,
    window: WindowSpec,
    inner_period: f64,
    mask: &MaskSource,
) -> Result<SignalBuffer> {
    let inner = resample(x, inner_period, &window, true)?;
    let processed = process_at(&inner, spec, window, None, mask)?;
    resample(&processed, x.period(), &window, true)
}
