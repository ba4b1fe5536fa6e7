//! Encoder / mask / decoder pipeline and the reconstruction harness.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filter_design::{generate_weights, FilterBankSpec, RoundingMode, WeightMatrix};
use crate::interp::{SignalBuffer, WindowSpec};
use crate::layers::{
    adjust_geometry, sfi_conv_forward, sfi_transposed_forward, FeatureMap, LayerGeometry,
};
use crate::metrics::si_snr;

/// Mask applied between encoder and decoder.
#[derive(Debug, Clone)]
pub enum MaskSource {
    /// Pass features through unchanged (single-source reconstruction).
    Identity,
    /// Keep channels `lo..=hi`, zero the rest.
    BandSelect { lo: usize, hi: usize },
    /// Externally provided per-source masks, values in `[0, 1]`.
    Stack(MaskStack),
}

impl MaskSource {
    pub fn sources(&self) -> usize {
        match self {
            MaskSource::Stack(s) => s.sources,
            _ => 1,
        }
    }
}

/// J x C x M mask data.
#[derive(Debug, Clone)]
pub struct MaskStack {
    values: Vec<f64>,
    sources: usize,
    channels: usize,
    frames: usize,
}

impl MaskStack {
    pub fn new(values: Vec<f64>, sources: usize, channels: usize, frames: usize) -> Result<Self> {
        if values.len() != sources * channels * frames {
            return Err(Error::ShapeMismatch(format!(
                "mask stack: {} values for {}x{}x{}",
                values.len(),
                sources,
                channels,
                frames
            )));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "mask value out of [0,1] at index {i}"
            )));
        }
        Ok(Self { values, sources, channels, frames })
    }

    pub fn source(&self, j: usize) -> &[f64] {
        let n = self.channels * self.frames;
        &self.values[j * n..(j + 1) * n]
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let header = serde_json::json!({
            "sources": self.sources,
            "channels": self.channels,
            "frames": self.frames,
        });
        writeln!(w, "{header}")?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let header = read_header_line(r)?;
        #[derive(Deserialize)]
        struct Header {
            sources: usize,
            channels: usize,
            frames: usize,
        }
        let h: Header = serde_json::from_slice(&header)?;
        let values = read_f64_block(r, h.sources * h.channels * h.frames)?;
        Self::new(values, h.sources, h.channels, h.frames)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn read_header_line(r: &mut impl Read) -> Result<Vec<u8>> {
    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            return Ok(header);
        }
        header.push(byte[0]);
    }
}

fn read_f64_block(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)?;
    Ok(raw.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
}

/// Serialize a feature map with the same header + raw layout as masks.
pub fn write_feature_map(x: &FeatureMap, w: &mut impl Write) -> Result<()> {
    let header = serde_json::json!({
        "channels": x.channels(),
        "frames": x.frames(),
        "frame_period": x.frame_period(),
    });
    writeln!(w, "{header}")?;
    for v in x.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_feature_map(r: &mut impl Read) -> Result<FeatureMap> {
    let header = read_header_line(r)?;
    #[derive(Deserialize)]
    struct Header {
        channels: usize,
        frames: usize,
        frame_period: f64,
    }
    let h: Header = serde_json::from_slice(&header)?;
    let values = read_f64_block(r, h.channels * h.frames)?;
    FeatureMap::new(values, h.channels, h.frames, h.frame_period)
}

/// Weights plus geometry realized for one target sampling frequency.
#[derive(Debug, Clone)]
pub struct Realization {
    pub weights: WeightMatrix,
    pub geometry: LayerGeometry,
}

/// Realize a filterbank at a target period with the exact rational stride.
pub fn realize(
    spec: &FilterBankSpec,
    target_period: f64,
    window: WindowSpec,
    padding: usize,
) -> Result<Realization> {
    let (_, stride) = adjust_geometry(
        spec.k_train() as u64,
        spec.s_train() as u64,
        spec.train_period,
        target_period,
    )?;
    let weights = generate_weights(spec, target_period, RoundingMode::Nearest)?;
    let geometry =
        LayerGeometry::new(weights.tap_count(), stride, target_period, padding, window)?;
    Ok(Realization { weights, geometry })
}

/// Encoder: SFI convolution followed by a rectified linear unit.
pub fn encode(x: &SignalBuffer, w: &WeightMatrix, geom: &LayerGeometry) -> Result<FeatureMap> {
    Ok(sfi_conv_forward(x, w, geom)?.map(|v| v.max(0.0)))
}

/// Elementwise mask application for source `j`.
pub fn apply_mask(x: &FeatureMap, mask: &MaskSource, j: usize) -> Result<FeatureMap> {
    match mask {
        MaskSource::Identity => Ok(x.clone()),
        MaskSource::BandSelect { lo, hi } => {
            let (lo, hi) = (*lo, *hi);
            if lo > hi || hi >= x.channels() {
                return Err(Error::ShapeMismatch(format!(
                    "band {lo}..={hi} outside {} channels",
                    x.channels()
                )));
            }
            let frames = x.frames();
            let values = (0..x.channels())
                .flat_map(|c| {
                    let keep = (lo..=hi).contains(&c);
                    x.row(c).iter().map(move |&v| if keep { v } else { 0.0 })
                })
                .collect();
            FeatureMap::new(values, x.channels(), frames, x.frame_period())
        }
        MaskSource::Stack(stack) => {
            if j >= stack.sources {
                return Err(Error::ShapeMismatch(format!(
                    "source index {j} out of {} masks",
                    stack.sources
                )));
            }
            if stack.channels != x.channels() || stack.frames != x.frames() {
                return Err(Error::ShapeMismatch(format!(
                    "mask {}x{} vs features {}x{}",
                    stack.channels,
                    stack.frames,
                    x.channels(),
                    x.frames()
                )));
            }
            let values = x
                .values()
                .iter()
                .zip(stack.source(j))
                .map(|(v, m)| v * m)
                .collect();
            FeatureMap::new(values, x.channels(), x.frames(), x.frame_period())
        }
    }
}

/// Decoder: SFI transposed convolution, channels summed, trimmed to
/// `out_len`.
pub fn decode(
    x: &FeatureMap,
    w: &WeightMatrix,
    geom: &LayerGeometry,
    out_len: usize,
) -> Result<SignalBuffer> {
    sfi_transposed_forward(x, w, geom, out_len)
}

/// Encode, apply the identity mask, decode, and report reconstruction
/// SI-SNR against the input. A zero input has no defined SI-SNR and
/// reports `None`.
pub fn roundtrip(
    x: &SignalBuffer,
    w: &WeightMatrix,
    geom: &LayerGeometry,
) -> Result<(SignalBuffer, Option<f64>)> {
    let features = encode(x, w, geom)?;
    let masked = apply_mask(&features, &MaskSource::Identity, 0)?;
    let y = decode(&masked, w, geom, x.len())?;
    let snr = match si_snr(&y, x) {
        Ok(v) => Some(v),
        Err(Error::ZeroReference) => None,
        Err(e) => return Err(e),
    };
    Ok((y, snr))
}
