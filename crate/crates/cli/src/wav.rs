//! WAV reading and writing (PCM 16-bit and IEEE float 32-bit).

use std::path::Path;

use anyhow::{bail, Context, Result};
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use sfi_core::SignalBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    Float32,
}

/// Read a WAV file as a mono buffer (channels averaged). 16-bit samples are
/// scaled to `[-1, 1)` by `1/32768`.
pub fn read_wav(path: &Path) -> Result<SignalBuffer> {
    let mut reader =
        WavReader::open(path).with_context(|| format!("opening {}", path.display()))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        bail!("{}: zero channels", path.display());
    }
    let mono: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => average_channels(
            reader.samples::<i16>().map(|s| s.map(|v| v as f64 / 32768.0)),
            channels,
        )?,
        (SampleFormat::Float, 32) => average_channels(
            reader.samples::<f32>().map(|s| s.map(|v| v as f64)),
            channels,
        )?,
        (fmt, bits) => bail!(
            "{}: unsupported codec {bits}-bit {fmt:?} (PCM 16-bit or float 32-bit only)",
            path.display()
        ),
    };
    Ok(SignalBuffer::from_rate(mono, spec.sample_rate as f64)?)
}

fn average_channels(
    samples: impl Iterator<Item = hound::Result<f64>>,
    channels: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut c = 0;
    for s in samples {
        acc += s.context("decoding samples")?;
        c += 1;
        if c == channels {
            out.push(acc / channels as f64);
            acc = 0.0;
            c = 0;
        }
    }
    Ok(out)
}

/// Write a mono WAV file. 16-bit output saturates out-of-range values.
pub fn write_wav(path: &Path, x: &SignalBuffer, format: WavFormat) -> Result<()> {
    let sample_rate = x.rate_hz().round() as u32;
    let spec = match format {
        WavFormat::Pcm16 => WavSpec {
            channels: 1,
            sample_rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        },
        WavFormat::Float32 => WavSpec {
            channels: 1,
            sample_rate,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        },
    };
    let mut writer =
        WavWriter::create(path, spec).with_context(|| format!("creating {}", path.display()))?;
    match format {
        WavFormat::Pcm16 => {
            for &v in x.samples() {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q)?;
            }
        }
        WavFormat::Float32 => {
            for &v in x.samples() {
                writer.write_sample(v as f32)?;
            }
        }
    }
    writer.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_scaling_rule() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for v in [0i16, 16384, -32768] {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        let x = read_wav(&path).unwrap();
        assert_eq!(x.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(x.rate_hz(), 8000.0);
    }

    #[test]
    fn stereo_averages_to_half() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let spec = WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for _ in 0..16 {
            w.write_sample(1.0f32).unwrap();
            w.write_sample(0.0f32).unwrap();
        }
        w.finalize().unwrap();
        let x = read_wav(&path).unwrap();
        assert!(x.samples().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn float32_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.wav");
        let vals: Vec<f64> = (0..100).map(|i| ((i as f32) * 0.013).sin() as f64).collect();
        let x = SignalBuffer::from_rate(vals.clone(), 44100.0).unwrap();
        write_wav(&path, &x, WavFormat::Float32).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.samples(), &vals[..]);
    }

    #[test]
    fn pcm16_saturates_and_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.wav");
        let x = SignalBuffer::from_rate(vec![1.5, -2.0, 0.25], 8000.0).unwrap();
        write_wav(&path, &x, WavFormat::Pcm16).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.samples()[0], 32767.0 / 32768.0);
        assert_eq!(back.samples()[1], -1.0);
        assert!((back.samples()[2] - 0.25).abs() <= 0.5 / 32768.0);
    }

    #[test]
    fn one_second_sine_has_rate_frames() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sine.wav");
        let n = 44100;
        let x = SignalBuffer::from_rate(
            (0..n)
                .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 44100.0).sin())
                .collect(),
            44100.0,
        )
        .unwrap();
        write_wav(&path, &x, WavFormat::Pcm16).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), 44100);
    }
}
