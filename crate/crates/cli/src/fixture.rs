//! Deterministic bandlimited test mixtures.
//!
//! Components live below 4.4 kHz so the same analytic signal can be sampled
//! at every sampling frequency in the benchmark grid without aliasing.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sfi_core::SignalBuffer;

const MAX_COMPONENT_HZ: f64 = 4200.0;

/// One sinusoidal partial of the mixture.
#[derive(Debug, Clone, Copy)]
pub struct Partial {
    pub freq_hz: f64,
    pub amp: f64,
    pub phase: f64,
}

/// Random partials drawn from a seed; independent of any sampling frequency.
pub fn mixture_partials(seed: u64, count: usize) -> Vec<Partial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Partial {
            freq_hz: 60.0 * (MAX_COMPONENT_HZ / 60.0f64).powf(rng.gen::<f64>()),
            amp: rng.gen_range(0.2..1.0),
            phase: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
        })
        .collect()
}

pub fn eval_partials(partials: &[Partial], t: f64) -> f64 {
    partials
        .iter()
        .map(|p| p.amp * (2.0 * std::f64::consts::PI * p.freq_hz * t + p.phase).sin())
        .sum()
}

/// Sample the seeded mixture at `sf_hz` for `duration_s` seconds, peak
/// normalized to 0.9.
pub fn synth_mixture(seed: u64, sf_hz: f64, duration_s: f64) -> SignalBuffer {
    let partials = mixture_partials(seed, 8);
    let n = (duration_s * sf_hz).round() as usize;
    let mut v: Vec<f64> = (0..n).map(|i| eval_partials(&partials, i as f64 / sf_hz)).collect();
    let peak = v.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-12);
    v.iter_mut().for_each(|x| *x *= 0.9 / peak);
    SignalBuffer::from_rate(v, sf_hz).expect("finite synth signal")
}
