//! Adjointness of the conv / transposed-conv pair: with shared weights and
//! geometry, `<Conv x, Y> = <x, Conv^T Y>`. Exact for the integer fast
//! path; within rounding for the interpolation path.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use sfi_core::{
    frame_count, sfi_conv_forward, sfi_transposed_forward, FeatureMap, LayerGeometry,
    RationalStride, SignalBuffer, WeightMatrix, WindowSpec,
};

fn random_setup(
    rng: &mut ChaCha8Rng,
    stride: RationalStride,
) -> (SignalBuffer, WeightMatrix, LayerGeometry, FeatureMap, usize) {
    let channels = rng.gen_range(1..=4);
    let taps = rng.gen_range(2..=12);
    let padding = rng.gen_range(0..=4);
    let n = rng.gen_range((taps + stride.num() as usize)..=(taps + stride.num() as usize + 200));
    let rows: Vec<Vec<f64>> = (0..channels)
        .map(|_| (0..taps).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let center = (taps - 1) / 2 + (taps - 1) % 2;
    let w = WeightMatrix::from_rows(rows, center, 1.0).unwrap();
    let geom = LayerGeometry::new(taps, stride, 1.0, padding, WindowSpec::kaiser(16).unwrap()).unwrap();
    let x = SignalBuffer::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1.0).unwrap();
    let i_len = n + 2 * padding - taps + 1;
    let frames = frame_count(i_len, stride);
    let fm = FeatureMap::new(
        (0..channels * frames).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        channels,
        frames,
        geom.frame_period(),
    )
    .unwrap();
    (x, w, geom, fm, n)
}

fn inner_features(a: &FeatureMap, b: &FeatureMap) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

#[test]
fn adjoint_holds_at_integer_stride() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AD0);
    for _ in 0..100 {
        let stride = RationalStride::from_integer(rng.gen_range(1..=8)).unwrap();
        let (x, w, geom, fm, n) = random_setup(&mut rng, stride);
        let forward = sfi_conv_forward(&x, &w, &geom).unwrap();
        let back = sfi_transposed_forward(&fm, &w, &geom, n).unwrap();
        let lhs = inner_features(&forward, &fm);
        let rhs: f64 = x.samples().iter().zip(back.samples()).map(|(a, b)| a * b).sum();
        let scale = lhs.abs().max(rhs.abs()).max(1e-30);
        assert!(
            (lhs - rhs).abs() <= 1e-9 * scale,
            "stride {stride}: <Ax,y>={lhs} vs <x,A'y>={rhs}"
        );
    }
}

#[test]
fn adjoint_holds_for_fractional_strides() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AD1);
    for stride in [
        RationalStride::new(5, 2).unwrap(),
        RationalStride::new(441, 16).unwrap(),
        RationalStride::new(441, 8).unwrap(),
    ] {
        for _ in 0..25 {
            let (x, w, geom, fm, n) = random_setup(&mut rng, stride);
            let forward = sfi_conv_forward(&x, &w, &geom).unwrap();
            let back = sfi_transposed_forward(&fm, &w, &geom, n).unwrap();
            let lhs = inner_features(&forward, &fm);
            let rhs: f64 = x.samples().iter().zip(back.samples()).map(|(a, b)| a * b).sum();
            let scale = lhs.abs().max(rhs.abs()).max(1e-30);
            assert!(
                (lhs - rhs).abs() <= 1e-9 * scale,
                "stride {stride}: <Ax,y>={lhs} vs <x,A'y>={rhs}"
            );
        }
    }
}
