//! Both layer forwards against a self-contained termwise evaluation of the
//! interpolated cross-correlation and its adjoint. The oracle here shares no
//! code with the library: it carries its own kernel, its own Bessel series,
//! and sums over the full index range, letting compact support do the
//! truncation.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use sfi_core::{
    frame_count, sfi_conv_forward, sfi_transposed_forward, FeatureMap, LayerGeometry,
    RationalStride, SignalBuffer, WeightMatrix, WindowKind, WindowSpec, DEFAULT_KAISER_BETA,
};

mod oracle {
    pub fn i0(x: f64) -> f64 {
        // Plain partial sum of sum_k (x^2/4)^k / (k!)^2.
        let mut sum = 0.0;
        let mut fact = 1.0f64;
        for k in 0..120 {
            if k > 0 {
                fact *= k as f64;
            }
            sum += (x * x / 4.0).powi(k as i32) / (fact * fact);
        }
        sum
    }

    /// Kaiser-windowed sinc at a dimensionless offset (units of the kernel
    /// period), support half-width `l` kernel periods.
    pub fn kernel(delta: f64, l: u32, beta: f64) -> f64 {
        let half = l as f64 / 2.0;
        if delta.abs() > half {
            return 0.0;
        }
        let u = delta / half;
        let g = i0(beta * (1.0 - u * u).max(0.0).sqrt()) / i0(beta);
        let s = if delta == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * delta).sin() / (std::f64::consts::PI * delta)
        };
        g * s
    }

    /// Termwise strided + interpolated convolution forward.
    #[allow(clippy::too_many_arguments)]
    pub fn conv(
        x: &[f64],
        rows: &[Vec<f64>],
        padding: usize,
        num: u64,
        den: u64,
        l: u32,
        beta: f64,
        force_interp: bool,
    ) -> Vec<Vec<f64>> {
        let n = x.len();
        let k = rows[0].len();
        let mut padded = vec![0.0; n + 2 * padding];
        padded[padding..padding + n].copy_from_slice(x);
        let i_len = n + 2 * padding - k + 1;
        let corr: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                (0..i_len)
                    .map(|i| (0..k).map(|d| row[d] * padded[i + d]).sum())
                    .collect()
            })
            .collect();
        let frames = ((i_len as u128 - 1) * den as u128 / num as u128) as usize + 1;
        corr.iter()
            .map(|y| {
                (0..frames)
                    .map(|m| {
                        let instant = m as f64 * num as f64 / den as f64;
                        if den == 1 && !force_interp {
                            y[m * num as usize]
                        } else {
                            y.iter()
                                .enumerate()
                                .map(|(i, yi)| yi * kernel(instant - i as f64, l, beta))
                                .sum()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Termwise transposed forward: frames spread back onto the fine grid
    /// through the kernel, then combined with the weights as the adjoint of
    /// the padded cross-correlation.
    #[allow(clippy::too_many_arguments)]
    pub fn transposed(
        frames: &[Vec<f64>],
        rows: &[Vec<f64>],
        padding: usize,
        num: u64,
        den: u64,
        l: u32,
        beta: f64,
        out_len: usize,
        force_interp: bool,
    ) -> Vec<f64> {
        let k = rows[0].len();
        let i_len = out_len + 2 * padding - k + 1;
        let mut out = vec![0.0; out_len];
        for (row, fr) in rows.iter().zip(frames) {
            let up: Vec<f64> = (0..i_len)
                .map(|i| {
                    if den == 1 && !force_interp {
                        if i % num as usize == 0 && i / (num as usize) < fr.len() {
                            fr[i / num as usize]
                        } else {
                            0.0
                        }
                    } else {
                        fr.iter()
                            .enumerate()
                            .map(|(m, v)| {
                                v * kernel(i as f64 - m as f64 * num as f64 / den as f64, l, beta)
                            })
                            .sum()
                    }
                })
                .collect();
            for (q, o) in out.iter_mut().enumerate() {
                for (d, w) in row.iter().enumerate() {
                    let idx = q as i64 + padding as i64 - d as i64;
                    if idx >= 0 && (idx as usize) < i_len {
                        *o += w * up[idx as usize];
                    }
                }
            }
        }
        out
    }
}

fn make_weights(rng: &mut ChaCha8Rng, channels: usize, taps: usize) -> WeightMatrix {
    let rows: Vec<Vec<f64>> = (0..channels)
        .map(|_| (0..taps).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let center = (taps - 1) / 2 + (taps - 1) % 2;
    WeightMatrix::from_rows(rows, center, 1.0).unwrap()
}

fn rows_of(w: &WeightMatrix) -> Vec<Vec<f64>> {
    (0..w.channels()).map(|c| w.row(c).to_vec()).collect()
}

fn max_abs(vals: impl Iterator<Item = f64>) -> f64 {
    vals.fold(0.0f64, |a, v| a.max(v.abs()))
}

fn check_case(rng: &mut ChaCha8Rng, stride: RationalStride, n: usize, half_width: u32) {
    let channels = rng.gen_range(1..=4);
    let max_taps = n.min(9);
    let taps = rng.gen_range(2..=max_taps);
    let padding = rng.gen_range(0..=3);
    let w = make_weights(rng, channels, taps);
    let geom = LayerGeometry::new(
        taps,
        stride,
        1.0,
        padding,
        WindowSpec::new(WindowKind::Kaiser, DEFAULT_KAISER_BETA, half_width).unwrap(),
    )
    .unwrap();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sig = SignalBuffer::new(x.clone(), 1.0).unwrap();

    let got = sfi_conv_forward(&sig, &w, &geom).unwrap();
    let expect = oracle::conv(
        &x,
        &rows_of(&w),
        padding,
        stride.num(),
        stride.den(),
        half_width,
        DEFAULT_KAISER_BETA,
        false,
    );
    let scale = max_abs(expect.iter().flatten().copied()).max(1e-30);
    for c in 0..channels {
        assert_eq!(got.frames(), expect[c].len());
        for m in 0..got.frames() {
            let diff = (got.row(c)[m] - expect[c][m]).abs();
            assert!(
                diff <= 1e-12 * scale,
                "conv stride {stride}, c={c}, m={m}: {} vs {}",
                got.row(c)[m],
                expect[c][m]
            );
        }
    }

    // Transposed direction on a random feature map of matching shape.
    let i_len = n + 2 * padding - taps + 1;
    let frames = frame_count(i_len, stride);
    let fr: Vec<Vec<f64>> = (0..channels)
        .map(|_| (0..frames).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let fm = FeatureMap::new(fr.concat(), channels, frames, geom.frame_period()).unwrap();
    let got = sfi_transposed_forward(&fm, &w, &geom, n).unwrap();
    let expect = oracle::transposed(
        &fr,
        &rows_of(&w),
        padding,
        stride.num(),
        stride.den(),
        half_width,
        DEFAULT_KAISER_BETA,
        n,
        false,
    );
    let scale = max_abs(expect.iter().copied()).max(1e-30);
    for q in 0..n {
        let diff = (got.samples()[q] - expect[q]).abs();
        assert!(
            diff <= 1e-12 * scale,
            "transposed stride {stride}, q={q}: {} vs {}",
            got.samples()[q],
            expect[q]
        );
    }
}

#[test]
fn fractional_strides_match_termwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD5);
    for (num, den, n_max) in [(5u64, 2u64, 64usize), (441, 16, 64), (441, 8, 160)] {
        let stride = RationalStride::new(num, den).unwrap();
        for _ in 0..100 {
            // Input long enough for at least one frame past the first.
            let n_min = (num / den + 10) as usize;
            let n = rng.gen_range(n_min..=n_max.max(n_min + 8));
            let half_width = *[2u32, 8, 16].choose(&mut rng).unwrap();
            check_case(&mut rng, stride, n, half_width);
        }
    }
}

#[test]
fn integer_strides_match_termwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    for _ in 0..60 {
        let s = rng.gen_range(1..=8u64);
        let stride = RationalStride::from_integer(s).unwrap();
        let n = rng.gen_range(16..=96);
        check_case(&mut rng, stride, n, 16);
    }
}

#[test]
fn forced_interpolation_equals_fast_path_at_integer_stride() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);
    for _ in 0..50 {
        let channels = rng.gen_range(1..=3);
        let taps = rng.gen_range(2..=9);
        let s = rng.gen_range(1..=6u64);
        let n = rng.gen_range(24..=96);
        let w = make_weights(&mut rng, channels, taps);
        let mut geom = LayerGeometry::new(
            taps,
            RationalStride::from_integer(s).unwrap(),
            1.0,
            1,
            WindowSpec::kaiser(16).unwrap(),
        )
        .unwrap();
        let x = SignalBuffer::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1.0).unwrap();
        let fast = sfi_conv_forward(&x, &w, &geom).unwrap();
        geom.force_interpolation = true;
        let slow = sfi_conv_forward(&x, &w, &geom).unwrap();
        // Offsets hit the integer grid exactly, so the sinc zeros are true
        // zeros and the two paths agree to the bit.
        assert_eq!(fast, slow);

        let frames = fast.frames();
        let fr: Vec<f64> = (0..channels * frames).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fm = FeatureMap::new(fr, channels, frames, geom.frame_period()).unwrap();
        geom.force_interpolation = false;
        let fast_t = sfi_transposed_forward(&fm, &w, &geom, n).unwrap();
        geom.force_interpolation = true;
        let slow_t = sfi_transposed_forward(&fm, &w, &geom, n).unwrap();
        assert_eq!(fast_t, slow_t);
    }
}
