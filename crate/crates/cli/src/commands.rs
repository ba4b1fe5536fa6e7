//! Command implementations shared by the binary and the test suites.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Result};
use sfi_core::baselines::{run_strategy, strategy_stride, StrategyConfig, StrategyKind};
use sfi_core::pipeline::{
    apply_mask, decode, encode, read_feature_map, realize, write_feature_map, MaskSource, MaskStack,
};
use sfi_core::{
    frame_count, init_filterbank, resample, si_snr, FilterBankSpec, SignalBuffer, WindowSpec,
};

use crate::fixture::synth_mixture;
use crate::wav::{read_wav, write_wav, WavFormat};

/// Default benchmark sampling-frequency grid, Hz.
pub const DEFAULT_SF_GRID: [u32; 4] = [11025, 16538, 22050, 44100];
/// Half-width sweep grid.
pub const L_SWEEP: [u32; 6] = [2, 4, 8, 16, 32, 64];

#[derive(Debug, Clone)]
pub struct DesignArgs {
    pub channels: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub kernel_ms: f64,
    pub stride_ms: f64,
    pub train_sf_hz: f64,
    pub filterbank: PathBuf,
    /// Optionally export weights realized at this sampling frequency.
    pub weights: Option<(PathBuf, f64)>,
}

pub fn cmd_design(args: &DesignArgs) -> Result<FilterBankSpec> {
    let spec = init_filterbank(
        args.channels,
        args.f_min_hz,
        args.f_max_hz,
        args.kernel_ms * 1e-3,
        args.stride_ms * 1e-3,
        1.0 / args.train_sf_hz,
    )?;
    spec.save(&args.filterbank)?;
    if let Some((path, sf)) = &args.weights {
        let r = realize(&spec, 1.0 / sf, WindowSpec::default(), 0)?;
        r.weights.save(path)?;
    }
    Ok(spec)
}

/// Window/stride options shared by the processing commands.
#[derive(Debug, Clone)]
pub struct LayerOpts {
    pub window: WindowSpec,
    pub padding: usize,
    pub stride_mode: StrategyKind,
}

impl Default for LayerOpts {
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            padding: 0,
            stride_mode: StrategyKind::Proposed,
        }
    }
}

fn realization_for(
    spec: &FilterBankSpec,
    period: f64,
    opts: &LayerOpts,
) -> Result<sfi_core::Realization> {
    let mut r = realize(spec, period, opts.window, opts.padding)?;
    match opts.stride_mode {
        StrategyKind::Proposed => {}
        StrategyKind::Rounding => {
            r.geometry.stride = sfi_core::RationalStride::from_integer(r.geometry.stride.round())?;
        }
        other => bail!(
            "stride mode {} only applies to the bench command",
            other.label()
        ),
    }
    Ok(r)
}

pub fn cmd_encode(
    input: &Path,
    filterbank: &Path,
    out: &Path,
    weights_out: Option<&Path>,
    opts: &LayerOpts,
) -> Result<()> {
    let x = read_wav(input)?;
    let spec = FilterBankSpec::load(filterbank)?;
    let r = realization_for(&spec, x.period(), opts)?;
    let features = encode(&x, &r.weights, &r.geometry)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
    write_feature_map(&features, &mut f)?;
    if let Some(path) = weights_out {
        r.weights.save(path)?;
    }
    Ok(())
}

pub fn cmd_decode(
    input: &Path,
    filterbank: &Path,
    sf_hz: f64,
    out: &Path,
    out_len: Option<usize>,
    opts: &LayerOpts,
) -> Result<()> {
    let features = read_feature_map(&mut std::io::BufReader::new(std::fs::File::open(input)?))?;
    let spec = FilterBankSpec::load(filterbank)?;
    let r = realization_for(&spec, 1.0 / sf_hz, opts)?;
    let out_len = out_len.unwrap_or_else(|| {
        // Natural length: smallest N whose correlation covers the last frame.
        let stride = r.geometry.stride;
        let i_min = (features.frames() - 1) * stride.num() as usize / stride.den() as usize + 1;
        i_min + r.weights.tap_count() - 1 - 2 * r.geometry.padding
    });
    let y = decode(&features, &r.weights, &r.geometry, out_len)?;
    write_wav(out, &y, WavFormat::Float32)?;
    Ok(())
}

pub struct RoundtripReport {
    pub si_snr_db: Option<f64>,
    pub frames: usize,
    pub frame_rate_hz: f64,
}

pub fn cmd_roundtrip(
    input: &Path,
    filterbank: &Path,
    mask: Option<&Path>,
    out: Option<&Path>,
    opts: &LayerOpts,
) -> Result<RoundtripReport> {
    let x = read_wav(input)?;
    let spec = FilterBankSpec::load(filterbank)?;
    let r = realization_for(&spec, x.period(), opts)?;
    let mask = match mask {
        Some(path) => MaskSource::Stack(MaskStack::load(path)?),
        None => MaskSource::Identity,
    };
    let features = encode(&x, &r.weights, &r.geometry)?;
    let mut total = vec![0.0; x.len()];
    for j in 0..mask.sources() {
        let masked = apply_mask(&features, &mask, j)?;
        let y = decode(&masked, &r.weights, &r.geometry, x.len())?;
        if let Some(path) = out {
            let p = if mask.sources() == 1 {
                path.to_path_buf()
            } else {
                source_path(path, j)
            };
            write_wav(&p, &y, WavFormat::Float32)?;
        }
        for (t, v) in total.iter_mut().zip(y.samples()) {
            *t += v;
        }
    }
    let sum = SignalBuffer::new(total, x.period())?;
    let snr = match si_snr(&sum, &x) {
        Ok(v) => Some(v),
        Err(sfi_core::Error::ZeroReference) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(RoundtripReport {
        si_snr_db: snr,
        frames: features.frames(),
        frame_rate_hz: 1.0 / features.frame_period(),
    })
}

fn source_path(path: &Path, j: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("wav");
    path.with_file_name(format!("{stem}_{j}.{ext}"))
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub filterbank: FilterBankSpec,
    pub sf_grid_hz: Vec<u32>,
    pub window: WindowSpec,
    pub seed: u64,
    pub duration_s: f64,
    /// Mixture source: a WAV resampled to each grid frequency, or the
    /// seeded synthetic fixture.
    pub input: Option<PathBuf>,
    /// Wall time is the median over this many repeated runs.
    pub timing_runs: usize,
}

impl BenchConfig {
    pub fn new(filterbank: FilterBankSpec) -> Self {
        Self {
            filterbank,
            sf_grid_hz: DEFAULT_SF_GRID.to_vec(),
            window: WindowSpec::default(),
            seed: 0,
            duration_s: 4.0,
            input: None,
            timing_runs: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub sf_hz: u32,
    pub strategy: StrategyKind,
    pub stride_num: u64,
    pub stride_den: u64,
    pub stride_used: f64,
    pub frame_rate_hz: f64,
    pub si_snr_db: Option<f64>,
    pub wall_ms: f64,
}

fn mixture_at(cfg: &BenchConfig, sf_hz: u32) -> Result<SignalBuffer> {
    match &cfg.input {
        Some(path) => {
            let x = read_wav(path)?;
            Ok(resample(&x, 1.0 / sf_hz as f64, &cfg.window, true)?)
        }
        None => Ok(synth_mixture(cfg.seed, sf_hz as f64, cfg.duration_s)),
    }
}

fn timed_median<T>(runs: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(runs.max(1));
    let mut result = None;
    for _ in 0..runs.max(1) {
        let t0 = Instant::now();
        result = Some(f()?);
        times.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    Ok((result.unwrap(), times[times.len() / 2]))
}

/// Run the four stride strategies over the sampling-frequency grid.
pub fn bench_rows(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &sf in &cfg.sf_grid_hz {
        let x = mixture_at(cfg, sf)?;
        for kind in StrategyKind::ALL {
            rows.push(bench_one(cfg, &x, sf, kind)?);
        }
    }
    Ok(rows)
}

/// One strategy at one sampling frequency.
pub fn bench_one(
    cfg: &BenchConfig,
    x: &SignalBuffer,
    sf_hz: u32,
    kind: StrategyKind,
) -> Result<BenchRow> {
    let strategy = StrategyConfig { kind, window: cfg.window };
    let info = strategy_stride(&cfg.filterbank, kind, sf_hz as f64)?;
    let (y, wall_ms) = timed_median(cfg.timing_runs, || {
        Ok(run_strategy(x, &cfg.filterbank, &strategy, &MaskSource::Identity)?)
    })?;
    let si = match si_snr(&y, x) {
        Ok(v) => Some(v),
        Err(sfi_core::Error::ZeroReference) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(BenchRow {
        sf_hz,
        strategy: kind,
        stride_num: info.exact.num(),
        stride_den: info.exact.den(),
        stride_used: info.used,
        frame_rate_hz: info.frame_rate_hz,
        si_snr_db: si,
        wall_ms,
    })
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("sf_hz,strategy,stride_num,stride_den,stride_used,frame_rate_hz,si_snr_db,wall_ms\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.3}",
            r.sf_hz,
            r.strategy.label(),
            r.stride_num,
            r.stride_den,
            r.stride_used,
            r.frame_rate_hz,
            r.si_snr_db.map_or_else(|| "nan".into(), |v| format!("{v:.6}")),
            r.wall_ms,
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub half_width: u32,
    pub sf_hz: u32,
    pub si_snr_db: Option<f64>,
    pub wall_ms: f64,
}

/// Proposed-strategy roundtrip quality over the kernel half-width grid.
pub fn lsweep_rows(cfg: &BenchConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &l in &L_SWEEP {
        let window = WindowSpec::new(cfg.window.kind, cfg.window.beta, l)?;
        for &sf in &cfg.sf_grid_hz {
            let x = mixture_at(cfg, sf)?;
            let strategy = StrategyConfig { kind: StrategyKind::Proposed, window };
            let (y, wall_ms) = timed_median(cfg.timing_runs, || {
                Ok(run_strategy(&x, &cfg.filterbank, &strategy, &MaskSource::Identity)?)
            })?;
            let si = match si_snr(&y, &x) {
                Ok(v) => Some(v),
                Err(sfi_core::Error::ZeroReference) => None,
                Err(e) => return Err(e.into()),
            };
            rows.push(SweepRow { half_width: l, sf_hz: sf, si_snr_db: si, wall_ms });
        }
    }
    Ok(rows)
}

pub fn lsweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("L,sf_hz,si_snr_db,wall_ms\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.3}",
            r.half_width,
            r.sf_hz,
            r.si_snr_db.map_or_else(|| "nan".into(), |v| format!("{v:.6}")),
            r.wall_ms,
        );
    }
    s
}

/// Frame-count for a signal of length `n` under a realization (bench CSV
/// consumers sometimes need it; exposed for tests).
pub fn frames_for(spec: &FilterBankSpec, sf_hz: f64, n: usize, padding: usize) -> Result<usize> {
    let r = realize(spec, 1.0 / sf_hz, WindowSpec::default(), padding)?;
    let i_len = n + 2 * padding - r.weights.tap_count() + 1;
    Ok(frame_count(i_len, r.geometry.stride))
}
