use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sfi_core::baselines::StrategyKind;
use sfi_core::{FilterBankSpec, WindowKind, WindowSpec, DEFAULT_KAISER_BETA};

use sfi_cli::commands::{
    self, bench_csv, bench_rows, lsweep_csv, lsweep_rows, BenchConfig, DesignArgs, LayerOpts,
};

#[derive(Parser)]
#[command(name = "sfi", about = "Sampling-frequency-independent conv layers", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrideMode {
    Proposed,
    Rounding,
    ResampleNear,
    ResampleTrained,
}

impl From<StrideMode> for StrategyKind {
    fn from(m: StrideMode) -> Self {
        match m {
            StrideMode::Proposed => StrategyKind::Proposed,
            StrideMode::Rounding => StrategyKind::Rounding,
            StrideMode::ResampleNear => StrategyKind::ResamplingNear,
            StrideMode::ResampleTrained => StrategyKind::ResamplingTrained,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WindowArg {
    Kaiser,
    Hann,
    Rectangular,
}

#[derive(clap::Args, Clone, Debug)]
struct WindowOpts {
    /// Interpolation window family.
    #[arg(long, value_enum, default_value = "kaiser")]
    window: WindowArg,
    /// Kaiser shape parameter.
    #[arg(long, default_value_t = DEFAULT_KAISER_BETA)]
    beta: f64,
    /// Kernel half-width in output samples.
    #[arg(long = "L", default_value_t = 16)]
    l: u32,
}

impl WindowOpts {
    fn spec(&self) -> Result<WindowSpec> {
        let kind = match self.window {
            WindowArg::Kaiser => WindowKind::Kaiser,
            WindowArg::Hann => WindowKind::Hann,
            WindowArg::Rectangular => WindowKind::Rectangular,
        };
        Ok(WindowSpec::new(kind, self.beta, self.l)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Create a filterbank description (and optionally realized weights).
    Design {
        #[arg(long, default_value_t = 64)]
        channels: usize,
        #[arg(long, default_value_t = 50.0)]
        f_min: f64,
        #[arg(long, default_value_t = 8000.0)]
        f_max: f64,
        /// Kernel duration, milliseconds.
        #[arg(long, default_value_t = 5.0)]
        kernel_ms: f64,
        /// Stride duration, milliseconds.
        #[arg(long, default_value_t = 0.625)]
        stride_ms: f64,
        /// Sampling frequency the analog parameters are anchored to, Hz.
        #[arg(long, default_value_t = 32000.0)]
        train_sf: f64,
        #[arg(long)]
        filterbank: PathBuf,
        /// Also write realized weights for --sf here.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Sampling frequency for --weights, Hz.
        #[arg(long)]
        sf: Option<f64>,
    },
    /// Encode a WAV file to a feature map.
    Encode {
        input: PathBuf,
        #[arg(long)]
        filterbank: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the realized weights here.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "proposed")]
        stride_mode: StrideMode,
        #[arg(long, default_value_t = 0)]
        padding: usize,
        #[command(flatten)]
        win: WindowOpts,
    },
    /// Decode a feature map back to a WAV file.
    Decode {
        input: PathBuf,
        #[arg(long)]
        filterbank: PathBuf,
        /// Output sampling frequency, Hz.
        #[arg(long)]
        sf: f64,
        #[arg(long)]
        out: PathBuf,
        /// Output length in samples (derived from the frame count if omitted).
        #[arg(long)]
        out_len: Option<usize>,
        #[arg(long, value_enum, default_value = "proposed")]
        stride_mode: StrideMode,
        #[arg(long, default_value_t = 0)]
        padding: usize,
        #[command(flatten)]
        win: WindowOpts,
    },
    /// Encode, optionally mask, decode, and report reconstruction SI-SNR.
    Roundtrip {
        input: PathBuf,
        #[arg(long)]
        filterbank: PathBuf,
        /// Mask stack file; identity mask when omitted.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Write decoded audio here (per-source suffixes with a mask stack).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "proposed")]
        stride_mode: StrideMode,
        #[arg(long, default_value_t = 0)]
        padding: usize,
        #[command(flatten)]
        win: WindowOpts,
    },
    /// Compare stride strategies over a sampling-frequency grid.
    Bench {
        #[arg(long)]
        filterbank: PathBuf,
        /// Grid of sampling frequencies, Hz.
        #[arg(long = "sf", value_delimiter = ',')]
        sf_grid: Vec<u32>,
        /// Input WAV; a seeded synthetic mixture when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        duration: f64,
        /// Median wall time over this many runs.
        #[arg(long, default_value_t = 1)]
        timing_runs: usize,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        win: WindowOpts,
    },
    /// Sweep the interpolation half-width for the proposed strategy.
    Lsweep {
        #[arg(long)]
        filterbank: PathBuf,
        #[arg(long = "sf", value_delimiter = ',')]
        sf_grid: Vec<u32>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        duration: f64,
        #[arg(long, default_value_t = 1)]
        timing_runs: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        win: WindowOpts,
    },
}

fn layer_opts(win: &WindowOpts, padding: usize, mode: StrideMode) -> Result<LayerOpts> {
    Ok(LayerOpts { window: win.spec()?, padding, stride_mode: mode.into() })
}

fn bench_config(
    filterbank: &std::path::Path,
    sf_grid: &[u32],
    input: &Option<PathBuf>,
    seed: u64,
    duration: f64,
    timing_runs: usize,
    win: &WindowOpts,
) -> Result<BenchConfig> {
    if duration <= 0.0 {
        bail!("--duration must be positive");
    }
    let mut cfg = BenchConfig::new(FilterBankSpec::load(filterbank)?);
    if !sf_grid.is_empty() {
        cfg.sf_grid_hz = sf_grid.to_vec();
    }
    cfg.window = win.spec()?;
    cfg.seed = seed;
    cfg.duration_s = duration;
    cfg.input = input.clone();
    cfg.timing_runs = timing_runs.max(1);
    Ok(cfg)
}

fn emit(csv: &Option<PathBuf>, body: &str) -> Result<()> {
    match csv {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Design {
            channels,
            f_min,
            f_max,
            kernel_ms,
            stride_ms,
            train_sf,
            filterbank,
            weights,
            sf,
        } => {
            let weights = match (weights, sf) {
                (Some(p), Some(sf)) => Some((p, sf)),
                (Some(_), None) => bail!("--weights requires --sf"),
                (None, _) => None,
            };
            let spec = commands::cmd_design(&DesignArgs {
                channels,
                f_min_hz: f_min,
                f_max_hz: f_max,
                kernel_ms,
                stride_ms,
                train_sf_hz: train_sf,
                filterbank,
                weights,
            })?;
            eprintln!(
                "designed {} channels, kernel {:.3} ms, stride {:.4} ms",
                spec.filters.len(),
                spec.kernel_duration * 1e3,
                spec.stride_duration * 1e3
            );
        }
        Command::Encode { input, filterbank, out, weights, stride_mode, padding, win } => {
            let opts = layer_opts(&win, padding, stride_mode)?;
            commands::cmd_encode(&input, &filterbank, &out, weights.as_deref(), &opts)?;
        }
        Command::Decode { input, filterbank, sf, out, out_len, stride_mode, padding, win } => {
            let opts = layer_opts(&win, padding, stride_mode)?;
            commands::cmd_decode(&input, &filterbank, sf, &out, out_len, &opts)?;
        }
        Command::Roundtrip { input, filterbank, mask, out, stride_mode, padding, win } => {
            let opts = layer_opts(&win, padding, stride_mode)?;
            let report =
                commands::cmd_roundtrip(&input, &filterbank, mask.as_deref(), out.as_deref(), &opts)?;
            match report.si_snr_db {
                Some(v) => println!(
                    "si_snr_db={v:.6} frames={} frame_rate_hz={}",
                    report.frames, report.frame_rate_hz
                ),
                None => println!(
                    "si_snr_db=nan frames={} frame_rate_hz={}",
                    report.frames, report.frame_rate_hz
                ),
            }
        }
        Command::Bench { filterbank, sf_grid, input, seed, duration, timing_runs, csv, win } => {
            let cfg = bench_config(&filterbank, &sf_grid, &input, seed, duration, timing_runs, &win)?;
            let rows = bench_rows(&cfg)?;
            emit(&csv, &bench_csv(&rows))?;
        }
        Command::Lsweep { filterbank, sf_grid, input, seed, duration, timing_runs, csv, win } => {
            let cfg = bench_config(&filterbank, &sf_grid, &input, seed, duration, timing_runs, &win)?;
            let rows = lsweep_rows(&cfg)?;
            emit(&csv, &lsweep_csv(&rows))?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
