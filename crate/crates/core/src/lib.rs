//! Sampling-frequency-independent convolutional layers for non-integer
//! strides.
//!
//! A trained analysis/synthesis filterbank is stored as continuous-time
//! analog prototypes; weights are regenerated for any target sampling
//! frequency. When the target stride `S' = (T_train / T_target) * S_train`
//! is not an integer, the layer forwards interpolate their intermediate
//! signals with a windowed sinc kernel and sample frames at the exact
//! rational instants, keeping the encoder frame rate identical across
//! sampling frequencies.

pub mod baselines;
pub mod error;
pub mod filter_design;
pub mod interp;
pub mod layers;
pub mod metrics;
pub mod pipeline;
pub mod rational;

pub use error::{Error, Result};
pub use filter_design::{
    generate_weights, init_filterbank, modulated_gaussian, AnalogFilterParams, FilterBankSpec,
    RoundingMode, WeightMatrix,
};
pub use interp::{
    interpolate, resample, sinc, window_eval, windowed_sinc, SignalBuffer, WindowKind, WindowSpec,
    DEFAULT_KAISER_BETA,
};
pub use layers::{
    adjust_geometry, cross_correlate, frame_count, frame_period_fraction, sfi_conv_forward,
    sfi_transposed_forward, FeatureMap, LayerGeometry,
};
pub use metrics::{least_squares_scales, si_snr, ScaleFit, SI_SNR_CAP_DB};
pub use pipeline::{
    apply_mask, decode, encode, read_feature_map, realize, roundtrip, write_feature_map,
    MaskSource, MaskStack, Realization,
};
pub use rational::RationalStride;
