//! Library surface of the CLI: command implementations, WAV I/O and the
//! deterministic benchmark fixture. The `sfi` binary is a thin wrapper.

pub mod commands;
pub mod fixture;
pub mod wav;
