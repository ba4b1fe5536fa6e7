//! Benchmark-only crate; see benches/layers.rs.
