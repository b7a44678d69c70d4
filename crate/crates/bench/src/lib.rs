//! Benchmark helpers: nothing lives here; see `benches/pipelines.rs`.
