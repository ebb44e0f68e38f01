//! Criterion benchmarks for the stripflow kernels; see `benches/kernels.rs`.
