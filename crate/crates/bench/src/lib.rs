//! Criterion benchmarks for the normlab kernels; see `benches/`.
