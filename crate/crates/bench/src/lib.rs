//! Criterion benchmarks for the triosc kernels; see `benches/`.
