//! Criterion benchmarks for the hot kernels of `cvtele-core`. See `benches/`.
