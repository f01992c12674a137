//! Criterion benchmarks for the resfin search kernels live in `benches/`.
