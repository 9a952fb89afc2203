//! Criterion benchmarks for the `hpexp` numerics live in `benches/`.
