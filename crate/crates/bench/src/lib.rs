//! Criterion benchmarks for ssd-core live under `benches/`.
