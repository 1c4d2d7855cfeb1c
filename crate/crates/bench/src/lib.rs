//! Criterion benchmarks for irate; see `benches/`.
