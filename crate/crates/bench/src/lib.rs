//! Criterion benchmarks for `mdh-core`; see `benches/`.
