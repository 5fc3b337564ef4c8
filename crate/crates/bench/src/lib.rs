//! Criterion benchmarks for `pathlab-core`; see `benches/`.
