//! Benchmarks for `fbound-core`; see `benches/`.
