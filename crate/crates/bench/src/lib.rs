//! Criterion benchmarks for `ratchet-core`; see `benches/`.
