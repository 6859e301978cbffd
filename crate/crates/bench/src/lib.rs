//! Benchmarks for `utmq-core`; see `benches/`.
