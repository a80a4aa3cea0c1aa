//! Benchmarks for `fastjacobi`; see `benches/`.
