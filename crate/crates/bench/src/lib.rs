//! Benchmarks for jumpvar; see `benches/`.
