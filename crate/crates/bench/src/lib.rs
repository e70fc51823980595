//! Criterion benchmarks for the scitweet pipeline live in `benches/`.
//!
//! ```text
//! cargo bench -p scitweet-bench
//! ```
