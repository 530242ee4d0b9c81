//! Workload generation, the benchmark harness and query-center resolution.

mod census;
mod harness;
mod query;
mod synth;

pub use census::{measure_logical_bytes, Census, Field, PeakMeter, FIELD_UNITS};
pub use harness::{
    draw_centers, run_benchmark, write_csv, BenchOptions, Grid, GridPoint, MetricsRecord, BEST_COVERAGE, GREEDY_PHASE,
    HILLCLIMB_PHASE,
};
pub use query::{resolve_center, resolve_query_center, tokenize};
pub use synth::{generate_synthetic, random_graph, RandomGraphSpec, SynthConfig};
