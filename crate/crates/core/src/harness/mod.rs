//! Benchmarks over all estimation methods, multi-seed studies and table
//! rendering.

mod bench;
mod config;
mod method;
mod study;
mod table;

pub use bench::{benchmark_data, estimate_method, run_benchmark, run_methods, EstimateRecord, REAL_VALUES};
pub use config::BenchmarkConfig;
pub use method::Method;
pub use study::{
    composite_f13_f14, relative_errors, run_study, FlagPolicy, StudyResult, StudyRow, COMPOSITE_F13_F14, STUDY_HEADER,
};
pub use table::{emit_table, format_duration, parse_table_csv, round2, TableFormat, TABLE_HEADER};
