//! The experiment harness: configuration, the split → preprocess → fit →
//! forecast → score pipeline over series and repetitions, aggregate tables
//! and their on-disk form.

mod config;
mod io;
mod run;
mod tables;

pub use config::{DatasetSpec, ExperimentConfig, Profile, StrategySpec};
pub use io::{
    compare_run, export_traces, read_records, read_timings, write_outputs, CompareReport,
    COMPARE_TOL, OUTPUT_FILES,
};
pub use run::{
    expand_strategies, fit_unit, leakage_audit, load_dataset, run_experiment, AuditReport,
    ExperimentOutput, FittedStrategy, RunOptions, RunRecord, SearchSummary, SegmentSummary,
    TimingRecord, UnitFit,
};
pub use tables::{
    compute_tables, AnovaRow, MetricRow, MseRow, OverallRankRow, RankHorizonRow, RankRow, Tables,
};
