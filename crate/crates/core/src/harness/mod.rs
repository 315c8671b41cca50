//! Experiment configuration, grid runner and CSV outputs.

mod config;
mod records;
mod runner;

pub use config::{
    BallSection, CmaSection, ExperimentConfig, ExperimentKind, GridConfig, MpcSection, PerturbationSection, SimSection,
    DEFAULT_SEEDS,
};
pub use records::{
    aggregate, mean_std, read_aggregate, read_summary, read_trace, trace_files, trajectory_header, write_aggregate,
    write_summary, write_trace, write_trajectory, AggregateCsvRow, AggregateRow, CostRecord, RunKey, SummaryRow,
    TraceRow, AGGREGATE_HEADER, SUMMARY_HEADER, TRACE_HEADER,
};
pub use runner::{
    check_budget_parity, ensure_writable, expand, run, run_experiment, run_mpc, run_open_loop, summarize, trace_path,
    write_mpc_run, ExperimentReport, MpcRun, OpenLoopRun, RunOutcome, RunSpec,
};
