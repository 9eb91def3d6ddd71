//! CSV ingestion, JSON reports and the `kernmink` command line.

mod cli;
mod csv_io;
mod report;

pub use cli::{cli_main, run, Cli, Command, THREADS_ENV};
pub use csv_io::{
    load_dataset, read_dataset, read_int_column, write_int_column, write_matrix_csv, ColumnRef,
    CsvFormat,
};
pub use report::{ConfigEcho, ModelSummary, RunReport, Timing, REPORT_SCHEMA, REPORT_VERSION};
