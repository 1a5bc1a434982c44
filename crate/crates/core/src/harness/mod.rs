//! Configuration, the check suite and output files for the command line
//! tool.

mod checks;
mod config;
mod output;

pub use checks::{report_table, run_check_suite, run_checks, CheckReport};
pub use config::{
    check_spec, parse_tolerance, CheckSpec, RunConfig, CHECKS, DEFAULT_QUAD_TOL, DEFAULT_SEED,
    DEFAULT_SPHERE_TOL,
};
pub use output::{emit_csv, emit_plotdata, read_csv, read_plotdata, Table};
