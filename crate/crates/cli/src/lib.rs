//! Command-line front end: configuration, experiment drivers and result files.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod commands;
pub mod config;
pub mod record;

use std::path::Path;

use chrono::{SecondsFormat, Utc};

pub use commands::{CommandError, Outcome};
pub use config::{ConfigError, RunConfig};
pub use record::{Experiment, ResultRecord, Status, Table};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for a malformed or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for solver failures, missed tolerances and failed checks.
pub const EXIT_SOLVER: i32 = 3;

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// A finished run: the record, its tables and the process exit code.
pub struct RunOutput {
    pub record: ResultRecord,
    pub tables: Vec<Table>,
    pub exit_code: i32,
}

fn finish(
    experiment: Experiment,
    cfg: Option<&RunConfig>,
    started_at: String,
    result: Result<Outcome, CommandError>,
) -> RunOutput {
    let (status, error, payload, tables, exit_code) = match result {
        Ok(o) if o.complete => (Status::Ok, None, o.payload, o.tables, EXIT_OK),
        Ok(o) => (Status::Incomplete, None, o.payload, o.tables, EXIT_SOLVER),
        Err(CommandError::Config(e)) => {
            (Status::Failed, Some(e.to_string()), serde_json::Value::Null, vec![], EXIT_CONFIG)
        }
        Err(e @ CommandError::Solver(plap_core::PlapError::InvalidInput(_))) => {
            (Status::Failed, Some(e.to_string()), serde_json::Value::Null, vec![], EXIT_CONFIG)
        }
        Err(e) => (Status::Failed, Some(e.to_string()), serde_json::Value::Null, vec![], EXIT_SOLVER),
    };
    let record = ResultRecord {
        schema_version: record::SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment,
        config_digest: cfg.map(RunConfig::digest),
        config: cfg.map(RunConfig::canonical_json),
        status,
        error,
        payload,
        started_at,
        finished_at: now(),
    };
    RunOutput { record, tables, exit_code }
}

/// Runs a configured experiment (everything except `check`).
pub fn run_experiment(experiment: Experiment, cfg: &RunConfig) -> RunOutput {
    let started_at = now();
    let result = match experiment {
        Experiment::Eig => commands::cmd_eig(cfg),
        Experiment::Lsbound => commands::cmd_lsbound(cfg),
        Experiment::Epinf => commands::cmd_epinf(cfg),
        Experiment::Decay => commands::cmd_decay(cfg),
        Experiment::Perturb => commands::cmd_perturb(cfg),
        Experiment::Gap => commands::cmd_gap(cfg),
        Experiment::Check => return run_check(0),
    };
    finish(experiment, Some(cfg), started_at, result)
}

/// Runs the invariant suite.
pub fn run_check(seed: u64) -> RunOutput {
    let started_at = now();
    let items = check::run_checks(seed);
    let complete = items.iter().all(|i| i.passed);
    let payload = serde_json::json!({ "seed": seed, "invariants": items });
    finish(Experiment::Check, None, started_at, Ok(Outcome { payload, tables: vec![], complete }))
}

/// Writes the record and tables into `dir`.
pub fn write_run(dir: &Path, out: &RunOutput) -> std::io::Result<Vec<std::path::PathBuf>> {
    record::write_outputs(dir, &out.record, &out.tables)
}
