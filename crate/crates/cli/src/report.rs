use serde::Serialize;
use serde_json::Value;
use std::path::Path;
use std::process::ExitCode;
use supersim_core::Error;

/// Version of the report layout described by `schema/report.schema.json`.
pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Validation,
    Runtime,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Validation, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Runtime, message: message.into() }
    }

    /// Errors reading inputs are validation failures.
    pub fn input(path: &Path, e: Error) -> Self {
        Self::validation(format!("{}: {e}", path.display()))
    }

    pub fn code(&self) -> u8 {
        match self.kind {
            ErrorKind::Validation => 2,
            ErrorKind::Runtime => 1,
        }
    }

    pub fn exit(&self) -> ExitCode {
        let body = serde_json::json!({ "error": self, "exit_code": self.code() });
        eprintln!("{}", serde_json::to_string_pretty(&body).expect("error object serializes"));
        ExitCode::from(self.code())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let runtime = matches!(
            e,
            Error::Io(_)
                | Error::BudgetExceeded { .. }
                | Error::InvariantViolation(_)
                | Error::RefinementNeeded { .. }
                | Error::ZeroSuccess
                | Error::ZeroMatrix
                | Error::DegenerateSuperposition
        );
        if runtime {
            Self::runtime(e.to_string())
        } else {
            Self::validation(e.to_string())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &'static str, seed: Option<u64>, inputs: impl Serialize, results: impl Serialize, checks: Vec<Check>) -> Result<Self, CliError> {
        Ok(Self {
            command,
            version: REPORT_VERSION,
            seed,
            inputs: to_value(inputs)?,
            results: to_value(results)?,
            pass: checks.iter().all(|c| c.pass),
            checks,
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::runtime(format!("report serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

fn to_value(x: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::runtime(format!("report serialization: {e}")))
}

pub fn emit(report: &Report, out: Option<&Path>) -> Result<(), CliError> {
    let text = report.to_json()?;
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes one `(t, value)` CSV per figure into `dir`.
pub fn write_plot(dir: &Path, name: &str, rows: &[(f64, f64)]) -> Result<(), CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::runtime(format!("{}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(|e| io(&e))?;
    let mut w = csv::Writer::from_path(dir.join(name)).map_err(|e| io(&e))?;
    w.write_record(["t", "value"]).map_err(|e| io(&e))?;
    for (t, v) in rows {
        w.serialize((t, v)).map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}
