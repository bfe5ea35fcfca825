use std::io::Write;
use std::time::Duration;

use serde_json::{json, Value};

use crate::Global;

/// Usage errors exit with 2, failed computations with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Failure(_) => "failure",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

pub fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

pub struct Report {
    pub pass: bool,
    /// Human-readable lines.
    pub summary: Vec<String>,
    pub result: Value,
    /// Whether a cached closure was reused; reported with the timing.
    pub cache: Option<&'static str>,
}

impl Report {
    pub fn new(pass: bool, summary: Vec<String>, result: Value) -> Self {
        Self {
            pass,
            summary,
            result,
            cache: None,
        }
    }
}

pub struct Envelope {
    json: Value,
    human: Vec<String>,
    code: u8,
    errored: bool,
}

impl Envelope {
    pub fn new(
        command: &str,
        result: Result<Report, CliError>,
        global: &Global,
        elapsed: Duration,
    ) -> Self {
        let mut json = json!({ "command": command, "seed": global.seed });
        let errored = result.is_err();
        let (human, code) = match result {
            Ok(report) => {
                json["pass"] = json!(report.pass);
                json["result"] = report.result;
                if !global.no_timing {
                    json["runtime"] = json!({
                        "elapsed_seconds": elapsed.as_secs_f64(),
                        "cache": report.cache,
                    });
                }
                let mut human = report.summary;
                human.push(format!(
                    "{}: {}",
                    command,
                    if report.pass { "PASS" } else { "FAIL" }
                ));
                (human, if report.pass { 0 } else { 1 })
            }
            Err(e) => {
                json["pass"] = json!(false);
                json["error"] = json!({ "kind": e.kind(), "message": e.message() });
                let code = match e {
                    CliError::Usage(_) => 2,
                    CliError::Failure(_) => 1,
                };
                (vec![format!("error: {}", e.message())], code)
            }
        };
        Self {
            json,
            human,
            code,
            errored,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }

    pub fn emit(&self, global: &Global) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(&self.json)? + "\n";
        if let Some(path) = &global.out {
            std::fs::write(path, &text)?;
        }
        if global.json {
            return std::io::stdout().lock().write_all(text.as_bytes());
        }
        let lines = self
            .human
            .iter()
            .map(|l| l.to_string() + "\n")
            .collect::<String>();
        if self.errored {
            std::io::stderr().lock().write_all(lines.as_bytes())
        } else {
            std::io::stdout().lock().write_all(lines.as_bytes())
        }
    }
}
