use std::fmt;
use std::io::Write;

use dde_expand::format::to_json_pretty;
use serde::Serialize;

use crate::args::{Format, Global};

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit status 2.
    Usage(String),
    /// A computation failed; exit status 3.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl From<dde_expand::Error> for CliError {
    fn from(e: dde_expand::Error) -> Self {
        if e.is_validation() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Compute(e.to_string())
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A command result in every format it supports.
pub struct Output {
    json: String,
    text: String,
    csv: Option<String>,
}

impl Output {
    pub fn new<T: Serialize + ?Sized>(value: &T, text: String) -> Self {
        Output { json: to_json_pretty(value), text, csv: None }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn render(&self, format: Option<Format>) -> Result<&str, CliError> {
        match format.unwrap_or(Format::Json) {
            Format::Json => Ok(&self.json),
            Format::Text => Ok(&self.text),
            Format::Csv => self.csv.as_deref().ok_or_else(|| usage("this command has no CSV output")),
        }
    }

    pub fn emit(&self, g: &Global) -> Result<(), CliError> {
        let body = self.render(g.format)?;
        write_body(body, g)
    }
}

pub fn write_body(body: &str, g: &Global) -> Result<(), CliError> {
    let mut body = body.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &g.out {
        Some(path) => std::fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Compute(e.to_string()))
        }
    }
}
