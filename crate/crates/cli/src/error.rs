use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use splitgeom::GeomError;

/// 1-based position in the scenario text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

fn located(loc: &Option<Location>) -> String {
    loc.map(|l| format!(" at {l}")).unwrap_or_default()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {at}: {message}")]
    Parse { at: Location, message: String },
    #[error("invalid scenario{}: {message}", located(.at))]
    Validation { at: Option<Location>, message: String },
    #[error("geometry error in {context}: {source}")]
    Geometry {
        context: String,
        #[source]
        source: GeomError,
    },
    #[error("cannot access {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn geometry(context: impl Into<String>) -> impl FnOnce(GeomError) -> CliError {
        let context = context.into();
        move |source| CliError::Geometry { context, source }
    }

    /// Machine-readable form written to `error.json`.
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, loc) = match self {
            CliError::Parse { at, .. } => ("parse", Some(*at)),
            CliError::Validation { at, .. } => ("validation", *at),
            CliError::Geometry { .. } => ("geometry", None),
            CliError::Io { .. } => ("io", None),
            CliError::Csv(_) => ("csv", None),
        };
        serde_json::json!({
            "error": kind,
            "message": self.to_string(),
            "line": loc.map(|l| l.line),
            "column": loc.map(|l| l.column),
        })
    }
}
