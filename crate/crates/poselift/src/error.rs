//! Crate-wide error type with machine-parsable error classes.
//!
//! Every error maps to one of four classes so shell pipelines can branch on
//! the exit code: `config` (2), `parse` (3), `numeric` (4), `state` (5).

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad configuration: missing files, invalid parameter combinations,
    /// inconsistent inputs detected before any work starts.
    #[error("config: {0}")]
    Config(String),

    /// A file did not match its declared schema. Carries the offending
    /// location when known.
    #[error("parse: {path}{}: {msg}", row.map(|r| format!(" row {r}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        /// 1-based data row number (header excluded), when applicable.
        row: Option<usize>,
        msg: String,
    },

    /// Numerical failure: degenerate geometry, non-convergence, non-finite
    /// values where finite ones are required.
    #[error("numeric: {0}")]
    Numeric(String),

    /// Operation invoked out of order or on data lacking a prerequisite
    /// (e.g. evaluating before training, single-class training set).
    #[error("state: {0}")]
    State(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(path: impl Into<PathBuf>, row: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            row,
            msg: msg.into(),
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }

    /// Stable one-word class label, the first token of the display form.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Numeric(_) => "numeric",
            Error::State(_) => "state",
        }
    }

    /// Process exit code for the CLI (0 is success, 1 is reserved for panics).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Parse { .. } => 3,
            Error::Numeric(_) => 4,
            Error::State(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Config(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            path: PathBuf::new(),
            row: None,
            msg: format!("json: {e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_and_exit_code_agree() {
        let cases = [
            (Error::config("x"), "config", 2),
            (Error::parse("f.csv", Some(3), "bad"), "parse", 3),
            (Error::numeric("nan"), "numeric", 4),
            (Error::state("no model"), "state", 5),
        ];
        for (err, class, code) in cases {
            assert_eq!(err.class(), class);
            assert_eq!(err.exit_code(), code);
        }
    }

    #[test]
    fn parse_error_names_row() {
        let e = Error::parse("tracks.csv", Some(17), "likelihood out of range");
        let s = e.to_string();
        assert!(s.contains("row 17"), "{s}");
        assert!(s.starts_with("parse:"), "{s}");
    }
}
