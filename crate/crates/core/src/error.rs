use thiserror::Error;

use crate::network::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("netlist parse error: {0}")]
    Parse(String),

    #[error("netlist failed validation ({} violation(s)): {}", .0.len(), summarize(.0))]
    Validation(Vec<Violation>),

    #[error("flow assignment failed at `{element}`: {reason}")]
    Flow { element: String, reason: String },

    #[error(
        "time step {dt:.6e} s violates the stability bound {bound:.6e} s in channel `{channel}`"
    )]
    Stability { channel: String, dt: f64, bound: f64 },

    #[error("unsupported netlist pattern at `{element}`: {reason}")]
    Unsupported { element: String, reason: String },

    #[error("design window violated: {0}")]
    DesignWindow(String),

    #[error("truth table error: {0}")]
    TruthTable(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("schedule error: {0}")]
    Schedule(String),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
