//! Experiment runner for the numerical laboratory in `fockbench-core`: a flat
//! key=value configuration layer, a small expression language for symbols,
//! deterministic CSV reports, the binary field-grid format, and the
//! acceptance suite command.

pub mod config;
pub mod experiments;
pub mod expr;
pub mod fieldio;
pub mod report;

/// Process exit codes: 0 success, 1 configuration error, 2 check failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    ConfigError,
    CheckFailure,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::ConfigError => 1,
            Outcome::CheckFailure => 2,
        }
    }
}
