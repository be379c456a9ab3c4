//! Batch orchestration for `toric-wkstab`: run configuration, input loading,
//! the perturbation sweep, validation diagnostics and report serialization.

pub mod config;
pub mod inputs;
pub mod record;
pub mod report;
pub mod sweep;
pub mod validate;

pub use config::RunConfig;
pub use record::{Scalar, SweepRecord, SweepRun};
pub use report::{determinism_hash, report, Format};
pub use sweep::run_sweep;
pub use validate::{validate_inputs, Diagnostic, Severity};

/// Error caused by user input (bad file, bad flag value), as opposed to a
/// solver failure. Mapped to exit code 2 by the binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// `Err(InputError)` wrapped in `anyhow`.
pub fn input_error<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(InputError(msg.into()).into())
}
