//! Exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | configuration or input error (flags, files, schema) |
//! | 3 | numerical failure (pricing, calibration) |
//! | 4 | validation checks failed |

use std::fmt;

use svcal_core::Error;

pub const CONFIG: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const CHECKS: u8 = 4;

/// Bad flags or inputs detected by the CLI itself.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
pub struct ChecksFailed(pub Vec<String>);

impl fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "failed checks: {}", self.0.join(", "))
    }
}

impl std::error::Error for ChecksFailed {}

pub fn config(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn core_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::InvalidContract(_)
        | Error::MissingColumn(_)
        | Error::EmptyChain(_)
        | Error::Parse(_)
        | Error::Io(_)
        | Error::Csv(_) => CONFIG,
        Error::QuotePricing { source, .. } => core_code(source),
        _ => NUMERICAL,
    }
}

/// Walks the error chain for the first error with a known class.
pub fn code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<ChecksFailed>() {
            return CHECKS;
        }
        if cause.is::<ConfigError>() || cause.is::<std::io::Error>() {
            return CONFIG;
        }
        if let Some(core) = cause.downcast_ref::<Error>() {
            return core_code(core);
        }
    }
    NUMERICAL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes() {
        assert_eq!(code_for(&config("x")), CONFIG);
        assert_eq!(
            code_for(&Error::MissingColumn("strike".into()).into()),
            CONFIG
        );
        let e = anyhow::Error::from(Error::NoSolution("x".into())).context("pricing");
        assert_eq!(code_for(&e), NUMERICAL);
        assert_eq!(code_for(&ChecksFailed(vec!["a".into()]).into()), CHECKS);
        let nested = Error::QuotePricing {
            index: 3,
            source: Box::new(Error::NestedRefinement(1e-3)),
        };
        assert_eq!(code_for(&nested.into()), NUMERICAL);
    }
}
