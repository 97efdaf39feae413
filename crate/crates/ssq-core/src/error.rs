//! Error and validation-report types shared by every module.

use thiserror::Error;

/// Outcome of validating an object against its structural invariants.
///
/// Validation never raises: it collects one human-readable line per failed
/// check so callers (and the CLI) can report everything at once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, issue: impl Into<String>) {
        self.issues.push(issue.into());
    }

    pub fn check(&mut self, ok: bool, issue: impl Into<String>) {
        if !ok {
            self.issues.push(issue.into());
        }
    }

    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.issues.is_empty() {
            write!(f, "valid")
        } else {
            for (i, issue) in self.issues.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("not a chain map: {0}")]
    NotChainMap(String),
    #[error("page mismatch: {0}")]
    PageMismatch(String),
    #[error("range error: {0}")]
    RangeError(String),
    #[error("horizon error: {0}")]
    HorizonError(String),
    #[error("tail error: {0}")]
    TailError(String),
    #[error("diagram error: {0}")]
    DiagramError(String),
    #[error("zero morphism has no disc realization")]
    ZeroMorphism,
    #[error("composition error: {0}")]
    CompositionError(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("precondition violated: {0}")]
    PreconditionError(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
}

pub type Result<T> = std::result::Result<T, Error>;
