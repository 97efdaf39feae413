//! Exact-arithmetic toolkit for spectral sequences, extended spectral
//! sequences and linear witness books over a field.
//!
//! The crate is organized around the exact linear algebra substrate
//! ([`exactla`]), finitely supported bigraded complexes ([`bigraded`]), the
//! indexing category of disc objects as syntax ([`dcat`]), extended spectral
//! sequences ([`espse`]), linear witness books ([`lwb`]), the nerve/realization
//! adjunction between them ([`adjunction`]), shift and the two décalage
//! functors ([`decalage`]), model-structure machinery ([`model`]) and the
//! spectral sequence of a finite filtered complex ([`filtered`]).
//!
//! All arithmetic is exact (rationals or a prime field); every operation is a
//! pure function on immutable values, so concurrent read-only use is
//! unrestricted.

pub mod error;
pub mod exactla;

pub mod bigraded;
pub mod dcat;
pub mod espse;
pub(crate) mod homsolve;
pub mod lwb;

pub mod adjunction;
pub mod decalage;
pub mod filtered;
pub mod model;
pub mod sample;

pub use error::{Error, Result, ValidationReport};
pub use exactla::{FieldSpec, Matrix, Scalar, Subspace, DEFAULT_PRIME};
