//! Exact and asymptotic L2 small-ball probabilities of Gaussian processes,
//! computed from the eigenvalues of their covariance operators.
//!
//! For a centred Gaussian process with covariance eigenvalues `λₙ`, the
//! squared L2 norm is distributed as `Q = Σ λₙξₙ²` with i.i.d. standard
//! normal `ξₙ`. The crate evaluates `P{Q ≤ r}` exactly ([`exactdist`]), by
//! the saddle-point formula ([`saddle`]), by the logarithmic asymptotics for
//! slowly varying counting functions ([`slowvary`]), and compares two
//! spectra at the exact and logarithmic levels ([`comparison`]).

pub mod comparison;
pub mod error;
pub mod exactdist;
pub mod quad;
pub mod saddle;
pub mod series;
pub mod slowvary;
pub mod spectra;
pub mod table;

pub mod cli;

pub use error::{Error, Result};
pub use spectra::{Spectrum, TailModel};
