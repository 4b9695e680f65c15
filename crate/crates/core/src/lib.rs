//! Frobenius primality testing over `Z_n[sqrt(c)]` with a fixed base, and
//! the structural machinery used to rule out Frobenius pseudoprimes:
//! cofactor searches over exact quadratic integers, profiles of
//! split/inert prime factors, pairwise consistency, and range scans.

pub mod arith;
pub mod error;
pub mod exact;
pub mod frob;
pub mod harness;
pub mod par;
pub mod quad;
pub mod report;
pub mod structure;

pub use error::{Error, Result};
pub use frob::{frobenius_index, frobenius_test, TestOutcome, Verdict};
pub use par::Execution;
pub use quad::{QuadElem, QuadRing};
