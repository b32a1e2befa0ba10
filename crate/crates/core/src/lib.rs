//! Exact desk-scale simulation and verification of conditional disclosure
//! of secrets (CDS) protocols, their quantum variants, and the constructive
//! pieces of the related lower-bound arguments.

pub mod classical;
pub mod error;
pub mod exec;
pub mod forrelation;
pub mod lowerbound;
pub mod protocol;
pub mod qcore;
pub mod quantum;
pub mod verifier;

pub use error::{Error, Result};
