//! Statistically validated signed correlation networks and detection of the
//! largest strong-correlation balanced module (LSCBM).
//!
//! Pipeline: [`ingest`] prices into log returns, build the Pearson matrix and
//! keep only t-test-significant entries ([`corrnet`]), threshold into a
//! signed graph ([`signed`]), then search it with MaxBalanceCore
//! ([`detect`]). [`randgen`], [`oracle`] and [`experiments`] provide synthetic
//! benchmarks, exact ground truth on small graphs and the Monte Carlo studies.

pub mod corrnet;
pub mod detect;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod randgen;
pub mod signed;
pub mod tdist;

pub use corrnet::{CorrMatrix, NetworkStats, ValidatedCorrMatrix};
pub use detect::{detect, DetectConfig};
pub use error::{Error, Result};
pub use signed::{Module, SignedGraph};
