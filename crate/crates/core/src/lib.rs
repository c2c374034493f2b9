//! Reading-time and read-level estimation for multi-message newsletters from
//! browser interaction logs.
//!
//! The pipeline runs raw events through sessionization and per-second window
//! snapshots ([`event`]), feature extraction ([`features`]), heuristic and
//! learned estimators ([`baselines`], [`neural`], [`estimators`]), aggregation
//! into reading times and read levels ([`aggregation`]) and cross-validated
//! evaluation with paired comparisons ([`evaluation`]). [`simulator`] produces
//! labeled synthetic corpora for end-to-end checks.

// `!(x >= 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod baselines;
pub mod corpus;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod event;
pub mod experiment;
pub mod features;
pub mod geometry;
pub mod neural;
pub mod simulator;

pub use error::{Error, Result};
