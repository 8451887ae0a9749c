//! Batch bibliometric analytics over publication corpora.
//!
//! The library ingests a publication corpus (plus citation counts, gender
//! ground truth, a name-gender response matrix, and a topic lexicon) from
//! documented file formats and derives:
//!
//! * consensus-based gender estimates per author name, fitted with EM over
//!   multiple unreliable sources ([`gender`]),
//! * team-science and citation statistics ([`team`]),
//! * cumulative co-authorship network metrics and island (connected
//!   component) evolution ([`network`]),
//! * research-topic phrases extracted from paper titles ([`topics`]).
//!
//! [`pipeline`] orchestrates a full deterministic run and writes tabular
//! outputs plus a run manifest. All analytics operate on an immutable
//! [`corpus::Corpus`] and are safe to run concurrently.

pub mod corpus;
pub mod error;
pub mod gender;
pub mod network;
pub mod pipeline;
pub mod team;
pub mod topics;
pub mod tsv;

pub use error::{Error, Result};
