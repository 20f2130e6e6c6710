//! Temporal citation-network analysis.
//!
//! The crate ingests a timestamped citation graph ([`corpus`]), computes
//! descriptive temporal statistics ([`temporal`]), counts per-document
//! discovery cascades ([`cascade`]), and runs the attention-bias analyses
//! ([`bias`]) on top of discrete information measures ([`infotheory`]) and
//! least-squares statistics ([`stats`]). [`synth`] generates seeded citation
//! networks with planted mechanisms to check every detector against.

pub mod bias;
pub mod cascade;
pub mod corpus;
pub mod error;
pub mod filter;
pub mod infotheory;
pub mod month;
pub mod stats;
pub mod synth;
pub mod temporal;

pub use cascade::{compute_all, compute_cascade, infection_rate, CascadeCounts, CascadeTable, CascadeWindows, ExposureCounting};
pub use corpus::{AnomalyPolicy, CitationGraph, DocIdx, Document, IngestReport};
pub use error::{Error, Result};
pub use filter::CohortFilter;
