//! Structured CRediT contribution mining from free-text author contribution
//! statements.
//!
//! The pipeline resolves author mentions against the byline ([`names`]),
//! splits statements into attributed clauses ([`segment`]), and assigns
//! contributor roles with a rule / keyword / embedding cascade ([`hcontrib`]).
//! Downstream modules mine role co-occurrence ([`miner`]), compute positional
//! statistics ([`analytics`]), score against gold labels ([`evaluation`]) and
//! predict roles from byline metadata ([`predictor`]).

pub mod analytics;
pub mod embed;
pub mod error;
pub mod evaluation;
pub mod hcontrib;
pub mod miner;
pub mod model;
pub mod names;
pub mod pipeline;
pub mod predictor;
pub mod segment;
pub mod taxonomy;

pub use error::{Error, Result};
