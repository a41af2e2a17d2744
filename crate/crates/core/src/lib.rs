//! Patent-claim keyword extraction with specialization trees.
//!
//! Claims are linked into a dependency graph, their constituency parses are
//! folded into specialization trees, and words are weighted by how deep they
//! sit in both structures. The resulting keyword queries run against a local
//! TF-IDF index and are scored with Recall and PRES.

pub mod baseline;
pub mod claimgraph;
pub mod commands;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod parsetree;
pub mod pipeline;
pub mod scoring;
pub mod search;
pub mod spectree;
pub mod text;

pub use error::{Error, Result};
