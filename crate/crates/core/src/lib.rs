//! Workload-aware RDF fragmentation, allocation, and distributed SPARQL
//! query planning.
//!
//! The pipeline: mine a query load into anonymized triple patterns and a
//! global query graph, derive minterm fragmentation predicates, reduce them,
//! allocate the fragments to hosts by a benefit function, and plan queries
//! against the resulting catalog with a distributed cost model.

pub mod allocate;
pub mod catalog;
pub mod datagen;
pub mod fragment;
pub mod model;
pub mod ntriples;
pub mod oracle;
pub mod plan;
pub mod qgen;
pub mod sparql;
pub mod store;
pub mod workload;

pub use model::{Dictionary, Term, TermId, TermKind, Triple};
pub use store::{IdPattern, IndexOrder, TripleStore};
