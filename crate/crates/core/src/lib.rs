//! Fault-tolerant single-source shortest paths and MSF sensitivity analysis.
//!
//! The library builds, from a positively weighted undirected graph, a sparse
//! subgraph H such that for any set F of at most f edge failures the distance
//! from the source inside H − F is at most (2|F|+1) times the true distance
//! in G − F, together with the query machinery (an MSF sensitivity oracle
//! over a reweighted graph plus an LCA oracle) to answer post-failure
//! distance and path queries without touching G again.

pub mod aspt;
pub mod cluster;
pub mod dynforest;
pub mod error;
pub mod generators;
pub mod graph;
pub mod msf_oracle;
pub mod reference;
pub mod ssdo;

pub use error::{Error, Result};
