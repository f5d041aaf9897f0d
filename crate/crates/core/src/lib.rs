//! Moves on directed multigraphs with infinite edge bundles, the K-theoretic invariants
//! they preserve, standard forms, and deciders producing replayable move traces.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod deciders;
pub mod families;
pub mod graph;
pub mod invariants;
pub mod linalg;
pub mod moves;
pub mod search;
pub mod standard_forms;

pub use graph::{are_isomorphic, CorePartition, Fin, Graph, GraphError, Inf, Multiplicity, VertexClass};
