//! Combinatorial rigidity and minimal persistence of directed graphs in
//! the plane: checks, persistence-preserving operations, and planners for
//! construction, decomposition and transformation sequences.

pub mod cli;
pub mod enumerator;
pub mod error;
pub mod graph;
pub mod ops;
pub mod persistence;
pub mod rigidity;
pub mod sequencer;

pub use error::{Error, Result};
pub use graph::{labeled_equal, DirectedGraph, UndirectedView, VertexId};
pub use ops::{OpOutcome, Operation};
pub use persistence::{check_min_persistent, dof_allocation, DofAllocation, PersistenceReport};
pub use rigidity::{
    check_rigidity, defines_implicit_edge, oracle_minimally_rigid, RigidityVerdict,
};
pub use sequencer::{OpSet, Plan, PlanJson};
