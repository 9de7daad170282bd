//! Simulation toolkit for graph coloring in the Online-LOCAL model.
//!
//! The modules build host graphs, run games between online algorithms and
//! adversaries, and check the combinatorial invariants that certify a loss.

#![forbid(unsafe_code)]

pub mod adversaries;
pub mod analysis;
pub mod engine;
pub mod graph_core;
pub mod oracles;
pub mod topologies;
pub mod unify_color;

pub use graph_core::{Color, Coloring, DirectedWalk, GraphError, LabeledGraph, NodeId, WalkKind};
