//! Safety verification of hybrid automata through symmetry-based
//! abstraction: a virtual automaton is built from a concrete one and a
//! family of symmetry maps, its reachset is computed to a fixed point, and
//! per-mode virtual reachsets are mapped back to answer concrete queries.

pub mod abstraction;
pub mod automaton;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geom;
pub mod reach;
pub mod symmetry;

pub use error::{Error, Result};
