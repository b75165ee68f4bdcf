//! Majority-rule probabilistic cellular automata on periodic lattices,
//! Erdős–Rényi random graphs and Newman–Watts small-worlds, together with
//! their mean-field maps, deterministic dynamics and exact Markov analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod markov;
pub mod mean_field;
pub mod numeric;
pub mod oracle;
pub mod pca;
pub mod rng;
pub mod verify;

pub use error::{PcaError, Result};
pub use graph::{Graph, LatticeDim, TopologyKind, TopologySpec};
pub use mean_field::{InnerLimit, MapKind, MapSpec, MeanFieldMap};
pub use pca::{Automaton, DensitySeries, PcaState, RuleParams};
