//! Hypergraph Hamiltonicity workbench.
//!
//! Loose Hamilton ℓ-cycles in k-uniform hypergraphs: cycle and walk
//! machinery, exact fractional tilings, cycle lattices, blow-up allocation,
//! framework checks and the squashing reduction. All verdicts use exact
//! rational or integer arithmetic.

pub mod alloc;
pub mod cycwalk;
pub mod error;
pub mod framework;
pub mod hcore;
pub mod lattice;
pub mod lp;
pub mod rational;
pub mod squash;
pub mod tiling;

pub use error::{Error, Result};
pub use hcore::{Hypergraph, Partition, Uniformity};
pub use cycwalk::{ClosedWalk, Colouring, CyclePath, Kind};
pub use alloc::{AllocParams, BlowupSpec, CoverSpec, Ledger, PlantedSizes};
pub use framework::{Property, Registry, ThresholdTable};
pub use lattice::{Hnf, LatticeBasis};
pub use rational::Q;
pub use squash::BlockPartition;
