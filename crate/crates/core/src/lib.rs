//! Multi-dimensional balanced graph partitioning.
//!
//! A graph is split into two parts by running projected gradient ascent on the
//! continuous relaxation `max ½ xᵀAx` over `x ∈ [-1,1]ⁿ` subject to one slab
//! constraint `|⟨wʲ, x⟩ - bⱼ| ≤ ε·Wⱼ` per weight function, and then rounding
//! the fractional point. Larger part counts are handled by recursive bisection.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: CSR adjacency, edge-list ingestion, the `A·x` kernel.
//! * [`weights`]: vertex weight functions (unit, degree, PageRank, ...).
//! * [`projection`]: Euclidean projection onto the box ∩ slabs feasible set.
//! * [`solver`]: the gradient loop with adaptive steps and vertex fixing.
//! * [`partition`]: randomized rounding, recursive bisection, hash baseline.
//! * [`metrics`]: edge locality, cut size and imbalance.
//! * [`generate`]: seeded random and structured test graphs.
//! * [`oracle`]: exhaustive reference solvers used by the test-suite.
//! * [`cli`]: the `mdbgp` command line driver.

pub mod cli;
pub mod error;
pub mod generate;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod partition;
pub mod projection;
pub mod rng;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
pub use graph::Graph;
pub use metrics::{cut_size, edge_locality, imbalance, MetricsReport};
pub use partition::{hash_partition, recursive_partition, Partition, PartitionConfig};
pub use projection::{project_k, BalanceSpec, Method, ProjectionOptions, ProjectionResult};
pub use solver::{run_gd, FractionalSolution, GdConfig, IterationTrace, StepMode};
pub use weights::{WeightSet, WeightSpec};
