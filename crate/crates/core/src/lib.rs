//! Graph total variation regularized classification on point clouds.
//!
//! The crate builds ε-neighborhood graphs over labeled samples, minimizes the
//! regularized empirical risk `λ·GTV(u) + (1/n) Σ |u_i - y_i|` exactly (min
//! cut, enumeration) or approximately (primal–dual), and compares solutions
//! with synthetic ground truth through risks and transport distances.

pub mod assignment;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod groundtruth;
pub mod kernels;
pub mod maxflow;
pub mod metrics;
pub mod quadrature;
pub mod solver;
pub mod spatial;

pub use dataset::LabeledCloud;
pub use error::{Error, Result};
pub use graph::{Edge, EdgeField, NeighborGraph, NodeFunction};
pub use groundtruth::GroundTruthModel;
pub use kernels::KernelProfile;
pub use solver::{Certificate, Method, SolveResult, SolverConfig};
