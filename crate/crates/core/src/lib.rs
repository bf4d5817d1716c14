//! Spectral determinants of Laplacians on metric (quantum) graphs, their
//! first-order response to edge-length perturbations, closed forms for
//! complete, complete bipartite and circulant graphs, and spanning-tree
//! counting from the determinant.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod edgelist;
pub mod error;
pub mod families;
pub mod graph;
pub mod logscalar;
pub mod perturbation;
pub mod spectral;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{circulant_graph, complete_bipartite, complete_graph, make_metric, Family, Graph, MetricGraph};
pub use logscalar::LogScalar;
pub use spectral::{analyze, r_matrix, spectral_determinant, symmetric_eigen, Spectrum};
