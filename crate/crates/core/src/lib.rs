//! Bi-objective shortest paths with ε-approximate Pareto sets, accelerated by
//! preprocessing regions where the two objectives are linearly correlated.
//!
//! Pipeline: [`graph_io`] loads or generates a [`graph_io::BiGraph`];
//! [`clustering`] detects correlation lines and clusters; [`icca`] builds
//! super-edges for each cluster; [`query`] assembles a generalized query graph
//! and runs [`apex_search`] on it. [`oracle`] holds the exact solvers used as
//! ground truth.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apex_search;
pub mod cli;
pub mod clustering;
pub mod cost;
pub mod graph_io;
pub mod icca;
pub mod oracle;
pub mod query;
