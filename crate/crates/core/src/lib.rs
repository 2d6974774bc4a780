//! Role classification that transfers across networks.
//!
//! Per-node structural features are extracted from a directed graph, mapped
//! to network-independent scales, smoothed over neighborhoods, and fed to a
//! random forest trained on one network and applied to another.

pub mod aggregate;
pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod graph;
pub mod io;
pub mod labels;
pub mod matrix;
pub mod pipeline;
pub mod powerlaw;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
pub use graph::{Graph, ParseOptions, UndirectedSimpleView};
pub use labels::RoleLabels;
pub use matrix::FeatureMatrix;
pub use transform::TransformPlan;
