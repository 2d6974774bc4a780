//! The five base structural features of each node.

mod clustering;
mod pagerank;

pub use clustering::{clustering_all, local_clustering};
pub use pagerank::{pagerank, PageRankParams, PageRankResult};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::FeatureMatrix;

pub const DEGREE: &str = "degree";
pub const INDEGREE: &str = "indegree";
pub const OUTDEGREE: &str = "outdegree";
pub const CLUSTERING: &str = "clustering";
pub const PAGERANK: &str = "pagerank";

/// Canonical column order of the base feature matrix.
pub const BASE_FEATURES: [&str; 5] = [DEGREE, INDEGREE, OUTDEGREE, CLUSTERING, PAGERANK];

#[derive(Debug, Clone)]
pub struct BaseFeatures {
    pub matrix: FeatureMatrix,
    pub pagerank: PageRankResult,
}

/// Computes degree, indegree, outdegree, local clustering coefficient and
/// PageRank for every node, in that column order.
pub fn base_features(g: &Graph, params: &PageRankParams) -> Result<BaseFeatures> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let deg = g.degrees();
    let view = g.symmetrize_simple();
    let pr = pagerank(g, params)?;

    let to_f = |v: &[u64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let matrix = FeatureMatrix::from_columns(
        n,
        [
            (DEGREE.to_string(), to_f(&deg.total)),
            (INDEGREE.to_string(), to_f(&deg.inn)),
            (OUTDEGREE.to_string(), to_f(&deg.out)),
            (CLUSTERING.to_string(), clustering_all(&view)),
            (PAGERANK.to_string(), pr.scores.clone()),
        ],
    )?;
    Ok(BaseFeatures {
        matrix,
        pagerank: pr,
    })
}
