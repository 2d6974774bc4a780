//! Per-network feature pipeline: base features, transformation,
//! aggregation. Every network is processed independently of all others.

use crate::aggregate::{aggregate_from, AggregationConfig, Diagnostic};
use crate::error::Result;
use crate::features::{base_features, PageRankParams, PageRankResult};
use crate::forest::ForestConfig;
use crate::graph::Graph;
use crate::matrix::FeatureMatrix;
use crate::powerlaw::DEFAULT_MIN_TAIL;
use crate::transform::{apply_plan, fit_plan, FitSet, TransformPlan};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub plan: TransformPlan,
    pub pagerank: PageRankParams,
    pub min_tail: usize,
    pub aggregation: AggregationConfig,
    /// Aggregate untransformed base features instead of transformed ones.
    pub aggregate_raw: bool,
    pub forest: ForestConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            plan: TransformPlan::All,
            pagerank: PageRankParams::default(),
            min_tail: DEFAULT_MIN_TAIL,
            aggregation: AggregationConfig::default(),
            aggregate_raw: false,
            forest: ForestConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkFeatures {
    pub base: FeatureMatrix,
    pub pagerank: PageRankResult,
    pub fits: FitSet,
    pub transformed: FeatureMatrix,
    /// Final classifier input: transformed features plus every aggregation
    /// round.
    pub features: FeatureMatrix,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn network_features(g: &Graph, cfg: &PipelineConfig) -> Result<NetworkFeatures> {
    let base = base_features(g, &cfg.pagerank)?;
    let fits = fit_plan(&base.matrix, cfg.plan, cfg.min_tail)?;
    let transformed = apply_plan(&base.matrix, cfg.plan, &fits, g, cfg.pagerank.teleport)?;
    let view = g.symmetrize_simple();
    let seed = if cfg.aggregate_raw {
        &base.matrix
    } else {
        &transformed
    };
    let agg = aggregate_from(&transformed, seed, &view, &cfg.aggregation)?;
    Ok(NetworkFeatures {
        base: base.matrix,
        pagerank: base.pagerank,
        fits,
        transformed,
        features: agg.matrix,
        diagnostics: agg.diagnostics,
    })
}
