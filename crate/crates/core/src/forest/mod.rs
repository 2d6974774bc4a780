//! Random-forest role classifier.
//!
//! # RNG discipline
//!
//! A ChaCha8 generator seeded with the training seed draws one `u64` per
//! tree, in tree order, before any tree is grown. Each tree then owns a
//! ChaCha8 generator seeded with its `u64`, which draws, in this order: the
//! bootstrap indices (positions into the ascending list of labeled rows, or
//! per class for the balanced bootstrap), then one feature permutation per
//! internal node visited depth-first, left child first. Trees are grown in
//! parallel but never share a generator, so the forest does not depend on
//! the thread count.
//!
//! Bootstrap draws are positions, not row contents: permuting the training
//! rows changes which rows each tree sees. With `bootstrap = false` and all
//! features considered at every node, the forest is invariant under row
//! permutation.

mod io;
mod tree;

pub use io::{load_model, model_from_bytes, model_to_bytes, save_model, FORMAT_VERSION};
pub use tree::{DecisionTree, Node};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::labels::RoleLabels;
use crate::matrix::FeatureMatrix;
use tree::{TrainingView, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features examined per split; `None` means ⌊√m⌋.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    /// Draw an equal number of rows from each class per tree.
    pub balanced: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 128,
            max_features: None,
            min_leaf: 1,
            bootstrap: true,
            balanced: false,
        }
    }
}

impl ForestConfig {
    pub fn features_per_split(&self, m: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (m as f64).sqrt().floor() as usize)
            .clamp(1, m.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub n_trees: usize,
    pub max_features: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub balanced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub trees: Vec<DecisionTree>,
    pub schema_id: String,
    pub feature_names: Vec<String>,
    pub role_names: Vec<String>,
    pub meta: TrainingMeta,
    /// Free-form origin string (tool version, config hash).
    pub provenance: String,
}

/// Per-node role probabilities, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleProbabilities {
    pub role_names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl RoleProbabilities {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, role: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[role]).collect()
    }

    pub fn column_by_name(&self, role: &str) -> Option<Vec<f64>> {
        let j = self.role_names.iter().position(|r| r == role)?;
        Some(self.column(j))
    }
}

pub fn train(
    fm: &FeatureMatrix,
    labels: &RoleLabels,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<TrainedModel> {
    if labels.len() != fm.rows() {
        return Err(Error::Shape {
            expected: fm.rows(),
            got: labels.len(),
        });
    }
    let m = fm.width();
    if m == 0 {
        return Err(Error::Training("feature matrix has no columns".into()));
    }
    if cfg.n_trees == 0 {
        return Err(Error::Config("n_trees must be positive".into()));
    }
    if cfg.min_leaf == 0 {
        return Err(Error::Config("min_leaf must be positive".into()));
    }
    let k = labels.n_roles();
    let (rows, classes): (Vec<usize>, Vec<usize>) = labels.labeled().unzip();
    if rows.len() < 2 {
        return Err(Error::Training(format!(
            "{} labeled rows, need at least 2",
            rows.len()
        )));
    }
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &c) in classes.iter().enumerate() {
        per_class[c].push(pos);
    }
    let present = per_class.iter().filter(|v| !v.is_empty()).count();
    if present < 2 {
        return Err(Error::Training(
            "labeled rows contain a single class".into(),
        ));
    }

    // Training data restricted to labeled rows.
    let sub = fm.select_rows(&rows);
    let columns: Vec<&[f64]> = (0..m).map(|j| sub.column(j)).collect();
    let view = TrainingView {
        columns: &columns,
        classes: &classes,
    };
    let params = TreeParams {
        n_classes: k,
        max_features: cfg.features_per_split(m),
        min_leaf: cfg.min_leaf,
    };

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let tree_seeds: Vec<u64> = (0..cfg.n_trees).map(|_| master.gen()).collect();
    let n = rows.len();

    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let sample: Vec<usize> = if !cfg.bootstrap {
                (0..n).collect()
            } else if cfg.balanced {
                let draws = n.div_ceil(present);
                per_class
                    .iter()
                    .filter(|v| !v.is_empty())
                    .flat_map(|members| {
                        (0..draws)
                            .map(|_| members[rng.gen_range(0..members.len())])
                            .collect::<Vec<_>>()
                    })
                    .collect()
            } else {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            };
            DecisionTree::fit(&view, sample, &params, &mut rng)
        })
        .collect();

    Ok(TrainedModel {
        trees,
        schema_id: fm.schema_id(),
        feature_names: fm.names().to_vec(),
        role_names: labels.role_names().to_vec(),
        meta: TrainingMeta {
            seed,
            n_trees: cfg.n_trees,
            max_features: params.max_features,
            min_leaf: cfg.min_leaf,
            bootstrap: cfg.bootstrap,
            balanced: cfg.balanced,
        },
        provenance: format!("roletransfer {}", env!("CARGO_PKG_VERSION")),
    })
}

/// Mean over trees of the class frequencies at the leaf each row reaches.
pub fn predict_proba(model: &TrainedModel, fm: &FeatureMatrix) -> Result<RoleProbabilities> {
    let schema = fm.schema_id();
    if schema != model.schema_id {
        return Err(Error::SchemaMismatch {
            expected: format!("{} [{}]", model.schema_id, model.feature_names.join(",")),
            got: format!("{schema} [{}]", fm.names().join(",")),
        });
    }
    let k = model.role_names.len();
    let t = model.trees.len() as f64;
    let rows = (0..fm.rows())
        .into_par_iter()
        .map(|i| {
            let x = fm.row(i);
            let mut p = vec![0.0; k];
            for tree in &model.trees {
                let counts = tree.leaf_counts(&x);
                let total: u32 = counts.iter().sum();
                for (pj, &c) in p.iter_mut().zip(counts) {
                    *pj += c as f64 / total as f64;
                }
            }
            p.iter_mut().for_each(|v| *v /= t);
            p
        })
        .collect();
    Ok(RoleProbabilities {
        role_names: model.role_names.clone(),
        rows,
    })
}
