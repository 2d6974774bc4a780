//! Transforms that map base features of any network into a common,
//! network-independent space.
//!
//! Each network is transformed on its own: quantiles and power-law fits are
//! computed from that network's values only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{CLUSTERING, DEGREE, INDEGREE, OUTDEGREE, PAGERANK};
use crate::graph::Graph;
use crate::matrix::FeatureMatrix;
use crate::powerlaw::{fit_power_law, FitRecord, PowerLawFit};

pub const QUANTILE_SUFFIX: &str = "_quantile";
pub const POWER_LAW_SUFFIX: &str = "_powerlaw";
pub const NORMALIZED_SUFFIX: &str = "_normalized";

/// Which base features get transformed, and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformPlan {
    None,
    /// Quantile transform of all five base features.
    Quantile,
    /// Power-law transform of degree, indegree and outdegree.
    Degree,
    /// Normalized PageRank.
    PageRank,
    /// `Degree` and `PageRank` together.
    All,
}

impl TransformPlan {
    pub const ALL_PLANS: [TransformPlan; 5] = [
        TransformPlan::None,
        TransformPlan::Quantile,
        TransformPlan::Degree,
        TransformPlan::PageRank,
        TransformPlan::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformPlan::None => "none",
            TransformPlan::Quantile => "quantile",
            TransformPlan::Degree => "degree",
            TransformPlan::PageRank => "pagerank",
            TransformPlan::All => "all",
        }
    }

    /// Base columns that need a power-law fit under this plan.
    pub fn power_law_columns(self) -> &'static [&'static str] {
        match self {
            TransformPlan::Degree | TransformPlan::All => &[DEGREE, INDEGREE, OUTDEGREE],
            _ => &[],
        }
    }

    fn normalizes_pagerank(self) -> bool {
        matches!(self, TransformPlan::PageRank | TransformPlan::All)
    }
}

impl fmt::Display for TransformPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransformPlan::ALL_PLANS
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown transform plan {s:?} (expected none, quantile, degree, pagerank or all)"
                ))
            })
    }
}

/// Fraction of values strictly smaller than each value. Output lies in
/// `[0, 1)` and tied inputs share an output.
pub fn quantile_transform(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let q = i as f64 / n as f64;
        for &k in &order[i..j] {
            out[k] = q;
        }
        i = j;
    }
    out
}

/// `(x / x_min)^(alpha - 1)` for positive `x`, 0 for `x = 0`.
///
/// Values below `x_min` follow the same formula and land in `(0, 1)`, which
/// keeps the map strictly increasing on the positive axis.
pub fn power_law_transform(values: &[f64], fit: &PowerLawFit) -> Vec<f64> {
    let exponent = fit.alpha - 1.0;
    values
        .iter()
        .map(|&x| {
            if x > 0.0 {
                (x / fit.x_min).powf(exponent)
            } else {
                0.0
            }
        })
        .collect()
}

/// Lower bound on any node's PageRank given the teleport probability and the
/// rank held by dangling nodes.
pub fn pagerank_lower_bound(pr: &[f64], g: &Graph, teleport: f64) -> Result<f64> {
    if pr.len() != g.node_count() {
        return Err(Error::Shape {
            expected: g.node_count(),
            got: pr.len(),
        });
    }
    if pr.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let dangling_mass: f64 = g.dangling().map(|d| pr[d]).sum();
    Ok((teleport + (1.0 - teleport) * dangling_mass) / pr.len() as f64)
}

/// PageRank divided by its theoretical lower bound; comparable across
/// networks of different size.
pub fn normalized_pagerank(pr: &[f64], g: &Graph, teleport: f64) -> Result<Vec<f64>> {
    let low = pagerank_lower_bound(pr, g, teleport)?;
    Ok(pr.iter().map(|&p| p / low).collect())
}

/// Fitted power laws keyed by base column name.
pub type FitSet = BTreeMap<String, PowerLawFit>;

/// Fits every column the plan transforms with a power law.
pub fn fit_plan(fm: &FeatureMatrix, plan: TransformPlan, min_tail: usize) -> Result<FitSet> {
    let mut fits = FitSet::new();
    for &name in plan.power_law_columns() {
        let col = fm
            .column_by_name(name)
            .ok_or_else(|| Error::Config(format!("feature matrix lacks column {name:?}")))?;
        let fit = fit_power_law(col, min_tail)
            .map_err(|e| Error::Fit(format!("column {name}: {e}")))?;
        fits.insert(name.to_string(), fit);
    }
    Ok(fits)
}

pub fn fit_records(fits: &FitSet) -> Vec<FitRecord> {
    fits.iter().map(|(k, f)| FitRecord::new(k.clone(), f)).collect()
}

/// Applies `plan` to a base feature matrix. Transformed columns replace the
/// originals in place and carry a suffix naming the transform; `None` returns
/// the input unchanged.
pub fn apply_plan(
    fm: &FeatureMatrix,
    plan: TransformPlan,
    fits: &FitSet,
    g: &Graph,
    teleport: f64,
) -> Result<FeatureMatrix> {
    if plan == TransformPlan::None {
        return Ok(fm.clone());
    }
    for required in [DEGREE, INDEGREE, OUTDEGREE, CLUSTERING, PAGERANK] {
        if fm.position(required).is_none() {
            return Err(Error::Config(format!(
                "feature matrix lacks base column {required:?}"
            )));
        }
    }
    if fm.rows() != g.node_count() {
        return Err(Error::Shape {
            expected: g.node_count(),
            got: fm.rows(),
        });
    }

    let mut out = FeatureMatrix::new(fm.rows());
    for (name, col) in fm.columns() {
        let (new_name, values) = if plan == TransformPlan::Quantile {
            (format!("{name}{QUANTILE_SUFFIX}"), quantile_transform(col))
        } else if plan.power_law_columns().contains(&name) {
            let fit = fits
                .get(name)
                .ok_or_else(|| Error::Config(format!("no power-law fit for column {name:?}")))?;
            (format!("{name}{POWER_LAW_SUFFIX}"), power_law_transform(col, fit))
        } else if name == PAGERANK && plan.normalizes_pagerank() {
            (
                format!("{name}{NORMALIZED_SUFFIX}"),
                normalized_pagerank(col, g, teleport)?,
            )
        } else {
            (name.to_string(), col.to_vec())
        };
        out.push_column(new_name, values)?;
    }
    Ok(out)
}
