//! Recursive neighborhood aggregation.
//!
//! Round `i` replaces every feature by the mean of that feature over a node's
//! neighbors in the undirected simple graph, starting from round `i - 1`.
//! The result concatenates the input with every round.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::UndirectedSimpleView;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregationConfig {
    pub rounds: usize,
    pub emit_diagnostics: bool,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            rounds: 5,
            emit_diagnostics: false,
        }
    }
}

/// Redundancy of one aggregated column against the earlier rounds of the
/// same feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub round: usize,
    pub feature: String,
    /// Largest |Pearson correlation| against any earlier round.
    pub rho: f64,
    /// Set when the new column is constant; `rho` is then 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct Aggregated {
    pub matrix: FeatureMatrix,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn round_name(feature: &str, round: usize) -> String {
    format!("{feature}_r{round}")
}

/// One round: mean of `values` over each node's neighbors, 0 for isolated
/// nodes.
pub fn neighbor_mean(values: &[f64], view: &UndirectedSimpleView) -> Vec<f64> {
    (0..view.node_count())
        .into_par_iter()
        .map(|u| {
            let nb = view.neighbors(u);
            if nb.is_empty() {
                0.0
            } else {
                nb.iter().map(|&v| values[v]).sum::<f64>() / nb.len() as f64
            }
        })
        .collect()
}

pub fn aggregate(
    fm: &FeatureMatrix,
    view: &UndirectedSimpleView,
    cfg: &AggregationConfig,
) -> Result<Aggregated> {
    aggregate_from(fm, fm, view, cfg)
}

/// Like [`aggregate`], but the rounds are seeded from `seed` while the
/// output's leading block is `head`. With `head == seed` this is plain
/// aggregation; passing raw features as `seed` aggregates untransformed
/// values next to transformed ones.
pub fn aggregate_from(
    head: &FeatureMatrix,
    seed: &FeatureMatrix,
    view: &UndirectedSimpleView,
    cfg: &AggregationConfig,
) -> Result<Aggregated> {
    for fm in [head, seed] {
        if fm.rows() != view.node_count() {
            return Err(Error::Shape {
                expected: view.node_count(),
                got: fm.rows(),
            });
        }
    }
    let mut out = head.clone();
    let mut diagnostics = Vec::new();
    let mut history: Vec<Vec<Vec<f64>>> = seed.columns().map(|(_, c)| vec![c.to_vec()]).collect();

    for round in 1..=cfg.rounds {
        for (j, (name, _)) in seed.columns().enumerate() {
            let prev = history[j].last().expect("round 0 present");
            let next = neighbor_mean(prev, view);
            if cfg.emit_diagnostics {
                let older: Vec<&[f64]> = history[j].iter().map(Vec::as_slice).collect();
                let (rho, degenerate) = convergence_diagnostic(&older, &next)?;
                diagnostics.push(Diagnostic {
                    round,
                    feature: name.to_string(),
                    rho,
                    degenerate,
                });
            }
            out.push_column(round_name(name, round), next.clone())?;
            history[j].push(next);
        }
    }
    Ok(Aggregated {
        matrix: out,
        diagnostics,
    })
}

fn is_constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// Pearson correlation; `None` if either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Maximum |ρ| between `new_round` and each column in `previous`.
///
/// A constant new column reports `(1.0, true)`. Constant older columns carry
/// no correlation signal and are skipped; if nothing is left the result is 0.
pub fn convergence_diagnostic(previous: &[&[f64]], new_round: &[f64]) -> Result<(f64, bool)> {
    for p in previous {
        if p.len() != new_round.len() {
            return Err(Error::Shape {
                expected: new_round.len(),
                got: p.len(),
            });
        }
    }
    if is_constant(new_round) {
        return Ok((1.0, true));
    }
    let rho = previous
        .iter()
        .filter_map(|p| pearson(p, new_round))
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok((rho, false))
}

/// Writes diagnostics as TSV `round feature rho`.
pub fn diagnostics_tsv(diags: &[Diagnostic]) -> String {
    let mut s = String::from("round\tfeature\trho\n");
    for d in diags {
        s.push_str(&format!("{}\t{}\t{:.16e}\n", d.round, d.feature, d.rho));
    }
    s
}
