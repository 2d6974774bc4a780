//! Scoring of transfer experiments: ROC-AUC, the within-network baseline,
//! all-pairs transfer, and top-k inspection.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::{predict_proba, train, ForestConfig, TrainedModel};
use crate::graph::Graph;
use crate::labels::RoleLabels;
use crate::matrix::FeatureMatrix;
use crate::pipeline::{network_features, PipelineConfig};

/// Plan label used for within-network baseline rows.
pub const NO_TRANSFER: &str = "no-trans";

/// ROC-AUC via the Mann-Whitney rank sum; tied scores share their average
/// rank.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc(format!(
            "{n_pos} positives and {n_neg} negatives"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j averaged.
        let rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| labels[k]).count();
        pos_rank_sum += rank * pos_in_group as f64;
        i = j;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucScore {
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl AucScore {
    pub fn compute(scores: &[f64], labels: &[bool]) -> Result<Self> {
        let auc = roc_auc(scores, labels)?;
        let n_pos = labels.iter().filter(|&&l| l).count();
        Ok(Self {
            auc,
            n_pos,
            n_neg: labels.len() - n_pos,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub source: String,
    pub target: String,
    pub plan: String,
    pub role: String,
    /// The score, or why this pair could not be scored.
    pub outcome: std::result::Result<AucScore, String>,
    pub top_k: Option<Vec<(usize, f64)>>,
}

impl TransferReport {
    pub fn auc(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|s| s.auc)
    }
}

/// Stratified split of labeled nodes into train and test sets.
///
/// Each class contributes ⌊fraction · count⌋ training rows; the rows left
/// over to reach round(fraction · total) go to the classes with the largest
/// remainders (lower class index on ties). Within a class, rows are picked by
/// a seeded shuffle.
pub fn stratified_split(
    labels: &RoleLabels,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Split(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let k = labels.n_roles();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (node, role) in labels.labeled() {
        members[role].push(node);
    }
    let present: Vec<usize> = (0..k).filter(|&c| !members[c].is_empty()).collect();
    if present.len() < 2 {
        return Err(Error::Split("fewer than two classes are labeled".into()));
    }
    let total: usize = members.iter().map(Vec::len).sum();
    let target = (fraction * total as f64).round() as usize;
    let mut quota: Vec<usize> = members
        .iter()
        .map(|m| (fraction * m.len() as f64).floor() as usize)
        .collect();
    let mut remainders: Vec<(f64, usize)> = present
        .iter()
        .map(|&c| (fraction * members[c].len() as f64 - quota[c] as f64, c))
        .collect();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let assigned: usize = quota.iter().sum();
    for &(_, c) in remainders.iter().take(target.saturating_sub(assigned)) {
        quota[c] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train_rows, mut test_rows) = (Vec::new(), Vec::new());
    for &c in &present {
        let mut m = members[c].clone();
        m.shuffle(&mut rng);
        if quota[c] == 0 || quota[c] >= m.len() {
            return Err(Error::Split(format!(
                "class {:?} ({} rows) cannot appear on both sides of the split",
                labels.role_names()[c],
                m.len()
            )));
        }
        train_rows.extend_from_slice(&m[..quota[c]]);
        test_rows.extend_from_slice(&m[quota[c]..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((train_rows, test_rows))
}

/// Trains on a stratified share of one network's labeled nodes and scores
/// the rest. `labels` must be binary; role 1 is the positive class.
pub fn within_network_baseline(
    fm: &FeatureMatrix,
    labels: &RoleLabels,
    split_fraction: f64,
    forest: &ForestConfig,
    seed: u64,
) -> Result<AucScore> {
    if labels.n_roles() != 2 {
        return Err(Error::InvalidArgument(
            "baseline expects binary (one-vs-rest) labels".into(),
        ));
    }
    let (train_rows, test_rows) = stratified_split(labels, split_fraction, seed)?;
    let mut masked = vec![None; labels.len()];
    for &r in &train_rows {
        masked[r] = labels.get(r);
    }
    let train_labels = RoleLabels::new(labels.role_names().to_vec(), masked)?;
    let model = train(fm, &train_labels, forest, seed)?;
    let probs = predict_proba(&model, &fm.select_rows(&test_rows))?;
    let flags: Vec<bool> = test_rows.iter().map(|&r| labels.get(r) == Some(1)).collect();
    AucScore::compute(&probs.column(1), &flags)
}

/// Scores a trained binary model on every labeled node of a network.
pub fn score_model(model: &TrainedModel, fm: &FeatureMatrix, labels: &RoleLabels) -> Result<AucScore> {
    let probs = predict_proba(model, fm)?;
    let (nodes, flags) = labels.binary_targets(1);
    let scores: Vec<f64> = nodes.iter().map(|&i| probs.rows()[i][1]).collect();
    AucScore::compute(&scores, &flags)
}

/// Fraction of flagged nodes among the `k` highest-probability nodes, for
/// each `k`. Ties in probability keep node order.
pub fn top_k_analysis(probs: &[f64], flags: &[bool], ks: &[usize]) -> Result<Vec<(usize, f64)>> {
    if probs.len() != flags.len() {
        return Err(Error::Shape {
            expected: flags.len(),
            got: probs.len(),
        });
    }
    let n = probs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap_or(Ordering::Equal));
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &i in &order {
        prefix.push(prefix.last().unwrap() + usize::from(flags[i]));
    }
    ks.iter()
        .map(|&k| {
            if k == 0 {
                return Err(Error::InvalidArgument("k must be positive".into()));
            }
            if k > n {
                return Err(Error::InvalidArgument(format!("k = {k} exceeds {n} nodes")));
            }
            Ok((k, prefix[k] as f64 / k as f64))
        })
        .collect()
}

/// A labeled network taking part in transfer experiments.
#[derive(Debug, Clone)]
pub struct Network {
    pub name: String,
    pub graph: Graph,
    pub labels: RoleLabels,
}

struct Prepared {
    features: Result<FeatureMatrix>,
    labels: Result<RoleLabels>,
}

fn prepare(networks: &[Network], role: &str, cfg: &PipelineConfig) -> Vec<Prepared> {
    networks
        .par_iter()
        .map(|net| Prepared {
            features: network_features(&net.graph, cfg).map(|f| f.features),
            labels: net.labels.one_vs_rest(role),
        })
        .collect()
}

fn failure(e: &Error) -> String {
    e.to_string()
}

/// Runs every ordered source/target pair: the pipeline and a one-vs-rest
/// classifier for `role` on the source, applied to the target. Failures are
/// recorded on the affected pairs only.
pub fn transfer_matrix(
    networks: &[Network],
    role: &str,
    cfg: &PipelineConfig,
) -> Result<Vec<TransferReport>> {
    if networks.len() < 2 {
        return Err(Error::InvalidArgument(
            "transfer needs at least two networks".into(),
        ));
    }
    let prepared = prepare(networks, role, cfg);
    let models: Vec<std::result::Result<TrainedModel, String>> = prepared
        .par_iter()
        .map(|p| {
            let fm = p.features.as_ref().map_err(failure)?;
            let labels = p.labels.as_ref().map_err(failure)?;
            train(fm, labels, &cfg.forest, cfg.seed).map_err(|e| failure(&e))
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..networks.len())
        .flat_map(|s| (0..networks.len()).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect();
    let mut reports: Vec<TransferReport> = pairs
        .par_iter()
        .map(|&(s, t)| {
            let outcome = (|| {
                let model = models[s].as_ref().map_err(|e| format!("source: {e}"))?;
                let fm = prepared[t]
                    .features
                    .as_ref()
                    .map_err(|e| format!("target: {e}"))?;
                let labels = prepared[t]
                    .labels
                    .as_ref()
                    .map_err(|e| format!("target: {e}"))?;
                score_model(model, fm, labels).map_err(|e| failure(&e))
            })();
            TransferReport {
                source: networks[s].name.clone(),
                target: networks[t].name.clone(),
                plan: cfg.plan.name().to_string(),
                role: role.to_string(),
                outcome,
                top_k: None,
            }
        })
        .collect();
    sort_reports(&mut reports);
    Ok(reports)
}

/// Transfer matrix for each plan plus the within-network baseline of each
/// network (computed on untransformed features).
pub fn ablation(
    networks: &[Network],
    role: &str,
    plans: &[crate::transform::TransformPlan],
    split_fraction: f64,
    cfg: &PipelineConfig,
) -> Result<Vec<TransferReport>> {
    let mut reports = Vec::new();
    for &plan in plans {
        let c = PipelineConfig {
            plan,
            ..cfg.clone()
        };
        reports.extend(transfer_matrix(networks, role, &c)?);
    }
    let base_cfg = PipelineConfig {
        plan: crate::transform::TransformPlan::None,
        ..cfg.clone()
    };
    let baselines: Vec<TransferReport> = networks
        .par_iter()
        .map(|net| {
            let outcome = (|| {
                let fm = network_features(&net.graph, &base_cfg)?.features;
                let labels = net.labels.one_vs_rest(role)?;
                within_network_baseline(&fm, &labels, split_fraction, &cfg.forest, cfg.seed)
            })()
            .map_err(|e| failure(&e));
            TransferReport {
                source: net.name.clone(),
                target: net.name.clone(),
                plan: NO_TRANSFER.to_string(),
                role: role.to_string(),
                outcome,
                top_k: None,
            }
        })
        .collect();
    reports.extend(baselines);
    sort_reports(&mut reports);
    Ok(reports)
}

fn sort_reports(reports: &mut [TransferReport]) {
    reports.sort_by(|a, b| {
        (a.source.as_str(), a.target.as_str(), a.plan.as_str())
            .cmp(&(b.source.as_str(), b.target.as_str(), b.plan.as_str()))
    });
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSummary {
    pub plan: String,
    pub count: usize,
    pub failed: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Distribution of pooled pairwise AUCs per plan, plans in order of first
/// appearance. Plans whose pairs all failed are omitted.
pub fn summarize(reports: &[TransferReport]) -> Vec<PlanSummary> {
    let mut plans: Vec<&str> = Vec::new();
    for r in reports {
        if !plans.contains(&r.plan.as_str()) {
            plans.push(&r.plan);
        }
    }
    plans
        .into_iter()
        .filter_map(|plan| {
            let rows: Vec<&TransferReport> = reports.iter().filter(|r| r.plan == plan).collect();
            let aucs: Vec<f64> = rows.iter().filter_map(|r| r.auc()).collect();
            let med = median(&aucs)?;
            Some(PlanSummary {
                plan: plan.to_string(),
                count: aucs.len(),
                failed: rows.len() - aucs.len(),
                min: aucs.iter().copied().fold(f64::INFINITY, f64::min),
                median: med,
                mean: aucs.iter().sum::<f64>() / aucs.len() as f64,
                max: aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}
