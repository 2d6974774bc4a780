//! Command-line front end.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 domain error (bad data, failed
//! fit, schema mismatch), 64 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::aggregate::{aggregate_from, diagnostics_tsv, AggregationConfig};
use crate::error::{Error, Result};
use crate::eval::{
    ablation, summarize, top_k_analysis, AucScore, Network, TransferReport,
};
use crate::features::{base_features, PageRankParams};
use crate::forest::{load_model, predict_proba, save_model, train, ForestConfig};
use crate::graph::{load_edge_list, Graph, IdKind, ParseOptions};
use crate::io::{self, Provenance};
use crate::labels::RoleLabels;
use crate::pipeline::{network_features, PipelineConfig};
use crate::powerlaw::DEFAULT_MIN_TAIL;
use crate::synth::{generate, SynthConfig};
use crate::transform::{apply_plan, fit_plan, fit_records, TransformPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "roletransfer", version, about = "Transfer node-role classifiers between networks")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the five base features of every node.
    Extract(ExtractArgs),
    /// Fit power laws and rescale base features.
    Transform(TransformArgs),
    /// Append neighbor-averaged rounds to a feature table.
    Aggregate(AggregateArgs),
    /// Train a random forest on labeled nodes.
    Train(TrainArgs),
    /// Write per-node role probabilities.
    Predict(PredictArgs),
    /// Score predictions, or run the plan ablation over several networks.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic network with planted roles.
    Synth(SynthArgs),
    /// Run every stage from a key=value config file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Clone)]
pub struct GraphArgs {
    /// Edge list: `src dst [weight] [timestamp]` per line.
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    /// Accept arbitrary string node ids instead of integers.
    #[arg(long)]
    pub string_ids: bool,
    /// Count each neighbor once regardless of edge multiplicity.
    #[arg(long)]
    pub distinct_neighbors: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        load_graph(&self.graph, self.string_ids, self.distinct_neighbors)
    }
}

#[derive(Debug, Args, Clone)]
pub struct PageRankArgs {
    /// Teleport probability.
    #[arg(long, default_value_t = 0.15)]
    pub teleport: f64,
    /// L1 convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub pagerank_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub pagerank_max_iter: usize,
}

impl PageRankArgs {
    fn params(&self) -> PageRankParams {
        PageRankParams {
            teleport: self.teleport,
            tol: self.pagerank_tol,
            max_iter: self.pagerank_max_iter,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 128)]
    pub n_trees: usize,
    /// Features examined per split (default ⌊√m⌋).
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    /// Grow every tree on all training rows.
    #[arg(long)]
    pub no_bootstrap: bool,
    /// Bootstrap an equal number of rows per class.
    #[arg(long)]
    pub balanced: bool,
}

impl ForestArgs {
    fn config(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_features: self.max_features,
            min_leaf: self.min_leaf,
            bootstrap: !self.no_bootstrap,
            balanced: self.balanced,
        }
    }
}

fn parse_plan(s: &str) -> std::result::Result<TransformPlan, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub pagerank: PageRankArgs,
    /// Output feature TSV.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Base feature TSV from `extract`.
    #[arg(long, value_name = "PATH")]
    pub features: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// none, quantile, degree, pagerank or all.
    #[arg(long, alias = "transform", value_parser = parse_plan, default_value = "all")]
    pub plan: TransformPlan,
    #[arg(long, default_value_t = 0.15)]
    pub teleport: f64,
    /// Minimum number of tail points in a power-law fit.
    #[arg(long, default_value_t = DEFAULT_MIN_TAIL)]
    pub min_tail: usize,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Write the fitted power laws as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub fits: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Feature TSV to aggregate (usually from `transform`).
    #[arg(long, value_name = "PATH")]
    pub features: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    /// Aggregate these features instead (e.g. the untransformed ones); the
    /// output still starts with `--features`.
    #[arg(long, value_name = "PATH")]
    pub aggregate_raw: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Write per-round convergence diagnostics.
    #[arg(long, value_name = "PATH")]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "PATH")]
    pub features: PathBuf,
    /// Labels TSV: `external_id role` per line.
    #[arg(long, value_name = "PATH")]
    pub labels: PathBuf,
    /// Train `ROLE` against all other roles instead of all roles at once.
    #[arg(long)]
    pub role: Option<String>,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub features: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Role whose probability is scored.
    #[arg(long)]
    pub role: String,
    /// Predictions TSV from `predict` (scoring mode).
    #[arg(long, value_name = "PATH", conflicts_with = "network")]
    pub predictions: Option<PathBuf>,
    /// True labels for `--predictions`.
    #[arg(long, value_name = "PATH", requires = "predictions")]
    pub labels: Option<PathBuf>,
    /// Source name written to the report (scoring mode).
    #[arg(long, default_value = "source")]
    pub source: String,
    /// Target name written to the report (scoring mode).
    #[arg(long, default_value = "target")]
    pub target: String,
    /// Plan name written to the report (scoring mode).
    #[arg(long, value_parser = parse_plan, default_value = "all")]
    pub plan: TransformPlan,
    /// Top-k cut-offs; writes a curve per k (scoring mode).
    #[arg(long, value_delimiter = ',')]
    pub top_k: Vec<usize>,
    #[arg(long, value_name = "PATH")]
    pub top_k_out: Option<PathBuf>,

    /// `NAME=EDGES,LABELS`; two or more run the ablation.
    #[arg(long, value_name = "SPEC")]
    pub network: Vec<String>,
    /// Plans compared in the ablation.
    #[arg(long, value_delimiter = ',', value_parser = parse_plan,
          default_value = "none,quantile,degree,pagerank,all")]
    pub plans: Vec<TransformPlan>,
    /// Training share of the within-network baseline.
    #[arg(long, default_value_t = 0.5)]
    pub split_fraction: f64,
    #[arg(long)]
    pub string_ids: bool,
    #[arg(long)]
    pub distinct_neighbors: bool,
    #[command(flatten)]
    pub pagerank: PageRankArgs,
    #[arg(long, default_value_t = DEFAULT_MIN_TAIL)]
    pub min_tail: usize,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    #[arg(long)]
    pub aggregate_raw: bool,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Report TSV.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Per-plan AUC summary TSV (ablation mode).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Target exponent of the degree tail.
    #[arg(long, default_value_t = 2.5)]
    pub exponent: f64,
    #[arg(long, default_value_t = 0.05)]
    pub admin_fraction: f64,
    #[arg(long, default_value_t = 0.02)]
    pub bot_fraction: f64,
    /// Mean number of edges a node emits on arrival.
    #[arg(long, default_value_t = 5.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub edges: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Flat `key = value` run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long, value_name = "PATH")]
    pub out_dir: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(e) if e.is_io() => EXIT_IO,
            CliError::Run(_) => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_graph(path: &Path, string_ids: bool, distinct: bool) -> Result<Graph> {
    let opts = ParseOptions {
        ids: if string_ids {
            IdKind::String
        } else {
            IdKind::Integer
        },
    };
    let g = load_edge_list(path, opts)?;
    Ok(if distinct { g.distinct() } else { g })
}

fn check_ids(features: &[String], graph: &Graph) -> Result<()> {
    if features != graph.ids() {
        return Err(Error::InvalidArgument(
            "feature rows do not match the graph's nodes (same edge list and id options?)"
                .into(),
        ));
    }
    Ok(())
}

fn load_labels(path: &Path, ids: &[String]) -> Result<RoleLabels> {
    let (labels, skipped) = RoleLabels::load_tsv(path, ids)?;
    if skipped > 0 {
        eprintln!(
            "warning: {}: {skipped} labels name unknown nodes and were skipped",
            path.display()
        );
    }
    Ok(labels)
}

/// Report row for one role's probabilities scored against labels.
pub fn score_probabilities(
    role_names: &[String],
    rows: &[Vec<f64>],
    labels: &RoleLabels,
    role: &str,
) -> Result<(AucScore, Vec<f64>, Vec<bool>)> {
    let j = role_names
        .iter()
        .position(|r| r == role)
        .ok_or_else(|| Error::InvalidArgument(format!("predictions have no role {role:?}")))?;
    let target = labels
        .role_index(role)
        .ok_or_else(|| Error::InvalidArgument(format!("labels have no role {role:?}")))?;
    let (nodes, flags) = labels.binary_targets(target);
    let scores: Vec<f64> = nodes.iter().map(|&i| rows[i][j]).collect();
    Ok((AucScore::compute(&scores, &flags)?, scores, flags))
}

fn provenance_of(args: &impl std::fmt::Debug, seed: u64) -> Provenance {
    Provenance::new(&format!("{args:?}"), seed)
}

fn cmd_extract(a: &ExtractArgs) -> CliResult<()> {
    let prov = provenance_of(a, 0);
    let g = a.graph.load()?;
    let bf = base_features(&g, &a.pagerank.params())?;
    eprintln!(
        "extract: {} nodes, {} edges, pagerank {} iterations (residual {:.3e}{})",
        g.node_count(),
        g.total_edges(),
        bf.pagerank.iterations,
        bf.pagerank.residual,
        if bf.pagerank.converged {
            ""
        } else {
            ", not converged"
        }
    );
    io::write_features(&a.out, &prov, g.ids(), &bf.matrix)?;
    Ok(())
}

fn cmd_transform(a: &TransformArgs) -> CliResult<()> {
    let prov = provenance_of(a, 0);
    let (ids, fm) = io::read_features(&a.features)?;
    let g = a.graph.load()?;
    check_ids(&ids, &g)?;
    let fits = fit_plan(&fm, a.plan, a.min_tail)?;
    let out = apply_plan(&fm, a.plan, &fits, &g, a.teleport)?;
    io::write_features(&a.out, &prov, &ids, &out)?;
    if let Some(p) = &a.fits {
        io::write_text(p, &io::fits_to_jsonl(&prov, &fit_records(&fits)))?;
    }
    Ok(())
}

fn cmd_aggregate(a: &AggregateArgs) -> CliResult<()> {
    let prov = provenance_of(a, 0);
    let (ids, head) = io::read_features(&a.features)?;
    let g = a.graph.load()?;
    check_ids(&ids, &g)?;
    let raw = match &a.aggregate_raw {
        Some(p) => {
            let (raw_ids, raw) = io::read_features(p)?;
            check_ids(&raw_ids, &g)?;
            Some(raw)
        }
        None => None,
    };
    let cfg = AggregationConfig {
        rounds: a.rounds,
        emit_diagnostics: a.diagnostics.is_some(),
    };
    let agg = aggregate_from(&head, raw.as_ref().unwrap_or(&head), &g.symmetrize_simple(), &cfg)?;
    io::write_features(&a.out, &prov, &ids, &agg.matrix)?;
    if let Some(p) = &a.diagnostics {
        io::write_text(p, &(prov.header() + &diagnostics_tsv(&agg.diagnostics)))?;
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> CliResult<()> {
    let prov = provenance_of(a, a.seed);
    let (ids, fm) = io::read_features(&a.features)?;
    let mut labels = load_labels(&a.labels, &ids)?;
    if let Some(role) = &a.role {
        labels = labels.one_vs_rest(role)?;
    }
    let mut model = train(&fm, &labels, &a.forest.config(), a.seed)?;
    model.provenance = prov.tag();
    save_model(&model, &a.model)?;
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let prov = Provenance::new(&format!("{a:?}"), model.meta.seed);
    let (ids, fm) = io::read_features(&a.features)?;
    let p = predict_proba(&model, &fm)?;
    io::write_text(&a.out, &io::probabilities_to_tsv(&prov, &ids, &p))?;
    Ok(())
}

fn parse_network_spec(spec: &str) -> CliResult<(String, PathBuf, PathBuf)> {
    let bad = || CliError::Usage(format!("--network expects NAME=EDGES,LABELS, got {spec:?}"));
    let (name, rest) = spec.split_once('=').ok_or_else(bad)?;
    let (edges, labels) = rest.split_once(',').ok_or_else(bad)?;
    if name.is_empty() || edges.is_empty() || labels.is_empty() {
        return Err(bad());
    }
    Ok((name.into(), edges.into(), labels.into()))
}

fn cmd_evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let prov = provenance_of(a, a.seed);
    if let Some(pred) = &a.predictions {
        let labels_path = a
            .labels
            .as_ref()
            .ok_or_else(|| CliError::Usage("--predictions needs --labels".into()))?;
        let (ids, roles, rows) = io::parse_probabilities(&io::read_text(pred)?)?;
        let labels = load_labels(labels_path, &ids)?;
        let (report, curve) = score_report(
            &roles, &rows, &labels, &a.role, &a.source, &a.target, a.plan, &a.top_k,
        );
        io::write_text(&a.out, &io::reports_to_tsv(&prov, &[report]))?;
        if let (Some(p), Some(curve)) = (&a.top_k_out, curve) {
            io::write_text(p, &io::top_k_to_tsv(&prov, &curve?))?;
        }
        return Ok(());
    }
    if a.network.len() < 2 {
        return Err(CliError::Usage(
            "evaluate needs --predictions and --labels, or at least two --network".into(),
        ));
    }
    let mut networks = Vec::new();
    for spec in &a.network {
        let (name, edges, labels) = parse_network_spec(spec)?;
        let graph = load_graph(&edges, a.string_ids, a.distinct_neighbors)?;
        let labels = load_labels(&labels, graph.ids())?;
        networks.push(Network {
            name,
            graph,
            labels,
        });
    }
    let cfg = PipelineConfig {
        plan: TransformPlan::All,
        pagerank: a.pagerank.params(),
        min_tail: a.min_tail,
        aggregation: AggregationConfig {
            rounds: a.rounds,
            emit_diagnostics: false,
        },
        aggregate_raw: a.aggregate_raw,
        forest: a.forest.config(),
        seed: a.seed,
    };
    let reports = ablation(&networks, &a.role, &a.plans, a.split_fraction, &cfg)?;
    io::write_text(&a.out, &io::reports_to_tsv(&prov, &reports))?;
    if let Some(p) = &a.summary {
        io::write_text(p, &io::summary_to_tsv(&prov, &summarize(&reports)))?;
    }
    Ok(())
}

type Curve = Result<Vec<(usize, f64)>>;

#[allow(clippy::too_many_arguments)]
fn score_report(
    roles: &[String],
    rows: &[Vec<f64>],
    labels: &RoleLabels,
    role: &str,
    source: &str,
    target: &str,
    plan: TransformPlan,
    ks: &[usize],
) -> (TransferReport, Option<Curve>) {
    let scored = score_probabilities(roles, rows, labels, role);
    let curve = if ks.is_empty() {
        None
    } else {
        Some(match &scored {
            Ok((_, scores, flags)) => top_k_analysis(scores, flags, ks),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        })
    };
    let report = TransferReport {
        source: source.into(),
        target: target.into(),
        plan: plan.name().into(),
        role: role.into(),
        outcome: scored.map(|(s, _, _)| s).map_err(|e| e.to_string()),
        top_k: None,
    };
    (report, curve)
}

fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let prov = provenance_of(a, a.seed);
    let cfg = SynthConfig {
        n: a.n,
        exponent_target: a.exponent,
        admin_fraction: a.admin_fraction,
        bot_fraction: a.bot_fraction,
        avg_degree: a.avg_degree,
        seed: a.seed,
    };
    let (g, labels) = generate(&cfg)?;
    let mut edges = prov.header();
    for &(s, d, m) in g.edges() {
        for _ in 0..m {
            let _ = writeln!(edges, "{s} {d}");
        }
    }
    io::write_text(&a.edges, &edges)?;
    io::write_text(&a.labels, &(prov.header() + &labels.to_tsv(g.ids())))?;
    Ok(())
}

/// Settings of a `pipeline` run, read from a flat `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source_edges: PathBuf,
    pub source_labels: PathBuf,
    pub target_edges: PathBuf,
    pub target_labels: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub source_name: String,
    pub target_name: String,
    pub role: String,
    pub string_ids: bool,
    pub distinct_neighbors: bool,
    pub top_k: Vec<usize>,
    pub pipeline: PipelineConfig,
    pub threads: Option<usize>,
}

pub const RUN_CONFIG_KEYS: &[&str] = &[
    "source_edges",
    "source_labels",
    "target_edges",
    "target_labels",
    "output_dir",
    "source_name",
    "target_name",
    "role",
    "plan",
    "rounds",
    "aggregate_raw",
    "teleport",
    "pagerank_tol",
    "pagerank_max_iter",
    "min_tail",
    "n_trees",
    "max_features",
    "min_leaf",
    "bootstrap",
    "balanced",
    "seed",
    "string_ids",
    "distinct_neighbors",
    "top_k",
    "threads",
];

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("config key {key}: invalid value {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!(
            "config key {key}: expected true or false, got {v:?}"
        ))),
    }
}

impl RunConfig {
    /// Parses config text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> CliResult<RunConfig> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", i + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !RUN_CONFIG_KEYS.contains(&k) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {k:?}",
                    i + 1
                )));
            }
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Usage(format!(
                    "config line {}: duplicate key {k:?}",
                    i + 1
                )));
            }
        }
        let path = |k: &str| kv.get(k).map(|v| base.join(v));
        let require = |k: &str| {
            path(k).ok_or_else(|| CliError::Usage(format!("config is missing {k}")))
        };
        let stem = |p: &Path| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        };

        let mut pc = PipelineConfig::default();
        let mut string_ids = false;
        let mut distinct_neighbors = false;
        let mut top_k = Vec::new();
        let mut threads = None;
        for (k, v) in &kv {
            match k.as_str() {
                "plan" => pc.plan = v.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?,
                "rounds" => pc.aggregation.rounds = parse_value(k, v)?,
                "aggregate_raw" => pc.aggregate_raw = parse_bool(k, v)?,
                "teleport" => pc.pagerank.teleport = parse_value(k, v)?,
                "pagerank_tol" => pc.pagerank.tol = parse_value(k, v)?,
                "pagerank_max_iter" => pc.pagerank.max_iter = parse_value(k, v)?,
                "min_tail" => pc.min_tail = parse_value(k, v)?,
                "n_trees" => pc.forest.n_trees = parse_value(k, v)?,
                "max_features" => {
                    pc.forest.max_features = match v.as_str() {
                        "auto" => None,
                        _ => Some(parse_value(k, v)?),
                    }
                }
                "min_leaf" => pc.forest.min_leaf = parse_value(k, v)?,
                "bootstrap" => pc.forest.bootstrap = parse_bool(k, v)?,
                "balanced" => pc.forest.balanced = parse_bool(k, v)?,
                "seed" => pc.seed = parse_value(k, v)?,
                "string_ids" => string_ids = parse_bool(k, v)?,
                "distinct_neighbors" => distinct_neighbors = parse_bool(k, v)?,
                "top_k" => {
                    top_k = v
                        .split(',')
                        .map(|s| parse_value(k, s.trim()))
                        .collect::<CliResult<_>>()?
                }
                "threads" => threads = Some(parse_value(k, v)?),
                _ => {}
            }
        }
        let source_edges = require("source_edges")?;
        let target_edges = require("target_edges")?;
        Ok(RunConfig {
            source_name: kv.get("source_name").cloned().unwrap_or_else(|| stem(&source_edges)),
            target_name: kv.get("target_name").cloned().unwrap_or_else(|| stem(&target_edges)),
            source_labels: require("source_labels")?,
            target_labels: path("target_labels"),
            output_dir: require("output_dir")?,
            role: kv
                .get("role")
                .cloned()
                .ok_or_else(|| CliError::Usage("config is missing role".into()))?,
            source_edges,
            target_edges,
            string_ids,
            distinct_neighbors,
            top_k,
            pipeline: pc,
            threads,
        })
    }

    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = io::read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Canonical text of every setting that can change results; the output
    /// directory and thread count are left out.
    pub fn canonical(&self) -> String {
        let p = &self.pipeline;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("source_edges", self.source_edges.display().to_string());
        put("source_labels", self.source_labels.display().to_string());
        put("target_edges", self.target_edges.display().to_string());
        put(
            "target_labels",
            self.target_labels
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        put("source_name", self.source_name.clone());
        put("target_name", self.target_name.clone());
        put("role", self.role.clone());
        put("plan", p.plan.name().into());
        put("rounds", p.aggregation.rounds.to_string());
        put("aggregate_raw", p.aggregate_raw.to_string());
        put("teleport", format!("{:e}", p.pagerank.teleport));
        put("pagerank_tol", format!("{:e}", p.pagerank.tol));
        put("pagerank_max_iter", p.pagerank.max_iter.to_string());
        put("min_tail", p.min_tail.to_string());
        put("n_trees", p.forest.n_trees.to_string());
        put(
            "max_features",
            p.forest
                .max_features
                .map_or("auto".into(), |m| m.to_string()),
        );
        put("min_leaf", p.forest.min_leaf.to_string());
        put("bootstrap", p.forest.bootstrap.to_string());
        put("balanced", p.forest.balanced.to_string());
        put("seed", p.seed.to_string());
        put("string_ids", self.string_ids.to_string());
        put("distinct_neighbors", self.distinct_neighbors.to_string());
        put(
            "top_k",
            self.top_k
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        s
    }

    fn check_inputs(&self) -> Result<()> {
        let inputs = [
            Some(&self.source_edges),
            Some(&self.source_labels),
            Some(&self.target_edges),
            self.target_labels.as_ref(),
        ];
        for p in inputs.into_iter().flatten() {
            fs::metadata(p).map_err(|e| Error::io(p.clone(), e))?;
        }
        Ok(())
    }
}

/// Files written by `pipeline` into the output directory.
pub const SOURCE_FEATURES: &str = "source_features.tsv";
pub const TARGET_FEATURES: &str = "target_features.tsv";
pub const SOURCE_FITS: &str = "source_fits.jsonl";
pub const TARGET_FITS: &str = "target_fits.jsonl";
pub const MODEL: &str = "model.bin";
pub const PREDICTIONS: &str = "predictions.tsv";
pub const REPORT: &str = "report.tsv";
pub const TOP_K: &str = "topk.tsv";

pub fn run_pipeline(cfg: &RunConfig) -> CliResult<()> {
    cfg.check_inputs()?;
    let prov = Provenance::new(&cfg.canonical(), cfg.pipeline.seed);
    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out.clone(), e))?;

    let src = load_graph(&cfg.source_edges, cfg.string_ids, cfg.distinct_neighbors)?;
    let tgt = load_graph(&cfg.target_edges, cfg.string_ids, cfg.distinct_neighbors)?;
    let (sf, tf) = rayon::join(
        || network_features(&src, &cfg.pipeline),
        || network_features(&tgt, &cfg.pipeline),
    );
    let (sf, tf) = (sf?, tf?);
    io::write_features(out.join(SOURCE_FEATURES), &prov, src.ids(), &sf.features)?;
    io::write_features(out.join(TARGET_FEATURES), &prov, tgt.ids(), &tf.features)?;
    io::write_text(
        out.join(SOURCE_FITS),
        &io::fits_to_jsonl(&prov, &fit_records(&sf.fits)),
    )?;
    io::write_text(
        out.join(TARGET_FITS),
        &io::fits_to_jsonl(&prov, &fit_records(&tf.fits)),
    )?;

    let labels = load_labels(&cfg.source_labels, src.ids())?.one_vs_rest(&cfg.role)?;
    let mut model = train(&sf.features, &labels, &cfg.pipeline.forest, cfg.pipeline.seed)?;
    model.provenance = prov.tag();
    save_model(&model, out.join(MODEL))?;

    let probs = predict_proba(&model, &tf.features)?;
    io::write_text(
        out.join(PREDICTIONS),
        &io::probabilities_to_tsv(&prov, tgt.ids(), &probs),
    )?;

    if let Some(lp) = &cfg.target_labels {
        let labels = load_labels(lp, tgt.ids())?;
        let (report, curve) = score_report(
            &probs.role_names,
            probs.rows(),
            &labels,
            &cfg.role,
            &cfg.source_name,
            &cfg.target_name,
            cfg.pipeline.plan,
            &cfg.top_k,
        );
        if let Err(e) = &report.outcome {
            eprintln!("warning: target could not be scored: {e}");
        }
        io::write_text(out.join(REPORT), &io::reports_to_tsv(&prov, &[report]))?;
        if let Some(curve) = curve {
            io::write_text(out.join(TOP_K), &io::top_k_to_tsv(&prov, &curve?))?;
        }
    }
    Ok(())
}

fn cmd_pipeline(a: &PipelineArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(d) = &a.out_dir {
        cfg.output_dir = d.clone();
    }
    run_pipeline(&cfg)
}

fn configure_threads(n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    // Only the first configuration in a process takes effect.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        configure_threads(n)?;
    }
    match &cli.command {
        Command::Extract(a) => cmd_extract(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Aggregate(a) => cmd_aggregate(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
