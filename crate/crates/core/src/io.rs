//! Text artifacts exchanged between pipeline stages.
//!
//! Every artifact starts with a provenance record naming the tool version,
//! a hash of the run configuration and the seed. In TSV files it is a
//! `#` comment line, which readers skip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{AucScore, PlanSummary, TransferReport};
use crate::forest::RoleProbabilities;
use crate::matrix::FeatureMatrix;
use crate::powerlaw::FitRecord;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_text: &str, seed: u64) -> Self {
        Self {
            config_hash: hash_config(config_text),
            seed,
        }
    }

    /// `roletransfer <version> config=<hash> seed=<seed>`
    pub fn tag(&self) -> String {
        format!(
            "roletransfer {VERSION} config={} seed={}",
            self.config_hash, self.seed
        )
    }

    pub fn header(&self) -> String {
        format!("# {}\n", self.tag())
    }

    /// Recovers a provenance record from the first comment line of `text`.
    pub fn parse(text: &str) -> Option<Provenance> {
        let line = text.lines().next()?.strip_prefix("# roletransfer ")?;
        let mut hash = None;
        let mut seed = None;
        for tok in line.split_whitespace() {
            if let Some(h) = tok.strip_prefix("config=") {
                hash = Some(h.to_string());
            } else if let Some(s) = tok.strip_prefix("seed=") {
                seed = s.parse().ok();
            }
        }
        Some(Provenance {
            config_hash: hash?,
            seed: seed?,
        })
    }
}

/// First 8 bytes of SHA-256, as 16 hex characters.
pub fn hash_config(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Data lines of a TSV artifact with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// `id` column followed by one column per feature, values in `{:.16e}`.
pub fn features_to_tsv(prov: &Provenance, ids: &[String], fm: &FeatureMatrix) -> String {
    let mut s = prov.header();
    s.push_str("id");
    for name in fm.names() {
        s.push('\t');
        s.push_str(name);
    }
    s.push('\n');
    for (i, id) in ids.iter().enumerate().take(fm.rows()) {
        s.push_str(id);
        for j in 0..fm.width() {
            let _ = write!(s, "\t{:.16e}", fm.get(i, j));
        }
        s.push('\n');
    }
    s
}

pub fn parse_features(text: &str) -> Result<(Vec<String>, FeatureMatrix)> {
    let mut lines = data_lines(text);
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing feature header".into(),
    })?;
    let names: Vec<&str> = header.split('\t').collect();
    if names[0] != "id" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("feature header must start with `id`, found {:?}", names[0]),
        });
    }
    let m = names.len() - 1;
    let mut ids = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (lineno, line) in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != m + 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} columns, found {}", m + 1, cols.len()),
            });
        }
        ids.push(cols[0].to_string());
        for (j, c) in cols[1..].iter().enumerate() {
            let v: f64 = c.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid number {c:?}"),
            })?;
            columns[j].push(v);
        }
    }
    let fm = FeatureMatrix::from_columns(
        ids.len(),
        names[1..].iter().map(|s| s.to_string()).zip(columns),
    )?;
    Ok((ids, fm))
}

pub fn write_features(
    path: impl AsRef<Path>,
    prov: &Provenance,
    ids: &[String],
    fm: &FeatureMatrix,
) -> Result<()> {
    write_text(path, &features_to_tsv(prov, ids, fm))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<(Vec<String>, FeatureMatrix)> {
    parse_features(&read_text(path)?)
}

/// `id` column followed by one probability column per role.
pub fn probabilities_to_tsv(prov: &Provenance, ids: &[String], p: &RoleProbabilities) -> String {
    let mut s = prov.header();
    s.push_str("id");
    for r in &p.role_names {
        s.push('\t');
        s.push_str(r);
    }
    s.push('\n');
    for (id, row) in ids.iter().zip(p.rows()) {
        s.push_str(id);
        for v in row {
            let _ = write!(s, "\t{v:.16e}");
        }
        s.push('\n');
    }
    s
}

/// Returns ids, role names and the probability rows.
pub fn parse_probabilities(text: &str) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
    let (ids, fm) = parse_features(text)?;
    let rows = (0..fm.rows()).map(|i| fm.row(i)).collect();
    Ok((ids, fm.names().to_vec(), rows))
}

pub const REPORT_HEADER: &str = "source\ttarget\tplan\trole\tauc\tn_pos\tn_neg\tstatus";

/// One row per report; failed pairs carry `NA` scores and the error text.
pub fn reports_to_tsv(prov: &Provenance, reports: &[TransferReport]) -> String {
    let mut s = prov.header();
    s.push_str(REPORT_HEADER);
    s.push('\n');
    for r in reports {
        let _ = write!(s, "{}\t{}\t{}\t{}\t", r.source, r.target, r.plan, r.role);
        match &r.outcome {
            Ok(a) => {
                let _ = writeln!(s, "{:.16e}\t{}\t{}\tok", a.auc, a.n_pos, a.n_neg);
            }
            Err(e) => {
                let _ = writeln!(s, "NA\tNA\tNA\t{}", clean(e));
            }
        }
    }
    s
}

pub fn parse_reports(text: &str) -> Result<Vec<TransferReport>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h == REPORT_HEADER => {}
        Some((line, _)) => {
            return Err(Error::Parse {
                line,
                msg: "unexpected report header".into(),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing report header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        let c: Vec<&str> = line.split('\t').collect();
        let bad = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        if c.len() != 8 {
            return Err(bad("expected 8 columns"));
        }
        let outcome = if c[7] == "ok" {
            Ok(AucScore {
                auc: c[4].parse().map_err(|_| bad("invalid auc"))?,
                n_pos: c[5].parse().map_err(|_| bad("invalid n_pos"))?,
                n_neg: c[6].parse().map_err(|_| bad("invalid n_neg"))?,
            })
        } else {
            Err(c[7].to_string())
        };
        out.push(TransferReport {
            source: c[0].into(),
            target: c[1].into(),
            plan: c[2].into(),
            role: c[3].into(),
            outcome,
            top_k: None,
        });
    }
    Ok(out)
}

pub fn summary_to_tsv(prov: &Provenance, summaries: &[PlanSummary]) -> String {
    let mut s = prov.header();
    s.push_str("plan\tcount\tfailed\tmin\tmedian\tmean\tmax\n");
    for p in summaries {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            p.plan, p.count, p.failed, p.min, p.median, p.mean, p.max
        );
    }
    s
}

pub fn top_k_to_tsv(prov: &Provenance, curve: &[(usize, f64)]) -> String {
    let mut s = prov.header();
    s.push_str("k\tfraction\n");
    for (k, f) in curve {
        let _ = writeln!(s, "{k}\t{f:.16e}");
    }
    s
}

/// JSON lines: a provenance object, then one object per fit.
pub fn fits_to_jsonl(prov: &Provenance, records: &[FitRecord]) -> String {
    let head = serde_json::json!({
        "tool": format!("roletransfer {VERSION}"),
        "config": prov.config_hash,
        "seed": prov.seed,
    });
    let mut s = format!("{head}\n");
    for r in records {
        s.push_str(&r.to_json());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance::new("plan=all\n", 7)
    }

    #[test]
    fn hash_is_stable_and_short() {
        let h = hash_config("a=1\n");
        assert_eq!(h.len(), 16);
        assert_eq!(h, hash_config("a=1\n"));
        assert_ne!(h, hash_config("a=2\n"));
    }

    #[test]
    fn provenance_round_trip() {
        let p = prov();
        assert_eq!(Provenance::parse(&p.header()), Some(p));
        assert_eq!(Provenance::parse("id\tx\n"), None);
    }

    #[test]
    fn features_round_trip_exactly() {
        let fm = FeatureMatrix::from_columns(
            3,
            [
                ("a".into(), vec![0.1, 1.0 / 3.0, 1e-300]),
                ("b".into(), vec![2.0, 0.0, 123456.789]),
            ],
        )
        .unwrap();
        let ids: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let text = features_to_tsv(&prov(), &ids, &fm);
        assert!(text.starts_with("# roletransfer "));
        let (ids2, fm2) = parse_features(&text).unwrap();
        assert_eq!(ids2, ids);
        assert_eq!(fm2, fm);
    }

    #[test]
    fn feature_parse_errors() {
        assert!(matches!(parse_features(""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_features("node\ta\n1\t2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_features("id\ta\n1\t2\t3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_features("id\ta\n1\tfoo\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn reports_round_trip() {
        let reports = vec![
            TransferReport {
                source: "s".into(),
                target: "t".into(),
                plan: "all".into(),
                role: "admin".into(),
                outcome: Ok(AucScore {
                    auc: 0.875,
                    n_pos: 3,
                    n_neg: 9,
                }),
                top_k: None,
            },
            TransferReport {
                source: "t".into(),
                target: "s".into(),
                plan: "all".into(),
                role: "admin".into(),
                outcome: Err("AUC undefined:\tno positives".into()),
                top_k: None,
            },
        ];
        let text = reports_to_tsv(&prov(), &reports);
        let back = parse_reports(&text).unwrap();
        assert_eq!(back[0], reports[0]);
        assert_eq!(back[1].outcome, Err("AUC undefined: no positives".into()));
    }

    #[test]
    fn fits_jsonl_lines_parse() {
        let fit = crate::powerlaw::PowerLawFit {
            alpha: 2.5,
            x_min: 3.0,
            ks: 0.01,
            n_tail: 80,
        };
        let text = fits_to_jsonl(&prov(), &[FitRecord::new("degree", &fit)]);
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0]["seed"], 7);
        assert_eq!(lines[1]["feature"], "degree");
    }
}
