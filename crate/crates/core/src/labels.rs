//! Node role assignments, possibly partial.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleLabels {
    role_names: Vec<String>,
    assignment: Vec<Option<usize>>,
}

impl RoleLabels {
    pub fn new(role_names: Vec<String>, assignment: Vec<Option<usize>>) -> Result<Self> {
        let k = role_names.len();
        if let Some(bad) = assignment.iter().flatten().find(|&&r| r >= k) {
            return Err(Error::InvalidArgument(format!(
                "role index {bad} out of range for {k} roles"
            )));
        }
        let unique: BTreeSet<&String> = role_names.iter().collect();
        if unique.len() != k {
            return Err(Error::InvalidArgument("duplicate role names".into()));
        }
        Ok(Self {
            role_names,
            assignment,
        })
    }

    /// Builds labels for `n` nodes from `(node, role name)` pairs. Role
    /// indices follow the lexicographic order of the names.
    pub fn from_named(n: usize, pairs: &[(usize, String)]) -> Result<Self> {
        let names: Vec<String> = pairs
            .iter()
            .map(|(_, r)| r.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut assignment = vec![None; n];
        for (node, role) in pairs {
            if *node >= n {
                return Err(Error::InvalidArgument(format!(
                    "node {node} out of range for {n} nodes"
                )));
            }
            let r = index[role.as_str()];
            match assignment[*node] {
                Some(prev) if prev != r => {
                    return Err(Error::InvalidArgument(format!(
                        "node {node} labeled both {:?} and {role:?}",
                        names[prev]
                    )))
                }
                _ => assignment[*node] = Some(r),
            }
        }
        Self::new(names, assignment)
    }

    pub fn role_names(&self) -> &[String] {
        &self.role_names
    }

    pub fn n_roles(&self) -> usize {
        self.role_names.len()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.assignment[node]
    }

    pub fn role_index(&self, name: &str) -> Option<usize> {
        self.role_names.iter().position(|r| r == name)
    }

    /// `(node, role)` for every labeled node, ascending by node.
    pub fn labeled(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
    }

    pub fn count(&self, role: usize) -> usize {
        self.assignment.iter().filter(|&&r| r == Some(role)).count()
    }

    /// Collapses to two roles, `rest` (0) and `role` (1). Unlabeled nodes
    /// stay unlabeled.
    pub fn one_vs_rest(&self, role: &str) -> Result<RoleLabels> {
        let target = self
            .role_index(role)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown role {role:?}")))?;
        let rest = if role == "rest" { "other" } else { "rest" };
        let assignment = self
            .assignment
            .iter()
            .map(|r| r.map(|r| usize::from(r == target)))
            .collect();
        RoleLabels::new(vec![rest.to_string(), role.to_string()], assignment)
    }

    /// Labeled nodes and a flag for membership in `role`.
    pub fn binary_targets(&self, role: usize) -> (Vec<usize>, Vec<bool>) {
        self.labeled().map(|(i, r)| (i, r == role)).unzip()
    }

    /// TSV `external_id role_name`, one line per labeled node.
    pub fn to_tsv(&self, ids: &[String]) -> String {
        let mut s = String::new();
        for (i, r) in self.labeled() {
            s.push_str(&format!("{}\t{}\n", ids[i], self.role_names[r]));
        }
        s
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>, ids: &[String]) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv(ids)).map_err(|e| Error::io(path, e))
    }

    /// Parses `external_id role_name` lines against the given node ids.
    /// Ids that are not nodes are skipped; the number skipped is returned.
    pub fn parse_tsv(text: &str, ids: &[String]) -> Result<(RoleLabels, usize)> {
        let index: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut pairs = Vec::new();
        let mut skipped = 0;
        for (lineno, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
                continue;
            }
            let cols: Vec<&str> = t.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected `external_id role_name`, found {} columns", cols.len()),
                });
            }
            match index.get(cols[0]) {
                Some(&i) => pairs.push((i, cols[1].to_string())),
                None => skipped += 1,
            }
        }
        Ok((RoleLabels::from_named(ids.len(), &pairs)?, skipped))
    }

    pub fn load_tsv(path: impl AsRef<Path>, ids: &[String]) -> Result<(RoleLabels, usize)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, ids)
    }
}
