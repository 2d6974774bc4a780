//! Directed multigraphs loaded from edge lists, plus the symmetrized simple
//! view used for clustering and neighborhood aggregation.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// How node identifiers in an edge list are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdKind {
    /// Ids must parse as unsigned integers; `05` and `5` name the same node.
    #[default]
    Integer,
    /// Any whitespace-free token is an id.
    String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub ids: IdKind,
}

/// A directed multigraph with dense node indices `0..n`.
///
/// Parallel edges are collapsed into a single entry carrying a multiplicity.
/// Self-loops are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, u64)>,
    out_adj: Vec<Vec<(usize, u64)>>,
    in_adj: Vec<Vec<(usize, u64)>>,
    ids: Vec<String>,
}

/// Accumulates edges by external id, assigning internal indices in
/// first-seen order.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edge_index: HashMap<(usize, usize), usize>,
    edges: Vec<(usize, usize, u64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the internal index of `id`, registering it if unseen.
    pub fn node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, multiplicity: u64) {
        let s = self.node(src);
        let d = self.node(dst);
        self.add_indexed(s, d, multiplicity);
    }

    fn add_indexed(&mut self, s: usize, d: usize, multiplicity: u64) {
        if multiplicity == 0 {
            return;
        }
        match self.edge_index.get(&(s, d)) {
            Some(&e) => self.edges[e].2 += multiplicity,
            None => {
                self.edge_index.insert((s, d), self.edges.len());
                self.edges.push((s, d, multiplicity));
            }
        }
    }

    pub fn build(self) -> Graph {
        Graph::assemble(self.ids, self.edges)
    }
}

impl Graph {
    /// Builds a graph on nodes `0..n` whose external ids are their decimal
    /// indices. Repeated pairs accumulate multiplicity.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.node(&i.to_string());
        }
        for (s, d) in edges {
            if s >= n || d >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({s}, {d}) out of range for {n} nodes"
                )));
            }
            b.add_indexed(s, d, 1);
        }
        Ok(b.build())
    }

    fn assemble(ids: Vec<String>, edges: Vec<(usize, usize, u64)>) -> Graph {
        let n = ids.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(s, d, m) in &edges {
            out_adj[s].push((d, m));
            in_adj[d].push((s, m));
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            out_adj,
            in_adj,
            ids,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Distinct `(src, dst, multiplicity)` entries in first-seen order.
    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    /// Sum of all edge multiplicities.
    pub fn total_edges(&self) -> u64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn out_neighbors(&self, u: usize) -> &[(usize, u64)] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, u: usize) -> &[(usize, u64)] {
        &self.in_adj[u]
    }

    /// External id of each internal index.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        // Linear lookups are rare (labels files); build a map there instead.
        self.ids.iter().position(|x| x == id)
    }

    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect()
    }

    /// Copy of this graph with every multiplicity set to 1, so degrees count
    /// distinct neighbors and PageRank transitions are unweighted.
    pub fn distinct(&self) -> Graph {
        let edges = self.edges.iter().map(|&(s, d, _)| (s, d, 1)).collect();
        Graph::assemble(self.ids.clone(), edges)
    }

    pub fn out_degree(&self, u: usize) -> u64 {
        self.out_adj[u].iter().map(|e| e.1).sum()
    }

    pub fn in_degree(&self, u: usize) -> u64 {
        self.in_adj[u].iter().map(|e| e.1).sum()
    }

    pub fn degrees(&self) -> Degrees {
        let out: Vec<u64> = (0..self.n).map(|u| self.out_degree(u)).collect();
        let inn: Vec<u64> = (0..self.n).map(|u| self.in_degree(u)).collect();
        let total = out.iter().zip(&inn).map(|(a, b)| a + b).collect();
        Degrees {
            out,
            inn,
            total,
        }
    }

    /// Nodes with no outgoing edges.
    pub fn dangling(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&u| self.out_adj[u].is_empty())
    }

    pub fn symmetrize_simple(&self) -> UndirectedSimpleView {
        UndirectedSimpleView::from_graph(self)
    }

    /// Writes `src dst` lines, one per unit of multiplicity, using external ids.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for &(s, d, m) in &self.edges {
            for _ in 0..m {
                out.push_str(&self.ids[s]);
                out.push(' ');
                out.push_str(&self.ids[d]);
                out.push('\n');
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Two-column TSV `external_id internal_index`.
    pub fn write_id_map(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut body = String::from("external_id\tinternal_index\n");
        for (i, id) in self.ids.iter().enumerate() {
            body.push_str(&format!("{id}\t{i}\n"));
        }
        f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub out: Vec<u64>,
    pub inn: Vec<u64>,
    pub total: Vec<u64>,
}

/// Parses edge-list text. Lines are `src dst [weight] [timestamp]`; blank
/// lines and lines starting with `%` or `#` are skipped.
pub fn parse_edge_list(text: &str, opts: ParseOptions) -> Result<Graph> {
    let mut b = GraphBuilder::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 to 4 columns, found {}", tokens.len()),
            });
        }
        if let Some(w) = tokens.get(2) {
            w.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("weight {w:?} is not a number"),
            })?;
        }
        let src = canonical_id(tokens[0], opts.ids, line_no)?;
        let dst = canonical_id(tokens[1], opts.ids, line_no)?;
        b.add_edge(&src, &dst, 1);
    }
    Ok(b.build())
}

fn canonical_id(token: &str, kind: IdKind, line: usize) -> Result<String> {
    match kind {
        IdKind::String => Ok(token.to_string()),
        IdKind::Integer => token
            .parse::<u64>()
            .map(|v| v.to_string())
            .map_err(|_| Error::Parse {
                line,
                msg: format!("node id {token:?} is not a non-negative integer"),
            }),
    }
}

pub fn load_edge_list(path: impl AsRef<Path>, opts: ParseOptions) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, opts)
}

/// Undirected simple graph: symmetric sorted neighbor lists, no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedSimpleView {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl UndirectedSimpleView {
    fn from_graph(g: &Graph) -> Self {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); g.n];
        for &(s, d, m) in &g.edges {
            if s != d && m > 0 {
                lists[s].push(d);
                lists[d].push(s);
            }
        }
        Self::from_lists(lists)
    }

    fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for l in lists.iter_mut() {
            l.sort_unstable();
            l.dedup();
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Sorted neighbors of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Re-derives the view from its own edges; a no-op on any valid view.
    pub fn resymmetrize(&self) -> Self {
        let n = self.node_count();
        let mut lists = vec![Vec::new(); n];
        for u in 0..n {
            for &v in self.neighbors(u) {
                if u != v {
                    lists[u].push(v);
                    lists[v].push(u);
                }
            }
        }
        Self::from_lists(lists)
    }
}
