//! CART classification tree with Gini impurity and random feature
//! subsampling at each node.

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { counts: Vec<u32> },
}

/// A fitted tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
}

pub(crate) struct TreeParams {
    pub n_classes: usize,
    pub max_features: usize,
    pub min_leaf: usize,
}

/// Column-major training data.
pub(crate) struct TrainingView<'a> {
    pub columns: &'a [&'a [f64]],
    pub classes: &'a [usize],
}

struct SplitChoice {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl DecisionTree {
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Leaf class counts reached by `row`.
    pub fn leaf_counts(&self, row: &[f64]) -> &[u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub(crate) fn fit<R: Rng>(
        data: &TrainingView<'_>,
        sample: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> DecisionTree {
        let mut nodes = vec![Node::Leaf { counts: Vec::new() }];
        // (node slot, rows reaching it); processed depth-first, left first.
        let mut stack = vec![(0usize, sample)];
        let n_features = data.columns.len();
        let mut order: Vec<usize> = (0..n_features).collect();

        while let Some((slot, rows)) = stack.pop() {
            let counts = class_counts(data.classes, &rows, params.n_classes);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure || rows.len() < 2 * params.min_leaf {
                None
            } else {
                order.shuffle(rng);
                best_split(data, &rows, &counts, &order, params)
            };
            match split {
                None => nodes[slot] = Node::Leaf { counts },
                Some(s) => {
                    let col = data.columns[s.feature];
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&i| col[i] <= s.threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    let right = nodes.len();
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    nodes[slot] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right,
                    };
                    stack.push((right, r));
                    stack.push((left, l));
                }
            }
        }
        DecisionTree { nodes }
    }
}

fn class_counts(classes: &[usize], rows: &[usize], k: usize) -> Vec<u32> {
    let mut c = vec![0u32; k];
    for &r in rows {
        c[classes[r]] += 1;
    }
    c
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // Adjacent floats: the midpoint rounds onto `b`, which would send `b` left.
    if m >= b {
        a
    } else {
        m
    }
}

/// Visits features in `order` until `max_features` of them admit a valid
/// split, returning the split that maximizes `Σ c_L²/n_L + Σ c_R²/n_R`
/// (equivalently, minimizes weighted Gini impurity). Ties go to the lower
/// feature index, then the lower threshold.
fn best_split(
    data: &TrainingView<'_>,
    rows: &[usize],
    counts: &[u32],
    order: &[usize],
    params: &TreeParams,
) -> Option<SplitChoice> {
    let n = rows.len();
    let mut best: Option<SplitChoice> = None;
    let mut usable = 0;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0u64; params.n_classes];

    for &feature in order {
        if usable >= params.max_features {
            break;
        }
        let col = data.columns[feature];
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (col[r], data.classes[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted[0].0 == sorted[n - 1].0 {
            continue;
        }

        left.iter_mut().for_each(|c| *c = 0);
        let mut sq_left: u64 = 0;
        let mut sq_right: u64 = counts.iter().map(|&c| (c as u64) * (c as u64)).sum();
        let mut found = false;
        for i in 0..n - 1 {
            let c = sorted[i].1;
            // Moving one row of class c from right to left.
            let cl = left[c];
            let cr = counts[c] as u64 - cl;
            sq_left += 2 * cl + 1;
            sq_right -= 2 * cr - 1;
            left[c] += 1;

            let n_left = i + 1;
            let n_right = n - n_left;
            if sorted[i].0 == sorted[i + 1].0 || n_left < params.min_leaf || n_right < params.min_leaf
            {
                continue;
            }
            found = true;
            let score = sq_left as f64 / n_left as f64 + sq_right as f64 / n_right as f64;
            let better = match &best {
                None => true,
                Some(b) => score > b.score || (score == b.score && feature < b.feature),
            };
            if better {
                best = Some(SplitChoice {
                    score,
                    feature,
                    threshold: midpoint(sorted[i].0, sorted[i + 1].0),
                });
            }
        }
        if found {
            usable += 1;
        }
    }
    best
}
