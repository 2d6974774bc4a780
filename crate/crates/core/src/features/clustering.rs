use rayon::prelude::*;

use crate::graph::UndirectedSimpleView;

/// Number of edges among the neighbors of `u`.
fn triangles_at(u: usize, view: &UndirectedSimpleView) -> usize {
    let nu = view.neighbors(u);
    let mut twice = 0;
    for &v in nu {
        twice += sorted_intersection_len(nu, view.neighbors(v));
    }
    twice / 2
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Fraction of neighbor pairs of `u` that are themselves adjacent; 0 when
/// `u` has fewer than two neighbors.
pub fn local_clustering(u: usize, view: &UndirectedSimpleView) -> f64 {
    let d = view.degree(u);
    if d < 2 {
        return 0.0;
    }
    let t = triangles_at(u, view) as f64;
    2.0 * t / (d as f64 * (d as f64 - 1.0))
}

pub fn clustering_all(view: &UndirectedSimpleView) -> Vec<f64> {
    (0..view.node_count())
        .into_par_iter()
        .map(|u| local_clustering(u, view))
        .collect()
}
