//! PageRank by power iteration on the directed multigraph.
//!
//! Transition probabilities are weighted by edge multiplicity. Rank held by
//! dangling nodes (out-degree zero) is spread uniformly over all nodes on
//! every step, so the vector stays a probability distribution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    /// Probability of jumping to a uniformly random node at each step.
    pub teleport: f64,
    /// L1 change between iterates at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            teleport: 0.15,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl PageRankParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.teleport > 0.0 && self.teleport < 1.0) {
            return Err(Error::Config(format!(
                "teleport must lie in (0, 1), got {}",
                self.teleport
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the final iteration.
    pub residual: f64,
    /// False when `max_iter` was reached first; `scores` then holds the last
    /// iterate.
    pub converged: bool,
}

pub fn pagerank(g: &Graph, params: &PageRankParams) -> Result<PageRankResult> {
    params.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let nf = n as f64;
    let damping = 1.0 - params.teleport;
    let out_deg: Vec<f64> = (0..n).map(|u| g.out_degree(u) as f64).collect();
    let dangling: Vec<usize> = g.dangling().collect();

    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < params.max_iter {
        iterations += 1;
        let dangling_mass: f64 = dangling.iter().map(|&d| rank[d]).sum();
        let base = params.teleport / nf + damping * dangling_mass / nf;
        next.par_iter_mut().enumerate().for_each(|(v, slot)| {
            let inflow: f64 = g
                .in_neighbors(v)
                .iter()
                .map(|&(u, m)| rank[u] * m as f64 / out_deg[u])
                .sum();
            *slot = base + damping * inflow;
        });
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual <= params.tol {
            break;
        }
    }

    Ok(PageRankResult {
        scores: rank,
        iterations,
        residual,
        converged: residual <= params.tol,
    })
}
