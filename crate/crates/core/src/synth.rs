//! Directed growth networks with a power-law degree tail and planted roles.
//!
//! Nodes arrive one at a time and pick earlier nodes with probability
//! proportional to `selections + offset`, where `selections` counts how often
//! a node was picked so far. Every node then grows its selection count like
//! `(t / s)^β` with the same `β`, which gives a degree tail with exponent
//! `2 + (A + p_a B) / m` for mean picks per arrival `m`, offset `A`, admin share
//! `p_a` and admin boost `B`. Three roles are planted:
//!
//! * `admin`: a larger offset, several in-edges per selection from random
//!   other nodes, frequent reciprocation and twice the arrival activity. This
//!   scales admin degrees by a constant factor without changing the exponent.
//! * `bot`: emits a heavy-tailed number of edges after growth to uniformly
//!   random nodes and is mostly skipped as a target.
//! * `normal`: everyone else.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::RoleLabels;

pub const ROLE_ADMIN: &str = "admin";
pub const ROLE_BOT: &str = "bot";
pub const ROLE_NORMAL: &str = "normal";

/// Extra attachment offset of admins, as a multiple of the mean out-degree.
const ADMIN_BOOST: f64 = 2.0;
/// In-edges an admin receives per selection.
const ADMIN_ATTENTION: usize = 3;
/// Probability that an admin answers an incoming edge.
const ADMIN_RECIPROCITY: f64 = 0.7;
/// Arrival edge multiplier for admins.
const ADMIN_ACTIVITY: f64 = 4.0;
/// Smallest bot fan-out, as a multiple of the mean out-degree. Fan-outs are
/// Pareto distributed with the target tail exponent.
const BOT_FANOUT_MIN: f64 = 2.0;
/// Probability that a bot drawn as a growth target is rejected.
const BOT_AVOIDANCE: f64 = 0.9;
/// Added to the requested exponent before solving for the offset; offsets
/// the flattening seen in fits at n = 10^4.
const EXPONENT_CORRECTION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    /// Desired exponent of the degree tail; must exceed roughly 2.1.
    pub exponent_target: f64,
    pub admin_fraction: f64,
    pub bot_fraction: f64,
    /// Mean number of edges a normal node emits on arrival.
    pub avg_degree: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            exponent_target: 2.5,
            admin_fraction: 0.05,
            bot_fraction: 0.02,
            avg_degree: 5.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Mean selections per arrival (bots make none during growth).
    fn picks_per_arrival(&self) -> f64 {
        (1.0 - self.bot_fraction)
            * self.avg_degree
            * (1.0 - self.admin_fraction + ADMIN_ACTIVITY * self.admin_fraction)
    }

    fn admin_boost(&self) -> f64 {
        ADMIN_BOOST * self.avg_degree
    }

    /// Attachment offset of non-admins giving the requested exponent.
    fn attachment_offset(&self) -> Result<f64> {
        let m = self.picks_per_arrival();
        let extra = self.admin_fraction * self.admin_boost();
        let gamma = self.exponent_target + EXPONENT_CORRECTION;
        let offset = m * (gamma - 2.0) - extra;
        if offset <= 0.0 {
            let min = 2.0 + extra / m - EXPONENT_CORRECTION;
            return Err(Error::Config(format!(
                "exponent_target {} too small for these settings (must exceed {min:.3})",
                self.exponent_target
            )));
        }
        Ok(offset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::Config(format!("n must be at least 10, got {}", self.n)));
        }
        for (name, f) in [
            ("admin_fraction", self.admin_fraction),
            ("bot_fraction", self.bot_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {f}")));
            }
        }
        if self.admin_fraction + self.bot_fraction > 1.0 {
            return Err(Error::Config("role fractions sum to more than 1".into()));
        }
        if !(self.avg_degree >= 1.0) {
            return Err(Error::Config(format!(
                "avg_degree must be at least 1, got {}",
                self.avg_degree
            )));
        }
        if self.avg_degree >= self.n as f64 {
            return Err(Error::Config(format!(
                "avg_degree {} must be below n = {}",
                self.avg_degree, self.n
            )));
        }
        if !self.exponent_target.is_finite() {
            return Err(Error::Config("exponent_target must be finite".into()));
        }
        self.attachment_offset().map(|_| ())
    }
}

/// Draws earlier nodes with probability proportional to
/// `selections + offset (+ boost for admins)`.
struct Attachment {
    /// One entry per past selection.
    selections: Vec<usize>,
    members: Vec<usize>,
    admins: Vec<usize>,
    offset: f64,
    boost: f64,
}

impl Attachment {
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let e = self.selections.len() as f64;
        let a = self.offset * self.members.len() as f64;
        let b = self.boost * self.admins.len() as f64;
        let x = rng.gen::<f64>() * (e + a + b);
        if x < e {
            self.selections[rng.gen_range(0..self.selections.len())]
        } else if x < e + a || self.admins.is_empty() {
            self.members[rng.gen_range(0..self.members.len())]
        } else {
            self.admins[rng.gen_range(0..self.admins.len())]
        }
    }
}

/// Number of failures before the first success; mean `mean`.
fn geometric(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let p = 1.0 / (1.0 + mean);
    let u: f64 = rng.gen();
    ((1.0 - u).ln() / (1.0 - p).ln()).floor() as usize
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Admin,
    Bot,
    Normal,
}

pub fn generate(cfg: &SynthConfig) -> Result<(Graph, RoleLabels)> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n_admin = (cfg.admin_fraction * n as f64).round() as usize;
    let n_bot = ((cfg.bot_fraction * n as f64).round() as usize).min(n - n_admin);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut roles = vec![Role::Normal; n];
    for &i in &perm[..n_admin] {
        roles[i] = Role::Admin;
    }
    for &i in &perm[n_admin..n_admin + n_bot] {
        roles[i] = Role::Bot;
    }

    let mut pool = Attachment {
        selections: Vec::new(),
        members: Vec::new(),
        admins: Vec::new(),
        offset: cfg.attachment_offset()?,
        boost: cfg.admin_boost(),
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut targets: Vec<usize> = Vec::new();

    for u in 0..n {
        if roles[u] != Role::Bot && u > 0 {
            let mean = match roles[u] {
                Role::Admin => ADMIN_ACTIVITY * cfg.avg_degree,
                _ => cfg.avg_degree,
            };
            let want = (1 + geometric(&mut rng, mean - 1.0)).min(u);
            targets.clear();
            let mut attempts = 0;
            while targets.len() < want && attempts < 20 * want {
                attempts += 1;
                let v = pool.draw(&mut rng);
                if roles[v] == Role::Bot && rng.gen::<f64>() < BOT_AVOIDANCE {
                    continue;
                }
                if !targets.contains(&v) {
                    targets.push(v);
                }
            }
            for &v in &targets {
                pool.selections.push(v);
                edges.push((u, v));
                if roles[v] != Role::Admin {
                    continue;
                }
                if rng.gen::<f64>() < ADMIN_RECIPROCITY {
                    edges.push((v, u));
                }
                for _ in 1..ADMIN_ATTENTION {
                    let w = pool.members[rng.gen_range(0..pool.members.len())];
                    if w != v {
                        edges.push((w, v));
                    }
                }
            }
        }
        pool.members.push(u);
        if roles[u] == Role::Admin {
            pool.admins.push(u);
        }
    }

    let min_fanout = BOT_FANOUT_MIN * cfg.avg_degree;
    for b in (0..n).filter(|&i| roles[i] == Role::Bot) {
        let u: f64 = rng.gen();
        let fanout = min_fanout * (1.0 - u).powf(-1.0 / (cfg.exponent_target - 1.0));
        let want = (fanout.round() as usize).min((n - 1) / 2);
        targets.clear();
        while targets.len() < want {
            let v = rng.gen_range(0..n);
            if v != b && !targets.contains(&v) {
                targets.push(v);
            }
        }
        for &v in &targets {
            edges.push((b, v));
        }
    }

    let graph = Graph::from_edges(n, edges)?;
    let names = [ROLE_ADMIN, ROLE_BOT, ROLE_NORMAL];
    let labels = RoleLabels::new(
        names.iter().map(|s| s.to_string()).collect(),
        roles
            .iter()
            .map(|r| {
                Some(match r {
                    Role::Admin => 0,
                    Role::Bot => 1,
                    Role::Normal => 2,
                })
            })
            .collect(),
    )?;
    Ok((graph, labels))
}
