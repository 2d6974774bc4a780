//! Reference implementations used as test oracles. They favor obviousness
//! over speed and share no code with the library.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Continuous Pareto sample by inverse CDF: x = x_min · u^(−1/(α−1)).
pub fn pareto_sample(alpha: f64, x_min: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.gen::<f64>();
            x_min * u.powf(-1.0 / (alpha - 1.0))
        })
        .collect()
}

/// Two-sample KS distance: largest gap between the two empirical CDFs,
/// checked at every sample point.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let ecdf = |s: &[f64], x: f64| s.partition_point(|&v| v <= x) as f64 / s.len() as f64;
    a.iter()
        .chain(b.iter())
        .map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs())
        .fold(0.0, f64::max)
}

/// AUC by counting every positive/negative pair; ties count one half.
pub fn auc_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let mut twice_wins: u64 = 0;
    let (mut p, mut q) = (0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if li {
            p += 1;
        } else {
            q += 1;
        }
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                twice_wins += 2;
            } else if scores[i] == scores[j] {
                twice_wins += 1;
            }
        }
    }
    (twice_wins as f64 / 2.0) / (p as f64 * q as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct NaiveFit {
    pub alpha: f64,
    pub x_min: f64,
    pub ks: f64,
    pub n_tail: usize,
}

/// Brute-force power-law fit: every distinct positive value with at least
/// `min_tail` samples at or above it is tried; smallest KS wins, smaller
/// cutoff on ties.
pub fn naive_fit(values: &[f64], min_tail: usize) -> NaiveFit {
    let mut xs: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    xs.sort_by(f64::total_cmp);
    let mut cands = xs.clone();
    cands.dedup();
    let mut best: Option<NaiveFit> = None;
    for &x_min in &cands {
        let tail: Vec<f64> = xs.iter().copied().filter(|&x| x >= x_min).collect();
        if tail.len() < min_tail {
            continue;
        }
        let n = tail.len() as f64;
        let s: f64 = tail.iter().map(|x| (x / x_min).ln()).sum();
        if s <= 0.0 {
            continue;
        }
        let alpha = 1.0 + n / s;
        let cdf = |x: f64| 1.0 - (x / x_min).powf(1.0 - alpha);
        let mut ks: f64 = 0.0;
        for (i, &x) in tail.iter().enumerate() {
            ks = ks
                .max((i as f64 / n - cdf(x)).abs())
                .max(((i + 1) as f64 / n - cdf(x)).abs());
        }
        if best.map_or(true, |b| ks < b.ks) {
            best = Some(NaiveFit {
                alpha,
                x_min,
                ks,
                n_tail: tail.len(),
            });
        }
    }
    best.expect("at least one candidate cutoff")
}

/// Two Gaussian blobs in 2-D, unit variance, centers (0,0) and (sep,sep).
/// Returns the x and y columns and the blob index per row.
pub fn blobs(n: usize, sep: f64, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let (mut xs, mut ys, mut cls) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let c = i % 2;
        let center = c as f64 * sep;
        xs.push(center + normal.sample(&mut rng));
        ys.push(center + normal.sample(&mut rng));
        cls.push(c);
    }
    (xs, ys, cls)
}

/// Accuracy on `test` rows of the nearest-centroid rule fitted on `train`.
pub fn nearest_centroid_accuracy(
    xs: &[f64],
    ys: &[f64],
    cls: &[usize],
    train: &[usize],
    test: &[usize],
) -> f64 {
    let mut sum = [[0.0f64; 2]; 2];
    let mut cnt = [0.0f64; 2];
    for &i in train {
        sum[cls[i]][0] += xs[i];
        sum[cls[i]][1] += ys[i];
        cnt[cls[i]] += 1.0;
    }
    let cen: Vec<[f64; 2]> = (0..2).map(|c| [sum[c][0] / cnt[c], sum[c][1] / cnt[c]]).collect();
    let d = |i: usize, c: usize| (xs[i] - cen[c][0]).powi(2) + (ys[i] - cen[c][1]).powi(2);
    let hits = test
        .iter()
        .filter(|&&i| usize::from(d(i, 1) < d(i, 0)) == cls[i])
        .count();
    hits as f64 / test.len() as f64
}

/// Dense power iteration on the Google matrix, for small graphs.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], teleport: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(s, _) in edges {
        out[s] += 1.0;
    }
    let mut m = vec![vec![0.0; n]; n];
    for &(s, d) in edges {
        m[d][s] += 1.0 / out[s];
    }
    for (s, &o) in out.iter().enumerate() {
        if o == 0.0 {
            for row in m.iter_mut() {
                row[s] = 1.0 / n as f64;
            }
        }
    }
    let mut pr = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                teleport / n as f64
                    + (1.0 - teleport) * (0..n).map(|j| m[i][j] * pr[j]).sum::<f64>()
            })
            .collect();
        let diff: f64 = next.iter().zip(&pr).map(|(a, b)| (a - b).abs()).sum();
        pr = next;
        if diff < 1e-15 {
            break;
        }
    }
    pr
}
