//! Brute-force reference implementations, written independently of the
//! library's scans: every candidate is scored by a sequential predictive
//! product and the prior is computed straight from its formula.

#![allow(dead_code)]

use gmt_core::data::DataSet;
use gmt_core::tree::{BayesianTree, TreeNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `ln p(y_1..y_n)` under a Dirichlet(α) prior, accumulated one observation
/// at a time: `Π_i (α_{y_i} + #{j<i: y_j = y_i}) / (Σα + i)`. Labels are
/// sorted first so equal counts give bit-equal results.
pub fn dm_sequential(labels: &[usize], alpha: &[f64]) -> f64 {
    let mut labels = labels.to_vec();
    labels.sort_unstable();
    let mut seen = vec![0.0; alpha.len()];
    let total: f64 = alpha.iter().sum();
    let mut acc = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        acc += ((alpha[y] + seen[y]) / (total + i as f64)).ln();
        seen[y] += 1.0;
    }
    acc
}

pub fn prior_trivial(depth: usize, g: f64) -> f64 {
    (1.0 - g.powi(1 + depth as i32)).ln()
}

pub fn prior_split(depth: usize, g: f64, d: usize, n_r: usize) -> f64 {
    (g.powi(1 + depth as i32) / (d as f64 * n_r as f64)).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCandidate {
    /// `None` for the trivial partition.
    pub split: Option<(usize, f64)>,
    pub loglike: f64,
    pub logprob: f64,
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Every partition of the space spanned by `rows`, in canonical order
/// (trivial, then dimension by dimension with ascending thresholds).
pub fn oracle_enumerate(
    data: &DataSet,
    rows: &[usize],
    alpha: &[f64],
    g: f64,
    depth: usize,
) -> Vec<OracleCandidate> {
    let d = data.d();
    let labels: Vec<usize> = rows.iter().map(|&r| data.outcome(r)).collect();
    let ll = dm_sequential(&labels, alpha);
    let mut out = vec![OracleCandidate { split: None, loglike: ll, logprob: ll + prior_trivial(depth, g) }];
    for dim in 0..d {
        let values = distinct_sorted(rows.iter().map(|&r| data.value(r, dim)));
        let n_r = values.len().saturating_sub(1);
        for w in values.windows(2) {
            let h = 0.5 * (w[0] + w[1]);
            let h = if h < w[1] { h } else { w[0] };
            let (lo, hi): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| data.value(r, dim) <= h);
            let y_lo: Vec<usize> = lo.iter().map(|&r| data.outcome(r)).collect();
            let y_hi: Vec<usize> = hi.iter().map(|&r| data.outcome(r)).collect();
            let ll = dm_sequential(&y_lo, alpha) + dm_sequential(&y_hi, alpha);
            out.push(OracleCandidate {
                split: Some((dim, h)),
                loglike: ll,
                logprob: ll + prior_split(depth, g, d, n_r),
            });
        }
    }
    out
}

/// Index of the first candidate whose log probability equals the maximum up
/// to rounding. Different count patterns can tie exactly in exact arithmetic
/// while their sequential products differ in the last bits.
pub fn oracle_mode(cands: &[OracleCandidate]) -> usize {
    let max = cands.iter().map(|c| c.logprob).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-11 * (1.0 + max.abs());
    cands.iter().position(|c| c.logprob >= max - tol).expect("at least one candidate")
}

/// Walks `tree` and checks every node against the brute-force candidate
/// list of its region under the geometric depth-dependent prior: the chosen
/// partition must be a mode up to rounding, and the first mode whenever the
/// runner-up is clearly worse; leaves must carry their region's counts.
/// Returns the sum of leaf log probabilities.
pub fn check_tree(tree: &BayesianTree, data: &DataSet, alpha: &[f64], g: f64) -> Result<f64, String> {
    let rows: Vec<usize> = (0..data.n()).collect();
    check_node(tree, data, alpha, g, 0, &rows, 0)
}

fn check_node(
    tree: &BayesianTree,
    data: &DataSet,
    alpha: &[f64],
    g: f64,
    idx: usize,
    rows: &[usize],
    depth: usize,
) -> Result<f64, String> {
    let cands = oracle_enumerate(data, rows, alpha, g, depth);
    let best = oracle_mode(&cands);
    let tol = 1e-9 * (1.0 + cands[best].logprob.abs());
    let runner_up = cands
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, c)| c.logprob)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen = match &tree.nodes[idx] {
        TreeNode::Leaf { .. } => None,
        TreeNode::Sprout { dim, threshold, .. } => Some((*dim, *threshold)),
    };
    let pos = cands
        .iter()
        .position(|c| c.split == chosen)
        .ok_or_else(|| format!("node {idx}: {chosen:?} is not a candidate"))?;
    if cands[best].logprob - cands[pos].logprob >= tol {
        return Err(format!("node {idx}: {chosen:?} is not modal, oracle picks {:?}", cands[best].split));
    }
    if cands[best].logprob - runner_up > tol && pos != best {
        return Err(format!("node {idx}: chose {chosen:?}, oracle picks {:?}", cands[best].split));
    }
    match &tree.nodes[idx] {
        TreeNode::Leaf { counts, logprob, .. } => {
            let mut want = vec![0u64; data.n_classes()];
            for &r in rows {
                want[data.outcome(r)] += 1;
            }
            if *counts != want {
                return Err(format!("node {idx}: counts {counts:?}, expected {want:?}"));
            }
            if (logprob - cands[0].logprob).abs() >= tol {
                return Err(format!("node {idx}: ln p {logprob}, expected {}", cands[0].logprob));
            }
            Ok(*logprob)
        }
        TreeNode::Sprout { dim, threshold, lower, upper, .. } => {
            let (lo, hi): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| data.value(r, *dim) <= *threshold);
            Ok(check_node(tree, data, alpha, g, *lower, &lo, depth + 1)?
                + check_node(tree, data, alpha, g, *upper, &hi, depth + 1)?)
        }
    }
}

/// Random dataset with `n` rows, `d` features on a small integer grid (so
/// ties occur) scaled by `scale`, and `c` classes.
pub fn random_dataset(seed: u64, n: usize, d: usize, c: usize, grid: u32) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| rng.gen_range(0..grid) as f64 * 0.5 - 3.0).collect()).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    DataSet::from_rows(&rows, &labels, c).expect("valid random dataset")
}

/// Random dataset whose label depends on the first feature, so trees have
/// something to find.
pub fn structured_dataset(seed: u64, n: usize, d: usize) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let labels: Vec<usize> = rows.iter().map(|x| usize::from(x[0] + 0.3 * rng.gen::<f64>() > 0.6)).collect();
    DataSet::from_rows(&rows, &labels, 2).expect("valid structured dataset")
}

pub fn fig1() -> DataSet {
    DataSet::from_rows(&[vec![0.0], vec![0.5], vec![1.25], vec![1.5], vec![1.75]], &[0, 0, 0, 1, 1], 2)
        .expect("valid fixture")
}
