//! Modal-partition search.
//!
//! Candidates are visited in a fixed order: the trivial partition first, then
//! dimensions ascending, then thresholds ascending. A candidate replaces the
//! incumbent only when its log-probability is larger by more than rounding
//! noise, so among equal scores the earliest one wins.

use serde::{Deserialize, Serialize};

use super::dirichlet::{DirichletParams, LikelihoodModel};
use super::prior::{partition_log_prior, PartitionKind, PriorConfig};
use super::PartitionError;
use crate::data::SubsetView;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Partition {
    Trivial,
    Split { dim: usize, threshold: f64 },
}

impl Partition {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Partition::Trivial)
    }
}

/// The selected partition of a node with its log marginal likelihood
/// `ln L(D|Π)` (relative to the prior normaliser, so the empty set scores 0)
/// and unnormalised log posterior `ln L(D|Π) + ln p(Π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionChoice {
    pub partition: Partition,
    pub loglike: f64,
    pub logprob: f64,
    /// Position in the canonical scan order (0 is the trivial partition).
    pub index: usize,
}

/// One element of the partition space with its scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub partition: Partition,
    pub loglike: f64,
    pub logprior: f64,
    pub logprob: f64,
    pub index: usize,
    /// Rows on the lower side (the whole node for the trivial partition).
    pub lower_len: usize,
}

impl Candidate {
    pub fn choice(&self) -> PartitionChoice {
        PartitionChoice {
            partition: self.partition,
            loglike: self.loglike,
            logprob: self.logprob,
            index: self.index,
        }
    }
}

/// Threshold between two adjacent distinct sorted values. Falls back to the
/// lower value when rounding would push the midpoint onto the upper one, so
/// `x ≤ h` always separates the two sides.
pub fn midpoint(lower: f64, upper: f64) -> f64 {
    let h = 0.5 * (lower + upper);
    if h < upper && h >= lower {
        h
    } else {
        lower
    }
}

/// `N_r` for every dimension of the view: adjacent distinct pairs along
/// each sorted order.
pub(crate) fn split_counts(view: &SubsetView<'_>) -> Vec<usize> {
    (0..view.data().d())
        .map(|dim| view.sorted_values(dim).windows(2).filter(|w| w[0] != w[1]).count())
        .collect()
}

fn check_input(view: &SubsetView<'_>, prior: Option<&DirichletParams>) -> Result<(), PartitionError> {
    if view.is_empty() {
        return Err(PartitionError::EmptyInput);
    }
    if let Some(prior) = prior {
        let c = view.data().n_classes();
        if prior.len() != c {
            return Err(PartitionError::LengthMismatch { expected: c, found: prior.len() });
        }
    }
    Ok(())
}

/// Calls `visit` for every split candidate of dimension `dim`, passing the
/// sorted position `j` (lower side is `order[..=j]`) and the threshold.
fn for_each_split(view: &SubsetView<'_>, dim: usize, mut visit: impl FnMut(usize, f64)) {
    for (j, w) in view.sorted_values(dim).windows(2).enumerate() {
        if w[0] != w[1] {
            visit(j, midpoint(w[0], w[1]));
        }
    }
}

/// Scans the partition space with an arbitrary likelihood model, evaluating
/// both sides of every candidate from scratch. `O(d·n²)` for models whose
/// marginal costs `O(n)`.
fn scan_general<M: LikelihoodModel>(
    view: &SubsetView<'_>,
    model: &M,
    cfg: &PriorConfig,
    depth: usize,
    mut visit: impl FnMut(Candidate),
) {
    let data = view.data();
    let d = data.d();
    let n_splits_by_dim = split_counts(view);
    let total_splits = n_splits_by_dim.iter().sum();
    let loglike = model.log_marginal(data, view.rows());
    let logprior = partition_log_prior(PartitionKind::Trivial, depth, d, 0, total_splits, cfg);
    visit(Candidate {
        partition: Partition::Trivial,
        loglike,
        logprior,
        logprob: loglike + logprior,
        index: 0,
        lower_len: view.len(),
    });
    let mut index = 1;
    for dim in 0..d {
        let order = view.sorted_indices(dim);
        let n_splits = n_splits_by_dim[dim];
        if n_splits == 0 {
            continue;
        }
        let logprior = partition_log_prior(PartitionKind::Split, depth, d, n_splits, total_splits, cfg);
        for_each_split(view, dim, |j, threshold| {
            let loglike = model.log_marginal(data, &order[..=j]) + model.log_marginal(data, &order[j + 1..]);
            visit(Candidate {
                partition: Partition::Split { dim, threshold },
                loglike,
                logprior,
                logprob: loglike + logprior,
                index,
                lower_len: j + 1,
            });
            index += 1;
        });
    }
}

/// Cumulative log tables for the Dirichlet-multinomial recurrences:
/// `per_class[c][k] = Σ_{i<k} ln(α_c + i)` and `total[k] = Σ_{i<k} ln(Σα + i)`,
/// so that `ln B(α + counts) − ln B(α) = Σ_c per_class[c][counts_c] − total[Σ counts]`.
///
/// Each table entry extends the previous one by the single-observation
/// update `ln(count/(pseudo_count + j − 1))` split into numerator and
/// denominator; evaluating a candidate is then a function of its counts only,
/// so candidates with equal counts get bit-identical scores.
struct LogTables {
    per_class: Vec<Vec<f64>>,
    total: Vec<f64>,
}

impl LogTables {
    fn new(prior: &DirichletParams, counts: &[u64]) -> Self {
        let cumulative = |base: f64, len: u64| {
            let mut table = Vec::with_capacity(len as usize + 1);
            let mut acc = 0.0;
            table.push(acc);
            for i in 0..len {
                acc += (base + i as f64).ln();
                table.push(acc);
            }
            table
        };
        let per_class = prior.alphas().iter().zip(counts).map(|(&a, &c)| cumulative(a, c)).collect();
        let total = cumulative(prior.total(), counts.iter().sum());
        Self { per_class, total }
    }

    fn loglike(&self, counts: &[u64], n: usize) -> f64 {
        let mut acc = 0.0;
        for (table, &c) in self.per_class.iter().zip(counts) {
            acc += table[c as usize];
        }
        acc - self.total[n]
    }
}

/// Classification scan in `O(d·n·C)` using count updates along each sorted
/// order.
fn scan_classification(
    view: &SubsetView<'_>,
    prior: &DirichletParams,
    cfg: &PriorConfig,
    depth: usize,
    mut visit: impl FnMut(Candidate),
) {
    let data = view.data();
    let d = data.d();
    let n = view.len();
    let node_counts = view.class_counts();
    let tables = LogTables::new(prior, &node_counts);

    let n_splits_by_dim = split_counts(view);
    let total_splits = n_splits_by_dim.iter().sum();
    let loglike = tables.loglike(&node_counts, n);
    let logprior = partition_log_prior(PartitionKind::Trivial, depth, d, 0, total_splits, cfg);
    visit(Candidate {
        partition: Partition::Trivial,
        loglike,
        logprior,
        logprob: loglike + logprior,
        index: 0,
        lower_len: n,
    });

    let mut lower = vec![0u64; node_counts.len()];
    let mut upper = node_counts.clone();
    let mut index = 1;
    for dim in 0..d {
        let values = view.sorted_values(dim);
        let labels = view.sorted_outcomes(dim);
        let n_splits = n_splits_by_dim[dim];
        if n_splits == 0 {
            continue;
        }
        let logprior = partition_log_prior(PartitionKind::Split, depth, d, n_splits, total_splits, cfg);
        lower.iter_mut().for_each(|c| *c = 0);
        upper.copy_from_slice(&node_counts);
        for j in 0..n - 1 {
            let y = labels[j] as usize;
            lower[y] += 1;
            upper[y] -= 1;
            let (a, b) = (values[j], values[j + 1]);
            if a != b {
                let loglike = tables.loglike(&lower, j + 1) + tables.loglike(&upper, n - j - 1);
                visit(Candidate {
                    partition: Partition::Split { dim, threshold: midpoint(a, b) },
                    loglike,
                    logprior,
                    logprob: loglike + logprior,
                    index,
                    lower_len: j + 1,
                });
                index += 1;
            }
        }
    }
}

/// Relative gap below which two log probabilities count as tied. Different
/// count patterns can have exactly equal posteriors whose computed values
/// differ in the last bits; those ties go to the earlier candidate.
const TIE_TOLERANCE: f64 = 1e-12;

fn argmax(best: &mut Option<Candidate>, cand: Candidate) {
    match best {
        Some(b) if !(cand.logprob - b.logprob > TIE_TOLERANCE * (1.0 + b.logprob.abs())) => {}
        _ => *best = Some(cand),
    }
}

/// Modal partition for any likelihood model, scoring every candidate directly.
pub fn find_modal_partition_general<M: LikelihoodModel>(
    view: &SubsetView<'_>,
    model: &M,
    cfg: &PriorConfig,
    depth: usize,
) -> Result<PartitionChoice, PartitionError> {
    check_input(view, None)?;
    let mut best = None;
    scan_general(view, model, cfg, depth, |c| argmax(&mut best, c));
    Ok(best.expect("trivial candidate is always visited").choice())
}

/// Modal partition for categorical outcomes with a Dirichlet prior.
pub fn find_modal_partition_classification(
    view: &SubsetView<'_>,
    prior: &DirichletParams,
    cfg: &PriorConfig,
    depth: usize,
) -> Result<PartitionChoice, PartitionError> {
    check_input(view, Some(prior))?;
    let mut best = None;
    scan_classification(view, prior, cfg, depth, |c| argmax(&mut best, c));
    Ok(best.expect("trivial candidate is always visited").choice())
}

/// Every candidate of the partition space in canonical order, scored with the
/// classification recurrences.
pub fn enumerate_partitions_classification(
    view: &SubsetView<'_>,
    prior: &DirichletParams,
    cfg: &PriorConfig,
    depth: usize,
) -> Result<Vec<Candidate>, PartitionError> {
    check_input(view, Some(prior))?;
    let mut out = Vec::new();
    scan_classification(view, prior, cfg, depth, |c| out.push(c));
    Ok(out)
}

/// Every candidate of the partition space in canonical order, scored by
/// direct evaluation of the model on both sides.
pub fn enumerate_partitions_general<M: LikelihoodModel>(
    view: &SubsetView<'_>,
    model: &M,
    cfg: &PriorConfig,
    depth: usize,
) -> Result<Vec<Candidate>, PartitionError> {
    check_input(view, None)?;
    let mut out = Vec::new();
    scan_general(view, model, cfg, depth, |c| out.push(c));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataSet;
    use crate::partition::DirichletMultinomial;
    use approx::assert_relative_eq;

    fn fig1() -> DataSet {
        DataSet::from_rows(&[vec![0.0], vec![0.5], vec![1.25], vec![1.5], vec![1.75]], &[1, 1, 1, 0, 0], 2)
            .unwrap()
    }

    fn beta(a: f64, b: f64) -> DirichletParams {
        DirichletParams::new(vec![a, b]).unwrap()
    }

    #[test]
    fn fig1_candidate_likelihoods() {
        let data = fig1();
        let cands = enumerate_partitions_classification(
            &data.full_view(),
            &beta(1.0, 1.0),
            &PriorConfig::default(),
            0,
        )
        .unwrap();
        let expected = [
            (None, 1.0 / 60.0),
            (Some(0.25), 1.0 / 60.0),
            (Some(0.875), 1.0 / 36.0),
            (Some(1.375), 1.0 / 12.0),
            (Some(1.625), 1.0 / 40.0),
        ];
        assert_eq!(cands.len(), expected.len());
        for (cand, (h, like)) in cands.iter().zip(expected) {
            match (cand.partition, h) {
                (Partition::Trivial, None) => {}
                (Partition::Split { dim: 0, threshold }, Some(h)) => assert_eq!(threshold, h),
                other => panic!("unexpected {other:?}"),
            }
            assert_relative_eq!(cand.loglike.exp(), like, max_relative = 1e-12);
        }
    }

    #[test]
    fn fig1_mode_is_1375() {
        let data = fig1();
        let choice = find_modal_partition_classification(
            &data.full_view(),
            &beta(1.0, 1.0),
            &PriorConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(choice.partition, Partition::Split { dim: 0, threshold: 1.375 });
        assert_eq!(choice.index, 3);
    }

    #[test]
    fn single_observation_is_trivial_with_prior_mean_likelihood() {
        let data = DataSet::from_rows(&[vec![3.0, 1.0]], &[1], 3).unwrap();
        let prior = DirichletParams::new(vec![2.0, 5.0, 3.0]).unwrap();
        let choice =
            find_modal_partition_classification(&data.full_view(), &prior, &PriorConfig::default(), 0)
                .unwrap();
        assert!(choice.partition.is_trivial());
        assert_relative_eq!(choice.loglike, 0.5f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn identical_feature_vectors_only_allow_trivial() {
        let data =
            DataSet::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]], &[0, 1, 0], 2).unwrap();
        let cands = enumerate_partitions_classification(
            &data.full_view(),
            &beta(1.0, 1.0),
            &PriorConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(cands.len(), 1);
        assert!(cands[0].partition.is_trivial());
    }

    #[test]
    fn empty_view_is_an_error() {
        let data = fig1();
        let empty = data.full_view().make_subset(|_| false);
        assert_eq!(
            find_modal_partition_classification(&empty, &beta(1.0, 1.0), &PriorConfig::default(), 0),
            Err(PartitionError::EmptyInput)
        );
        let model = DirichletMultinomial::new(beta(1.0, 1.0));
        assert_eq!(
            find_modal_partition_general(&empty, &model, &PriorConfig::default(), 0),
            Err(PartitionError::EmptyInput)
        );
    }

    #[test]
    fn prior_length_must_match_classes() {
        let data = fig1();
        let prior = DirichletParams::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            find_modal_partition_classification(&data.full_view(), &prior, &PriorConfig::default(), 0),
            Err(PartitionError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn general_and_classification_agree_on_fig1() {
        let data = fig1();
        let prior = beta(1.0, 1.0);
        let model = DirichletMultinomial::new(prior.clone());
        let view = data.full_view();
        let fast = enumerate_partitions_classification(&view, &prior, &PriorConfig::default(), 2).unwrap();
        let slow = enumerate_partitions_general(&view, &model, &PriorConfig::default(), 2).unwrap();
        assert_eq!(fast.len(), slow.len());
        for (f, s) in fast.iter().zip(&slow) {
            assert_eq!(f.partition, s.partition);
            assert_relative_eq!(f.loglike, s.loglike, epsilon = 1e-12);
            assert_eq!(f.logprior, s.logprior);
        }
    }

    #[test]
    fn midpoint_never_reaches_upper_value() {
        assert_eq!(midpoint(1.25, 1.5), 1.375);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let h = midpoint(a, b);
        assert!(a <= h && h < b);
    }
}
