use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DataError;

/// Assignment of `n` rows to `k` folds.
///
/// Rows are shuffled with a Fisher–Yates pass driven by ChaCha8 seeded via
/// `seed_from_u64(seed)`, then cut into `k` contiguous blocks; the first
/// `n mod k` blocks get one extra row. Both the generator and the shuffle
/// are platform independent, so a `(n, k, seed)` triple always gives the
/// same plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    if k < 2 {
        return Err(DataError::Folds(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(DataError::Folds(format!("k = {k} exceeds row count {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            assignment[row] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan { k, seed, assignment })
}

impl FoldPlan {
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&r| self.assignment[r] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&r| self.assignment[r] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// One fold label per line, preceded by `# k=… seed=…`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# k={} seed={}\n", self.k, self.seed);
        for f in &self.assignment {
            writeln!(out, "{f}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DataError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| DataError::Folds("empty fold file".into()))?;
        let mut k = None;
        let mut seed = None;
        for part in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = part.strip_prefix("k=") {
                k = v.parse().ok();
            } else if let Some(v) = part.strip_prefix("seed=") {
                seed = v.parse().ok();
            }
        }
        let (Some(k), Some(seed)) = (k, seed) else {
            return Err(DataError::Folds(format!("bad header line '{header}'")));
        };
        let assignment = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&f| f < k)
                    .ok_or_else(|| DataError::Folds(format!("bad fold label '{l}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { k, seed, assignment })
    }
}
