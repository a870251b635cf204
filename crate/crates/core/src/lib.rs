//! Greedy-modal Bayesian decision trees.
//!
//! A node's region is either kept whole or cut at the midpoint between two
//! adjacent observed values along one dimension. Every candidate is scored by
//! its Dirichlet-multinomial marginal likelihood times a depth-dependent
//! prior, the most probable one is taken, and the procedure recurses until
//! the whole-region option wins. There is no pruning pass.

pub mod data;
pub mod eval;
pub mod partition;
pub mod special;
pub mod tree;
