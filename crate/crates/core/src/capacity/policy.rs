//! Path-dependent programming policies.
//!
//! A policy for `t` writes under budget `ℓ` picks a programming probability
//! `p` for the first write and then continues with one sub-policy for the
//! cells that were programmed (now facing `(t−1, ℓ−1)`) and another for the
//! cells that were not (facing `(t−1, ℓ)`). Its rates satisfy
//! `R₁ = h(p)` and `R_j = p·R′_{j−1} + (1−p)·R″_{j−1}`.

use super::{h, CapacityError, EiaProfile, RateTuple};
use crate::numeric::binomial_prefix_sum;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyTree {
    /// A terminal sub-problem: either `budget ≥ writes` (every remaining
    /// write is free) or `budget = 0` (nothing can change any more).
    Leaf { writes: usize, budget: usize },
    Node {
        writes: usize,
        budget: usize,
        p: f64,
        programmed: Box<PolicyTree>,
        untouched: Box<PolicyTree>,
    },
}

impl PolicyTree {
    pub fn leaf(writes: usize, budget: usize) -> Result<Self, CapacityError> {
        let tree = PolicyTree::Leaf { writes, budget };
        tree.validate()?;
        Ok(tree)
    }

    pub fn node(
        p: f64,
        programmed: PolicyTree,
        untouched: PolicyTree,
    ) -> Result<Self, CapacityError> {
        let (writes, budget) = untouched.shape();
        let tree = PolicyTree::Node {
            writes: writes + 1,
            budget,
            p,
            programmed: Box::new(programmed),
            untouched: Box::new(untouched),
        };
        tree.validate()?;
        Ok(tree)
    }

    /// `(writes, budget)` of this sub-problem.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            PolicyTree::Leaf { writes, budget } | PolicyTree::Node { writes, budget, .. } => {
                (writes, budget)
            }
        }
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        match self {
            PolicyTree::Leaf { writes, budget } => {
                if *budget == 0 || budget >= writes {
                    Ok(())
                } else {
                    Err(CapacityError::MalformedTree(format!(
                        "leaf ({writes}, {budget}) is neither free nor exhausted"
                    )))
                }
            }
            PolicyTree::Node { writes, budget, p, programmed, untouched } => {
                if *writes == 0 || *budget == 0 {
                    return Err(CapacityError::MalformedTree(format!(
                        "internal node ({writes}, {budget}) has nothing to decide"
                    )));
                }
                if !(0.0..=0.5).contains(p) {
                    return Err(CapacityError::MalformedTree(format!(
                        "node ({writes}, {budget}) has p = {p} outside [0, 0.5]"
                    )));
                }
                if programmed.shape() != (writes - 1, budget - 1)
                    || untouched.shape() != (writes - 1, *budget)
                {
                    return Err(CapacityError::MalformedTree(format!(
                        "children of ({writes}, {budget}) have shapes {:?} and {:?}",
                        programmed.shape(),
                        untouched.shape()
                    )));
                }
                programmed.validate()?;
                untouched.validate()
            }
        }
    }

    /// The tree obtained from a write-indexed profile: a node reached after
    /// `d` writes with `i` changes so far uses `p_{d+1,i}`.
    pub fn from_eia_profile(profile: &EiaProfile) -> PolicyTree {
        fn build(profile: &EiaProfile, depth: usize, changes: usize) -> PolicyTree {
            let writes = profile.t() - depth;
            let budget = profile.ell() - changes;
            if writes == 0 || budget == 0 {
                return PolicyTree::Leaf { writes, budget };
            }
            PolicyTree::Node {
                writes,
                budget,
                p: profile.p(depth + 1, changes),
                programmed: Box::new(build(profile, depth + 1, changes + 1)),
                untouched: Box::new(build(profile, depth + 1, changes)),
            }
        }
        build(profile, 0, 0)
    }

    /// The sum-rate maximizing policy, with `p = X_{t−1,ℓ−1} / X_{t,ℓ}` at
    /// every internal node and free leaves as soon as `ℓ ≥ t`.
    pub fn optimal(writes: usize, budget: usize) -> PolicyTree {
        if budget == 0 || budget >= writes {
            return PolicyTree::Leaf { writes, budget };
        }
        let num = binomial_prefix_sum(writes as u64 - 1, budget as u64 - 1);
        let den = binomial_prefix_sum(writes as u64, budget as u64);
        let p = match (num, den) {
            (Some(a), Some(b)) => a as f64 / b as f64,
            _ => 0.5,
        };
        PolicyTree::Node {
            writes,
            budget,
            p,
            programmed: Box::new(PolicyTree::optimal(writes - 1, budget - 1)),
            untouched: Box::new(PolicyTree::optimal(writes - 1, budget)),
        }
    }

    fn rates_unchecked(&self) -> Vec<f64> {
        match self {
            PolicyTree::Leaf { writes, budget } => {
                let r = if *budget == 0 { 0.0 } else { 1.0 };
                vec![r; *writes]
            }
            PolicyTree::Node { p, programmed, untouched, .. } => {
                let a = programmed.rates_unchecked();
                let b = untouched.rates_unchecked();
                let mut out = Vec::with_capacity(a.len() + 1);
                out.push(h(*p));
                out.extend(a.iter().zip(&b).map(|(x, y)| p * x + (1.0 - p) * y));
                out
            }
        }
    }
}

pub fn policy_tree_rates(tree: &PolicyTree) -> Result<RateTuple, CapacityError> {
    tree.validate()?;
    Ok(RateTuple::new(tree.rates_unchecked()))
}
