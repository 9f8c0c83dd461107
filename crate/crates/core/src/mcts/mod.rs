//! Monte Carlo tree search over bids with progressive widening.
//!
//! Each search builds a fresh tree rooted at the current state. Own-move
//! nodes are expanded with uniformly random bids, rejecting bids worth less
//! to us than the best offer already received. Opponent-move nodes are
//! expanded from the opponent model: it first decides whether to accept the
//! bid above it, otherwise it counter-proposes a forecast bid. Rollouts
//! alternate forecast opponent bids and uniform own bids until one side's
//! acceptance rule fires or the depth cap is reached. Both players'
//! utilities are backpropagated; selection at a node reads the component of
//! the player choosing there.

mod search;
mod tree;

use thiserror::Error;

use crate::domains::{Bid, PreferenceProfile};

pub use search::{search, Search, SearchState};
pub use tree::{Move, Node, NodeId, Side, Tree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("every candidate own bid fell below the best received offer")]
    AllPruned,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Progressive widening exponent.
    pub alpha: f64,
    /// Exploration constant.
    pub c: f64,
    pub simulations: usize,
    /// Cap on messages per rollout; reaching it scores reserve utilities.
    pub max_depth: usize,
    pub rollout_seed: u64,
    /// Resampling budget when a candidate own bid is pruned.
    pub prune_retries: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            alpha: 0.489,
            c: 0.5,
            simulations: 2_000,
            max_depth: 20,
            rollout_seed: 0,
            prune_retries: 50,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(SearchError::InvalidConfig(format!("alpha {} not in (0, 1]", self.alpha)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(SearchError::InvalidConfig(format!("C {} must be positive", self.c)));
        }
        if self.simulations == 0 || self.max_depth == 0 {
            return Err(SearchError::InvalidConfig(
                "simulations and max_depth must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_bid: Bid,
    pub root_visits: u32,
    pub tree_size: usize,
    /// Mean own utility of the chosen root child.
    pub value_estimate: f64,
}

/// Progressive widening test: a parent simulated `n_p` times with `n_c`
/// children gets a new child iff `n_p^α ≥ n_c`.
pub fn should_expand(n_p: u64, n_c: usize, alpha: f64) -> bool {
    (n_p as f64).powf(alpha) >= n_c as f64
}

/// `s_i / (n_i + 1) + C · n^α · sqrt(ln n / (n_i + 1))`, with `n` the total
/// simulation count of the tree.
pub fn selection_score(s_i: f64, n_i: u32, n: u32, alpha: f64, c: f64) -> f64 {
    let denom = n_i as f64 + 1.0;
    let n = n.max(1) as f64;
    s_i / denom + c * n.powf(alpha) * (n.ln() / denom).sqrt()
}

/// Whether a candidate own bid survives pruning against the best received
/// offer (kept unless strictly worse).
pub fn pruned_expand(candidate: &Bid, own: &PreferenceProfile, best_received_utility: f64) -> bool {
    own.eval(candidate) >= best_received_utility
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{Clause, Constraint, Domain, Issue, Value};

    #[test]
    fn widening_examples() {
        assert!(should_expand(1, 0, 0.489));
        assert!(should_expand(10, 3, 0.489));
        assert!(!should_expand(10, 4, 0.489));
    }

    #[test]
    fn selection_examples() {
        assert_eq!(selection_score(0.0, 0, 1, 0.489, 0.5), 0.0);
        // Independent evaluation of the same expression.
        let expected = 3.0 / 6.0 + 0.5 * 100f64.powf(0.489) * (100f64.ln() / 6.0).sqrt();
        assert!((selection_score(3.0, 5, 100, 0.489, 0.5) - expected).abs() < 1e-12);
        assert!((expected - 4.664_062_327).abs() < 1e-8, "{expected}");
        assert!(selection_score(1.0, 0, 10, 0.489, 0.5) > selection_score(1.0, 1, 10, 0.489, 0.5));
    }

    #[test]
    fn pruning_boundary() {
        let d = Domain::new(vec![Issue::discrete("x", 1.0, 100.0, 1.0).unwrap()]).unwrap();
        // u(x) = number of satisfied unit constraints x >= k, k = 1..100, over 100.
        let constraints = (1..=100)
            .map(|k| Constraint {
                clauses: vec![Clause::Range { issue: 0, min: k as f64, max: 100.0 }],
                weight: 1.0,
            })
            .collect();
        let p = PreferenceProfile::new(&d, constraints, 100.0, 0.0).unwrap();
        let bid = |x: f64| Bid::new(vec![Value::Number(x)]);
        assert!((p.eval(&bid(55.0)) - 0.55).abs() < 1e-12);
        assert!(!pruned_expand(&bid(55.0), &p, 0.6));
        assert!(pruned_expand(&bid(55.0), &p, 0.0));
        assert!(pruned_expand(&bid(60.0), &p, p.eval(&bid(60.0))));
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        assert!(SearchConfig { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(SearchConfig { alpha: 1.5, ..Default::default() }.validate().is_err());
        assert!(SearchConfig { simulations: 0, ..Default::default() }.validate().is_err());
    }
}
