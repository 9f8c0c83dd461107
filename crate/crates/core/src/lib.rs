//! Bilateral negotiation without deadlines.
//!
//! The crate models bargaining as an alternating-offers extensive game and
//! provides a Monte Carlo tree search bidding strategy that plans against
//! learned models of the opponent: a Gaussian process forecast of its next
//! bid, a Bayesian estimate of its utility function and a simple model of
//! its acceptance rule. Three deadline-free baseline agents and a seeded
//! tournament runner complete the package.

pub mod agents;
pub mod domains;
pub mod gpr;
pub mod mcts;
pub mod opponent;
pub mod protocol;
pub mod tournament;
