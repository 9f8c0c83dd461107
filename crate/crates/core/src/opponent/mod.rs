//! Opponent modelling: bidding strategy, preference profile and acceptance
//! strategy.

mod hypothesis;
mod strategy;

use rand::rngs::StdRng;
use rand::SeedableRng;
use thiserror::Error;

use crate::domains::{Bid, Domain, Issue};
use crate::gpr::{GprError, KernelFamily};

pub use hypothesis::{
    HypothesisSet, LearnerConfig, PartialUtility, Shape, TriangularFn, UtilityHypothesis,
    UtilityTable, PEAK_POSITIONS,
};
pub use strategy::{sample_forecast, IssueForecast, StrategyConfig, StrategyModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("turn {got} is not after the last observed turn {last}")]
    OutOfOrder { last: u64, got: u64 },
    #[error("bid has {got} values, model expects {expected}")]
    BidArity { expected: usize, got: usize },
    #[error("bid value for `{0}` is outside the domain")]
    InvalidBid(String),
    #[error("no opponent bid observed yet")]
    NoObservations,
    #[error("value {value} outside [{a}, {b}]")]
    OutsideDomain { value: f64, a: f64, b: f64 },
    #[error("invalid triangular function: {0}")]
    InvalidTriangular(String),
    #[error(transparent)]
    Gpr(#[from] GprError),
}

/// What the search needs to know about the opponent.
pub trait OpponentModel {
    /// Estimated opponent utility of `bid`.
    fn estimated_utility(&self, bid: &Bid) -> f64;

    /// Draws the opponent's proposal `offset` opponent turns from now
    /// (`0` is its next bid).
    fn sample_bid(&self, offset: usize, rng: &mut StdRng) -> Bid;
}

/// The modelled opponent accepts `incoming` when it is worth at least as
/// much to it as the bid it plans to make.
pub fn modeled_accepts<M: OpponentModel + ?Sized>(model: &M, incoming: &Bid, planned: &Bid) -> bool {
    model.estimated_utility(incoming) >= model.estimated_utility(planned)
}

/// Hyperparameters shared by the learned opponent models.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpponentConfig {
    pub learner: LearnerConfig,
    pub strategy: StrategyConfig,
}

impl OpponentConfig {
    pub fn with_kernel(mut self, kernel: KernelFamily) -> Self {
        self.strategy.kernel = kernel;
        self
    }
}

/// Both learned submodels, fed with every opponent bid in order.
#[derive(Debug, Clone)]
pub struct LearnedOpponent {
    strategy: StrategyModel,
    preferences: HypothesisSet,
    bids_seen: u64,
}

impl LearnedOpponent {
    pub fn new(domain: &Domain, cfg: &OpponentConfig, rng: &mut StdRng) -> Self {
        Self {
            strategy: StrategyModel::new(domain, cfg.strategy.clone()),
            preferences: HypothesisSet::generate(domain, cfg.learner.clone(), rng),
            bids_seen: 0,
        }
    }

    /// Records the opponent's next bid. Its first bid is opponent turn 1 for
    /// the strategy model and concession step 0 for the preference model.
    pub fn observe(&mut self, bid: &Bid) -> Result<(), ModelError> {
        self.strategy.observe(self.bids_seen + 1, bid)?;
        self.preferences.update(self.bids_seen, bid);
        self.bids_seen += 1;
        Ok(())
    }

    pub fn bids_seen(&self) -> u64 {
        self.bids_seen
    }

    pub fn strategy(&self) -> &StrategyModel {
        &self.strategy
    }

    pub fn preferences(&self) -> &HypothesisSet {
        &self.preferences
    }

    /// Read-only view for one search, with forecasts for the next
    /// `horizon` opponent turns.
    pub fn snapshot(&self, domain: &Domain, horizon: usize) -> Result<ModelSnapshot, ModelError> {
        let forecasts = if self.bids_seen == 0 {
            Vec::new()
        } else {
            (0..horizon.max(1) as u64)
                .map(|k| self.strategy.forecast(self.bids_seen + 1 + k))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(ModelSnapshot {
            issues: domain.issues().to_vec(),
            domain: domain.clone(),
            table: self.preferences.utility_table(domain),
            forecasts,
        })
    }
}

/// Frozen opponent model used during a search. Forecasts past the horizon
/// reuse the last one; with no observed bids, proposals are uniform.
#[derive(Debug, Clone)]
pub struct ModelSnapshot {
    issues: Vec<Issue>,
    domain: Domain,
    table: UtilityTable,
    forecasts: Vec<Vec<IssueForecast>>,
}

impl ModelSnapshot {
    pub fn horizon(&self) -> usize {
        self.forecasts.len()
    }
}

impl OpponentModel for ModelSnapshot {
    fn estimated_utility(&self, bid: &Bid) -> f64 {
        self.table.utility(bid)
    }

    fn sample_bid(&self, offset: usize, rng: &mut StdRng) -> Bid {
        match self.forecasts.len() {
            0 => self.domain.sample_bid(rng),
            n => sample_forecast(&self.issues, &self.forecasts[offset.min(n - 1)], rng),
        }
    }
}

/// Seeds a child stream from a parent seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded_rng(seed: u64, stream: u64) -> StdRng {
    StdRng::seed_from_u64(derive_seed(seed, stream))
}
