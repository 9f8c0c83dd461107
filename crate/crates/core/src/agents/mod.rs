//! Negotiating agents behind a common interface.
//!
//! Agents are built from their own preference profile and a seed only; the
//! opponent's profile never reaches them.

mod mcts_agent;
mod nice_tit_for_tat;
mod random_walker;
mod tit_for_tat;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::domains::{Bid, Domain, PreferenceProfile};
use crate::gpr::KernelFamily;
use crate::opponent::ModelError;
use crate::protocol::{History, Message, PlayerId};

pub use mcts_agent::{MctsAgent, MctsSettings};
pub use nice_tit_for_tat::{concession_fraction, pick_candidate, NiceTitForTat, NtftSettings};
pub use random_walker::RandomWalker;
pub use tit_for_tat::{TftSettings, TitForTat};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("unknown agent `{0}` (expected mcts, random-walker, tit-for-tat or nice-tit-for-tat)")]
    UnknownAgent(String),
    #[error("unknown setting `{0}`")]
    UnknownSetting(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadSetting { key: String, value: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Search statistics of one MCTS move.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveStats {
    pub root_visits: u32,
    pub tree_size: usize,
    pub best_mean: f64,
    pub elapsed_ms: f64,
}

pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Chooses the next message; called only when it is `me`'s turn.
    fn respond(&mut self, history: &History, me: PlayerId) -> Result<Message, AgentError>;

    fn last_move_stats(&self) -> Option<MoveStats> {
        None
    }

    /// Top-`k` opponent-utility hypotheses, for agents that learn them.
    fn posterior_dump(&self, _domain: &Domain, _k: usize) -> Option<serde_json::Value> {
        None
    }
}

/// Shared acceptance rule: take the incoming offer when it is worth at
/// least as much as the bid we were about to make.
pub fn acceptance_decision(incoming: f64, planned: f64) -> bool {
    incoming >= planned
}

/// Accepts `incoming` or proposes `planned` by [`acceptance_decision`].
pub(crate) fn accept_or_propose(profile: &PreferenceProfile, incoming: Option<&Bid>, planned: Bid) -> Message {
    match incoming {
        Some(b) if acceptance_decision(profile.eval(b), profile.eval(&planned)) => Message::accept(),
        _ => Message::propose(planned),
    }
}

/// Highest own-utility bid among `n` uniform samples (first wins ties).
pub fn best_of_samples<R: Rng + ?Sized>(domain: &Domain, profile: &PreferenceProfile, n: usize, rng: &mut R) -> Bid {
    let mut best = domain.sample_bid(rng);
    let mut best_u = profile.eval(&best);
    for _ in 1..n {
        let b = domain.sample_bid(rng);
        let u = profile.eval(&b);
        if u > best_u {
            best = b;
            best_u = u;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Mcts,
    RandomWalker,
    TitForTat,
    NiceTitForTat,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Mcts,
        AgentKind::RandomWalker,
        AgentKind::TitForTat,
        AgentKind::NiceTitForTat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Mcts => "mcts",
            AgentKind::RandomWalker => "random-walker",
            AgentKind::TitForTat => "tit-for-tat",
            AgentKind::NiceTitForTat => "nice-tit-for-tat",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| AgentError::UnknownAgent(s.to_string()))
    }
}

/// Per-agent configuration tables, addressed as `table.key`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentSettings {
    pub mcts: MctsSettings,
    pub tft: TftSettings,
    pub ntft: NtftSettings,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, AgentError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| AgentError::BadSetting {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl AgentSettings {
    pub const KEYS: [&'static str; 14] = [
        "mcts.simulations",
        "mcts.alpha",
        "mcts.c",
        "mcts.max-depth",
        "mcts.prune-retries",
        "mcts.horizon",
        "mcts.kernel",
        "mcts.hypotheses",
        "mcts.fallback-samples",
        "tft.samples",
        "ntft.samples",
        "ntft.epsilon",
        "ntft.hypotheses",
        "ntft.nash-samples",
    ];

    /// Sets one value; on error the settings are left unchanged.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), AgentError> {
        let mut next = self.clone();
        next.assign(key, value)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    fn assign(&mut self, key: &str, value: &str) -> Result<(), AgentError> {
        let m = &mut self.mcts;
        match key {
            "mcts.simulations" => m.search.simulations = parse(key, value)?,
            "mcts.alpha" => m.search.alpha = parse(key, value)?,
            "mcts.c" => m.search.c = parse(key, value)?,
            "mcts.max-depth" => m.search.max_depth = parse(key, value)?,
            "mcts.prune-retries" => m.search.prune_retries = parse(key, value)?,
            "mcts.horizon" => m.horizon = parse(key, value)?,
            "mcts.kernel" => m.opponent.strategy.kernel = parse::<KernelFamily>(key, value)?,
            "mcts.hypotheses" => m.opponent.learner.hypotheses = parse(key, value)?,
            "mcts.fallback-samples" => m.fallback_samples = parse(key, value)?,
            "tft.samples" => self.tft.samples = parse(key, value)?,
            "ntft.samples" => self.ntft.samples = parse(key, value)?,
            "ntft.epsilon" => self.ntft.epsilon = parse(key, value)?,
            "ntft.hypotheses" => self.ntft.learner.hypotheses = parse(key, value)?,
            "ntft.nash-samples" => self.ntft.nash_samples = parse(key, value)?,
            _ => return Err(AgentError::UnknownSetting(key.to_string())),
        }
        Ok(())
    }

    /// `key=value` form of [`AgentSettings::set`].
    pub fn apply(&mut self, assignment: &str) -> Result<(), AgentError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| AgentError::BadSetting {
            key: assignment.to_string(),
            value: String::new(),
            reason: "expected key=value".into(),
        })?;
        self.set(k.trim(), v.trim())
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |key: &str, value: String, reason: &str| AgentError::BadSetting {
            key: key.into(),
            value,
            reason: reason.into(),
        };
        let s = &self.mcts.search;
        if let Err(e) = s.validate() {
            let (key, value) = if !(s.alpha > 0.0 && s.alpha <= 1.0) {
                ("mcts.alpha", s.alpha.to_string())
            } else if !(s.c.is_finite() && s.c > 0.0) {
                ("mcts.c", s.c.to_string())
            } else if s.simulations == 0 {
                ("mcts.simulations", "0".into())
            } else {
                ("mcts.max-depth", s.max_depth.to_string())
            };
            return Err(bad(key, value, &e.to_string()));
        }
        for (key, n) in [
            ("mcts.hypotheses", self.mcts.opponent.learner.hypotheses),
            ("mcts.fallback-samples", self.mcts.fallback_samples),
            ("tft.samples", self.tft.samples),
            ("ntft.samples", self.ntft.samples),
            ("ntft.hypotheses", self.ntft.learner.hypotheses),
            ("ntft.nash-samples", self.ntft.nash_samples),
        ] {
            if n == 0 {
                return Err(bad(key, "0".into(), "must be at least 1"));
            }
        }
        if !(self.ntft.epsilon >= 0.0) {
            return Err(bad("ntft.epsilon", self.ntft.epsilon.to_string(), "must be non-negative"));
        }
        Ok(())
    }
}

/// Builds an agent from its own side of the negotiation only.
pub fn build_agent(
    kind: AgentKind,
    settings: &AgentSettings,
    domain: &Domain,
    own_profile: &PreferenceProfile,
    seed: u64,
) -> Box<dyn Agent> {
    let (domain, profile) = (domain.clone(), own_profile.clone());
    match kind {
        AgentKind::Mcts => Box::new(MctsAgent::new(domain, profile, settings.mcts.clone(), seed)),
        AgentKind::RandomWalker => Box::new(RandomWalker::new(domain, profile, seed)),
        AgentKind::TitForTat => Box::new(TitForTat::new(domain, profile, settings.tft.clone(), seed)),
        AgentKind::NiceTitForTat => {
            Box::new(NiceTitForTat::new(domain, profile, settings.ntft.clone(), seed))
        }
    }
}

/// Opponent proposals, oldest first, from `me`'s point of view.
pub(crate) fn opponent_bids(history: &History, me: PlayerId) -> Vec<&Bid> {
    history.proposals_by(me.other()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_examples() {
        assert!(acceptance_decision(0.8, 0.7));
        assert!(!acceptance_decision(0.6, 0.7));
        assert!(acceptance_decision(0.7, 0.7));
    }

    #[test]
    fn agent_names_round_trip() {
        for k in AgentKind::ALL {
            assert_eq!(k.name().parse::<AgentKind>().unwrap(), k);
        }
        assert!(matches!("boulware".parse::<AgentKind>(), Err(AgentError::UnknownAgent(_))));
    }

    #[test]
    fn namespaced_settings() {
        let mut s = AgentSettings::default();
        s.apply("mcts.simulations=500").unwrap();
        s.set("tft.samples", "20").unwrap();
        s.set("mcts.kernel", "RBF").unwrap();
        assert_eq!(s.mcts.search.simulations, 500);
        assert_eq!(s.tft.samples, 20);
        assert_eq!(s.mcts.opponent.strategy.kernel, KernelFamily::Rbf);
        assert!(matches!(s.set("mcts.speed", "1"), Err(AgentError::UnknownSetting(_))));
        assert!(matches!(s.set("mcts.alpha", "x"), Err(AgentError::BadSetting { .. })));
        assert!(s.set("mcts.alpha", "2").is_err());
        assert!(s.set("tft.samples", "0").is_err());
        for key in AgentSettings::KEYS {
            assert!(!matches!(AgentSettings::default().set(key, "?"), Err(AgentError::UnknownSetting(_))));
        }
    }
}
