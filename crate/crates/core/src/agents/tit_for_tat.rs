use rand::rngs::StdRng;
use rand::SeedableRng;

use super::{accept_or_propose, best_of_samples, opponent_bids, Agent, AgentError};
use crate::domains::{Bid, Domain, PreferenceProfile};
use crate::protocol::{History, Message, PlayerId};

#[derive(Debug, Clone, PartialEq)]
pub struct TftSettings {
    /// Uniform bids drawn per move.
    pub samples: usize,
}

impl Default for TftSettings {
    fn default() -> Self {
        Self { samples: 10_000 }
    }
}

/// Mirrors the opponent's last concession, measured in its own utility.
///
/// Opens with the best of `samples` random bids. Afterwards the concession
/// `u(last) - u(second to last)` of the opponent's two latest bids is
/// subtracted from the utility of its own previous proposal, and the
/// sampled bid closest to that target is planned.
pub struct TitForTat {
    domain: Domain,
    profile: PreferenceProfile,
    cfg: TftSettings,
    rng: StdRng,
    last_own: Option<Bid>,
    last_target: Option<f64>,
}

impl TitForTat {
    pub fn new(domain: Domain, profile: PreferenceProfile, cfg: TftSettings, seed: u64) -> Self {
        Self {
            domain,
            profile,
            cfg,
            rng: StdRng::seed_from_u64(seed),
            last_own: None,
            last_target: None,
        }
    }

    /// Target utility used for the latest planned bid, once reciprocating.
    pub fn last_target(&self) -> Option<f64> {
        self.last_target
    }

    fn closest_to(&mut self, target: f64) -> Bid {
        let mut best = self.domain.sample_bid(&mut self.rng);
        let mut gap = (self.profile.eval(&best) - target).abs();
        for _ in 1..self.cfg.samples {
            let b = self.domain.sample_bid(&mut self.rng);
            let g = (self.profile.eval(&b) - target).abs();
            if g < gap {
                best = b;
                gap = g;
            }
        }
        best
    }
}

impl Agent for TitForTat {
    fn name(&self) -> &str {
        "tit-for-tat"
    }

    fn respond(&mut self, history: &History, me: PlayerId) -> Result<Message, AgentError> {
        let received = opponent_bids(history, me);
        let planned = match (received.as_slice(), &self.last_own) {
            ([.., before, last], Some(own)) => {
                let concession = self.profile.eval(last) - self.profile.eval(before);
                let target = (self.profile.eval(own) - concession).clamp(0.0, 1.0);
                self.last_target = Some(target);
                self.closest_to(target)
            }
            _ => best_of_samples(&self.domain, &self.profile, self.cfg.samples, &mut self.rng),
        };
        let msg = accept_or_propose(&self.profile, history.last_proposal(), planned);
        if let Some(b) = msg.bid() {
            self.last_own = Some(b.clone());
        }
        Ok(msg)
    }
}
