use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{accept_or_propose, best_of_samples, opponent_bids, Agent, AgentError, MoveStats};
use crate::domains::{Bid, Domain, PreferenceProfile};
use crate::mcts::{Search, SearchConfig, SearchError, SearchState};
use crate::opponent::{LearnedOpponent, OpponentConfig};
use crate::protocol::{History, Message, PlayerId};

#[derive(Debug, Clone, PartialEq)]
pub struct MctsSettings {
    pub search: SearchConfig,
    pub opponent: OpponentConfig,
    /// Opponent turns forecast per search; later turns reuse the last one.
    pub horizon: usize,
    /// Samples for the best-known-bid fallback.
    pub fallback_samples: usize,
}

impl Default for MctsSettings {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            opponent: OpponentConfig::default(),
            horizon: 32,
            fallback_samples: 10_000,
        }
    }
}

/// Plans each proposal with a fresh tree search against the learned
/// opponent model and accepts offers at least as good as the plan.
pub struct MctsAgent {
    domain: Domain,
    profile: PreferenceProfile,
    cfg: MctsSettings,
    rng: StdRng,
    opponent: LearnedOpponent,
    observed: usize,
    best_received: Option<Bid>,
    last_stats: Option<MoveStats>,
}

impl MctsAgent {
    pub fn new(domain: Domain, profile: PreferenceProfile, cfg: MctsSettings, seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let opponent = LearnedOpponent::new(&domain, &cfg.opponent, &mut rng);
        Self {
            domain,
            profile,
            cfg,
            rng,
            opponent,
            observed: 0,
            best_received: None,
            last_stats: None,
        }
    }

    pub fn opponent(&self) -> &LearnedOpponent {
        &self.opponent
    }

    fn observe(&mut self, history: &History, me: PlayerId) -> Result<(), AgentError> {
        let received = opponent_bids(history, me);
        for &bid in &received[self.observed..] {
            self.opponent.observe(bid)?;
            let better = match &self.best_received {
                Some(b) => self.profile.eval(bid) > self.profile.eval(b),
                None => true,
            };
            if better {
                self.best_received = Some(bid.clone());
            }
        }
        self.observed = received.len();
        Ok(())
    }
}

impl Agent for MctsAgent {
    fn name(&self) -> &str {
        "mcts"
    }

    fn respond(&mut self, history: &History, me: PlayerId) -> Result<Message, AgentError> {
        let start = Instant::now();
        self.observe(history, me)?;
        let snapshot = self.opponent.snapshot(&self.domain, self.cfg.horizon)?;
        let mut search_cfg = self.cfg.search.clone();
        search_cfg.rollout_seed = self.rng.gen();
        let state = SearchState {
            domain: &self.domain,
            own_profile: &self.profile,
            best_received: self.best_received.as_ref(),
        };
        let mut search = Search::new(state, &snapshot, search_cfg.clone())
            .map_err(|e| AgentError::BadSetting {
                key: "mcts".into(),
                value: format!("{search_cfg:?}"),
                reason: e.to_string(),
            })?;
        search.run(search_cfg.simulations);
        let tree = search.tree();
        let (planned, best_mean) = match search.result() {
            Ok(r) => (r.best_bid, r.value_estimate),
            Err(SearchError::AllPruned) if self.best_received.is_some() => {
                (self.best_received.clone().expect("checked"), f64::NAN)
            }
            Err(_) => (
                best_of_samples(&self.domain, &self.profile, self.cfg.fallback_samples, &mut self.rng),
                f64::NAN,
            ),
        };
        self.last_stats = Some(MoveStats {
            root_visits: tree.root().visits,
            tree_size: tree.len(),
            best_mean,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(accept_or_propose(&self.profile, history.last_proposal(), planned))
    }

    fn last_move_stats(&self) -> Option<MoveStats> {
        self.last_stats.clone()
    }

    fn posterior_dump(&self, domain: &Domain, k: usize) -> Option<serde_json::Value> {
        Some(self.opponent.preferences().dump_top(domain, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::generate_benchmark_domain;
    use crate::protocol::SpeechAct;

    /// The opening proposal against 90% of the best of 10,000 own samples.
    /// At 2,000 simulations the root holds about 41 uniform candidates and
    /// the search trades own utility for modelled acceptance, so this does
    /// not hold; run with `--ignored` to see the gap.
    #[test]
    #[ignore = "not met at 2,000 simulations per move"]
    fn opening_proposal_near_sampled_max() {
        let g = generate_benchmark_domain(8, 10);
        let (d, p) = (g.spec.domain().clone(), g.spec.profiles()[0].clone());
        let mut rng = StdRng::seed_from_u64(0);
        let sampled_max = p.eval(&best_of_samples(&d, &p, 10_000, &mut rng));
        for seed in 0..5 {
            let mut agent = MctsAgent::new(d.clone(), p.clone(), MctsSettings::default(), seed);
            let m = agent.respond(&History::new(), PlayerId::P1).unwrap();
            let u = p.eval(m.bid().unwrap());
            assert!(u >= 0.9 * sampled_max, "seed {seed}: {u} vs {sampled_max}");
        }
    }

    #[test]
    fn agent_reports_search_stats() {
        let g = generate_benchmark_domain(8, 10);
        let (d, p) = (g.spec.domain().clone(), g.spec.profiles()[0].clone());
        let mut agent = MctsAgent::new(d.clone(), p, MctsSettings::default(), 21);
        let m = agent.respond(&History::new(), PlayerId::P1).unwrap();
        assert_eq!(m.act(), SpeechAct::Propose);
        d.validate(m.bid().unwrap()).unwrap();
        let stats = agent.last_move_stats().unwrap();
        assert_eq!(stats.root_visits as usize, MctsSettings::default().search.simulations);
        assert!(stats.tree_size > 1);
    }
}
