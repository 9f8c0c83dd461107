use rand::rngs::StdRng;
use rand::SeedableRng;

use super::{accept_or_propose, best_of_samples, opponent_bids, Agent, AgentError};
use crate::domains::{Bid, Domain, PreferenceProfile};
use crate::opponent::{HypothesisSet, LearnerConfig};
use crate::protocol::{History, Message, PlayerId};

#[derive(Debug, Clone, PartialEq)]
pub struct NtftSettings {
    /// Candidate bids drawn per move.
    pub samples: usize,
    /// Bids drawn when estimating the Nash point.
    pub nash_samples: usize,
    /// Own-utility band around the target within which candidates tie.
    pub epsilon: f64,
    pub learner: LearnerConfig,
}

impl Default for NtftSettings {
    fn default() -> Self {
        Self {
            samples: 10_000,
            nash_samples: 10_000,
            epsilon: 0.01,
            learner: LearnerConfig::default(),
        }
    }
}

/// Share of the way from the opponent's first bid to the Nash point that
/// its latest bid covers, measured in own utility and clamped to `[0, 1]`.
/// An opponent whose first bid is already as good as the Nash point counts
/// as fully conceded.
pub fn concession_fraction(u_first: f64, u_last: f64, u_nash: f64) -> f64 {
    let span = u_nash - u_first;
    if span <= 1e-12 {
        return 1.0;
    }
    ((u_last - u_first) / span).clamp(0.0, 1.0)
}

/// Index of the candidate whose own utility is within `epsilon` of `target`
/// and whose estimated opponent utility is highest. Candidates are
/// `(own, estimated opponent)` pairs; if none is within the band, the one
/// closest to the target is returned. Earlier candidates win ties.
pub fn pick_candidate(candidates: &[(f64, f64)], target: f64, epsilon: f64) -> Option<usize> {
    let in_band = candidates
        .iter()
        .enumerate()
        .filter(|(_, (u, _))| (u - target).abs() <= epsilon)
        .fold(None::<(usize, f64)>, |best, (i, &(_, est))| match best {
            Some((_, e)) if e >= est => best,
            _ => Some((i, est)),
        });
    if let Some((i, _)) = in_band {
        return Some(i);
    }
    candidates
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, &(u, _))| {
            let gap = (u - target).abs();
            match best {
                Some((_, g)) if g <= gap => best,
                _ => Some((i, gap)),
            }
        })
        .map(|(i, _)| i)
}

/// Tit-for-tat relative to an estimated Nash point.
///
/// The opponent's utility function is learned with the Bayesian hypothesis
/// model. Each move the Nash point is estimated over random bids; the own
/// target moves from the opening utility toward the Nash utility by the
/// fraction the opponent has conceded, and the candidate best for the
/// opponent near that target is planned.
pub struct NiceTitForTat {
    domain: Domain,
    profile: PreferenceProfile,
    cfg: NtftSettings,
    rng: StdRng,
    model: HypothesisSet,
    observed: usize,
    opening: Option<f64>,
    last_target: Option<f64>,
}

impl NiceTitForTat {
    pub fn new(domain: Domain, profile: PreferenceProfile, cfg: NtftSettings, seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = HypothesisSet::generate(&domain, cfg.learner.clone(), &mut rng);
        Self {
            domain,
            profile,
            cfg,
            rng,
            model,
            observed: 0,
            opening: None,
            last_target: None,
        }
    }

    pub fn model(&self) -> &HypothesisSet {
        &self.model
    }

    pub fn last_target(&self) -> Option<f64> {
        self.last_target
    }

    fn nash_point(&mut self) -> Bid {
        let table = self.model.utility_table(&self.domain);
        let mut best = self.domain.sample_bid(&mut self.rng);
        let mut best_p = self.profile.eval(&best) * table.utility(&best);
        for _ in 1..self.cfg.nash_samples {
            let b = self.domain.sample_bid(&mut self.rng);
            let p = self.profile.eval(&b) * table.utility(&b);
            if p > best_p {
                best = b;
                best_p = p;
            }
        }
        best
    }

    fn opening_utility(&mut self) -> f64 {
        if self.opening.is_none() {
            let b = best_of_samples(&self.domain, &self.profile, self.cfg.samples, &mut self.rng);
            self.opening = Some(self.profile.eval(&b));
        }
        self.opening.expect("set above")
    }
}

impl Agent for NiceTitForTat {
    fn name(&self) -> &str {
        "nice-tit-for-tat"
    }

    fn respond(&mut self, history: &History, me: PlayerId) -> Result<Message, AgentError> {
        let received = opponent_bids(history, me);
        for bid in &received[self.observed..] {
            self.model.update(self.observed as u64, bid);
            self.observed += 1;
        }
        let planned = match (received.first(), received.last()) {
            (Some(first), Some(last)) => {
                let opening = self.opening_utility();
                let nash = self.nash_point();
                let u_nash = self.profile.eval(&nash);
                let fraction =
                    concession_fraction(self.profile.eval(first), self.profile.eval(last), u_nash);
                let target = opening + fraction * (u_nash - opening);
                self.last_target = Some(target);
                let table = self.model.utility_table(&self.domain);
                let bids: Vec<Bid> =
                    (0..self.cfg.samples).map(|_| self.domain.sample_bid(&mut self.rng)).collect();
                let scored: Vec<(f64, f64)> =
                    bids.iter().map(|b| (self.profile.eval(b), table.utility(b))).collect();
                let i = pick_candidate(&scored, target, self.cfg.epsilon).expect("samples >= 1");
                bids[i].clone()
            }
            _ => {
                let b = best_of_samples(&self.domain, &self.profile, self.cfg.samples, &mut self.rng);
                self.opening = Some(self.profile.eval(&b));
                b
            }
        };
        Ok(accept_or_propose(&self.profile, history.last_proposal(), planned))
    }

    fn posterior_dump(&self, domain: &Domain, k: usize) -> Option<serde_json::Value> {
        Some(self.model.dump_top(domain, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::generate_benchmark_domain;
    use crate::protocol::SpeechAct;

    #[test]
    fn fraction_endpoints() {
        assert_eq!(concession_fraction(0.2, 0.2, 0.7), 0.0);
        assert_eq!(concession_fraction(0.2, 0.7, 0.7), 1.0);
        assert!((concession_fraction(0.2, 0.45, 0.7) - 0.5).abs() < 1e-12);
        assert_eq!(concession_fraction(0.2, 0.9, 0.7), 1.0);
        assert_eq!(concession_fraction(0.2, 0.1, 0.7), 0.0);
        assert_eq!(concession_fraction(0.8, 0.1, 0.7), 1.0);
    }

    #[test]
    fn candidate_maximizes_estimate_within_band() {
        let c = [(0.80, 0.9), (0.70, 0.3), (0.705, 0.6), (0.695, 0.5), (0.72, 0.99)];
        assert_eq!(pick_candidate(&c, 0.70, 0.01), Some(2));
        // Nothing within the band: closest own utility.
        assert_eq!(pick_candidate(&c, 0.77, 0.01), Some(0));
        assert_eq!(pick_candidate(&[], 0.5, 0.01), None);
        // Direct check against the definition on a random candidate set.
        let mut rng = StdRng::seed_from_u64(3);
        use rand::Rng;
        let c: Vec<(f64, f64)> = (0..500).map(|_| (rng.gen(), rng.gen())).collect();
        let i = pick_candidate(&c, 0.5, 0.01).unwrap();
        assert!((c[i].0 - 0.5).abs() <= 0.01);
        for &(u, e) in &c {
            if (u - 0.5).abs() <= 0.01 {
                assert!(e <= c[i].1);
            }
        }
    }

    #[test]
    fn zero_progress_targets_opening_utility() {
        let g = generate_benchmark_domain(4, 10);
        let (d, p) = (g.spec.domain().clone(), g.spec.profiles()[0].clone());
        let cfg = NtftSettings { learner: LearnerConfig { hypotheses: 50, ..Default::default() }, ..Default::default() };
        let mut ntft = NiceTitForTat::new(d.clone(), p.clone(), cfg, 1);
        let mut h = History::new();
        let first = ntft.respond(&h, PlayerId::P1).unwrap();
        assert_eq!(first.act(), SpeechAct::Propose);
        let opening = p.eval(first.bid().unwrap());
        assert!(opening > 0.5, "{opening}");
        h.push(first).unwrap();
        // Opponent repeats a poor bid twice: no progress.
        let poor = g.maximizers[1].clone();
        h.push(Message::propose(poor.clone())).unwrap();
        let m = ntft.respond(&h, PlayerId::P1).unwrap();
        assert!((ntft.last_target().unwrap() - opening).abs() < 1e-12);
        h.push(m).unwrap();
        h.push(Message::propose(poor)).unwrap();
        ntft.respond(&h, PlayerId::P1).unwrap();
        assert!((ntft.last_target().unwrap() - opening).abs() < 1e-12);
    }
}
