use rand::rngs::StdRng;
use rand::SeedableRng;

use super::{accept_or_propose, Agent, AgentError};
use crate::domains::{Domain, PreferenceProfile};
use crate::protocol::{History, Message, PlayerId};

/// Plans a uniform random bid every turn and accepts any offer worth at
/// least as much.
pub struct RandomWalker {
    domain: Domain,
    profile: PreferenceProfile,
    rng: StdRng,
}

impl RandomWalker {
    pub fn new(domain: Domain, profile: PreferenceProfile, seed: u64) -> Self {
        Self { domain, profile, rng: StdRng::seed_from_u64(seed) }
    }
}

impl Agent for RandomWalker {
    fn name(&self) -> &str {
        "random-walker"
    }

    fn respond(&mut self, history: &History, _me: PlayerId) -> Result<Message, AgentError> {
        let planned = self.domain.sample_bid(&mut self.rng);
        Ok(accept_or_propose(&self.profile, history.last_proposal(), planned))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{generate_benchmark_domain, Bid, Clause, Constraint, Issue, Value};
    use crate::protocol::SpeechAct;

    #[test]
    fn opens_with_a_proposal_and_takes_perfect_offers() {
        let g = generate_benchmark_domain(1, 10);
        let p = g.spec.profiles()[0].clone();
        let mut rw = RandomWalker::new(g.spec.domain().clone(), p, 4);
        for _ in 0..20 {
            assert_eq!(rw.respond(&History::new(), PlayerId::P1).unwrap().act(), SpeechAct::Propose);
        }
        let mut h = History::new();
        h.push(Message::propose(g.maximizers[0].clone())).unwrap();
        for _ in 0..20 {
            assert_eq!(rw.respond(&h, PlayerId::P2).unwrap().act(), SpeechAct::Accept);
        }
    }

    #[test]
    fn proposals_are_uniform_per_issue() {
        let d = Domain::new(vec![
            Issue::discrete("n", 1.0, 5.0, 1.0).unwrap(),
            Issue::categorical("c", ["a", "b", "c", "d"]).unwrap(),
        ])
        .unwrap();
        // Utility 0 everywhere, so no offer other than a 0 one ever matters.
        let never = Constraint { clauses: vec![Clause::Range { issue: 0, min: 1.0, max: 1.0 }], weight: 1.0 };
        let p = PreferenceProfile::new(&d, vec![never], 1.0, 0.0).unwrap();
        let mut rw = RandomWalker::new(d.clone(), p, 9);
        let mut counts = [vec![0usize; 5], vec![0usize; 4]];
        for _ in 0..1000 {
            let m = rw.respond(&History::new(), PlayerId::P1).unwrap();
            let b: &Bid = m.bid().unwrap();
            counts[0][(b.values()[0].as_f64() - 1.0) as usize] += 1;
            match b.values()[1] {
                Value::Category(i) => counts[1][i] += 1,
                _ => unreachable!(),
            }
        }
        // Chi-square critical values at p = 0.01 for 4 and 3 degrees of freedom.
        for (c, crit) in counts.iter().zip([13.277, 11.345]) {
            let e = 1000.0 / c.len() as f64;
            let chi2: f64 = c.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
            assert!(chi2 < crit, "chi2 {chi2} counts {c:?}");
        }
    }
}
