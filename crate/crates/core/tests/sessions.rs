use std::collections::VecDeque;

use negotiator::agents::{build_agent, Agent, AgentError, AgentKind, AgentSettings};
use negotiator::domains::{generate_benchmark_domain, Bid, GeneratedDomain, Value};
use negotiator::protocol::{
    run_session, History, Message, PlayerId, ProtocolError, SessionOptions, SpeechAct, Terminal,
};

/// Plays a fixed list of messages, then repeats the last one.
struct Scripted {
    moves: VecDeque<Message>,
    last: Message,
}

impl Scripted {
    fn new(moves: Vec<Message>) -> Self {
        let last = moves.last().cloned().expect("at least one move");
        Self { moves: moves.into(), last }
    }
}

impl Agent for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }
    fn respond(&mut self, _: &History, _: PlayerId) -> Result<Message, AgentError> {
        Ok(self.moves.pop_front().unwrap_or_else(|| self.last.clone()))
    }
}

fn benchmark() -> GeneratedDomain {
    generate_benchmark_domain(2024, 10)
}

fn fast_settings() -> AgentSettings {
    let mut s = AgentSettings::default();
    for kv in ["mcts.simulations=200", "tft.samples=500", "ntft.samples=500", "ntft.nash-samples=500", "ntft.hypotheses=50", "mcts.hypotheses=50"] {
        s.apply(kv).unwrap();
    }
    s
}

#[test]
fn immediate_acceptance_is_one_round() {
    let g = benchmark();
    let b = g.maximizers[0].clone();
    let mut a = Scripted::new(vec![Message::propose(b.clone())]);
    let mut c = Scripted::new(vec![Message::accept()]);
    let [p1, p2] = g.spec.profiles();
    let r = run_session([&mut a, &mut c], g.spec.domain(), [p1, p2], SessionOptions::default()).unwrap();
    assert_eq!(r.terminal, Terminal::Accept);
    assert_eq!(r.rounds, 1);
    assert_eq!(r.outcome.as_ref(), Some(&b));
    assert_eq!(r.utilities, [1.0, p2.eval(&b)]);
}

#[test]
fn round_cap_ends_with_reserve_utilities() {
    let g = benchmark();
    let mut a = Scripted::new(vec![Message::propose(g.maximizers[0].clone())]);
    let mut c = Scripted::new(vec![Message::propose(g.maximizers[1].clone())]);
    let [p1, p2] = g.spec.profiles();
    let opts = SessionOptions { round_cap: 100, ..Default::default() };
    let r = run_session([&mut a, &mut c], g.spec.domain(), [p1, p2], opts).unwrap();
    assert_eq!(r.terminal, Terminal::RoundCap);
    assert_eq!(r.rounds, 100);
    assert_eq!(r.outcome, None);
    assert_eq!(r.utilities, [0.0, 0.0]);
    assert_eq!(r.history.len(), 100);
}

#[test]
fn rejection_ends_without_agreement() {
    let g = benchmark();
    let mut a = Scripted::new(vec![Message::propose(g.maximizers[0].clone())]);
    let mut c = Scripted::new(vec![Message::reject()]);
    let [p1, p2] = g.spec.profiles();
    let r = run_session([&mut a, &mut c], g.spec.domain(), [p1, p2], SessionOptions::default()).unwrap();
    assert_eq!(r.terminal, Terminal::Reject);
    assert_eq!((r.rounds, r.utilities), (1, [0.0, 0.0]));
}

#[test]
fn invalid_bid_is_attributed_to_its_author() {
    let g = benchmark();
    let mut bad = g.maximizers[1].values().to_vec();
    bad[3] = Value::Number(11.0);
    let mut a = Scripted::new(vec![Message::propose(g.maximizers[0].clone())]);
    let mut c = Scripted::new(vec![Message::propose(Bid::new(bad))]);
    let [p1, p2] = g.spec.profiles();
    let err = run_session([&mut a, &mut c], g.spec.domain(), [p1, p2], SessionOptions::default()).unwrap_err();
    match err {
        ProtocolError::InvalidBid { agent, player, .. } => {
            assert_eq!(agent, "scripted");
            assert_eq!(player, PlayerId::P2);
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn opening_accept_is_illegal() {
    let g = benchmark();
    let mut a = Scripted::new(vec![Message::accept()]);
    let mut c = Scripted::new(vec![Message::accept()]);
    let [p1, p2] = g.spec.profiles();
    let err = run_session([&mut a, &mut c], g.spec.domain(), [p1, p2], SessionOptions::default()).unwrap_err();
    assert!(matches!(err, ProtocolError::IllegalMove { player: PlayerId::P1, .. }), "{err}");
}

#[test]
fn every_pairing_alternates_and_terminates() {
    let g = benchmark();
    let d = g.spec.domain();
    let [p1, p2] = g.spec.profiles();
    let settings = fast_settings();
    for a in AgentKind::ALL {
        for b in AgentKind::ALL {
            let mut x = build_agent(a, &settings, d, p1, 1);
            let mut y = build_agent(b, &settings, d, p2, 2);
            let opts = SessionOptions { round_cap: 30, ..Default::default() };
            let r = run_session([x.as_mut(), y.as_mut()], d, [p1, p2], opts).unwrap();
            let msgs = r.history.messages();
            assert!(r.rounds <= 30, "{a} vs {b}");
            for (i, line) in r.transcript(d).iter().enumerate() {
                let player = PlayerId::of_message(i).to_string();
                assert_eq!(line.split(',').nth(1), Some(player.as_str()));
            }
            match r.terminal {
                Terminal::Accept => {
                    assert_eq!(msgs.last().unwrap().act(), SpeechAct::Accept);
                    let agreed = r.outcome.as_ref().unwrap();
                    assert_eq!(r.utilities, [p1.eval(agreed), p2.eval(agreed)]);
                }
                Terminal::RoundCap => assert_eq!(r.utilities, [0.0, 0.0]),
                Terminal::Reject => panic!("{a} vs {b}: agents never reject"),
            }
            assert!(msgs[..msgs.len() - 1].iter().all(|m| m.act() == SpeechAct::Propose));
            for m in msgs {
                if let Some(bid) = m.bid() {
                    d.validate(bid).unwrap();
                }
            }
        }
    }
}

#[test]
fn sessions_replay_identically() {
    let g = benchmark();
    let d = g.spec.domain();
    let [p1, p2] = g.spec.profiles();
    let settings = fast_settings();
    for (a, b) in [(AgentKind::Mcts, AgentKind::TitForTat), (AgentKind::NiceTitForTat, AgentKind::RandomWalker)] {
        let play = || {
            let mut x = build_agent(a, &settings, d, p1, 7);
            let mut y = build_agent(b, &settings, d, p2, 8);
            let opts = SessionOptions { round_cap: 20, ..Default::default() };
            run_session([x.as_mut(), y.as_mut()], d, [p1, p2], opts).unwrap().transcript(d)
        };
        assert_eq!(play(), play());
    }
}

/// An agent only ever sees its own profile; swapping the opponent's profile
/// cannot change its moves.
#[test]
fn opponent_profile_does_not_reach_the_agent() {
    let g = benchmark();
    let other = generate_benchmark_domain(99, 10).spec.profiles()[1].clone();
    let d = g.spec.domain();
    let [p1, p2] = g.spec.profiles();
    let script: Vec<Message> = (0..6)
        .map(|i| Message::propose(generate_benchmark_domain(50 + i, 10).maximizers[0].clone()))
        .collect();
    let play = |opp_profile| {
        let mut x = build_agent(AgentKind::Mcts, &fast_settings(), d, p1, 3);
        let mut y = Scripted::new(script.clone());
        let opts = SessionOptions { round_cap: 12, ..Default::default() };
        run_session([x.as_mut(), &mut y], d, [p1, opp_profile], opts).unwrap().transcript(d)
    };
    assert_eq!(play(p2), play(&other));
}
