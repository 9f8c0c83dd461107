//! Alternating-offers bargaining as an extensive game, and the session
//! engine that plays two agents against each other.

use std::fmt;

use thiserror::Error;

use crate::agents::{Agent, AgentError, MoveStats};
use crate::domains::{Bid, Domain, DomainError, PreferenceProfile};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("the negotiation is already over")]
    Terminated,
    #[error("{0} has no proposal to respond to")]
    NothingToAccept(SpeechAct),
    #[error("agent `{agent}` ({player}) proposed an invalid bid: {source}")]
    InvalidBid {
        agent: String,
        player: PlayerId,
        #[source]
        source: DomainError,
    },
    #[error("agent `{agent}` ({player}) made an illegal move: {reason}")]
    IllegalMove { agent: String, player: PlayerId, reason: String },
    #[error("agent `{agent}` ({player}) failed: {source}")]
    Agent {
        agent: String,
        player: PlayerId,
        #[source]
        source: AgentError,
    },
    #[error("round cap must be at least 1")]
    ZeroRoundCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeechAct {
    Propose,
    Accept,
    Reject,
}

impl fmt::Display for SpeechAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpeechAct::Propose => "PROPOSE",
            SpeechAct::Accept => "ACCEPT",
            SpeechAct::Reject => "REJECT",
        })
    }
}

/// A speech act with its content; only proposals carry a bid.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    act: SpeechAct,
    content: Option<Bid>,
}

impl Message {
    pub fn propose(bid: Bid) -> Self {
        Self { act: SpeechAct::Propose, content: Some(bid) }
    }

    pub fn accept() -> Self {
        Self { act: SpeechAct::Accept, content: None }
    }

    pub fn reject() -> Self {
        Self { act: SpeechAct::Reject, content: None }
    }

    pub fn act(&self) -> SpeechAct {
        self.act
    }

    pub fn bid(&self) -> Option<&Bid> {
        self.content.as_ref()
    }
}

/// Player 1 (buyer) moves first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlayerId {
    P1,
    P2,
}

impl PlayerId {
    pub fn other(self) -> PlayerId {
        match self {
            PlayerId::P1 => PlayerId::P2,
            PlayerId::P2 => PlayerId::P1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            PlayerId::P1 => 0,
            PlayerId::P2 => 1,
        }
    }

    /// Author of the message at position `i` of a history.
    pub fn of_message(i: usize) -> PlayerId {
        if i.is_multiple_of(2) { PlayerId::P1 } else { PlayerId::P2 }
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlayerId::P1 => "P1",
            PlayerId::P2 => "P2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Open,
    Agreed,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    messages: Vec<Message>,
    status: Status,
}

impl Default for History {
    fn default() -> Self {
        Self::new()
    }
}

impl History {
    pub fn new() -> Self {
        Self { messages: Vec::new(), status: Status::Open }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn player_to_move(&self) -> Result<PlayerId, ProtocolError> {
        match self.status {
            Status::Open => Ok(PlayerId::of_message(self.messages.len())),
            _ => Err(ProtocolError::Terminated),
        }
    }

    /// Appends the next message. Accept needs a proposal to accept.
    pub fn push(&mut self, msg: Message) -> Result<(), ProtocolError> {
        if self.status != Status::Open {
            return Err(ProtocolError::Terminated);
        }
        match msg.act {
            SpeechAct::Propose => {}
            SpeechAct::Accept => {
                if self.last_proposal().is_none() {
                    return Err(ProtocolError::NothingToAccept(msg.act));
                }
                self.status = Status::Agreed;
            }
            SpeechAct::Reject => self.status = Status::Failed,
        }
        self.messages.push(msg);
        Ok(())
    }

    /// Ends an open negotiation without agreement.
    pub fn close_failed(&mut self) {
        if self.status == Status::Open {
            self.status = Status::Failed;
        }
    }

    pub fn last_proposal(&self) -> Option<&Bid> {
        self.messages.last().and_then(Message::bid)
    }

    /// Proposals made by `player`, oldest first.
    pub fn proposals_by(&self, player: PlayerId) -> impl Iterator<Item = &Bid> + '_ {
        let start = player.index();
        self.messages.iter().skip(start).step_by(2).filter_map(Message::bid)
    }

    pub fn proposal_count(&self) -> usize {
        self.messages.iter().filter(|m| m.act == SpeechAct::Propose).count()
    }

    /// The agreed bid, if the last message accepted a proposal.
    pub fn agreement(&self) -> Option<&Bid> {
        if self.status != Status::Agreed {
            return None;
        }
        self.messages[..self.messages.len() - 1].last().and_then(Message::bid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Accept,
    Reject,
    RoundCap,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Accept => "accept",
            Terminal::Reject => "reject",
            Terminal::RoundCap => "round-cap",
        })
    }
}

/// Search statistics of one move, tagged with the message index it
/// produced (1-based) and its author.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub turn: usize,
    pub player: PlayerId,
    pub stats: MoveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorRow {
    pub turn: usize,
    pub player: PlayerId,
    pub json: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub outcome: Option<Bid>,
    /// True-profile utilities, indexed by [`PlayerId::index`].
    pub utilities: [f64; 2],
    /// Number of proposals exchanged.
    pub rounds: usize,
    pub terminal: Terminal,
    pub history: History,
    pub stats: Vec<StatsRow>,
    pub posteriors: Vec<PosteriorRow>,
}

impl SessionResult {
    /// `turn,player,act,bid-json` lines, turns counted from 1.
    pub fn transcript(&self, domain: &Domain) -> Vec<String> {
        self.history
            .messages()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let bid = m.bid().map(|b| domain.canonical_bid_string(b)).unwrap_or_default();
                format!("{},{},{},{}", i + 1, PlayerId::of_message(i), m.act(), bid)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOptions {
    /// Maximum number of proposals; an agent about to make one more ends
    /// the session with reserve utilities.
    pub round_cap: usize,
    /// Collect each learning agent's top posterior hypotheses after its moves.
    pub dump_posterior: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self { round_cap: 200, dump_posterior: false }
    }
}

const POSTERIOR_TOP: usize = 10;

/// Plays one session: `agents[0]` is P1 and moves first, `profiles[i]`
/// scores `agents[i]`.
pub fn run_session(
    agents: [&mut dyn Agent; 2],
    domain: &Domain,
    profiles: [&PreferenceProfile; 2],
    opts: SessionOptions,
) -> Result<SessionResult, ProtocolError> {
    if opts.round_cap == 0 {
        return Err(ProtocolError::ZeroRoundCap);
    }
    let mut history = History::new();
    let mut stats = Vec::new();
    let mut posteriors = Vec::new();
    let terminal = loop {
        let player = history.player_to_move()?;
        let agent = &mut *agents[player.index()];
        let msg = agent.respond(&history, player).map_err(|source| ProtocolError::Agent {
            agent: agent.name().to_string(),
            player,
            source,
        })?;
        let turn = history.len() + 1;
        if let Some(s) = agent.last_move_stats() {
            stats.push(StatsRow { turn, player, stats: s });
        }
        if opts.dump_posterior {
            if let Some(json) = agent.posterior_dump(domain, POSTERIOR_TOP) {
                posteriors.push(PosteriorRow { turn, player, json });
            }
        }
        match msg.act() {
            SpeechAct::Propose => {
                let bid = msg.bid().expect("proposals carry a bid");
                domain.validate(bid).map_err(|source| ProtocolError::InvalidBid {
                    agent: agent.name().to_string(),
                    player,
                    source,
                })?;
                if history.proposal_count() >= opts.round_cap {
                    history.close_failed();
                    break Terminal::RoundCap;
                }
            }
            SpeechAct::Accept if history.last_proposal().is_none() => {
                return Err(ProtocolError::IllegalMove {
                    agent: agent.name().to_string(),
                    player,
                    reason: "accept before any proposal".into(),
                });
            }
            _ => {}
        }
        let act = msg.act();
        history.push(msg)?;
        match act {
            SpeechAct::Accept => break Terminal::Accept,
            SpeechAct::Reject => break Terminal::Reject,
            SpeechAct::Propose => {}
        }
    };
    let outcome = history.agreement().cloned();
    let utilities = match &outcome {
        Some(bid) => [profiles[0].eval(bid), profiles[1].eval(bid)],
        None => [profiles[0].reserve(), profiles[1].reserve()],
    };
    Ok(SessionResult {
        outcome,
        utilities,
        rounds: history.proposal_count(),
        terminal,
        history,
        stats,
        posteriors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{Issue, Value};

    #[test]
    fn player_parity() {
        let mut h = History::new();
        assert_eq!(h.player_to_move().unwrap(), PlayerId::P1);
        h.push(Message::propose(Bid::new(vec![Value::Number(1.0)]))).unwrap();
        assert_eq!(h.player_to_move().unwrap(), PlayerId::P2);
        for _ in 0..3 {
            h.push(Message::propose(Bid::new(vec![Value::Number(1.0)]))).unwrap();
        }
        assert_eq!(h.len(), 4);
        assert_eq!(h.player_to_move().unwrap(), PlayerId::P1);
    }

    #[test]
    fn terminal_histories_reject_moves() {
        let mut h = History::new();
        assert!(matches!(h.push(Message::accept()), Err(ProtocolError::NothingToAccept(_))));
        h.push(Message::propose(Bid::new(vec![Value::Number(2.0)]))).unwrap();
        h.push(Message::accept()).unwrap();
        assert_eq!(h.status(), Status::Agreed);
        assert_eq!(h.agreement(), Some(&Bid::new(vec![Value::Number(2.0)])));
        assert!(matches!(h.player_to_move(), Err(ProtocolError::Terminated)));
        assert!(h.push(Message::reject()).is_err());

        let mut h = History::new();
        h.push(Message::reject()).unwrap();
        assert_eq!(h.status(), Status::Failed);
        assert_eq!(h.agreement(), None);
    }

    #[test]
    fn proposals_by_player() {
        let mut h = History::new();
        for x in 1..=5 {
            h.push(Message::propose(Bid::new(vec![Value::Number(x as f64)]))).unwrap();
        }
        let p2: Vec<f64> = h.proposals_by(PlayerId::P2).map(|b| b.values()[0].as_f64()).collect();
        assert_eq!(p2, vec![2.0, 4.0]);
        assert_eq!(h.proposals_by(PlayerId::P1).count(), 3);
    }

    #[test]
    fn transcript_lines() {
        let d = Domain::new(vec![
            Issue::discrete("b", 1.0, 3.0, 1.0).unwrap(),
            Issue::categorical("a", ["x", "y"]).unwrap(),
        ])
        .unwrap();
        let mut h = History::new();
        h.push(Message::propose(Bid::new(vec![Value::Number(2.0), Value::Category(1)]))).unwrap();
        h.push(Message::accept()).unwrap();
        let r = SessionResult {
            outcome: h.agreement().cloned(),
            utilities: [0.0, 0.0],
            rounds: 1,
            terminal: Terminal::Accept,
            history: h,
            stats: vec![],
            posteriors: vec![],
        };
        assert_eq!(r.transcript(&d), vec![r#"1,P1,PROPOSE,{"a":"y","b":2}"#, "2,P2,ACCEPT,"]);
    }
}
