//! Seeded batches of sessions between two agents, with per-session CSV
//! rows and summary statistics.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{build_agent, AgentError, AgentKind, AgentSettings, MoveStats};
use crate::domains::{generate_benchmark_domain, DomainError, DomainSpec};
use crate::opponent::derive_seed;
use crate::protocol::{run_session, PlayerId, ProtocolError, SessionOptions, Terminal};

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("sessions must be at least 1")]
    NoSessions,
    #[error("cannot summarize an empty result list")]
    EmptyResults,
    #[error("bad domain source `{0}` (expected a file path or gen:SEED)")]
    BadSource(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("session {session}, assignment {assignment}: {source}")]
    Session {
        session: usize,
        assignment: u8,
        #[source]
        source: ProtocolError,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Where the negotiation domain comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSource {
    File(PathBuf),
    Generated { seed: u64, issues: usize },
}

pub const BENCHMARK_ISSUES: usize = 10;

impl FromStr for DomainSource {
    type Err = TournamentError;

    /// `gen:SEED` generates the 10-issue benchmark; anything else is a path.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("gen:") {
            Some(seed) => seed
                .parse()
                .map(|seed| DomainSource::Generated { seed, issues: BENCHMARK_ISSUES })
                .map_err(|_| TournamentError::BadSource(s.to_string())),
            None if s.is_empty() => Err(TournamentError::BadSource(s.to_string())),
            None => Ok(DomainSource::File(PathBuf::from(s))),
        }
    }
}

impl DomainSource {
    pub fn load(&self) -> Result<DomainSpec, TournamentError> {
        Ok(match self {
            DomainSource::File(path) => DomainSpec::read(path)?,
            DomainSource::Generated { seed, issues } => generate_benchmark_domain(*seed, *issues).spec,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub agent_a: AgentKind,
    pub agent_b: AgentKind,
    pub settings: AgentSettings,
    /// Sessions per profile assignment.
    pub sessions: usize,
    pub round_cap: usize,
    pub base_seed: u64,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    pub dump_posterior: bool,
}

impl ExperimentConfig {
    pub fn new(agent_a: AgentKind, agent_b: AgentKind) -> Self {
        Self {
            agent_a,
            agent_b,
            settings: AgentSettings::default(),
            sessions: 20,
            round_cap: 200,
            base_seed: 0,
            jobs: 1,
            dump_posterior: false,
        }
    }
}

/// One finished session. In assignment 1 agent A holds profile 1, in
/// assignment 2 profile 2; agent A always moves first.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub session: usize,
    pub assignment: u8,
    pub agent_a: AgentKind,
    pub agent_b: AgentKind,
    pub u_a: f64,
    pub u_b: f64,
    pub rounds: usize,
    pub terminal: Terminal,
    pub seed: u64,
    pub transcript: Vec<String>,
    pub stats: Vec<(usize, PlayerId, MoveStats)>,
    pub posteriors: Vec<(usize, PlayerId, serde_json::Value)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub sessions: usize,
    pub mean_a: f64,
    pub std_a: f64,
    pub mean_b: f64,
    pub std_b: f64,
    pub mean_rounds: f64,
    pub agreement_rate: f64,
}

/// Means, population standard deviations, mean proposal count and the
/// share of sessions ending in an accepted bid.
pub fn summarize(records: &[SessionRecord]) -> Result<SummaryStats, TournamentError> {
    if records.is_empty() {
        return Err(TournamentError::EmptyResults);
    }
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&SessionRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let std = |f: &dyn Fn(&SessionRecord) -> f64, m: f64| {
        (records.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / n).sqrt()
    };
    let mean_a = mean(&|r| r.u_a);
    let mean_b = mean(&|r| r.u_b);
    Ok(SummaryStats {
        sessions: records.len(),
        mean_a,
        std_a: std(&|r| r.u_a, mean_a),
        mean_b,
        std_b: std(&|r| r.u_b, mean_b),
        mean_rounds: mean(&|r| r.rounds as f64),
        agreement_rate: mean(&|r| f64::from(u8::from(r.terminal == Terminal::Accept))),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// Assignment 1 sessions in order, then assignment 2.
    pub records: Vec<SessionRecord>,
    pub summaries: [SummaryStats; 2],
}

impl Experiment {
    pub fn assignment(&self, assignment: u8) -> impl Iterator<Item = &SessionRecord> {
        self.records.iter().filter(move |r| r.assignment == assignment)
    }
}

/// Plays one session of an experiment. Each agent's seed is derived from
/// the session seed, the assignment and its slot.
pub fn play_session(
    spec: &DomainSpec,
    cfg: &ExperimentConfig,
    session: usize,
    assignment: u8,
) -> Result<SessionRecord, TournamentError> {
    let seed = cfg.base_seed.wrapping_add(session as u64);
    let (pa, pb) = match assignment {
        1 => (&spec.profiles()[0], &spec.profiles()[1]),
        _ => (&spec.profiles()[1], &spec.profiles()[0]),
    };
    let stream = u64::from(assignment) * 2;
    let domain = spec.domain();
    let mut a = build_agent(cfg.agent_a, &cfg.settings, domain, pa, derive_seed(seed, stream));
    let mut b = build_agent(cfg.agent_b, &cfg.settings, domain, pb, derive_seed(seed, stream + 1));
    let opts = SessionOptions { round_cap: cfg.round_cap, dump_posterior: cfg.dump_posterior };
    let result = run_session([a.as_mut(), b.as_mut()], domain, [pa, pb], opts)
        .map_err(|source| TournamentError::Session { session, assignment, source })?;
    Ok(SessionRecord {
        session,
        assignment,
        agent_a: cfg.agent_a,
        agent_b: cfg.agent_b,
        u_a: result.utilities[0],
        u_b: result.utilities[1],
        rounds: result.rounds,
        terminal: result.terminal,
        seed,
        transcript: result.transcript(domain),
        stats: result.stats.into_iter().map(|s| (s.turn, s.player, s.stats)).collect(),
        posteriors: result.posteriors.into_iter().map(|p| (p.turn, p.player, p.json)).collect(),
    })
}

/// Runs `cfg.sessions` sessions for each profile assignment.
pub fn run_experiment(spec: &DomainSpec, cfg: &ExperimentConfig) -> Result<Experiment, TournamentError> {
    if cfg.sessions == 0 {
        return Err(TournamentError::NoSessions);
    }
    cfg.settings.validate()?;
    let jobs: Vec<(usize, u8)> = [1u8, 2]
        .into_iter()
        .flat_map(|a| (0..cfg.sessions).map(move |s| (s, a)))
        .collect();
    let records = if cfg.jobs <= 1 {
        jobs.iter()
            .map(|&(s, a)| play_session(spec, cfg, s, a))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| TournamentError::Pool(e.to_string()))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|&(s, a)| play_session(spec, cfg, s, a))
                .collect::<Result<Vec<_>, _>>()
        })?
    };
    let (first, second): (Vec<_>, Vec<_>) = records.iter().cloned().partition(|r| r.assignment == 1);
    let summaries = [summarize(&first)?, summarize(&second)?];
    Ok(Experiment { records, summaries })
}

pub const RESULTS_HEADER: [&str; 9] =
    ["session", "assignment", "agent_a", "agent_b", "u_a", "u_b", "rounds", "terminal", "seed"];

pub fn write_results_csv<W: Write>(records: &[SessionRecord], out: W) -> Result<(), TournamentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record([
            r.session.to_string(),
            r.assignment.to_string(),
            r.agent_a.to_string(),
            r.agent_b.to_string(),
            r.u_a.to_string(),
            r.u_b.to_string(),
            r.rounds.to_string(),
            r.terminal.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per agent and assignment.
pub fn write_summary_csv<W: Write>(exp: &Experiment, out: W) -> Result<(), TournamentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "assignment",
        "agent",
        "role",
        "mean_utility",
        "std_utility",
        "mean_rounds",
        "agreement_rate",
        "sessions",
    ])?;
    let (a, b) = match exp.records.first() {
        Some(r) => (r.agent_a, r.agent_b),
        None => return Ok(()),
    };
    for (i, s) in exp.summaries.iter().enumerate() {
        for (agent, role, mean, std) in [(a, "a", s.mean_a, s.std_a), (b, "b", s.mean_b, s.std_b)] {
            w.write_record([
                (i + 1).to_string(),
                agent.to_string(),
                role.to_string(),
                mean.to_string(),
                std.to_string(),
                s.mean_rounds.to_string(),
                s.agreement_rate.to_string(),
                s.sessions.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-move search statistics, prefixed by session, assignment and player.
pub fn write_stats_csv<W: Write>(records: &[SessionRecord], out: W) -> Result<(), TournamentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "session",
        "assignment",
        "player",
        "turn",
        "root_visits",
        "tree_size",
        "best_mean",
        "elapsed_ms",
    ])?;
    for r in records {
        for (turn, player, s) in &r.stats {
            w.write_record([
                r.session.to_string(),
                r.assignment.to_string(),
                player.to_string(),
                turn.to_string(),
                s.root_visits.to_string(),
                s.tree_size.to_string(),
                s.best_mean.to_string(),
                format!("{:.3}", s.elapsed_ms),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON lines: one object per logged move with the top hypotheses.
pub fn write_posteriors<W: Write>(records: &[SessionRecord], mut out: W) -> Result<(), TournamentError> {
    for r in records {
        for (turn, player, top) in &r.posteriors {
            let line = serde_json::json!({
                "session": r.session,
                "assignment": r.assignment,
                "turn": turn,
                "player": player.to_string(),
                "top": top,
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}
