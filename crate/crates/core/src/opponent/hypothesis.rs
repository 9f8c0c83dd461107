//! Bayesian learning of the opponent's utility function.
//!
//! Each hypothesis is an additive utility: one triangular partial utility
//! per numeric issue (a value table for categorical issues) and rank-based
//! issue weights. The posterior over hypotheses is updated from every
//! opponent bid, assuming the opponent concedes at a roughly constant rate:
//! at opponent turn `t` it is expected to bid near utility
//! `max(1 - β·t, floor)` for itself.

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value as Json};

use crate::domains::{Bid, Domain, IssueKind, Value};

use super::ModelError;

/// Shape of a triangular function on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Linear from `t(a) = 0` to `t(b) = 1`.
    Up,
    /// Linear from `t(a) = 1` to `t(b) = 0`.
    Down,
    /// Zero at both ends and 1 at `c`, linear on each side.
    Peak(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularFn {
    a: f64,
    b: f64,
    shape: Shape,
}

impl TriangularFn {
    pub fn new(a: f64, b: f64, shape: Shape) -> Result<Self, ModelError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ModelError::InvalidTriangular(format!("domain [{a}, {b}]")));
        }
        if let Shape::Peak(c) = shape {
            if !(a..=b).contains(&c) {
                return Err(ModelError::InvalidTriangular(format!("peak {c} outside [{a}, {b}]")));
            }
        }
        Ok(Self { a, b, shape })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn eval(&self, v: f64) -> Result<f64, ModelError> {
        if !(self.a..=self.b).contains(&v) {
            return Err(ModelError::OutsideDomain { value: v, a: self.a, b: self.b });
        }
        Ok(self.eval_clamped(v))
    }

    /// Evaluation with `v` clamped into `[a, b]`.
    #[inline]
    pub fn eval_clamped(&self, v: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let v = v.clamp(a, b);
        let t = match self.shape {
            Shape::Up => (v - a) / (b - a),
            Shape::Down => (b - v) / (b - a),
            Shape::Peak(c) => {
                if v <= c {
                    if c == a { 1.0 } else { (v - a) / (c - a) }
                } else {
                    (b - v) / (b - c)
                }
            }
        };
        t.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartialUtility {
    Triangular(TriangularFn),
    /// One value in `[0, 1]` per category.
    Table(Vec<f64>),
}

impl PartialUtility {
    #[inline]
    pub fn eval(&self, value: &Value) -> f64 {
        match (self, value) {
            (PartialUtility::Triangular(t), v) => t.eval_clamped(v.as_f64()),
            (PartialUtility::Table(table), Value::Category(c)) => table.get(*c).copied().unwrap_or(0.0),
            (PartialUtility::Table(_), Value::Number(_)) => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityHypothesis {
    pub partials: Vec<PartialUtility>,
    /// Issue weights, summing to 1.
    pub weights: Vec<f64>,
}

impl UtilityHypothesis {
    #[inline]
    pub fn utility(&self, bid: &Bid) -> f64 {
        self.partials
            .iter()
            .zip(&self.weights)
            .zip(bid.values())
            .map(|((p, w), v)| w * p.eval(v))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    fn describe(&self, domain: &Domain) -> Json {
        let issues: Vec<Json> = domain
            .issues()
            .iter()
            .zip(&self.partials)
            .zip(&self.weights)
            .map(|((issue, p), w)| {
                let shape = match p {
                    PartialUtility::Triangular(t) => match t.shape() {
                        Shape::Up => json!({ "shape": "up" }),
                        Shape::Down => json!({ "shape": "down" }),
                        Shape::Peak(c) => json!({ "shape": "peak", "peak": c }),
                    },
                    PartialUtility::Table(values) => json!({ "shape": "table", "values": values }),
                };
                json!({ "key": issue.key(), "weight": w, "partial": shape })
            })
            .collect();
        Json::Array(issues)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub hypotheses: usize,
    /// Standard deviation of the bid-utility residual around the target.
    pub sigma: f64,
    /// Expected utility drop per opponent turn.
    pub beta: f64,
    pub floor: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            hypotheses: 500,
            sigma: 0.25,
            beta: 0.01,
            floor: 0.0,
        }
    }
}

/// Peak positions as fractions of an issue's range.
pub const PEAK_POSITIONS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSet {
    hypotheses: Vec<UtilityHypothesis>,
    posterior: Vec<f64>,
    cfg: LearnerConfig,
}

impl HypothesisSet {
    /// Draws `cfg.hypotheses` hypotheses with a uniform prior.
    pub fn generate<R: Rng + ?Sized>(domain: &Domain, cfg: LearnerConfig, rng: &mut R) -> Self {
        let count = cfg.hypotheses.max(1);
        let m = domain.issue_count();
        let rank_total = (m * (m + 1) / 2) as f64;
        let hypotheses = (0..count)
            .map(|_| {
                let partials = domain
                    .issues()
                    .iter()
                    .map(|issue| match issue.kind() {
                        IssueKind::Categorical { values } => {
                            let mut table: Vec<f64> = (0..values.len()).map(|_| rng.gen()).collect();
                            let max = table.iter().cloned().fold(0.0, f64::max);
                            if max > 0.0 {
                                table.iter_mut().for_each(|v| *v /= max);
                            }
                            PartialUtility::Table(table)
                        }
                        _ => {
                            let (a, b) = issue.bounds().expect("numeric issue");
                            let shape = match rng.gen_range(0..5) {
                                0 => Shape::Up,
                                1 => Shape::Down,
                                k => Shape::Peak(a + PEAK_POSITIONS[k - 2] * (b - a)),
                            };
                            PartialUtility::Triangular(
                                TriangularFn::new(a, b, shape).expect("issue bounds are ordered"),
                            )
                        }
                    })
                    .collect();
                let mut order: Vec<usize> = (0..m).collect();
                order.shuffle(rng);
                let mut weights = vec![0.0; m];
                for (rank, issue) in order.into_iter().enumerate() {
                    weights[issue] = (m - rank) as f64 / rank_total;
                }
                UtilityHypothesis { partials, weights }
            })
            .collect();
        Self::from_hypotheses(hypotheses, cfg)
    }

    /// Wraps explicit hypotheses with a uniform prior.
    pub fn from_hypotheses(hypotheses: Vec<UtilityHypothesis>, cfg: LearnerConfig) -> Self {
        assert!(!hypotheses.is_empty(), "need at least one hypothesis");
        let n = hypotheses.len();
        Self {
            hypotheses,
            posterior: vec![1.0 / n as f64; n],
            cfg,
        }
    }

    pub fn hypotheses(&self) -> &[UtilityHypothesis] {
        &self.hypotheses
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    /// Utility the opponent is assumed to target at its `turn`-th bid
    /// (0-based).
    pub fn concession_target(&self, turn: u64) -> f64 {
        (1.0 - self.cfg.beta * turn as f64).max(self.cfg.floor)
    }

    pub fn likelihoods(&self, turn: u64, bid: &Bid) -> Vec<f64> {
        let target = self.concession_target(turn);
        let s = self.cfg.sigma;
        let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
        self.hypotheses
            .iter()
            .map(|h| {
                let r = h.utility(bid) - target;
                norm * (-0.5 * r * r / (s * s)).exp()
            })
            .collect()
    }

    /// Bayes update for an opponent bid at its `turn`-th bid (0-based).
    pub fn update(&mut self, turn: u64, bid: &Bid) {
        let lik = self.likelihoods(turn, bid);
        self.update_with_likelihoods(&lik);
    }

    /// `posterior_j ∝ posterior_j · likelihood_j`. A vector whose products
    /// are all zero leaves the posterior untouched.
    pub fn update_with_likelihoods(&mut self, likelihoods: &[f64]) {
        assert_eq!(likelihoods.len(), self.posterior.len());
        let unnorm: Vec<f64> = self
            .posterior
            .iter()
            .zip(likelihoods)
            .map(|(p, l)| p * l.max(0.0))
            .collect();
        let total: f64 = unnorm.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return;
        }
        self.posterior = unnorm.into_iter().map(|v| v / total).collect();
    }

    /// Posterior-weighted utility of `bid`.
    pub fn estimated_utility(&self, bid: &Bid) -> f64 {
        self.hypotheses
            .iter()
            .zip(&self.posterior)
            .map(|(h, p)| p * h.utility(bid))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn argmax(&self) -> usize {
        self.posterior
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Indices of the `k` heaviest hypotheses, heaviest first.
    pub fn top(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.posterior.len()).collect();
        idx.sort_by(|a, b| self.posterior[*b].total_cmp(&self.posterior[*a]).then(a.cmp(b)));
        idx.truncate(k);
        idx
    }

    /// JSON dump of the `k` heaviest hypotheses.
    pub fn dump_top(&self, domain: &Domain, k: usize) -> Json {
        Json::Array(
            self.top(k)
                .into_iter()
                .map(|i| {
                    json!({
                        "index": i,
                        "weight": self.posterior[i],
                        "issues": self.hypotheses[i].describe(domain),
                    })
                })
                .collect(),
        )
    }

    /// Collapses the posterior mixture into per-issue tables. The mixture is
    /// linear in the partial utilities, so the tables reproduce
    /// [`Self::estimated_utility`] exactly up to rounding.
    pub fn utility_table(&self, domain: &Domain) -> UtilityTable {
        let issues = domain
            .issues()
            .iter()
            .enumerate()
            .map(|(i, issue)| match issue.cardinality() {
                Some(n) => {
                    let mut table = vec![0.0; n];
                    for (h, p) in self.hypotheses.iter().zip(&self.posterior) {
                        if *p == 0.0 {
                            continue;
                        }
                        let coef = p * h.weights[i];
                        for (k, slot) in table.iter_mut().enumerate() {
                            *slot += coef * h.partials[i].eval(&issue.value_at(k));
                        }
                    }
                    IssueTable::Finite(issue.clone(), table)
                }
                None => IssueTable::Mixture(
                    self.hypotheses
                        .iter()
                        .zip(&self.posterior)
                        .filter(|(_, p)| **p > 0.0)
                        .map(|(h, p)| (p * h.weights[i], h.partials[i].clone()))
                        .collect(),
                ),
            })
            .collect();
        UtilityTable { issues }
    }
}

#[derive(Debug, Clone)]
enum IssueTable {
    Finite(crate::domains::Issue, Vec<f64>),
    Mixture(Vec<(f64, PartialUtility)>),
}

/// Per-issue expected partial utilities under a fixed posterior.
#[derive(Debug, Clone)]
pub struct UtilityTable {
    issues: Vec<IssueTable>,
}

impl UtilityTable {
    #[inline]
    pub fn utility(&self, bid: &Bid) -> f64 {
        self.issues
            .iter()
            .zip(bid.values())
            .map(|(t, v)| match t {
                IssueTable::Finite(issue, table) => issue
                    .index_of(v)
                    .and_then(|k| table.get(k))
                    .copied()
                    .unwrap_or(0.0),
                IssueTable::Mixture(terms) => terms.iter().map(|(c, p)| c * p.eval(v)).sum(),
            })
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}
