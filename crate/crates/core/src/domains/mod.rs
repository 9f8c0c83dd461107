//! Negotiation domains: issue schemas, bids, preference profiles and the
//! benchmark generator.
//!
//! A [`Bid`] stores one [`Value`] per issue, in the domain's issue order.
//! Categorical values are indices into the issue's value list; the string
//! form only appears at the serialization boundary.

mod file;
mod generator;
mod profile;

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::Value as Json;
use thiserror::Error;

pub use file::DomainSpec;
pub use generator::{generate_benchmark_domain, generate_with, GeneratedDomain, GeneratorConfig, NonlinearityWitness};
pub use profile::{Clause, Constraint, PreferenceProfile};

const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid issue `{key}`: {reason}")]
    InvalidIssue { key: String, reason: String },
    #[error("duplicate issue key `{0}`")]
    DuplicateIssue(String),
    #[error("bid has {got} values, domain has {expected} issues")]
    BidArity { expected: usize, got: usize },
    #[error("bid is missing issue `{0}`")]
    MissingIssue(String),
    #[error("unknown issue `{0}`")]
    UnknownIssue(String),
    #[error("value for issue `{key}` is out of range: {value}")]
    OutOfRange { key: String, value: String },
    #[error("profile is invalid: {0}")]
    InvalidProfile(String),
    #[error("malformed domain file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IssueKind {
    NumericDiscrete { lo: f64, hi: f64, step: f64 },
    NumericContinuous { lo: f64, hi: f64 },
    Categorical { values: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    key: String,
    kind: IssueKind,
}

impl Issue {
    pub fn new(key: impl Into<String>, kind: IssueKind) -> Result<Self, DomainError> {
        let key = key.into();
        let invalid = |reason: &str| DomainError::InvalidIssue {
            key: key.clone(),
            reason: reason.to_string(),
        };
        match &kind {
            IssueKind::NumericDiscrete { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
                    return Err(invalid("bounds must be finite"));
                }
                if lo >= hi {
                    return Err(invalid("lo must be below hi"));
                }
                if *step <= 0.0 {
                    return Err(invalid("step must be positive"));
                }
            }
            IssueKind::NumericContinuous { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(invalid("bounds must be finite"));
                }
                if lo >= hi {
                    return Err(invalid("lo must be below hi"));
                }
            }
            IssueKind::Categorical { values } => {
                if values.is_empty() {
                    return Err(invalid("categorical issue needs at least one value"));
                }
                let mut seen = std::collections::BTreeSet::new();
                for v in values {
                    if !seen.insert(v) {
                        return Err(invalid("categorical values must be distinct"));
                    }
                }
            }
        }
        Ok(Self { key, kind })
    }

    pub fn discrete(key: impl Into<String>, lo: f64, hi: f64, step: f64) -> Result<Self, DomainError> {
        Self::new(key, IssueKind::NumericDiscrete { lo, hi, step })
    }

    pub fn continuous(key: impl Into<String>, lo: f64, hi: f64) -> Result<Self, DomainError> {
        Self::new(key, IssueKind::NumericContinuous { lo, hi })
    }

    pub fn categorical<S: Into<String>>(
        key: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Result<Self, DomainError> {
        Self::new(
            key,
            IssueKind::Categorical {
                values: values.into_iter().map(Into::into).collect(),
            },
        )
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn kind(&self) -> &IssueKind {
        &self.kind
    }

    /// Number of admissible values, `None` for continuous issues.
    pub fn cardinality(&self) -> Option<usize> {
        match &self.kind {
            IssueKind::NumericDiscrete { lo, hi, step } => {
                Some(((hi - lo) / step + GRID_TOLERANCE).floor() as usize + 1)
            }
            IssueKind::NumericContinuous { .. } => None,
            IssueKind::Categorical { values } => Some(values.len()),
        }
    }

    /// The `index`-th admissible value of a finite issue.
    pub fn value_at(&self, index: usize) -> Value {
        match &self.kind {
            IssueKind::NumericDiscrete { lo, step, .. } => Value::Number(lo + step * index as f64),
            IssueKind::Categorical { .. } => Value::Category(index),
            IssueKind::NumericContinuous { lo, .. } => Value::Number(*lo),
        }
    }

    /// Position of `value` in the admissible value list of a finite issue.
    pub fn index_of(&self, value: &Value) -> Option<usize> {
        match (&self.kind, value) {
            (IssueKind::NumericDiscrete { lo, step, .. }, Value::Number(x)) => {
                let pos = ((x - lo) / step).round();
                (pos >= 0.0).then_some(pos as usize)
            }
            (IssueKind::Categorical { .. }, Value::Category(i)) => Some(*i),
            _ => None,
        }
    }

    /// Numeric bounds, `None` for categorical issues.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match &self.kind {
            IssueKind::NumericDiscrete { lo, hi, .. } | IssueKind::NumericContinuous { lo, hi } => {
                Some((*lo, *hi))
            }
            IssueKind::Categorical { .. } => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self.kind, IssueKind::Categorical { .. })
    }

    pub fn contains(&self, value: &Value) -> bool {
        match (&self.kind, value) {
            (IssueKind::NumericDiscrete { lo, hi, step }, Value::Number(x)) => {
                if !x.is_finite() || *x < lo - GRID_TOLERANCE || *x > hi + GRID_TOLERANCE {
                    return false;
                }
                let pos = (x - lo) / step;
                (pos - pos.round()).abs() <= GRID_TOLERANCE * pos.abs().max(1.0)
            }
            (IssueKind::NumericContinuous { lo, hi }, Value::Number(x)) => {
                x.is_finite() && x >= lo && x <= hi
            }
            (IssueKind::Categorical { values }, Value::Category(i)) => *i < values.len(),
            _ => false,
        }
    }

    /// Snaps an arbitrary real onto the issue: clamps to the bounds and, for
    /// discrete issues, rounds to the nearest step.
    pub fn snap(&self, x: f64) -> Value {
        match &self.kind {
            IssueKind::NumericDiscrete { lo, hi, step } => {
                let max_index = ((hi - lo) / step + GRID_TOLERANCE).floor();
                let index = ((x - lo) / step).round().clamp(0.0, max_index);
                Value::Number(lo + step * index)
            }
            IssueKind::NumericContinuous { lo, hi } => Value::Number(x.clamp(*lo, *hi)),
            IssueKind::Categorical { values } => {
                Value::Category((x.round().max(0.0) as usize).min(values.len() - 1))
            }
        }
    }

    /// Uniform draw over the issue.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match &self.kind {
            IssueKind::NumericContinuous { lo, hi } => Value::Number(rng.gen_range(*lo..=*hi)),
            _ => {
                let n = self.cardinality().unwrap_or(1);
                self.value_at(rng.gen_range(0..n))
            }
        }
    }

    fn to_json(&self, value: &Value) -> Json {
        match (&self.kind, value) {
            (IssueKind::NumericDiscrete { .. }, Value::Number(x))
                if x.fract() == 0.0 && x.abs() < 1e15 =>
            {
                Json::from(*x as i64)
            }
            (IssueKind::Categorical { values }, Value::Category(i)) => {
                Json::from(values.get(*i).cloned().unwrap_or_default())
            }
            (_, Value::Number(x)) => Json::from(*x),
            (_, Value::Category(i)) => Json::from(*i),
        }
    }

    fn value_from_json(&self, json: &Json) -> Result<Value, DomainError> {
        let bad = || DomainError::OutOfRange {
            key: self.key.clone(),
            value: json.to_string(),
        };
        let value = match &self.kind {
            IssueKind::Categorical { values } => {
                let s = json.as_str().ok_or_else(bad)?;
                Value::Category(values.iter().position(|v| v == s).ok_or_else(bad)?)
            }
            _ => Value::Number(json.as_f64().ok_or_else(bad)?),
        };
        if self.contains(&value) {
            Ok(value)
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Category(usize),
}

impl Value {
    /// Numeric view; categories map to their index.
    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Number(x) => *x,
            Value::Category(i) => *i as f64,
        }
    }
}

/// A complete assignment of one value per issue, in domain order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bid(Vec<Value>);

impl Bid {
    pub fn new(values: Vec<Value>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, issue: usize) -> Option<&Value> {
        self.0.get(issue)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_value(mut self, issue: usize, value: Value) -> Self {
        self.0[issue] = value;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    issues: Vec<Issue>,
}

impl Domain {
    pub fn new(issues: Vec<Issue>) -> Result<Self, DomainError> {
        let mut seen = std::collections::BTreeSet::new();
        for issue in &issues {
            if !seen.insert(issue.key.as_str()) {
                return Err(DomainError::DuplicateIssue(issue.key.clone()));
            }
        }
        Ok(Self { issues })
    }

    pub fn issues(&self) -> &[Issue] {
        &self.issues
    }

    pub fn issue_count(&self) -> usize {
        self.issues.len()
    }

    pub fn issue_index(&self, key: &str) -> Option<usize> {
        self.issues.iter().position(|i| i.key == key)
    }

    /// Size of the bid space, `None` when an issue is continuous or the
    /// product overflows.
    pub fn bid_space_size(&self) -> Option<u128> {
        self.issues.iter().try_fold(1u128, |acc, issue| {
            acc.checked_mul(issue.cardinality()? as u128)
        })
    }

    pub fn validate(&self, bid: &Bid) -> Result<(), DomainError> {
        if bid.len() != self.issues.len() {
            return Err(DomainError::BidArity {
                expected: self.issues.len(),
                got: bid.len(),
            });
        }
        for (issue, value) in self.issues.iter().zip(bid.values()) {
            if !issue.contains(value) {
                return Err(DomainError::OutOfRange {
                    key: issue.key.clone(),
                    value: format!("{value:?}"),
                });
            }
        }
        Ok(())
    }

    /// Builds a bid from `(issue-key, value)` pairs. Every issue must be
    /// assigned exactly once.
    pub fn bid_from_pairs<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, Value)>,
    ) -> Result<Bid, DomainError> {
        let mut slots: Vec<Option<Value>> = vec![None; self.issues.len()];
        for (key, value) in pairs {
            let idx = self
                .issue_index(key)
                .ok_or_else(|| DomainError::UnknownIssue(key.to_string()))?;
            slots[idx] = Some(value);
        }
        let values = slots
            .into_iter()
            .zip(&self.issues)
            .map(|(v, issue)| v.ok_or_else(|| DomainError::MissingIssue(issue.key.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let bid = Bid::new(values);
        self.validate(&bid)?;
        Ok(bid)
    }

    /// Uniform draw over the bid space (independent uniform per issue).
    pub fn sample_bid<R: Rng + ?Sized>(&self, rng: &mut R) -> Bid {
        Bid::new(self.issues.iter().map(|i| i.sample(rng)).collect())
    }

    /// Canonical JSON object of a bid, keys in lexicographic order.
    pub fn bid_to_json(&self, bid: &Bid) -> Json {
        let map: serde_json::Map<String, Json> = self
            .issues
            .iter()
            .zip(bid.values())
            .map(|(issue, v)| (issue.key.clone(), issue.to_json(v)))
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .collect();
        Json::Object(map)
    }

    pub fn canonical_bid_string(&self, bid: &Bid) -> String {
        self.bid_to_json(bid).to_string()
    }

    pub fn bid_from_json(&self, json: &Json) -> Result<Bid, DomainError> {
        let obj = json
            .as_object()
            .ok_or_else(|| DomainError::Format("bid must be a JSON object".into()))?;
        let mut values = Vec::with_capacity(self.issues.len());
        for issue in &self.issues {
            let v = obj
                .get(&issue.key)
                .ok_or_else(|| DomainError::MissingIssue(issue.key.clone()))?;
            values.push(issue.value_from_json(v)?);
        }
        if obj.len() != self.issues.len() {
            let extra = obj
                .keys()
                .find(|k| self.issue_index(k).is_none())
                .cloned()
                .unwrap_or_default();
            return Err(DomainError::UnknownIssue(extra));
        }
        Ok(Bid::new(values))
    }
}
