use super::{Bid, Domain, DomainError, Value};

/// One condition of a constraint, on a single issue.
#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    /// Numeric value within `[min, max]`.
    Range { issue: usize, min: f64, max: f64 },
    /// Categorical value in the allowed set.
    Allowed { issue: usize, values: Vec<usize> },
}

impl Clause {
    pub fn issue(&self) -> usize {
        match self {
            Clause::Range { issue, .. } | Clause::Allowed { issue, .. } => *issue,
        }
    }

    #[inline]
    pub fn holds(&self, bid: &Bid) -> bool {
        match self {
            Clause::Range { issue, min, max } => match bid.values()[*issue] {
                Value::Number(x) => x >= *min && x <= *max,
                Value::Category(_) => false,
            },
            Clause::Allowed { issue, values } => match bid.values()[*issue] {
                Value::Category(c) => values.contains(&c),
                Value::Number(_) => false,
            },
        }
    }
}

/// A weighted hyper-rectangle: satisfied when every clause holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub clauses: Vec<Clause>,
    pub weight: f64,
}

impl Constraint {
    #[inline]
    pub fn satisfied_by(&self, bid: &Bid) -> bool {
        self.clauses.iter().all(|c| c.holds(bid))
    }
}

/// Constraint-based nonlinear utility: the weight of satisfied constraints
/// divided by the largest achievable weight sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceProfile {
    issue_count: usize,
    constraints: Vec<Constraint>,
    normalizer: f64,
    reserve: f64,
}

impl PreferenceProfile {
    pub fn new(
        domain: &Domain,
        constraints: Vec<Constraint>,
        normalizer: f64,
        reserve: f64,
    ) -> Result<Self, DomainError> {
        if !(normalizer.is_finite() && normalizer > 0.0) {
            return Err(DomainError::InvalidProfile("normalizer must be positive".into()));
        }
        if !(0.0..=1.0).contains(&reserve) {
            return Err(DomainError::InvalidProfile("reserve must lie in [0,1]".into()));
        }
        for c in &constraints {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(DomainError::InvalidProfile("constraint weights must be positive".into()));
            }
            for clause in &c.clauses {
                let issue = domain.issues().get(clause.issue()).ok_or_else(|| {
                    DomainError::InvalidProfile(format!("clause references issue #{}", clause.issue()))
                })?;
                let kind_ok = match clause {
                    Clause::Range { min, max, .. } => issue.is_numeric() && min <= max,
                    Clause::Allowed { values, .. } => {
                        !issue.is_numeric()
                            && values.iter().all(|v| *v < issue.cardinality().unwrap_or(0))
                    }
                };
                if !kind_ok {
                    return Err(DomainError::InvalidProfile(format!(
                        "clause on `{}` does not match the issue kind",
                        issue.key()
                    )));
                }
            }
        }
        Ok(Self {
            issue_count: domain.issue_count(),
            constraints,
            normalizer,
            reserve,
        })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn reserve(&self) -> f64 {
        self.reserve
    }

    pub fn issue_count(&self) -> usize {
        self.issue_count
    }

    /// Utility of a bid, checking its arity first.
    pub fn utility(&self, bid: &Bid) -> Result<f64, DomainError> {
        if bid.len() != self.issue_count {
            return Err(DomainError::BidArity {
                expected: self.issue_count,
                got: bid.len(),
            });
        }
        Ok(self.eval(bid))
    }

    /// Utility of a bid already validated against the domain.
    #[inline]
    pub fn eval(&self, bid: &Bid) -> f64 {
        (self.satisfied_weight(bid) / self.normalizer).clamp(0.0, 1.0)
    }

    /// Total weight of satisfied constraints, before normalization.
    pub fn satisfied_weight(&self, bid: &Bid) -> f64 {
        // Folding from +0.0: an empty f64 sum is -0.0, which would print as "-0".
        self.constraints
            .iter()
            .filter(|c| c.satisfied_by(bid))
            .fold(0.0, |acc, c| acc + c.weight)
    }
}
