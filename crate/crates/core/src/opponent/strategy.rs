//! Forecast of the opponent's next bid.
//!
//! Numeric issues get one GP each over the opponent's turn index. Categorical
//! issues keep observation counts and are sampled from Laplace-smoothed
//! frequencies.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;

use crate::domains::{Bid, Domain, Issue, Value};
use crate::gpr::{Kernel, KernelFamily, Prediction, ScaledGp};

use super::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub kernel: KernelFamily,
    /// Hyperparameters are refitted after this many new observations.
    pub refit_every: usize,
    /// Only the most recent observations condition each GP.
    pub window: usize,
    /// Pseudo-count added to every category.
    pub smoothing: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kernel: KernelFamily::RationalQuadratic,
            refit_every: 5,
            window: 30,
            smoothing: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
enum Track {
    Numeric {
        values: Vec<f64>,
        kernel: Option<Kernel>,
        fitted_at: usize,
        gp: Option<ScaledGp>,
        prior_scale: f64,
    },
    Categorical {
        counts: Vec<u32>,
    },
}

/// Per-issue forecast at one future turn.
#[derive(Debug, Clone)]
pub enum IssueForecast {
    Numeric(Prediction),
    Categorical(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct StrategyModel {
    cfg: StrategyConfig,
    issues: Vec<Issue>,
    turns: Vec<f64>,
    tracks: Vec<Track>,
}

impl StrategyModel {
    pub fn new(domain: &Domain, cfg: StrategyConfig) -> Self {
        let tracks = domain
            .issues()
            .iter()
            .map(|issue| match issue.bounds() {
                Some((lo, hi)) => Track::Numeric {
                    values: Vec::new(),
                    kernel: None,
                    fitted_at: 0,
                    gp: None,
                    // Standard deviation of a uniform draw over the issue.
                    prior_scale: (hi - lo) / 12f64.sqrt(),
                },
                None => Track::Categorical {
                    counts: vec![0; issue.cardinality().unwrap_or(1)],
                },
            })
            .collect();
        Self {
            cfg,
            issues: domain.issues().to_vec(),
            turns: Vec::new(),
            tracks,
        }
    }

    pub fn observations(&self) -> usize {
        self.turns.len()
    }

    pub fn last_turn(&self) -> Option<f64> {
        self.turns.last().copied()
    }

    /// Number of points conditioning the GP of a numeric issue.
    pub fn dataset_len(&self, issue: usize) -> Option<usize> {
        match &self.tracks[issue] {
            Track::Numeric { values, .. } => Some(values.len().min(self.cfg.window)),
            Track::Categorical { .. } => None,
        }
    }

    pub fn category_counts(&self, issue: usize) -> Option<&[u32]> {
        match &self.tracks[issue] {
            Track::Categorical { counts } => Some(counts),
            Track::Numeric { .. } => None,
        }
    }

    pub fn kernel(&self, issue: usize) -> Option<&Kernel> {
        match &self.tracks[issue] {
            Track::Numeric { kernel, .. } => kernel.as_ref(),
            Track::Categorical { .. } => None,
        }
    }

    /// Records the opponent's bid made at `turn`.
    pub fn observe(&mut self, turn: u64, bid: &Bid) -> Result<(), ModelError> {
        let x = turn as f64;
        if let Some(last) = self.last_turn() {
            if x <= last {
                return Err(ModelError::OutOfOrder { last: last as u64, got: turn });
            }
        }
        if bid.len() != self.issues.len() {
            return Err(ModelError::BidArity {
                expected: self.issues.len(),
                got: bid.len(),
            });
        }
        for (issue, value) in self.issues.iter().zip(bid.values()) {
            if !issue.contains(value) {
                return Err(ModelError::InvalidBid(issue.key().to_string()));
            }
        }
        self.turns.push(x);
        let window_start = self.turns.len().saturating_sub(self.cfg.window);
        let xs = &self.turns[window_start..];
        for (track, value) in self.tracks.iter_mut().zip(bid.values()) {
            match track {
                Track::Categorical { counts } => {
                    if let Value::Category(c) = value {
                        counts[*c] += 1;
                    }
                }
                Track::Numeric {
                    values,
                    kernel,
                    fitted_at,
                    gp,
                    prior_scale,
                } => {
                    values.push(value.as_f64());
                    let ys = &values[window_start..];
                    let n = values.len();
                    let refit = n >= 2 && (kernel.is_none() || n - *fitted_at >= self.cfg.refit_every);
                    let model = if refit {
                        let fitted = ScaledGp::fit(self.cfg.kernel, xs, ys, *prior_scale)?;
                        // Constant data carries no kernel; keep the previous one.
                        if let Some(k) = fitted.kernel() {
                            *kernel = Some(*k);
                            *fitted_at = n;
                        }
                        fitted
                    } else {
                        let k = kernel.unwrap_or_else(|| Kernel::default_for(self.cfg.kernel));
                        ScaledGp::with_kernel(k, xs, ys, *prior_scale)?
                    };
                    *gp = Some(model);
                }
            }
        }
        Ok(())
    }

    /// Forecast for every issue at `turn`.
    pub fn forecast(&self, turn: u64) -> Result<Vec<IssueForecast>, ModelError> {
        if self.turns.is_empty() {
            return Err(ModelError::NoObservations);
        }
        let n = self.turns.len() as f64;
        self.tracks
            .iter()
            .map(|track| match track {
                Track::Numeric { gp, .. } => {
                    let gp = gp.as_ref().ok_or(ModelError::NoObservations)?;
                    Ok(IssueForecast::Numeric(gp.predict(turn as f64)?))
                }
                Track::Categorical { counts } => {
                    let eps = self.cfg.smoothing;
                    let total = n + eps * counts.len() as f64;
                    Ok(IssueForecast::Categorical(
                        counts.iter().map(|c| (*c as f64 + eps) / total).collect(),
                    ))
                }
            })
            .collect()
    }

    /// Samples the opponent's bid at `turn`.
    pub fn predict_next_bid<R: Rng + ?Sized>(&self, turn: u64, rng: &mut R) -> Result<Bid, ModelError> {
        let forecast = self.forecast(turn)?;
        Ok(sample_forecast(&self.issues, &forecast, rng))
    }
}

/// Draws one bid from per-issue forecasts: numeric values are clamped and
/// snapped to the issue grid.
pub fn sample_forecast<R: Rng + ?Sized>(issues: &[Issue], forecast: &[IssueForecast], rng: &mut R) -> Bid {
    Bid::new(
        issues
            .iter()
            .zip(forecast)
            .map(|(issue, f)| match f {
                IssueForecast::Numeric(p) => issue.snap(p.sample(rng)),
                IssueForecast::Categorical(probs) => {
                    let dist = WeightedIndex::new(probs).expect("smoothed probabilities are positive");
                    Value::Category(dist.sample(rng))
                }
            })
            .collect(),
    )
}
