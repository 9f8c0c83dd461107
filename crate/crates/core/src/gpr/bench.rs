//! Kernel comparison on proposal sequences: every bid of a sequence is
//! predicted from the bids before it and scored by Euclidean distance.

use std::f64::consts::PI;
use std::io::Write;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use super::model::ScaledGp;
use super::{GprError, KernelFamily};

/// A proposal sequence: one numeric vector per turn.
pub type Sequence = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelScore {
    pub family: KernelFamily,
    pub avg_distance: f64,
    pub n_sequences: usize,
    pub n_predictions: usize,
}

/// Scores all four kernel families. For every sequence and every prefix of
/// length ≥ 2, each issue gets its own GP fitted on the prefix (turns
/// `1..=t`) and its mean at turn `t + 1` is the prediction.
pub fn kernel_benchmark(sequences: &[Sequence]) -> Result<Vec<KernelScore>, GprError> {
    for (i, s) in sequences.iter().enumerate() {
        if s.len() < 3 {
            return Err(GprError::InvalidParameter(format!(
                "sequence {i} has {} proposals, need at least 3",
                s.len()
            )));
        }
        let width = s[0].len();
        if s.iter().any(|bid| bid.len() != width) {
            return Err(GprError::InvalidParameter(format!("sequence {i} is ragged")));
        }
    }
    KernelFamily::ALL
        .iter()
        .map(|&family| {
            let mut total = 0.0;
            let mut count = 0usize;
            for seq in sequences {
                for t in 2..seq.len() {
                    total += prefix_error(family, &seq[..t], &seq[t])?;
                    count += 1;
                }
            }
            Ok(KernelScore {
                family,
                avg_distance: if count == 0 { 0.0 } else { total / count as f64 },
                n_sequences: sequences.len(),
                n_predictions: count,
            })
        })
        .collect()
}

fn prefix_error(family: KernelFamily, prefix: &[Vec<f64>], actual: &[f64]) -> Result<f64, GprError> {
    let xs: Vec<f64> = (1..=prefix.len()).map(|t| t as f64).collect();
    let x_next = (prefix.len() + 1) as f64;
    let mut sq = 0.0;
    for (dim, target) in actual.iter().enumerate() {
        let ys: Vec<f64> = prefix.iter().map(|bid| bid[dim]).collect();
        let gp = ScaledGp::fit(family, &xs, &ys, 1.0)?;
        let predicted = gp.predict(x_next)?.mean;
        sq += (predicted - target).powi(2);
    }
    Ok(sq.sqrt())
}

pub fn write_csv<W: Write>(scores: &[KernelScore], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kernel", "avg_distance", "n_sequences"])?;
    for s in scores {
        w.write_record([
            s.family.name().to_string(),
            s.avg_distance.to_string(),
            s.n_sequences.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parameters of the synthetic concession traces.
///
/// Each issue of a trace follows
/// `start + slope·t + amplitude·sin(2πt / period + phase) + ε`, with every
/// coefficient drawn per issue and `ε ~ N(0, noise²)`: a steady concession
/// overlaid with a back-and-forth of a few turns, so the traces carry
/// structure at two time scales.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub count: usize,
    pub length: usize,
    pub issues: usize,
    pub start: (f64, f64),
    pub slope: (f64, f64),
    pub amplitude: (f64, f64),
    pub period: (f64, f64),
    pub noise: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            count: 50,
            length: 20,
            issues: 3,
            start: (6.0, 9.0),
            slope: (-0.4, -0.1),
            amplitude: (0.3, 1.0),
            period: (3.0, 8.0),
            noise: 0.1,
        }
    }
}

pub fn synthetic_concession_traces(seed: u64, cfg: &TraceConfig) -> Vec<Sequence> {
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.noise).expect("noise is a valid standard deviation");
    (0..cfg.count)
        .map(|_| {
            let coeffs: Vec<[f64; 5]> = (0..cfg.issues)
                .map(|_| {
                    [
                        rng.gen_range(cfg.start.0..=cfg.start.1),
                        rng.gen_range(cfg.slope.0..=cfg.slope.1),
                        rng.gen_range(cfg.amplitude.0..=cfg.amplitude.1),
                        rng.gen_range(cfg.period.0..=cfg.period.1),
                        rng.gen_range(0.0..2.0 * PI),
                    ]
                })
                .collect();
            (1..=cfg.length)
                .map(|t| {
                    let t = t as f64;
                    coeffs
                        .iter()
                        .map(|[start, slope, amp, period, phase]| {
                            start + slope * t + amp * (2.0 * PI * t / period + phase).sin()
                                + noise.sample(&mut rng)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}
