//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use negotiator::domains::{Bid, Clause, Constraint, Domain, Issue, PreferenceProfile, Value};
use negotiator::gpr::{Kernel, KernelFamily};
use negotiator::opponent::OpponentModel;
use rand::rngs::StdRng;
use rand::Rng;

/// Covariance written out from the kernel definitions, without going
/// through the library's evaluation.
pub fn reference_cov(k: &Kernel, x1: f64, x2: f64) -> f64 {
    let r = (x1 - x2).abs();
    let l = k.lengthscale;
    match k.family {
        KernelFamily::Rbf => (-(r * r) / (2.0 * l * l)).exp(),
        KernelFamily::RationalQuadratic => {
            (1.0 + (r * r) / (2.0 * k.rq_alpha * l * l)).powf(-k.rq_alpha)
        }
        KernelFamily::Matern => {
            let s = 3f64.sqrt() * r / l;
            (1.0 + s) * (-s).exp()
        }
        KernelFamily::ExpSineSquared => {
            let s = (PI * r / k.period).sin();
            (-2.0 * s * s / (l * l)).exp()
        }
    }
}

/// Posterior mean and variance by explicit matrix inversion on centered
/// outputs, with `diag` added to the covariance diagonal.
pub fn dense_posterior(k: &Kernel, xs: &[f64], ys: &[f64], diag: f64, x_star: f64) -> (f64, f64) {
    let n = xs.len();
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| {
        reference_cov(k, xs[i], xs[j]) + if i == j { diag } else { 0.0 }
    });
    let inv = gram.try_inverse().expect("covariance is invertible");
    let k_star = DVector::from_fn(n, |i, _| reference_cov(k, x_star, xs[i]));
    let y = DVector::from_fn(n, |i, _| ys[i] - y_mean);
    let mean = y_mean + (k_star.transpose() * &inv * y)[(0, 0)];
    let var = reference_cov(k, x_star, x_star) - (k_star.transpose() * &inv * &k_star)[(0, 0)];
    (mean, var)
}

pub const FAMILIES: [KernelFamily; 4] = [
    KernelFamily::Rbf,
    KernelFamily::RationalQuadratic,
    KernelFamily::Matern,
    KernelFamily::ExpSineSquared,
];

/// A well-conditioned random regression problem: distinct turn indices,
/// moderate lengthscales and noise.
pub struct GpInstance {
    pub kernel: Kernel,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub x_star: f64,
}

pub fn random_instance(rng: &mut StdRng, family: KernelFamily) -> GpInstance {
    let n = rng.gen_range(1..=8);
    let mut turns: Vec<u32> = rand::seq::index::sample(rng, 30, n).into_iter().map(|t| t as u32 + 1).collect();
    turns.sort_unstable();
    let xs: Vec<f64> = turns.iter().map(|&t| t as f64).collect();
    let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
    let mut kernel = Kernel::default_for(family);
    kernel.lengthscale = rng.gen_range(0.5..4.0);
    kernel.rq_alpha = rng.gen_range(0.2..5.0);
    kernel.period = rng.gen_range(2.0..12.0);
    kernel.noise = rng.gen_range(1e-3..0.5);
    GpInstance { kernel, xs, ys, x_star: rng.gen_range(0.0..35.0) }
}

/// Issue `x` over `1..=n`, own utility `x / n`.
pub fn line_domain(n: usize) -> (Domain, PreferenceProfile) {
    let d = Domain::new(vec![Issue::discrete("x", 1.0, n as f64, 1.0).unwrap()]).unwrap();
    let constraints = (1..=n)
        .map(|k| Constraint {
            clauses: vec![Clause::Range { issue: 0, min: k as f64, max: n as f64 }],
            weight: 1.0,
        })
        .collect();
    let p = PreferenceProfile::new(&d, constraints, n as f64, 0.0).unwrap();
    (d, p)
}

pub fn line_bid(x: usize) -> Bid {
    Bid::new(vec![Value::Number(x as f64)])
}

/// Opponent on a line domain with a fixed utility table (index `x - 1`)
/// that always proposes the same bid.
pub struct TableStub {
    pub utilities: Vec<f64>,
    pub planned: usize,
}

impl OpponentModel for TableStub {
    fn estimated_utility(&self, bid: &Bid) -> f64 {
        self.utilities[bid.values()[0].as_f64() as usize - 1]
    }
    fn sample_bid(&self, _: usize, _: &mut StdRng) -> Bid {
        line_bid(self.planned)
    }
}

/// Best opening bid on the line game against a `TableStub`, by enumeration.
///
/// An accepted bid ends the game at once. A rejected one draws the stub's
/// counter-offer, after which the best the agent can do is the better of
/// accepting it and eventually landing its best acceptable bid, one
/// exchange later. Outcomes compare by utility, then by length.
pub fn line_game_optimum(stub: &TableStub, own: &PreferenceProfile, n: usize) -> usize {
    let counter = own.eval(&line_bid(stub.planned));
    let accepts = |x: usize| stub.utilities[x - 1] >= stub.utilities[stub.planned - 1];
    let best_accepted = (1..=n)
        .filter(|&x| accepts(x))
        .map(|x| own.eval(&line_bid(x)))
        .fold(f64::NEG_INFINITY, f64::max);
    let value = |x: usize| -> (f64, i32) {
        if accepts(x) {
            (own.eval(&line_bid(x)), -1)
        } else {
            (counter.max(best_accepted), -3)
        }
    };
    (1..=n)
        .max_by(|&a, &b| {
            let (ua, la) = value(a);
            let (ub, lb) = value(b);
            ua.total_cmp(&ub).then(la.cmp(&lb)).then(b.cmp(&a))
        })
        .expect("non-empty game")
}

/// The stub used for the line-game oracle: acceptance set `{1, 2, 4, 6}`,
/// counter-offer 2.
pub fn ten_bid_stub() -> TableStub {
    TableStub {
        utilities: vec![0.9, 0.6, 0.2, 0.7, 0.1, 0.65, 0.3, 0.1, 0.2, 0.05],
        planned: 2,
    }
}

/// One run of the planted-hypothesis experiment on the benchmark domain.
///
/// A hypothesis is picked at random from a freshly generated set and used to
/// produce `updates` opponent bids: at step `t` the bid among `candidates`
/// uniform draws whose planted utility is closest to the assumed concession
/// target. Returns whether the planted hypothesis ends as the posterior
/// argmax.
pub fn planted_hypothesis_recovered(seed: u64, updates: u64, candidates: usize) -> bool {
    use negotiator::domains::generate_benchmark_domain;
    use negotiator::opponent::{HypothesisSet, LearnerConfig};
    use rand::SeedableRng;

    let mut rng = StdRng::seed_from_u64(seed);
    let domain = generate_benchmark_domain(seed, 10).spec.domain().clone();
    let cfg = LearnerConfig::default();
    let mut set = HypothesisSet::generate(&domain, cfg.clone(), &mut rng);
    let planted = rng.gen_range(0..set.len());
    let h = set.hypotheses()[planted].clone();
    for t in 0..updates {
        let target = (1.0 - cfg.beta * t as f64).max(cfg.floor);
        let bid = (0..candidates)
            .map(|_| domain.sample_bid(&mut rng))
            .min_by(|a, b| (h.utility(a) - target).abs().total_cmp(&(h.utility(b) - target).abs()))
            .expect("candidates >= 1");
        set.update(t, &bid);
    }
    set.argmax() == planted
}
