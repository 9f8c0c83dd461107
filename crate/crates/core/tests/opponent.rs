mod common;

use common::dense_posterior;
use negotiator::domains::{Bid, Domain, Issue, Value};
use negotiator::opponent::{
    HypothesisSet, IssueForecast, LearnedOpponent, LearnerConfig, OpponentConfig, OpponentModel, StrategyConfig,
    StrategyModel,
};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn constant_opponent_is_predicted_exactly() {
    let d = Domain::new(vec![
        Issue::discrete("a", 1.0, 10.0, 1.0).unwrap(),
        Issue::discrete("b", 1.0, 10.0, 1.0).unwrap(),
        Issue::continuous("c", 0.0, 1.0).unwrap(),
    ])
    .unwrap();
    let b = Bid::new(vec![Value::Number(7.0), Value::Number(2.0), Value::Number(0.25)]);
    let mut m = StrategyModel::new(&d, StrategyConfig::default());
    for t in 1..=10 {
        m.observe(t, &b).unwrap();
    }
    let mut rng = StdRng::seed_from_u64(1);
    let mut hits = [0usize; 3];
    for _ in 0..1000 {
        let p = m.predict_next_bid(11, &mut rng).unwrap();
        for (i, h) in hits.iter_mut().enumerate() {
            if p.values()[i] == b.values()[i] {
                *h += 1;
            }
        }
    }
    assert!(hits.iter().all(|&h| h >= 990), "{hits:?}");
}

#[test]
fn linear_trend_forecast_matches_dense_oracle() {
    let d = Domain::new(vec![Issue::continuous("x", 0.0, 10.0).unwrap()]).unwrap();
    let mut m = StrategyModel::new(&d, StrategyConfig::default());
    let xs: Vec<f64> = (1..=10).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 9.0 - 0.5 * x).collect();
    for (x, y) in xs.iter().zip(&ys) {
        m.observe(*x as u64, &Bid::new(vec![Value::Number(*y)])).unwrap();
    }
    let forecast = m.forecast(11).unwrap();
    let IssueForecast::Numeric(p) = forecast[0] else { panic!("numeric issue") };

    // The model works on outputs divided by their population std.
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let scale = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();
    let scaled: Vec<f64> = ys.iter().map(|y| y / scale).collect();
    let k = m.kernel(0).unwrap();
    let (o_mean, o_var) = dense_posterior(k, &xs, &scaled, k.noise, 11.0);
    assert!((p.mean - o_mean * scale).abs() < 1e-6, "{} vs {}", p.mean, o_mean * scale);
    assert!((p.variance - o_var.max(0.0) * scale * scale).abs() < 1e-6);
    assert!((p.mean - 3.5).abs() < 0.5, "forecast {} for trend value 3.5", p.mean);
}

#[test]
fn smoothed_categorical_forecast() {
    let d = Domain::new(vec![Issue::categorical("c", ["A", "B"]).unwrap()]).unwrap();
    let mut m = StrategyModel::new(&d, StrategyConfig::default());
    for t in 1..=4 {
        m.observe(t, &Bid::new(vec![Value::Category(0)])).unwrap();
    }
    let f = m.forecast(5).unwrap();
    let IssueForecast::Categorical(probs) = &f[0] else { panic!("categorical issue") };
    assert!((probs[1] - 0.1 / 4.2).abs() < 1e-12);
    assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
}

#[test]
fn uniform_prior_over_generated_hypotheses() {
    let d = Domain::new(vec![Issue::discrete("a", 1.0, 10.0, 1.0).unwrap()]).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let set = HypothesisSet::generate(&d, LearnerConfig::default(), &mut rng);
    assert_eq!(set.len(), 500);
    assert!(set.posterior().iter().all(|p| (p - 0.002).abs() < 1e-15));
    let one = HypothesisSet::generate(&d, LearnerConfig { hypotheses: 1, ..Default::default() }, &mut rng);
    assert_eq!(one.posterior(), &[1.0]);
}

#[test]
fn planted_hypothesis_is_recovered() {
    let hits = (0..10).filter(|&s| common::planted_hypothesis_recovered(1000 + s, 30, 2000)).count();
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn snapshot_agrees_with_live_model() {
    let d = negotiator::domains::generate_benchmark_domain(5, 10).spec.domain().clone();
    let mut rng = StdRng::seed_from_u64(12);
    let mut learned = LearnedOpponent::new(&d, &OpponentConfig::default(), &mut rng);
    let snap = learned.snapshot(&d, 4).unwrap();
    assert_eq!(snap.horizon(), 0);
    for _ in 0..6 {
        learned.observe(&d.sample_bid(&mut rng)).unwrap();
    }
    let snap = learned.snapshot(&d, 4).unwrap();
    assert_eq!(snap.horizon(), 4);
    for _ in 0..200 {
        let b = d.sample_bid(&mut rng);
        let est = learned.preferences().estimated_utility(&b);
        assert!((snap.estimated_utility(&b) - est).abs() < 1e-12);
        let far = snap.sample_bid(50, &mut rng);
        d.validate(&far).unwrap();
    }
}
