//! Seeded generator for the nonlinear benchmark domain.
//!
//! Every issue is numeric over `1..=10` with step 1. Each profile plants an
//! ideal bid and draws weighted hyper-rectangles over one to three issues,
//! every rectangle containing the ideal bid. The ideal bid therefore
//! satisfies all constraints, so the weight total is the exact maximum and
//! serves as the normalizer. Profile 2 draws wider rectangles than profile 1
//! and is easier to satisfy.

use rand::rngs::StdRng;
use rand::seq::index;
use rand::{Rng, SeedableRng};

use super::{Bid, Clause, Constraint, Domain, DomainSpec, Issue, PreferenceProfile, Value};

const VALUE_MIN: i64 = 1;
const VALUE_MAX: i64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub constraints_per_profile: usize,
    pub max_clause_issues: usize,
    /// Inclusive range of rectangle widths (in admissible values) per profile.
    pub widths: [(i64, i64); 2],
    pub max_weight: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            constraints_per_profile: 50,
            max_clause_issues: 3,
            widths: [(3, 6), (5, 8)],
            max_weight: 20,
        }
    }
}

/// Four bids `a, b, c, d` where `b` and `c` each change one of two issues of
/// `a` and `d` changes both, with `u(a) + u(d) != u(b) + u(c)`. No additive
/// per-issue utility can produce such a quadruple.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityWitness {
    pub bids: [Bid; 4],
    pub issues: (usize, usize),
}

impl NonlinearityWitness {
    pub fn interaction(&self, profile: &PreferenceProfile) -> f64 {
        let [a, b, c, d] = &self.bids;
        profile.eval(a) + profile.eval(d) - profile.eval(b) - profile.eval(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDomain {
    pub spec: DomainSpec,
    /// Per profile, a bid reaching utility exactly 1.
    pub maximizers: [Bid; 2],
    /// Per profile; absent only for single-issue domains.
    pub witnesses: [Option<NonlinearityWitness>; 2],
}

pub fn generate_benchmark_domain(seed: u64, issue_count: usize) -> GeneratedDomain {
    generate_with(seed, issue_count, &GeneratorConfig::default())
}

pub fn generate_with(seed: u64, issue_count: usize, cfg: &GeneratorConfig) -> GeneratedDomain {
    assert!(issue_count >= 1, "issue count must be at least 1");
    let mut rng = StdRng::seed_from_u64(seed);
    let issues = (1..=issue_count)
        .map(|i| {
            Issue::discrete(format!("issue{i:02}"), VALUE_MIN as f64, VALUE_MAX as f64, 1.0)
                .expect("benchmark issue is well formed")
        })
        .collect();
    let domain = Domain::new(issues).expect("benchmark keys are distinct");

    let mut profiles = Vec::with_capacity(2);
    let mut maximizers = Vec::with_capacity(2);
    let mut witnesses = Vec::with_capacity(2);
    for widths in cfg.widths {
        let ideal: Vec<i64> = (0..issue_count)
            .map(|_| rng.gen_range(VALUE_MIN..=VALUE_MAX))
            .collect();
        let mut constraints = Vec::with_capacity(cfg.constraints_per_profile);
        for c in 0..cfg.constraints_per_profile {
            let max_k = cfg.max_clause_issues.min(issue_count).max(1);
            // The first constraint couples two issues so a witness always exists.
            let k = if c == 0 && issue_count >= 2 {
                2
            } else {
                rng.gen_range(1..=max_k)
            };
            let mut chosen = index::sample(&mut rng, issue_count, k).into_vec();
            chosen.sort_unstable();
            let clauses = chosen
                .into_iter()
                .map(|issue| {
                    let width = rng.gen_range(widths.0..=widths.1).min(VALUE_MAX - VALUE_MIN + 1);
                    let offset = rng.gen_range(0..width);
                    let lo = (ideal[issue] - offset).clamp(VALUE_MIN, VALUE_MAX - width + 1);
                    Clause::Range {
                        issue,
                        min: lo as f64,
                        max: (lo + width - 1) as f64,
                    }
                })
                .collect();
            let weight = rng.gen_range(1..=cfg.max_weight) as f64;
            constraints.push(Constraint { clauses, weight });
        }
        let normalizer = constraints.iter().map(|c| c.weight).sum();
        let profile = PreferenceProfile::new(&domain, constraints, normalizer, 0.0)
            .expect("generated profile is well formed");
        let maximizer = Bid::new(ideal.iter().map(|v| Value::Number(*v as f64)).collect());
        debug_assert_eq!(profile.eval(&maximizer), 1.0);
        witnesses.push(find_witness(&profile, &maximizer));
        maximizers.push(maximizer);
        profiles.push(profile);
    }

    let [p1, p2]: [PreferenceProfile; 2] = profiles.try_into().expect("two profiles");
    let [m1, m2]: [Bid; 2] = maximizers.try_into().expect("two maximizers");
    let [w1, w2]: [Option<NonlinearityWitness>; 2] = witnesses.try_into().expect("two witnesses");
    GeneratedDomain {
        spec: DomainSpec::new(domain, [p1, p2]).expect("profiles reference declared issues"),
        maximizers: [m1, m2],
        witnesses: [w1, w2],
    }
}

/// Moves the ideal bid out of a two-issue rectangle along each issue. The
/// rectangle's weight shows up in `u(a) + u(d) - u(b) - u(c)` and no other
/// constraint can cancel it, since each contributes a non-negative amount.
fn find_witness(profile: &PreferenceProfile, ideal: &Bid) -> Option<NonlinearityWitness> {
    let outside = |min: f64, max: f64| {
        (VALUE_MIN..=VALUE_MAX)
            .map(|v| v as f64)
            .find(|v| *v < min || *v > max)
    };
    for constraint in profile.constraints() {
        let ranges: Vec<(usize, f64, f64)> = constraint
            .clauses
            .iter()
            .filter_map(|c| match c {
                Clause::Range { issue, min, max } => Some((*issue, *min, *max)),
                Clause::Allowed { .. } => None,
            })
            .collect();
        if ranges.len() < 2 {
            continue;
        }
        let (i, imin, imax) = ranges[0];
        let (j, jmin, jmax) = ranges[1];
        let (Some(vi), Some(vj)) = (outside(imin, imax), outside(jmin, jmax)) else {
            continue;
        };
        let a = ideal.clone();
        let b = a.clone().with_value(i, Value::Number(vi));
        let c = a.clone().with_value(j, Value::Number(vj));
        let d = b.clone().with_value(j, Value::Number(vj));
        let witness = NonlinearityWitness {
            bids: [a, b, c, d],
            issues: (i, j),
        };
        if witness.interaction(profile).abs() > 1e-12 {
            return Some(witness);
        }
    }
    None
}
