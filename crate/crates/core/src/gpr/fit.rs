//! Hyperparameter fitting by maximizing the log marginal likelihood.
//!
//! The search runs a bounded Nelder–Mead in log-parameter space from four
//! deterministic starts (the first is the default kernel) and keeps the best
//! result. Points outside the box are projected back onto it.

use super::model::GprModel;
use super::{GprError, Kernel, KernelFamily};

pub const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-2, 1e3);
pub const RQ_ALPHA_BOUNDS: (f64, f64) = (1e-2, 1e2);
pub const PERIOD_BOUNDS: (f64, f64) = (1.0, 1e3);
pub const NOISE_BOUNDS: (f64, f64) = (1e-6, 1.0);

const MAX_EVALS_PER_START: usize = 120;

/// Log marginal likelihood of `ys` under `kernel`, `-inf` when the
/// covariance cannot be factored.
pub fn log_marginal_likelihood(kernel: &Kernel, xs: &[f64], ys: &[f64]) -> f64 {
    GprModel::new(*kernel, xs.to_vec(), ys.to_vec())
        .map(|m| m.log_marginal_likelihood())
        .unwrap_or(f64::NEG_INFINITY)
}

pub fn fit_hyperparams(xs: &[f64], ys: &[f64], family: KernelFamily) -> Result<Kernel, GprError> {
    if xs.len() != ys.len() {
        return Err(GprError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(GprError::TooFewPoints(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(GprError::NonFinite);
    }
    let default = Kernel::default_for(family);
    let (lo, hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(*y), b.max(*y)));
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        return Ok(default);
    }

    let space = ParamSpace::new(family);
    let objective = |theta: &[f64]| -> f64 {
        let lml = log_marginal_likelihood(&space.kernel(theta), xs, ys);
        if lml.is_finite() {
            -lml
        } else {
            f64::INFINITY
        }
    };

    let mut best_theta = space.encode(&default);
    let mut best_value = objective(&best_theta);
    for start in space.starts() {
        let (theta, value) = nelder_mead(&objective, &start, &space.bounds, MAX_EVALS_PER_START);
        if value < best_value {
            best_value = value;
            best_theta = theta;
        }
    }
    Ok(space.kernel(&best_theta))
}

/// Log-space coordinates: `[ln ℓ, (ln α | ln p)?, ln σ_n²]`.
struct ParamSpace {
    family: KernelFamily,
    bounds: Vec<(f64, f64)>,
}

impl ParamSpace {
    fn new(family: KernelFamily) -> Self {
        let log = |(a, b): (f64, f64)| (a.ln(), b.ln());
        let mut bounds = vec![log(LENGTHSCALE_BOUNDS)];
        match family {
            KernelFamily::RationalQuadratic => bounds.push(log(RQ_ALPHA_BOUNDS)),
            KernelFamily::ExpSineSquared => bounds.push(log(PERIOD_BOUNDS)),
            KernelFamily::Rbf | KernelFamily::Matern => {}
        }
        bounds.push(log(NOISE_BOUNDS));
        Self { family, bounds }
    }

    fn has_extra(&self) -> bool {
        self.bounds.len() == 3
    }

    fn encode(&self, k: &Kernel) -> Vec<f64> {
        let mut theta = vec![k.lengthscale.ln()];
        match self.family {
            KernelFamily::RationalQuadratic => theta.push(k.rq_alpha.ln()),
            KernelFamily::ExpSineSquared => theta.push(k.period.ln()),
            _ => {}
        }
        theta.push(k.noise.max(NOISE_BOUNDS.0).ln());
        project(&theta, &self.bounds)
    }

    fn kernel(&self, theta: &[f64]) -> Kernel {
        let theta = project(theta, &self.bounds);
        let mut k = Kernel::default_for(self.family);
        k.lengthscale = theta[0].exp();
        match self.family {
            KernelFamily::RationalQuadratic => k.rq_alpha = theta[1].exp(),
            KernelFamily::ExpSineSquared => k.period = theta[1].exp(),
            _ => {}
        }
        k.noise = theta[theta.len() - 1].exp();
        k
    }

    fn starts(&self) -> Vec<Vec<f64>> {
        let lengthscales = [1.0f64, 3.0, 10.0, 0.5];
        let extras = match self.family {
            KernelFamily::ExpSineSquared => [5.0f64, 10.0, 3.0, 20.0],
            _ => [1.0f64, 0.5, 3.0, 10.0],
        };
        let noises = [1e-4f64, 1e-2, 1e-1, 1e-3];
        (0..4)
            .map(|i| {
                let mut t = vec![lengthscales[i].ln()];
                if self.has_extra() {
                    t.push(extras[i].ln());
                }
                t.push(noises[i].ln());
                project(&t, &self.bounds)
            })
            .collect()
    }
}

fn project(theta: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    theta
        .iter()
        .zip(bounds)
        .map(|(t, (lo, hi))| t.clamp(*lo, *hi))
        .collect()
}

/// Box-projected Nelder–Mead minimization. Returns the best point and value.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: Vec<f64>| {
        evals.set(evals.get() + 1);
        let x = project(&x, bounds);
        let v = f(&x);
        (x, v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push(eval(start.to_vec()));
    for i in 0..d {
        let mut x = start.to_vec();
        let (lo, hi) = bounds[i];
        // Step one unit inward so the vertex is distinct after projection.
        x[i] = if x[i] + 1.0 <= hi { x[i] + 1.0 } else { (x[i] - 1.0).max(lo) };
        simplex.push(eval(x));
    }

    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (worst - best).abs() <= 1e-10 * (1.0 + best.abs()) && best.is_finite() {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(x, _)| x[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = eval(along(1.0));
        if reflected.1 < simplex[0].1 {
            let expanded = eval(along(2.0));
            simplex[d] = if expanded.1 < reflected.1 { expanded } else { reflected };
        } else if reflected.1 < simplex[d - 1].1 {
            simplex[d] = reflected;
        } else {
            let contracted = if reflected.1 < simplex[d].1 {
                eval(along(0.5))
            } else {
                eval(along(-0.5))
            };
            if contracted.1 < simplex[d].1.min(reflected.1) {
                simplex[d] = contracted;
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = anchor
                        .iter()
                        .zip(&vertex.0)
                        .map(|(a, v)| a + 0.5 * (v - a))
                        .collect();
                    *vertex = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
