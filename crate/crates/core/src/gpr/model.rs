use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::fit::fit_hyperparams;
use super::linalg::Cholesky;
use super::{GprError, Kernel, KernelFamily};

/// Jitter ladder tried when `K + σ_n² I` fails to factor.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Gaussian predictive distribution at one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }

    /// Draw from `Normal(mean, variance)`; exactly `mean` when the variance is 0.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sd = self.std_dev();
        if sd == 0.0 {
            return self.mean;
        }
        Normal::new(self.mean, sd)
            .expect("finite positive standard deviation")
            .sample(rng)
    }
}

/// A GP conditioned on scalar observations `(x_i, y_i)`.
///
/// Outputs are centered on their mean before conditioning and the mean is
/// added back to predictions. The covariance `K + σ_n² I` is factored once
/// with Cholesky; a small diagonal jitter is added only if that fails.
#[derive(Debug, Clone)]
pub struct GprModel {
    kernel: Kernel,
    xs: Vec<f64>,
    ys: Vec<f64>,
    y_mean: f64,
    centered: Vec<f64>,
    chol: Cholesky,
    weights: Vec<f64>,
    jitter: f64,
}

impl GprModel {
    pub fn new(kernel: Kernel, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, GprError> {
        let kernel = kernel.validated()?;
        if xs.len() != ys.len() {
            return Err(GprError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(GprError::NonFinite);
        }
        let n = xs.len();
        let y_mean = if n == 0 {
            0.0
        } else {
            ys.iter().sum::<f64>() / n as f64
        };
        let centered: Vec<f64> = ys.iter().map(|y| y - y_mean).collect();
        let gram = gram_matrix(&kernel, &xs);

        let mut factored = None;
        for jitter in JITTER_LADDER {
            let mut a = gram.clone();
            for i in 0..n {
                a[i * n + i] += kernel.noise + jitter;
            }
            if let Some(chol) = Cholesky::factor(&a, n) {
                factored = Some((chol, jitter));
                break;
            }
        }
        let (chol, jitter) = factored.ok_or(GprError::NotPositiveDefinite)?;
        let weights = chol.solve(&centered);
        Ok(Self {
            kernel,
            xs,
            ys,
            y_mean,
            centered,
            chol,
            weights,
            jitter,
        })
    }

    /// Fits hyperparameters for `family`, then conditions on the data.
    pub fn fit(family: KernelFamily, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, GprError> {
        let kernel = fit_hyperparams(&xs, &ys, family)?;
        Self::new(kernel, xs, ys)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Diagonal jitter that was needed to factor the covariance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and unclamped variance at `x_star`.
    pub fn predict_unclamped(&self, x_star: f64) -> Result<Prediction, GprError> {
        if !x_star.is_finite() {
            return Err(GprError::NonFinite);
        }
        let k_ss = self.kernel.cov(x_star, x_star);
        if self.xs.is_empty() {
            return Ok(Prediction {
                mean: 0.0,
                variance: k_ss + self.kernel.noise,
            });
        }
        let k_star: Vec<f64> = self.xs.iter().map(|x| self.kernel.cov(x_star, *x)).collect();
        let mean = self.y_mean + dot(&k_star, &self.weights);
        let v = self.chol.solve_lower(&k_star);
        Ok(Prediction {
            mean,
            variance: k_ss - dot(&v, &v),
        })
    }

    /// Posterior at `x_star`, variance clamped at 0.
    pub fn predict(&self, x_star: f64) -> Result<Prediction, GprError> {
        let mut p = self.predict_unclamped(x_star)?;
        p.variance = p.variance.max(0.0);
        Ok(p)
    }

    /// Log marginal likelihood of the centered outputs.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.xs.len() as f64;
        -0.5 * dot(&self.centered, &self.weights)
            - self.chol.half_log_det()
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Row-major gram matrix `K_ij = k(x_i, x_j)` without the noise term.
pub fn gram_matrix(kernel: &Kernel, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = kernel.cov(xs[i], xs[i]);
        for j in 0..i {
            let v = kernel.cov(xs[i], xs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A GP on standardized outputs.
///
/// Outputs are divided by their population standard deviation before
/// regression so the unit-variance kernels match the data scale; predictions
/// are mapped back. Data with zero spread yields a constant predictor with
/// zero variance. With fewer than two points `fallback_scale` is used.
#[derive(Debug, Clone)]
pub struct ScaledGp {
    inner: ScaledInner,
    scale: f64,
}

#[derive(Debug, Clone)]
enum ScaledInner {
    Model(GprModel),
    Constant(f64),
}

impl ScaledGp {
    /// Conditions with fixed hyperparameters.
    pub fn with_kernel(
        kernel: Kernel,
        xs: &[f64],
        ys: &[f64],
        fallback_scale: f64,
    ) -> Result<Self, GprError> {
        Self::build(xs, ys, fallback_scale, |xs, ys| GprModel::new(kernel, xs, ys))
    }

    /// Fits hyperparameters of `family` on the standardized data first.
    pub fn fit(
        family: KernelFamily,
        xs: &[f64],
        ys: &[f64],
        fallback_scale: f64,
    ) -> Result<Self, GprError> {
        Self::build(xs, ys, fallback_scale, |xs, ys| GprModel::fit(family, xs, ys))
    }

    fn build(
        xs: &[f64],
        ys: &[f64],
        fallback_scale: f64,
        make: impl FnOnce(Vec<f64>, Vec<f64>) -> Result<GprModel, GprError>,
    ) -> Result<Self, GprError> {
        let n = ys.len();
        let scale = if n >= 2 {
            let mean = ys.iter().sum::<f64>() / n as f64;
            let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
            if var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
                return Ok(Self {
                    inner: ScaledInner::Constant(mean),
                    scale: 0.0,
                });
            }
            var.sqrt()
        } else {
            fallback_scale
        };
        let scaled: Vec<f64> = ys.iter().map(|y| y / scale).collect();
        Ok(Self {
            inner: ScaledInner::Model(make(xs.to_vec(), scaled)?),
            scale,
        })
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        match &self.inner {
            ScaledInner::Model(m) => Some(m.kernel()),
            ScaledInner::Constant(_) => None,
        }
    }

    pub fn predict(&self, x_star: f64) -> Result<Prediction, GprError> {
        match &self.inner {
            ScaledInner::Constant(c) => Ok(Prediction {
                mean: *c,
                variance: 0.0,
            }),
            ScaledInner::Model(m) => {
                let p = m.predict(x_star)?;
                Ok(Prediction {
                    mean: p.mean * self.scale,
                    variance: p.variance * self.scale * self.scale,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn prior_without_data() {
        let k = Kernel::new(KernelFamily::Rbf, 1.0, 1e-6).unwrap();
        let m = GprModel::new(k, vec![], vec![]).unwrap();
        let p = m.predict(3.0).unwrap();
        assert_eq!(p.mean, 0.0);
        assert_eq!(p.variance, 1.0 + 1e-6);
    }

    #[test]
    fn interpolates_single_datum() {
        let k = Kernel::new(KernelFamily::Rbf, 1.0, 0.0).unwrap();
        let m = GprModel::new(k, vec![1.0], vec![0.8]).unwrap();
        let p = m.predict(1.0).unwrap();
        assert!((p.mean - 0.8).abs() < 1e-15);
        assert_eq!(p.variance, 0.0);
    }

    #[test]
    fn two_points_match_closed_form() {
        // Independent 2x2 evaluation: y centered on 0.8, K⁻¹ by the adjugate.
        let k = Kernel::new(KernelFamily::Rbf, 1.0, 1e-6).unwrap();
        let m = GprModel::new(k, vec![1.0, 2.0], vec![0.9, 0.7]).unwrap();
        let p = m.predict(3.0).unwrap();

        let e = (-0.5f64).exp();
        let (a, b) = (1.0 + 1e-6, e);
        let det = a * a - b * b;
        let inv = [a / det, -b / det, -b / det, a / det];
        let ks = [(-2.0f64).exp(), e];
        let y = [0.1, -0.1];
        let w = [inv[0] * y[0] + inv[1] * y[1], inv[2] * y[0] + inv[3] * y[1]];
        let mean = 0.8 + ks[0] * w[0] + ks[1] * w[1];
        let kinv_ks = [inv[0] * ks[0] + inv[1] * ks[1], inv[2] * ks[0] + inv[3] * ks[1]];
        let var = 1.0 - (ks[0] * kinv_ks[0] + ks[1] * kinv_ks[1]);
        assert!((p.mean - mean).abs() < 1e-12, "{} vs {mean}", p.mean);
        assert!((p.variance - var).abs() < 1e-12, "{} vs {var}", p.variance);
    }

    #[test]
    fn duplicate_turns_need_jitter() {
        let k = Kernel::new(KernelFamily::Rbf, 1.0, 0.0).unwrap();
        let m = GprModel::new(k, vec![2.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(m.jitter() > 0.0);
        assert!((m.predict(2.0).unwrap().mean - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_mismatched_and_non_finite_data() {
        let k = Kernel::default_for(KernelFamily::Rbf);
        assert!(matches!(
            GprModel::new(k, vec![1.0], vec![]),
            Err(GprError::LengthMismatch { .. })
        ));
        assert_eq!(
            GprModel::new(k, vec![f64::NAN], vec![1.0]).unwrap_err(),
            GprError::NonFinite
        );
    }

    #[test]
    fn zero_variance_sample_is_the_mean() {
        let p = Prediction { mean: 0.4, variance: 0.0 };
        let mut rng = StdRng::seed_from_u64(1);
        assert_eq!(p.sample(&mut rng), 0.4);
    }

    #[test]
    fn standard_normal_draws_center_on_zero() {
        let p = Prediction { mean: 0.0, variance: 1.0 };
        let mut rng = StdRng::seed_from_u64(8);
        let n = 10_000;
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        // 5 standard errors of the sample mean.
        assert!(mean.abs() < 0.05, "{mean}");
    }

    #[test]
    fn draws_are_deterministic_per_seed() {
        let p = Prediction { mean: 1.0, variance: 2.0 };
        let a: Vec<f64> = {
            let mut rng = StdRng::seed_from_u64(42);
            (0..5).map(|_| p.sample(&mut rng)).collect()
        };
        let b: Vec<f64> = {
            let mut rng = StdRng::seed_from_u64(42);
            (0..5).map(|_| p.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_constant_data_is_exact() {
        let gp = ScaledGp::fit(KernelFamily::RationalQuadratic, &[1.0, 2.0, 3.0], &[4.0; 3], 1.0)
            .unwrap();
        let p = gp.predict(4.0).unwrap();
        assert_eq!(p.mean, 4.0);
        assert_eq!(p.variance, 0.0);
    }

    #[test]
    fn scaled_model_interpolates_in_original_units() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [9.0, 7.0, 6.0, 3.0];
        let k = Kernel::rational_quadratic(2.0, 1.0, 0.0).unwrap();
        let gp = ScaledGp::with_kernel(k, &xs, &ys, 1.0).unwrap();
        for (x, y) in xs.iter().zip(ys) {
            assert!((gp.predict(*x).unwrap().mean - y).abs() < 1e-6);
        }
    }
}
