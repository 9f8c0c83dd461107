use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::GprError;

/// Covariance families over scalar turn indices. All have unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelFamily {
    Rbf,
    RationalQuadratic,
    /// Matérn with smoothness fixed at 3/2.
    Matern,
    ExpSineSquared,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::Rbf,
        KernelFamily::RationalQuadratic,
        KernelFamily::Matern,
        KernelFamily::ExpSineSquared,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Rbf => "RBF",
            KernelFamily::RationalQuadratic => "RQF",
            KernelFamily::Matern => "Matern",
            KernelFamily::ExpSineSquared => "ESS",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = GprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rbf" => Ok(KernelFamily::Rbf),
            "rqf" | "rq" | "rational-quadratic" => Ok(KernelFamily::RationalQuadratic),
            "matern" | "matern32" => Ok(KernelFamily::Matern),
            "ess" | "exp-sine-squared" | "periodic" => Ok(KernelFamily::ExpSineSquared),
            other => Err(GprError::InvalidParameter(format!("unknown kernel `{other}`"))),
        }
    }
}

pub const DEFAULT_NOISE: f64 = 1e-6;

/// A kernel family with its hyperparameters and observation noise.
///
/// `rq_alpha` is only read by the rational quadratic family and `period`
/// only by the exponential sine squared family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub family: KernelFamily,
    pub lengthscale: f64,
    pub rq_alpha: f64,
    pub period: f64,
    pub noise: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, lengthscale: f64, noise: f64) -> Result<Self, GprError> {
        Self {
            lengthscale,
            noise,
            ..Self::default_for(family)
        }
        .validated()
    }

    pub fn rational_quadratic(lengthscale: f64, alpha: f64, noise: f64) -> Result<Self, GprError> {
        Self {
            lengthscale,
            rq_alpha: alpha,
            noise,
            ..Self::default_for(KernelFamily::RationalQuadratic)
        }
        .validated()
    }

    pub fn exp_sine_squared(lengthscale: f64, period: f64, noise: f64) -> Result<Self, GprError> {
        Self {
            lengthscale,
            period,
            noise,
            ..Self::default_for(KernelFamily::ExpSineSquared)
        }
        .validated()
    }

    /// Starting hyperparameters, also returned for degenerate data.
    pub fn default_for(family: KernelFamily) -> Self {
        Self {
            family,
            lengthscale: 1.0,
            rq_alpha: 1.0,
            period: 5.0,
            noise: DEFAULT_NOISE,
        }
    }

    pub fn validated(self) -> Result<Self, GprError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GprError::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("lengthscale", self.lengthscale)?;
        positive("rq_alpha", self.rq_alpha)?;
        positive("period", self.period)?;
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(GprError::InvalidParameter(format!(
                "noise must be non-negative, got {}",
                self.noise
            )));
        }
        Ok(self)
    }

    /// Checked evaluation of `k(x1, x2)`.
    pub fn eval(&self, x1: f64, x2: f64) -> Result<f64, GprError> {
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(GprError::NonFinite);
        }
        Ok(self.cov(x1, x2))
    }

    #[inline]
    pub fn cov(&self, x1: f64, x2: f64) -> f64 {
        let r = (x1 - x2).abs();
        let l = self.lengthscale;
        match self.family {
            KernelFamily::Rbf => (-0.5 * r * r / (l * l)).exp(),
            KernelFamily::RationalQuadratic => {
                let a = self.rq_alpha;
                (1.0 + r * r / (2.0 * a * l * l)).powf(-a)
            }
            KernelFamily::Matern => {
                let z = 3f64.sqrt() * r / l;
                (1.0 + z) * (-z).exp()
            }
            KernelFamily::ExpSineSquared => {
                let s = (PI * r / self.period).sin();
                (-2.0 * s * s / (l * l)).exp()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_variance_on_the_diagonal() {
        for family in KernelFamily::ALL {
            let k = Kernel::default_for(family);
            for x in [-3.0, 0.0, 1.5, 1e4] {
                assert_eq!(k.eval(x, x).unwrap(), 1.0, "{family}");
            }
        }
    }

    #[test]
    fn rbf_at_unit_distance() {
        let k = Kernel::new(KernelFamily::Rbf, 1.0, 0.0).unwrap();
        assert!((k.eval(0.0, 1.0).unwrap() - 0.606_530_659_712_633_4).abs() < 1e-15);
    }

    #[test]
    fn symmetric() {
        for family in KernelFamily::ALL {
            let k = Kernel::default_for(family);
            assert_eq!(k.eval(2.0, 7.5).unwrap(), k.eval(7.5, 2.0).unwrap());
        }
    }

    #[test]
    fn rejects_non_finite_inputs_and_bad_params() {
        let k = Kernel::default_for(KernelFamily::Rbf);
        assert_eq!(k.eval(f64::NAN, 1.0), Err(GprError::NonFinite));
        assert_eq!(k.eval(0.0, f64::INFINITY), Err(GprError::NonFinite));
        assert!(Kernel::new(KernelFamily::Rbf, 0.0, 0.0).is_err());
        assert!(Kernel::new(KernelFamily::Rbf, 1.0, -1.0).is_err());
        assert!(Kernel::rational_quadratic(1.0, 0.0, 0.0).is_err());
        assert!(Kernel::exp_sine_squared(1.0, -2.0, 0.0).is_err());
    }

    #[test]
    fn ess_is_periodic() {
        let k = Kernel::exp_sine_squared(1.0, 4.0, 0.0).unwrap();
        assert!((k.cov(0.0, 4.0) - 1.0).abs() < 1e-12);
        assert!((k.cov(1.0, 3.0) - k.cov(5.0, 7.0)).abs() < 1e-12);
    }

    #[test]
    fn family_names_parse() {
        for family in KernelFamily::ALL {
            assert_eq!(family.name().parse::<KernelFamily>().unwrap(), family);
        }
        assert!("linear".parse::<KernelFamily>().is_err());
    }
}
