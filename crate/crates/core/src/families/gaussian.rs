use std::f64::consts::PI;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{Derivatives, ModelFamily, ParameterSpace, Support};
use crate::error::{Error, Result};
use crate::norms::MomentOracle;

/// `N(0, σ²)` parameterised by the variance `θ = σ²`.
#[derive(Debug, Clone)]
pub struct GaussianVariance {
    space: ParameterSpace,
}

impl GaussianVariance {
    pub fn new(space: ParameterSpace) -> Result<Self> {
        let space = ParameterSpace::positive(space.lower, space.upper)?;
        Ok(GaussianVariance { space })
    }
}

impl ModelFamily for GaussianVariance {
    fn name(&self) -> &'static str {
        "gaussian_variance"
    }

    fn theta_space(&self) -> ParameterSpace {
        self.space
    }

    fn support(&self) -> Support {
        Support::Interval {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            lower_open: true,
        }
    }

    fn eval(&self, x: f64, v: f64) -> Derivatives {
        let x2 = x * x;
        Derivatives {
            nll: 0.5 * (2.0 * PI * v).ln() + x2 / (2.0 * v),
            score: 1.0 / (2.0 * v) - x2 / (2.0 * v * v),
            curvature: -1.0 / (2.0 * v * v) + x2 / (v * v * v),
            third: 1.0 / (v * v * v) - 3.0 * x2 / (v * v * v * v),
        }
    }

    fn draw(&self, v: f64, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        v.sqrt() * z
    }

    fn quad_scale(&self, v: f64) -> f64 {
        v.sqrt()
    }

    fn mean(&self, _v: f64) -> Option<f64> {
        Some(0.0)
    }

    fn closed_form_fisher(&self, v: f64) -> Option<f64> {
        Some(1.0 / (2.0 * v * v))
    }

    fn closed_form_kappa(&self, _v: f64) -> Option<f64> {
        Some(0.0)
    }

    fn closed_form_mle(&self, sample: &[f64]) -> Option<f64> {
        Some(crate::numeric::sum::mean(
            &sample.iter().map(|x| x * x).collect::<Vec<_>>(),
        ))
    }

    fn centered_oracle_override(&self, v: f64) -> Option<MomentOracle> {
        Some(MomentOracle::gaussian(v.sqrt()))
    }

    fn difference_oracle_override(&self, v: f64) -> Option<MomentOracle> {
        Some(MomentOracle::gaussian((2.0 * v).sqrt()))
    }
}

/// `N(μ, σ²)` with known `σ`, parameterised by the mean `θ = μ`.
#[derive(Debug, Clone)]
pub struct GaussianMean {
    sigma: f64,
    space: ParameterSpace,
}

impl GaussianMean {
    pub fn new(sigma: f64, space: ParameterSpace) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(GaussianMean { sigma, space })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl ModelFamily for GaussianMean {
    fn name(&self) -> &'static str {
        "gaussian_mean"
    }

    fn theta_space(&self) -> ParameterSpace {
        self.space
    }

    fn support(&self) -> Support {
        Support::Interval {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            lower_open: true,
        }
    }

    fn eval(&self, x: f64, mu: f64) -> Derivatives {
        let s2 = self.sigma * self.sigma;
        let r = x - mu;
        Derivatives {
            nll: 0.5 * (2.0 * PI * s2).ln() + r * r / (2.0 * s2),
            score: -r / s2,
            curvature: 1.0 / s2,
            third: 0.0,
        }
    }

    fn draw(&self, mu: f64, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        mu + self.sigma * z
    }

    fn quad_scale(&self, _mu: f64) -> f64 {
        self.sigma
    }

    fn mean(&self, mu: f64) -> Option<f64> {
        Some(mu)
    }

    fn closed_form_fisher(&self, _mu: f64) -> Option<f64> {
        Some(1.0 / (self.sigma * self.sigma))
    }

    fn closed_form_kappa(&self, _mu: f64) -> Option<f64> {
        Some(0.0)
    }

    fn closed_form_mle(&self, sample: &[f64]) -> Option<f64> {
        Some(crate::numeric::sum::mean(sample))
    }

    fn constant_envelope(&self) -> Option<f64> {
        Some(1.0 / (self.sigma * self.sigma))
    }

    fn centered_oracle_override(&self, _mu: f64) -> Option<MomentOracle> {
        Some(MomentOracle::gaussian(self.sigma))
    }

    fn difference_oracle_override(&self, _mu: f64) -> Option<MomentOracle> {
        Some(MomentOracle::gaussian(
            std::f64::consts::SQRT_2 * self.sigma,
        ))
    }
}
