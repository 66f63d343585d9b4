use rand::RngCore;
use rand_distr::{Distribution, Exp1};

use super::{Derivatives, ModelFamily, ParameterSpace, Support};
use crate::error::Result;
use crate::norms::MomentOracle;

/// Exponential law parameterised by its rate `θ`: `p(x, θ) = θ e^{−θx}`.
#[derive(Debug, Clone)]
pub struct ExponentialRate {
    space: ParameterSpace,
}

impl ExponentialRate {
    pub fn new(space: ParameterSpace) -> Result<Self> {
        let space = ParameterSpace::positive(space.lower, space.upper)?;
        Ok(ExponentialRate { space })
    }
}

impl ModelFamily for ExponentialRate {
    fn name(&self) -> &'static str {
        "exponential_rate"
    }

    fn theta_space(&self) -> ParameterSpace {
        self.space
    }

    fn support(&self) -> Support {
        Support::Interval {
            lower: 0.0,
            upper: f64::INFINITY,
            lower_open: false,
        }
    }

    fn eval(&self, x: f64, rate: f64) -> Derivatives {
        Derivatives {
            nll: -rate.ln() + rate * x,
            score: x - 1.0 / rate,
            curvature: 1.0 / (rate * rate),
            third: -2.0 / (rate * rate * rate),
        }
    }

    fn draw(&self, rate: f64, rng: &mut dyn RngCore) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / rate
    }

    fn quad_scale(&self, rate: f64) -> f64 {
        1.0 / rate
    }

    fn mean(&self, rate: f64) -> Option<f64> {
        Some(1.0 / rate)
    }

    fn closed_form_fisher(&self, rate: f64) -> Option<f64> {
        Some(1.0 / (rate * rate))
    }

    fn closed_form_kappa(&self, rate: f64) -> Option<f64> {
        Some(2.0 / (rate * rate * rate))
    }

    fn closed_form_mle(&self, sample: &[f64]) -> Option<f64> {
        Some(1.0 / crate::numeric::sum::mean(sample))
    }

    fn constant_envelope(&self) -> Option<f64> {
        Some(1.0 / (self.space.lower * self.space.lower))
    }

    // The difference of two independent Exp(θ) variables is Laplace(0, 1/θ).
    fn difference_oracle_override(&self, rate: f64) -> Option<MomentOracle> {
        Some(MomentOracle::laplace(1.0 / rate))
    }
}
