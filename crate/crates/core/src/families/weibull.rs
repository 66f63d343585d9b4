use rand::{Rng, RngCore};
use rand_distr::OpenClosed01;

use super::{Derivatives, ModelFamily, ParameterSpace, Support};
use crate::error::{Error, Result};
use crate::numeric::special::ln_gamma;

/// Weibull law with known integer shape `k ≥ 2`, parameterised by the
/// scale `θ = λ`.
#[derive(Debug, Clone)]
pub struct WeibullScale {
    shape: u32,
    space: ParameterSpace,
}

impl WeibullScale {
    pub fn new(shape: u32, space: ParameterSpace) -> Result<Self> {
        if shape < 2 {
            return Err(Error::Config(format!(
                "weibull shape must be an integer ≥ 2, got {shape}"
            )));
        }
        let space = ParameterSpace::positive(space.lower, space.upper)?;
        Ok(WeibullScale { shape, space })
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }
}

impl ModelFamily for WeibullScale {
    fn name(&self) -> &'static str {
        "weibull_scale"
    }

    fn theta_space(&self) -> ParameterSpace {
        self.space
    }

    fn support(&self) -> Support {
        Support::Interval {
            lower: 0.0,
            upper: f64::INFINITY,
            lower_open: true,
        }
    }

    fn eval(&self, x: f64, lambda: f64) -> Derivatives {
        let k = f64::from(self.shape);
        let u = (x / lambda).powi(self.shape as i32);
        Derivatives {
            nll: -k.ln() + k * lambda.ln() - (k - 1.0) * x.ln() + u,
            score: k / lambda - k * u / lambda,
            curvature: (-k + k * (k + 1.0) * u) / (lambda * lambda),
            third: (2.0 * k - k * (k + 1.0) * (k + 2.0) * u) / (lambda * lambda * lambda),
        }
    }

    fn draw(&self, lambda: f64, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.sample(OpenClosed01);
        lambda * (-u.ln()).powf(1.0 / f64::from(self.shape))
    }

    fn quad_scale(&self, lambda: f64) -> f64 {
        lambda
    }

    fn mean(&self, lambda: f64) -> Option<f64> {
        Some(lambda * ln_gamma(1.0 + 1.0 / f64::from(self.shape)).exp())
    }

    fn closed_form_fisher(&self, lambda: f64) -> Option<f64> {
        let k = f64::from(self.shape);
        Some(k * k / (lambda * lambda))
    }

    fn closed_form_mle(&self, sample: &[f64]) -> Option<f64> {
        let k = self.shape as i32;
        let m = crate::numeric::sum::mean(&sample.iter().map(|x| x.powi(k)).collect::<Vec<_>>());
        Some(m.powf(1.0 / f64::from(self.shape)))
    }
}
