use rand::{Rng, RngCore};
use rand_distr::OpenClosed01;

use super::{Derivatives, ModelFamily, ParameterSpace, Support};
use crate::error::{Error, Result};

/// Pareto law with known scale `x_min`, parameterised by the shape `θ = k`:
/// `p(x, k) = k x_min^k / x^{k+1}` on `x > x_min`.
#[derive(Debug, Clone)]
pub struct ParetoShape {
    x_min: f64,
    space: ParameterSpace,
}

impl ParetoShape {
    pub fn new(x_min: f64, space: ParameterSpace) -> Result<Self> {
        if !(x_min.is_finite() && x_min > 0.0) {
            return Err(Error::Config(format!(
                "x_min must be positive, got {x_min}"
            )));
        }
        let space = ParameterSpace::positive(space.lower, space.upper)?;
        Ok(ParetoShape { x_min, space })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
}

impl ModelFamily for ParetoShape {
    fn name(&self) -> &'static str {
        "pareto_shape"
    }

    fn theta_space(&self) -> ParameterSpace {
        self.space
    }

    // Inverse-transform draws can land exactly on x_min, so the endpoint is
    // admitted.
    fn support(&self) -> Support {
        Support::Interval {
            lower: self.x_min,
            upper: f64::INFINITY,
            lower_open: false,
        }
    }

    fn eval(&self, x: f64, k: f64) -> Derivatives {
        let lx = (x / self.x_min).ln();
        Derivatives {
            nll: -k.ln() - k * self.x_min.ln() + (k + 1.0) * x.ln(),
            score: -1.0 / k + lx,
            curvature: 1.0 / (k * k),
            third: -2.0 / (k * k * k),
        }
    }

    fn draw(&self, k: f64, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.sample(OpenClosed01);
        self.x_min * u.powf(-1.0 / k)
    }

    fn quad_scale(&self, _k: f64) -> f64 {
        self.x_min
    }

    fn mean(&self, k: f64) -> Option<f64> {
        (k > 1.0).then(|| k * self.x_min / (k - 1.0))
    }

    fn closed_form_fisher(&self, k: f64) -> Option<f64> {
        Some(1.0 / (k * k))
    }

    fn closed_form_kappa(&self, k: f64) -> Option<f64> {
        Some(2.0 / (k * k * k))
    }

    fn closed_form_mle(&self, sample: &[f64]) -> Option<f64> {
        let s: f64 = sample.iter().map(|x| (x / self.x_min).ln()).sum();
        Some(sample.len() as f64 / s)
    }

    /// `sup_{k,k'∈Θ} 1/(k k') = 1/lower²`.
    fn constant_envelope(&self) -> Option<f64> {
        Some(1.0 / (self.space.lower * self.space.lower))
    }

    fn moment_order_limit(&self, k: f64) -> Option<f64> {
        Some(k)
    }
}
