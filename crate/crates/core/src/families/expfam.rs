use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson};

use super::{sup_abs_over_space, Derivatives, ModelFamily, ParameterSpace, Support};
use crate::numeric::special::ln_factorial;

/// A one-dimensional natural exponential family
/// `p(x, θ) = h(x) exp{θ T(x) − A(θ)}`.
///
/// `h` is supplied on the log scale so that large-count base measures such
/// as `1/x!` stay finite.
#[derive(Clone, Copy)]
pub struct ExponentialFamilySpec {
    pub name: &'static str,
    pub ln_h: fn(f64) -> f64,
    pub t: fn(f64) -> f64,
    pub a: fn(f64) -> f64,
    pub a_dot: fn(f64) -> f64,
    pub a_ddot: fn(f64) -> f64,
    pub a_dddot: fn(f64) -> f64,
    /// Inverse of `Ȧ`, giving the closed-form MLE `Ȧ⁻¹(mean T)`.
    pub a_dot_inverse: Option<fn(f64) -> f64>,
    pub support: Support,
    pub draw: fn(f64, &mut dyn RngCore) -> f64,
}

impl std::fmt::Debug for ExponentialFamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExponentialFamilySpec")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

/// A natural exponential family restricted to a compact `Θ`.
///
/// The envelope is the constant `sup_Θ |Ä|`, computed once at construction.
#[derive(Debug, Clone)]
pub struct ExpFamily {
    spec: ExponentialFamilySpec,
    space: ParameterSpace,
    envelope: f64,
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl ExpFamily {
    pub fn new(spec: ExponentialFamilySpec, space: ParameterSpace) -> Self {
        let envelope = sup_abs_over_space(space, spec.a_ddot);
        ExpFamily {
            spec,
            space,
            envelope,
        }
    }

    pub fn spec(&self) -> &ExponentialFamilySpec {
        &self.spec
    }

    /// Poisson counts in the natural parameter `θ = log(rate)`.
    pub fn poisson(space: ParameterSpace) -> Self {
        Self::new(
            ExponentialFamilySpec {
                name: "expfam_poisson",
                ln_h: |x| -ln_factorial(x),
                t: |x| x,
                a: f64::exp,
                a_dot: f64::exp,
                a_ddot: f64::exp,
                a_dddot: f64::exp,
                a_dot_inverse: Some(f64::ln),
                support: Support::Counts { max: None },
                draw: |theta, rng| {
                    Poisson::new(theta.exp())
                        .expect("exp(θ) is a valid Poisson rate")
                        .sample(rng)
                },
            },
            space,
        )
    }

    /// Bernoulli trials in the natural parameter `θ = logit(p)`.
    pub fn bernoulli(space: ParameterSpace) -> Self {
        Self::new(
            ExponentialFamilySpec {
                name: "expfam_bernoulli",
                ln_h: |_| 0.0,
                t: |x| x,
                a: |t| {
                    if t > 0.0 {
                        t + (-t).exp().ln_1p()
                    } else {
                        t.exp().ln_1p()
                    }
                },
                a_dot: logistic,
                a_ddot: |t| {
                    let p = logistic(t);
                    p * (1.0 - p)
                },
                a_dddot: |t| {
                    let p = logistic(t);
                    p * (1.0 - p) * (1.0 - 2.0 * p)
                },
                a_dot_inverse: Some(|m| (m / (1.0 - m)).ln()),
                support: Support::Counts { max: Some(1) },
                draw: |theta, rng| {
                    if rng.gen::<f64>() < logistic(theta) {
                        1.0
                    } else {
                        0.0
                    }
                },
            },
            space,
        )
    }
}

impl ModelFamily for ExpFamily {
    fn name(&self) -> &'static str {
        self.spec.name
    }

    fn theta_space(&self) -> ParameterSpace {
        self.space
    }

    fn support(&self) -> Support {
        self.spec.support
    }

    fn eval(&self, x: f64, theta: f64) -> Derivatives {
        let s = &self.spec;
        Derivatives {
            nll: -(s.ln_h)(x) - theta * (s.t)(x) + (s.a)(theta),
            score: -(s.t)(x) + (s.a_dot)(theta),
            curvature: (s.a_ddot)(theta),
            third: (s.a_dddot)(theta),
        }
    }

    fn draw(&self, theta: f64, rng: &mut dyn RngCore) -> f64 {
        (self.spec.draw)(theta, rng)
    }

    fn closed_form_fisher(&self, theta: f64) -> Option<f64> {
        Some((self.spec.a_ddot)(theta))
    }

    // ℓ̇ = Ȧ − T has mean zero and ℓ̈ = Ä is constant in x, so the
    // cross moment vanishes and κ = −A⃛.
    fn closed_form_kappa(&self, theta: f64) -> Option<f64> {
        Some(-(self.spec.a_dddot)(theta))
    }

    fn closed_form_mle(&self, sample: &[f64]) -> Option<f64> {
        let inv = self.spec.a_dot_inverse?;
        let mean_t = crate::numeric::sum::mean(
            &sample.iter().map(|&x| (self.spec.t)(x)).collect::<Vec<_>>(),
        );
        Some(inv(mean_t))
    }

    fn constant_envelope(&self) -> Option<f64> {
        Some(self.envelope)
    }
}
