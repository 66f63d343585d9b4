//! One-parameter model families and the per-observation negative
//! log-likelihood machinery the estimators are built on.
//!
//! A family supplies `ℓ(x,θ) = −log p(x,θ)` together with its first three
//! θ-derivatives, a sampler and a support descriptor. Expectations under the
//! model (Fisher information, moments of the Lipschitz envelope, bias
//! constants) fall back to adaptive quadrature, or summation for discrete
//! supports, whenever a family has no closed form.

mod expfam;
mod exponential;
mod gaussian;
mod pareto;
mod weibull;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::MomentOracle;
use crate::numeric::roots::{golden_max, grid_point, SUP_GRID_POINTS};
use crate::numeric::{sup_on_interval, Integrator};

pub use expfam::{ExpFamily, ExponentialFamilySpec};
pub use exponential::ExponentialRate;
pub use gaussian::{GaussianMean, GaussianVariance};
pub use pareto::ParetoShape;
pub use weibull::WeibullScale;

/// Compact parameter interval `Θ = [lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub lower: f64,
    pub upper: f64,
}

impl ParameterSpace {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(Error::Config(format!(
                "parameter space needs finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(ParameterSpace { lower, upper })
    }

    /// Like [`ParameterSpace::new`] but additionally rejects intervals that
    /// reach zero or below (scale, shape and rate parameters).
    pub fn positive(lower: f64, upper: f64) -> Result<Self> {
        let space = Self::new(lower, upper)?;
        if space.lower <= 0.0 {
            return Err(Error::Config(format!(
                "parameter space [{lower}, {upper}] must exclude 0 for this family"
            )));
        }
        Ok(space)
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lower && theta <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.lower, self.upper)
    }

    /// `points` evenly spaced values including both endpoints.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let step = self.width() / (points - 1) as f64;
        (0..points)
            .map(|i| grid_point(self.lower, self.upper, step, i, points))
            .collect()
    }
}

/// Where observations live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// An interval; `lower_open` excludes the lower endpoint.
    Interval {
        lower: f64,
        upper: f64,
        lower_open: bool,
    },
    /// Integers `0, 1, …, max` (`max = None` for unbounded).
    Counts { max: Option<u64> },
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Interval {
                lower,
                upper,
                lower_open,
            } => {
                let above = if lower_open { x > lower } else { x >= lower };
                above && x <= upper
            }
            Support::Counts { max } => {
                x >= 0.0 && x.fract() == 0.0 && max.map_or(x.is_finite(), |m| x <= m as f64)
            }
        }
    }
}

/// `ℓ(x,θ)` and its first three θ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub nll: f64,
    pub score: f64,
    pub curvature: f64,
    pub third: f64,
}

/// A one-parameter model. Implementors provide the raw formulas; the
/// provided methods add domain checks and model expectations.
pub trait ModelFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn theta_space(&self) -> ParameterSpace;
    fn support(&self) -> Support;

    /// Derivatives without domain checks.
    fn eval(&self, x: f64, theta: f64) -> Derivatives;

    /// One draw from the model at `theta`.
    fn draw(&self, theta: f64, rng: &mut dyn RngCore) -> f64;

    /// Typical spread of the data, used to scale quadrature substitutions.
    fn quad_scale(&self, _theta: f64) -> f64 {
        1.0
    }

    fn mean(&self, _theta: f64) -> Option<f64> {
        None
    }

    fn closed_form_fisher(&self, _theta: f64) -> Option<f64> {
        None
    }

    fn closed_form_kappa(&self, _theta: f64) -> Option<f64> {
        None
    }

    /// Unconstrained closed-form MLE, if the family has one.
    fn closed_form_mle(&self, _sample: &[f64]) -> Option<f64> {
        None
    }

    /// `Some(c)` when the Lipschitz envelope does not depend on `x`.
    fn constant_envelope(&self) -> Option<f64> {
        None
    }

    /// Absolute moments of order `≥` this value are infinite.
    fn moment_order_limit(&self, _theta: f64) -> Option<f64> {
        None
    }

    /// Closed-form moment oracle of `X − EX`, when known.
    fn centered_oracle_override(&self, _theta: f64) -> Option<MomentOracle> {
        None
    }

    /// Closed-form moment oracle of `X − Y` with `Y` an i.i.d. copy.
    fn difference_oracle_override(&self, _theta: f64) -> Option<MomentOracle> {
        None
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        let space = self.theta_space();
        if space.contains(theta) {
            Ok(())
        } else {
            Err(Error::OutOfParameterSpace {
                theta,
                lower: space.lower,
                upper: space.upper,
            })
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x.is_finite() && self.support().contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfSupport {
                family: self.name(),
                x,
            })
        }
    }

    /// `(ℓ, ℓ̇, ℓ̈, ℓ⃛)` at `(x, θ)`.
    fn score_derivatives(&self, x: f64, theta: f64) -> Result<Derivatives> {
        self.check_x(x)?;
        self.check_theta(theta)?;
        let d = self.eval(x, theta);
        if [d.nll, d.score, d.curvature, d.third]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(d)
        } else {
            Err(Error::Numeric(format!(
                "{}: non-finite derivative at x = {x}, θ = {theta}",
                self.name()
            )))
        }
    }

    fn density(&self, x: f64, theta: f64) -> f64 {
        if !self.support().contains(x) {
            return 0.0;
        }
        (-self.eval(x, theta).nll).exp()
    }

    /// `E_θ f(X)`, with an optional split point for kinks in `f`.
    fn expect(&self, theta: f64, f: &dyn Fn(f64) -> f64, split: Option<f64>) -> Result<f64> {
        let integrand = |x: f64| {
            let p = self.density(x, theta);
            if p == 0.0 {
                0.0
            } else {
                f(x) * p
            }
        };
        let value = match self.support() {
            Support::Interval { lower, upper, .. } => {
                let q = Integrator::default().with_scale(self.quad_scale(theta));
                let mid = split
                    .or_else(|| self.mean(theta))
                    .filter(|m| *m > lower && *m < upper);
                match mid {
                    Some(m) => {
                        q.integrate(integrand, lower, m)? + q.integrate(integrand, m, upper)?
                    }
                    None => q.integrate(integrand, lower, upper)?,
                }
            }
            Support::Counts { max } => sum_counts(integrand, max)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Numeric(format!(
                "{}: non-finite expectation at θ = {theta}",
                self.name()
            )))
        }
    }

    /// `I(θ) = E ℓ̈(X, θ)` under the model at `θ`.
    fn fisher_information(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let value = match self.closed_form_fisher(theta) {
            Some(v) => v,
            None => self.expect(theta, &|x| self.eval(x, theta).curvature, None)?,
        };
        if !value.is_finite() {
            return Err(Error::Numeric("non-finite Fisher information".into()));
        }
        Ok(value.max(0.0))
    }

    /// Lipschitz envelope `c(x) = sup_{θ≠θ'∈Θ} |ℓ̇(x,θ) − ℓ̇(x,θ')| / |θ − θ'|`.
    fn lipschitz_envelope(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if let Some(c) = self.constant_envelope() {
            return Ok(c);
        }
        Ok(envelope_over_box(self, x, SUP_GRID_POINTS))
    }

    /// `(E c(X), E c²(X))` under `θ*`.
    fn c_moments(&self, theta_star: f64) -> Result<(f64, f64)> {
        self.check_theta(theta_star)?;
        if let Some(c) = self.constant_envelope() {
            return Ok((c, c * c));
        }
        let env = |x: f64| envelope_over_box(self, x, SUP_GRID_POINTS);
        let mean = self
            .expect(theta_star, &env, None)
            .map_err(|e| nonexistence_or(e, 1.0))?;
        let sq = self
            .expect(theta_star, &|x| env(x).powi(2), None)
            .map_err(|e| nonexistence_or(e, 2.0))?;
        Ok((mean, sq))
    }

    /// `n` i.i.d. draws at `theta`, determined by `seed`.
    fn sample(&self, theta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Usage("sample size must be at least 1".into()));
        }
        self.check_theta(theta)?;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        Ok((0..n).map(|_| self.draw(theta, &mut rng)).collect())
    }
}

/// Moment oracle of the centred observation `X − EX` under `θ`.
pub fn centered_moment_oracle(model: &Arc<dyn ModelFamily>, theta: f64) -> Result<MomentOracle> {
    model.check_theta(theta)?;
    if let Some(o) = model.centered_oracle_override(theta) {
        return Ok(o);
    }
    let mean = match model.mean(theta) {
        Some(m) => m,
        None => model.expect(theta, &|x| x, None)?,
    };
    let limit = model.moment_order_limit(theta);
    let model = Arc::clone(model);
    Ok(MomentOracle::quadrature(move |p| {
        if limit.is_some_and(|l| p >= l) {
            return Err(Error::MomentNonexistence { order: p });
        }
        model
            .expect(theta, &|x| (x - mean).abs().powf(p), Some(mean))
            .map_err(|e| nonexistence_or(e, p))
    }))
}

/// Moment oracle of `X − Y` for an independent copy `Y`, both under `θ`.
pub fn difference_moment_oracle(model: &Arc<dyn ModelFamily>, theta: f64) -> Result<MomentOracle> {
    model.check_theta(theta)?;
    if let Some(o) = model.difference_oracle_override(theta) {
        return Ok(o);
    }
    let limit = model.moment_order_limit(theta);
    let model = Arc::clone(model);
    Ok(MomentOracle::quadrature(move |p| {
        if limit.is_some_and(|l| p >= l) {
            return Err(Error::MomentNonexistence { order: p });
        }
        let inner = |x: f64| {
            model
                .expect(theta, &|y| (x - y).abs().powf(p), Some(x))
                .unwrap_or(f64::NAN)
        };
        model
            .expect(theta, &inner, None)
            .map_err(|e| nonexistence_or(e, p))
    }))
}

fn nonexistence_or(e: Error, order: f64) -> Error {
    match e {
        Error::Numeric(_) => Error::MomentNonexistence { order },
        other => other,
    }
}

fn sum_counts<F: Fn(f64) -> f64>(f: F, max: Option<u64>) -> Result<f64> {
    let mut total = crate::numeric::NeumaierSum::new();
    let limit = max.unwrap_or(1_000_000);
    let mut small_run = 0;
    for k in 0..=limit {
        let v = f(k as f64);
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite summand at {k}")));
        }
        total.add(v);
        if max.is_none() {
            if v.abs() <= 1e-18 * (1.0 + total.total().abs()) && k > 10 {
                small_run += 1;
                if small_run > 20 {
                    return Ok(total.total());
                }
            } else {
                small_run = 0;
            }
        }
    }
    if max.is_none() {
        return Err(Error::Numeric("series did not converge".into()));
    }
    Ok(total.total())
}

/// Supremum over `Θ²` of the score difference quotient at a fixed `x`.
///
/// A 257-point grid per axis locates the maximum; golden-section steps then
/// refine it inside the neighbouring grid cells. The diagonal of the box is
/// the limit of the quotient, `|ℓ̈(x,θ)|`.
pub fn envelope_over_box<M: ModelFamily + ?Sized>(model: &M, x: f64, points: usize) -> f64 {
    let space = model.theta_space();
    let grid = space.grid(points);
    let scores: Vec<f64> = grid.iter().map(|&t| model.eval(x, t).score).collect();
    let curv = |t: f64| model.eval(x, t).curvature.abs();
    let quotient = |a: f64, b: f64| {
        if (a - b).abs() <= 1e-9 * (1.0 + a.abs()) {
            curv(0.5 * (a + b))
        } else {
            ((model.eval(x, a).score - model.eval(x, b).score) / (a - b)).abs()
        }
    };

    let mut best = f64::NEG_INFINITY;
    let (mut bi, mut bj) = (0, 0);
    for i in 0..points {
        let d = curv(grid[i]);
        if d > best {
            best = d;
            bi = i;
            bj = i;
        }
        for j in (i + 1)..points {
            let q = ((scores[j] - scores[i]) / (grid[j] - grid[i])).abs();
            if q > best {
                best = q;
                bi = i;
                bj = j;
            }
        }
    }

    let cell = |k: usize| (grid[k.saturating_sub(1)], grid[(k + 1).min(points - 1)]);
    let tol = 1e-12 * (1.0 + space.upper.abs());
    let refined = if bi == bj {
        let (lo, hi) = cell(bi);
        golden_max(curv, lo, hi, tol).1
    } else {
        let (alo, ahi) = cell(bi);
        let (blo, bhi) = cell(bj);
        let (mut a, mut b) = (grid[bi], grid[bj]);
        let mut value = quotient(a, b);
        for _ in 0..3 {
            let (na, va) = golden_max(|t| quotient(t, b), alo, ahi, tol);
            if va > value {
                a = na;
                value = va;
            }
            let (nb, vb) = golden_max(|t| quotient(a, t), blo, bhi, tol);
            if vb > value {
                b = nb;
                value = vb;
            }
        }
        value
    };
    best.max(refined)
}

/// Supremum over `Θ` of `|g(θ)|`, used by families whose envelope is a
/// constant such as `sup |Ä|`.
pub fn sup_abs_over_space(space: ParameterSpace, g: impl Fn(f64) -> f64) -> f64 {
    sup_on_interval(|t| g(t).abs(), space.lower, space.upper, SUP_GRID_POINTS)
}

/// Family selection by name plus parameter block, as read from config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilySpec {
    GaussianVariance { space: ParameterSpace },
    GaussianMean { sigma: f64, space: ParameterSpace },
    ParetoShape { x_min: f64, space: ParameterSpace },
    WeibullScale { shape: u32, space: ParameterSpace },
    ExponentialRate { space: ParameterSpace },
    ExpfamPoisson { space: ParameterSpace },
    ExpfamBernoulli { space: ParameterSpace },
}

/// Names accepted by [`FamilySpec::from_name`].
pub const FAMILY_NAMES: [&str; 7] = [
    "gaussian_variance",
    "gaussian_mean",
    "pareto_shape",
    "weibull_scale",
    "exponential_rate",
    "expfam_poisson",
    "expfam_bernoulli",
];

impl FamilySpec {
    /// Builds a spec from a family name, its parameter block and `Θ`.
    /// Unknown names and missing or superfluous parameters are errors.
    pub fn from_name(
        name: &str,
        params: &BTreeMap<String, f64>,
        lower: f64,
        upper: f64,
    ) -> Result<Self> {
        let take = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("family {name} needs parameter `{key}`")))
        };
        let allow = |keys: &[&str]| -> Result<()> {
            match params.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(Error::Config(format!(
                    "family {name} does not take parameter `{k}`"
                ))),
                None => Ok(()),
            }
        };
        let spec = match name {
            "gaussian_variance" => {
                allow(&[])?;
                FamilySpec::GaussianVariance {
                    space: ParameterSpace::positive(lower, upper)?,
                }
            }
            "gaussian_mean" => {
                allow(&["sigma"])?;
                FamilySpec::GaussianMean {
                    sigma: take("sigma")?,
                    space: ParameterSpace::new(lower, upper)?,
                }
            }
            "pareto_shape" => {
                allow(&["x_min"])?;
                FamilySpec::ParetoShape {
                    x_min: take("x_min")?,
                    space: ParameterSpace::positive(lower, upper)?,
                }
            }
            "weibull_scale" => {
                allow(&["shape"])?;
                let k = take("shape")?;
                if k.fract() != 0.0 || !(2.0..=64.0).contains(&k) {
                    return Err(Error::Config(format!(
                        "weibull_scale needs an integer shape ≥ 2, got {k}"
                    )));
                }
                FamilySpec::WeibullScale {
                    shape: k as u32,
                    space: ParameterSpace::positive(lower, upper)?,
                }
            }
            "exponential_rate" => {
                allow(&[])?;
                FamilySpec::ExponentialRate {
                    space: ParameterSpace::positive(lower, upper)?,
                }
            }
            "expfam_poisson" => {
                allow(&[])?;
                FamilySpec::ExpfamPoisson {
                    space: ParameterSpace::new(lower, upper)?,
                }
            }
            "expfam_bernoulli" => {
                allow(&[])?;
                FamilySpec::ExpfamBernoulli {
                    space: ParameterSpace::new(lower, upper)?,
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown family `{other}` (expected one of {})",
                    FAMILY_NAMES.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::GaussianVariance { .. } => "gaussian_variance",
            FamilySpec::GaussianMean { .. } => "gaussian_mean",
            FamilySpec::ParetoShape { .. } => "pareto_shape",
            FamilySpec::WeibullScale { .. } => "weibull_scale",
            FamilySpec::ExponentialRate { .. } => "exponential_rate",
            FamilySpec::ExpfamPoisson { .. } => "expfam_poisson",
            FamilySpec::ExpfamBernoulli { .. } => "expfam_bernoulli",
        }
    }

    pub fn build(&self) -> Result<Arc<dyn ModelFamily>> {
        Ok(match *self {
            FamilySpec::GaussianVariance { space } => Arc::new(GaussianVariance::new(space)?),
            FamilySpec::GaussianMean { sigma, space } => Arc::new(GaussianMean::new(sigma, space)?),
            FamilySpec::ParetoShape { x_min, space } => Arc::new(ParetoShape::new(x_min, space)?),
            FamilySpec::WeibullScale { shape, space } => Arc::new(WeibullScale::new(shape, space)?),
            FamilySpec::ExponentialRate { space } => Arc::new(ExponentialRate::new(space)?),
            FamilySpec::ExpfamPoisson { space } => Arc::new(ExpFamily::poisson(space)),
            FamilySpec::ExpfamBernoulli { space } => Arc::new(ExpFamily::bernoulli(space)),
        })
    }
}

#[cfg(test)]
mod tests;
