//! Classical maximum likelihood: the fit itself, the second-order bias term
//! and constant-specified concentration and oracle bounds.
//!
//! The bounds assume
//!
//! * `ℓ̈(x, θ) ≥ c_H > 0` (strong convexity in θ), and
//! * `|ℓ̇(x, θ) − ℓ̇(y, θ)| ≤ c_l |x − y|` (Lipschitz score in x),
//!
//! which make the MLE a function of the sample with coordinate deviations
//! at most `c_l |X_k − Y_k| / (n c_H)`. Neither condition is checkable on an
//! unbounded support, so [`certify`] verifies both on a declared box and
//! reports the box alongside the constants.

use std::sync::Arc;

use serde::Serialize;

use crate::concentration::{
    subg_params_prop2, subgamma_params_cor3, DeviationNormSet, Regime, TailBound,
};
use crate::error::{Error, Result};
use crate::families::{difference_moment_oracle, ModelFamily, Support};
use crate::norms::{theta1_norm, theta2_norm, DEFAULT_P_MAX};
use crate::numeric::{bisect, golden_min, NeumaierSum};

/// Absolute θ tolerance of the derivative-free minimizer.
pub const FIT_TOLERANCE: f64 = 1e-10;

/// Result of [`fit_mle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleFit {
    pub theta_hat: f64,
    /// The unconstrained minimizer lies outside `Θ`; `theta_hat` is the
    /// nearest boundary point.
    pub projected: bool,
}

/// Minimizes `Σ ℓ(X_i, θ)` over `Θ`.
///
/// Families with a closed-form MLE use it; the rest are minimized by
/// golden-section search on the (convex or unimodal) mean negative
/// log-likelihood, polished by bisection on the mean score.
pub fn fit_mle(model: &dyn ModelFamily, sample: &[f64]) -> Result<MleFit> {
    if sample.is_empty() {
        return Err(Error::Usage("sample must be non-empty".into()));
    }
    for &x in sample {
        model.check_x(x)?;
    }
    let space = model.theta_space();
    if let Some(raw) = model.closed_form_mle(sample) {
        if raw.is_nan() {
            return Err(Error::Numeric(format!(
                "{}: closed-form MLE is NaN",
                model.name()
            )));
        }
        return Ok(MleFit {
            theta_hat: space.clamp(raw),
            projected: !space.contains(raw),
        });
    }

    let mut failure = None;
    let objective = |theta: f64| {
        let total: NeumaierSum = sample.iter().map(|&x| model.eval(x, theta).nll).collect();
        let v = total.total() / sample.len() as f64;
        if !v.is_finite() && failure.is_none() {
            failure = Some(theta);
        }
        v
    };
    let (coarse, _) = golden_min(objective, space.lower, space.upper, FIT_TOLERANCE);
    if let Some(theta) = failure {
        return Err(Error::Numeric(format!(
            "{}: non-finite objective at θ = {theta}",
            model.name()
        )));
    }
    let mean_score = |theta: f64| {
        sample
            .iter()
            .map(|&x| model.eval(x, theta).score)
            .collect::<NeumaierSum>()
            .total()
    };
    // Objective values near the minimum agree to rounding within about
    // √ε of the minimizer, so the last digits come from the score's sign
    // change inside a small bracket around the golden-section estimate.
    let radius = 1e-5 * (1.0 + space.width());
    let (a, b) = (space.clamp(coarse - radius), space.clamp(coarse + radius));
    let theta_hat = bisect(|t| Ok(mean_score(t)), a, b, FIT_TOLERANCE).unwrap_or(coarse);
    // The minimizer is exterior when the mean score pushes outward at the
    // boundary it landed on.
    let projected = (theta_hat - space.lower <= FIT_TOLERANCE && mean_score(space.lower) > 0.0)
        || (space.upper - theta_hat <= FIT_TOLERANCE && mean_score(space.upper) < 0.0);
    Ok(MleFit {
        theta_hat,
        projected,
    })
}

/// Grid-certified regularity constants on an `x` box times `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// `min ℓ̈` over the grid.
    pub c_h: f64,
    /// Largest score difference quotient in `x` over the grid.
    pub c_l: f64,
    pub x_lower: f64,
    pub x_upper: f64,
    pub theta_lower: f64,
    pub theta_upper: f64,
}

/// Candidate `(c_H, c_l)` from a `points × points` grid over
/// `[x_lower, x_upper] × Θ` (integers only, for count supports).
///
/// Fails with an infeasibility diagnostic when `ℓ̈ ≤ 0` anywhere on the
/// grid. The values are grid estimates, to be confirmed or overridden.
pub fn certify(
    model: &dyn ModelFamily,
    x_lower: f64,
    x_upper: f64,
    points: usize,
) -> Result<Certificate> {
    if !(x_lower < x_upper) || !x_lower.is_finite() || !x_upper.is_finite() {
        return Err(Error::Config(format!(
            "x box needs finite lower < upper, got [{x_lower}, {x_upper}]"
        )));
    }
    let points = points.max(3);
    let xs: Vec<f64> = match model.support() {
        Support::Counts { max } => {
            let hi = max.map_or(x_upper, |m| x_upper.min(m as f64)).floor();
            let lo = x_lower.max(0.0).ceil();
            let step = ((hi - lo) / (points - 1) as f64).ceil().max(1.0);
            let mut v = Vec::new();
            let mut x = lo;
            while x <= hi {
                v.push(x);
                x += step;
            }
            v
        }
        support => {
            let step = (x_upper - x_lower) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        x_upper
                    } else {
                        x_lower + step * i as f64
                    }
                })
                .filter(|&x| support.contains(x))
                .collect()
        }
    };
    if xs.len() < 2 {
        return Err(Error::Config(format!(
            "x box [{x_lower}, {x_upper}] holds fewer than two support points"
        )));
    }

    let space = model.theta_space();
    let mut c_h = f64::INFINITY;
    let mut c_l: f64 = 0.0;
    for theta in space.grid(points) {
        let mut prev: Option<(f64, f64)> = None;
        for &x in &xs {
            let d = model.eval(x, theta);
            if !d.curvature.is_finite() || !d.score.is_finite() {
                return Err(Error::Numeric(format!(
                    "{}: non-finite derivatives at x = {x}, θ = {theta}",
                    model.name()
                )));
            }
            if d.curvature <= 0.0 {
                return Err(Error::Infeasible(format!(
                    "{}: strong convexity fails on the box, ℓ̈({x}, {theta}) = {} ≤ 0",
                    model.name(),
                    d.curvature
                )));
            }
            c_h = c_h.min(d.curvature);
            if let Some((px, ps)) = prev {
                c_l = c_l.max(((d.score - ps) / (x - px)).abs());
            }
            prev = Some((x, d.score));
        }
    }
    if c_l <= 0.0 {
        return Err(Error::Infeasible(format!(
            "{}: score does not vary with x on the box",
            model.name()
        )));
    }
    Ok(Certificate {
        c_h,
        c_l,
        x_lower,
        x_upper,
        theta_lower: space.lower,
        theta_upper: space.upper,
    })
}

/// Regularity constants plus the deviation norms `‖d(X_k, Y_k)‖` in one
/// regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzProfile {
    pub c_h: f64,
    pub c_l: f64,
    pub d_norms: DeviationNormSet,
}

impl LipschitzProfile {
    pub fn new(c_h: f64, c_l: f64, d_norms: DeviationNormSet) -> Result<Self> {
        if !(c_h > 0.0 && c_h.is_finite()) || !(c_l > 0.0 && c_l.is_finite()) {
            return Err(Error::Config(format!(
                "c_H and c_l must be positive and finite, got c_H = {c_h}, c_l = {c_l}"
            )));
        }
        Ok(LipschitzProfile { c_h, c_l, d_norms })
    }

    pub fn regime(&self) -> Regime {
        self.d_norms.regime()
    }

    /// Per-coordinate sensitivity `c_l / (n c_H)`.
    fn sensitivity(&self, n: usize) -> f64 {
        self.c_l / (n as f64 * self.c_h)
    }
}

/// Norm of `X − Y` for an independent copy `Y`, repeated `n` times.
pub fn difference_norms(
    model: &Arc<dyn ModelFamily>,
    theta_star: f64,
    n: usize,
    regime: Regime,
) -> Result<DeviationNormSet> {
    let oracle = difference_moment_oracle(model, theta_star)?;
    let report = match regime {
        Regime::Theta1 => theta1_norm(&oracle, DEFAULT_P_MAX)?,
        Regime::Theta2 => theta2_norm(&oracle, DEFAULT_P_MAX)?,
    };
    DeviationNormSet::identical(n, report.value, regime)
}

/// Change in the MLE when one observation moves by `d`:
/// `c_l d / (n c_H)`.
pub fn perturbation_bound(profile: &LipschitzProfile, n: usize, d: f64) -> Result<f64> {
    if n == 0 || !(d >= 0.0) {
        return Err(Error::Usage(format!(
            "need n ≥ 1 and d ≥ 0, got n = {n}, d = {d}"
        )));
    }
    Ok(profile.sensitivity(n) * d)
}

/// Two-sided bound on `P{|θ̂ − Eθ̂| > t}`.
///
/// The MLE inherits the tail class of a function whose coordinate
/// deviations are the scaled norms `c_l ‖d_k‖ / (n c_H)`.
pub fn mle_concentration(profile: &LipschitzProfile, n: usize, t: f64) -> Result<TailBound> {
    let class = mle_tail_class(profile, n)?;
    TailBound::two_sided(class, t)
}

fn mle_tail_class(profile: &LipschitzProfile, n: usize) -> Result<crate::concentration::TailClass> {
    if n == 0 {
        return Err(Error::Usage("n must be at least 1".into()));
    }
    let l = profile.sensitivity(n);
    let scaled = DeviationNormSet::new(
        profile.d_norms.norms().iter().map(|v| l * v).collect(),
        profile.regime(),
    )?;
    match profile.regime() {
        Regime::Theta2 => subg_params_prop2(&scaled),
        Regime::Theta1 => subgamma_params_cor3(&scaled),
    }
}

/// `κ = 2 E[ℓ̇ ℓ̈] − E ℓ⃛` at `θ*`.
pub fn kappa(model: &dyn ModelFamily, theta_star: f64) -> Result<f64> {
    model.check_theta(theta_star)?;
    if let Some(k) = model.closed_form_kappa(theta_star) {
        return Ok(k);
    }
    model.expect(
        theta_star,
        &|x| {
            let d = model.eval(x, theta_star);
            2.0 * d.score * d.curvature - d.third
        },
        None,
    )
}

/// First-order bias of the MLE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasEstimate {
    pub kappa: f64,
    pub fisher: f64,
    pub n: usize,
    /// `κ / (2 n I²)`; the `o(1/n)` remainder is not included.
    pub bias: f64,
}

pub fn bias_estimate(model: &dyn ModelFamily, theta_star: f64, n: usize) -> Result<BiasEstimate> {
    if n == 0 {
        return Err(Error::Usage("n must be at least 1".into()));
    }
    let fisher = model.fisher_information(theta_star)?;
    if fisher <= 0.0 {
        return Err(Error::Numeric(format!(
            "{}: Fisher information vanishes at θ = {theta_star}",
            model.name()
        )));
    }
    let kappa = kappa(model, theta_star)?;
    Ok(BiasEstimate {
        kappa,
        fisher,
        n,
        bias: kappa / (2.0 * n as f64 * fisher * fisher),
    })
}

/// High-probability bound on `|θ̂ − θ*|`, to first order in `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleBound {
    /// Concentration part, holding with probability `1 − δ`.
    pub radius: f64,
    /// `|κ| / (2 n I²)`.
    pub bias: f64,
    pub total: f64,
    pub regime: Regime,
    pub order: &'static str,
}

/// Concentration radius plus bias magnitude, with the `o(1/n)` remainder
/// dropped.
///
/// * θ₂: `4 c_l/(√n c_H) √((1/n) Σ‖d‖² log(2/δ)) + |κ|/(2nI²)`
/// * θ₁: `2 c_l/(√n c_H) √((1/n) Σ‖d‖² log(1/δ))
///   + (1/n)(max‖d‖ log(1/δ) c_l/c_H + |κ|/(2I²))`
pub fn oracle_bound(
    profile: &LipschitzProfile,
    model: &dyn ModelFamily,
    theta_star: f64,
    n: usize,
    delta: f64,
) -> Result<OracleBound> {
    let bias = bias_estimate(model, theta_star, n)?;
    oracle_bound_from_parts(profile, bias.kappa, bias.fisher, n, delta)
}

/// [`oracle_bound`] with `κ` and `I(θ*)` supplied directly.
pub fn oracle_bound_from_parts(
    profile: &LipschitzProfile,
    kappa: f64,
    fisher: f64,
    n: usize,
    delta: f64,
) -> Result<OracleBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Usage(format!("δ must lie in (0, 1), got {delta}")));
    }
    if n == 0 || !(fisher > 0.0) {
        return Err(Error::Usage(format!(
            "need n ≥ 1 and I > 0, got n = {n}, I = {fisher}"
        )));
    }
    let nf = n as f64;
    let ratio = profile.c_l / profile.c_h;
    let mean_sq = profile.d_norms.sum_of_squares() / nf;
    let bias = kappa.abs() / (2.0 * nf * fisher * fisher);
    let radius = match profile.regime() {
        Regime::Theta2 => 4.0 * ratio / nf.sqrt() * (mean_sq * (2.0 / delta).ln()).sqrt(),
        Regime::Theta1 => {
            let l = (1.0 / delta).ln();
            2.0 * ratio / nf.sqrt() * (mean_sq * l).sqrt() + profile.d_norms.max() * l * ratio / nf
        }
    };
    Ok(OracleBound {
        radius,
        bias,
        total: radius + bias,
        regime: profile.regime(),
        order: "first-order",
    })
}
