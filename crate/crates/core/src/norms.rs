//! Moment-ratio norms of random variables.
//!
//! `‖X‖_θ₁ = sup_p (E|X|^p / p!)^{1/p}` measures sub-exponential size and
//! `‖X‖_θ₂ = sup_p (E X^{2p} / (2p−1)!!)^{1/(2p)}` sub-Gaussian size. The
//! supremum runs over integer `p ∈ [1, p_max]`; everything is evaluated in
//! log space so that factorials beyond 170! do not overflow.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::special::{ln_factorial, ln_gamma, ln_odd_double_factorial};

/// Default upper end of the integer `p` scan.
pub const DEFAULT_P_MAX: u32 = 50;

/// Smallest accepted `p_max`.
pub const MIN_P_MAX: u32 = 20;

type QuadratureMoments = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Degenerate,
    Gaussian { sigma: f64 },
    Laplace { scale: f64 },
    Rademacher,
    Quadrature(QuadratureMoments),
    Empirical(Arc<[f64]>),
}

/// How an oracle obtains its moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Analytic,
    Quadrature,
    Empirical,
}

/// Absolute-moment function `p ↦ E|cX|^p`.
#[derive(Clone)]
pub struct MomentOracle {
    source: Source,
    scale: f64,
}

impl fmt::Debug for MomentOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            Source::Degenerate => "degenerate".to_string(),
            Source::Gaussian { sigma } => format!("gaussian(σ = {sigma})"),
            Source::Laplace { scale } => format!("laplace(λ = {scale})"),
            Source::Rademacher => "rademacher".to_string(),
            Source::Quadrature(_) => "quadrature".to_string(),
            Source::Empirical(xs) => format!("empirical(n = {})", xs.len()),
        };
        write!(f, "MomentOracle({src} × {})", self.scale)
    }
}

impl MomentOracle {
    fn new(source: Source) -> Self {
        MomentOracle { source, scale: 1.0 }
    }

    /// `X ≡ 0`.
    pub fn degenerate() -> Self {
        Self::new(Source::Degenerate)
    }

    /// `N(0, σ²)`: `E|X|^p = σ^p 2^{p/2} Γ((p+1)/2) / √π`.
    pub fn gaussian(sigma: f64) -> Self {
        Self::new(Source::Gaussian { sigma: sigma.abs() })
    }

    /// Laplace(0, λ) with `|X| ~ Exp(1/λ)`: `E|X|^p = p! λ^p`.
    pub fn laplace(scale: f64) -> Self {
        Self::new(Source::Laplace { scale: scale.abs() })
    }

    /// Uniform on `{−1, +1}`.
    pub fn rademacher() -> Self {
        Self::new(Source::Rademacher)
    }

    /// Moments supplied by a numerical routine, typically quadrature against
    /// a density.
    pub fn quadrature<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self::new(Source::Quadrature(Arc::new(f)))
    }

    /// Plug-in moments of a sample: `mean |x_i|^p`.
    pub fn empirical(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Usage(
                "empirical moments need a non-empty sample".into(),
            ));
        }
        if let Some(x) = sample.iter().find(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("non-finite observation {x}")));
        }
        Ok(Self::new(Source::Empirical(sample.into())))
    }

    /// Oracle of `c·X`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c.abs();
        self
    }

    pub fn kind(&self) -> OracleKind {
        match self.source {
            Source::Quadrature(_) => OracleKind::Quadrature,
            Source::Empirical(_) => OracleKind::Empirical,
            _ => OracleKind::Analytic,
        }
    }

    /// Plug-in estimates of high-order moments are unreliable for small
    /// samples; callers decide what to do with the warning.
    pub fn is_high_variance(&self, p: f64) -> bool {
        match &self.source {
            Source::Empirical(xs) => p > 10.0 && xs.len() < 100_000,
            _ => false,
        }
    }

    /// `ln E|X|^p`; `−∞` when the moment is zero.
    pub fn ln_absolute_moment(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::Usage(format!(
                "moment order must be positive, got {p}"
            )));
        }
        let ln_scale = if self.scale == 0.0 {
            return Ok(f64::NEG_INFINITY);
        } else {
            p * self.scale.ln()
        };
        let base = match &self.source {
            Source::Degenerate => f64::NEG_INFINITY,
            Source::Gaussian { sigma } => {
                if *sigma == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    p * sigma.ln() + 0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0))
                        - 0.5 * std::f64::consts::PI.ln()
                }
            }
            Source::Laplace { scale } => {
                if *scale == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_factorial(p) + p * scale.ln()
                }
            }
            Source::Rademacher => 0.0,
            Source::Quadrature(f) => {
                let m = f(p)?;
                if !m.is_finite() {
                    return Err(Error::MomentNonexistence { order: p });
                }
                if m < 0.0 {
                    return Err(Error::Numeric(format!(
                        "negative moment estimate {m} at p = {p}"
                    )));
                }
                m.ln()
            }
            Source::Empirical(xs) => {
                // log-sum-exp of p·ln|x_i|
                let logs: Vec<f64> = xs
                    .iter()
                    .filter(|x| **x != 0.0)
                    .map(|x| p * x.abs().ln())
                    .collect();
                if logs.is_empty() {
                    f64::NEG_INFINITY
                } else {
                    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let s: f64 = logs.iter().map(|l| (l - top).exp()).sum();
                    top + s.ln() - (xs.len() as f64).ln()
                }
            }
        };
        Ok(base + ln_scale)
    }

    /// `E|X|^p`.
    pub fn absolute_moment(&self, p: f64) -> Result<f64> {
        self.ln_absolute_moment(p).map(f64::exp)
    }
}

/// Result of a norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    /// Smallest integer `p` at which the supremum is attained.
    pub achieving_p: u32,
    /// The supremum sits at `p_max`; a larger scan might find more.
    pub truncated: bool,
    /// Some moment used came from a high-variance empirical estimate.
    pub high_variance: bool,
}

fn scan(
    oracle: &MomentOracle,
    p_max: u32,
    mut term: impl FnMut(u32) -> Result<(f64, f64)>,
) -> Result<NormReport> {
    if p_max < MIN_P_MAX {
        return Err(Error::Usage(format!(
            "p_max must be at least {MIN_P_MAX}, got {p_max}"
        )));
    }
    let mut values = Vec::with_capacity(p_max as usize);
    let mut high_variance = false;
    for p in 1..=p_max {
        let (ln_value, order) = term(p)?;
        high_variance |= oracle.is_high_variance(order);
        values.push(ln_value);
    }
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(NormReport {
            value: 0.0,
            achieving_p: 1,
            truncated: false,
            high_variance,
        });
    }
    // First p within relative 1e-12 of the maximum, so exact ties (Laplace
    // and Gaussian identities) report the smallest order.
    let threshold = top + (1.0 - 1e-12f64).ln();
    let idx = values.iter().position(|v| *v >= threshold).unwrap_or(0);
    let achieving_p = idx as u32 + 1;
    Ok(NormReport {
        value: top.exp(),
        achieving_p,
        truncated: achieving_p == p_max,
        high_variance,
    })
}

/// `sup_{1≤p≤p_max} (E|X|^p / p!)^{1/p}`.
pub fn theta1_norm(oracle: &MomentOracle, p_max: u32) -> Result<NormReport> {
    scan(oracle, p_max, |p| {
        let pf = f64::from(p);
        let lm = oracle.ln_absolute_moment(pf)?;
        Ok(((lm - ln_factorial(pf)) / pf, pf))
    })
}

/// `sup_{1≤p≤p_max} (E X^{2p} / (2p−1)!!)^{1/(2p)}`.
pub fn theta2_norm(oracle: &MomentOracle, p_max: u32) -> Result<NormReport> {
    scan(oracle, p_max, |p| {
        let order = 2.0 * f64::from(p);
        let lm = oracle.ln_absolute_moment(order)?;
        Ok(((lm - ln_odd_double_factorial(p)) / order, order))
    })
}

/// Moment oracle backed by a sample.
pub fn empirical_moment_oracle(sample: &[f64]) -> Result<MomentOracle> {
    MomentOracle::empirical(sample)
}
