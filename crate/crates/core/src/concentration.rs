//! Constant-specified McDiarmid-type tail bounds for functions of independent
//! variables whose per-coordinate deviations have finite θ₁ or θ₂ norms.
//!
//! For `f(Z)` with centred conditional deviations `D_{f,Z_i}`:
//!
//! * θ₂ norms give `f − Ef ~ subG(8 Σ‖D_i‖²)`, i.e.
//!   `P{f − Ef > t} ≤ exp(−t² / (16 Σ‖D_i‖²))`;
//! * θ₁ norms give `f − Ef ~ subΓ(2 Σ‖D_i‖², max‖D_i‖)`, i.e.
//!   `P{f − Ef > √(2ηt) + Mt} ≤ e^{−t}` and
//!   `P{f − Ef > t} ≤ exp(−t² / (2η + 2Mt))`.
//!
//! The supremum over the other coordinates is the caller's job; a
//! [`DeviationNormSet`] holds already-maximised values. For sums it is
//! vacuous, and [`sum_deviation_norms`] computes the set directly.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{centered_moment_oracle, ModelFamily};
use crate::norms::{theta1_norm, theta2_norm, MomentOracle, DEFAULT_P_MAX};

/// Which moment-ratio norm the deviations are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Sub-exponential size, `‖·‖_θ₁`.
    Theta1,
    /// Sub-Gaussian size, `‖·‖_θ₂`.
    Theta2,
}

/// Per-coordinate deviation norms `sup_z ‖D_{f,Z_i}(z)‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationNormSet {
    norms: Vec<f64>,
    regime: Regime,
}

impl DeviationNormSet {
    pub fn new(norms: Vec<f64>, regime: Regime) -> Result<Self> {
        if norms.is_empty() {
            return Err(Error::Usage("deviation norm set must be non-empty".into()));
        }
        if let Some(v) = norms.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Usage(format!(
                "deviation norms must be finite and non-negative, got {v}"
            )));
        }
        Ok(DeviationNormSet { norms, regime })
    }

    /// `n` copies of the same norm.
    pub fn identical(n: usize, norm: f64, regime: Regime) -> Result<Self> {
        Self::new(vec![norm; n], regime)
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.norms.iter().map(|v| v * v).sum()
    }

    pub fn max(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }

    fn expect(&self, regime: Regime) -> Result<()> {
        if self.regime == regime {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "expected {regime:?} deviation norms, got {:?}",
                self.regime
            )))
        }
    }
}

/// Tail class of a centred random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailClass {
    /// `E e^{sX} ≤ e^{s²σ²/2}` for all `s`.
    SubGaussian { variance: f64 },
    /// `E e^{sX} ≤ e^{s²λ²/2}` for `|s| < 1/α`.
    SubExponential { lambda: f64, alpha: f64 },
    /// `log E e^{sX} ≤ ηs² / (2(1 − M|s|))` for `|s| < 1/M`.
    SubGamma { eta: f64, scale: f64 },
}

impl TailClass {
    /// All parameters zero: the variable is a.s. constant.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            TailClass::SubGaussian { variance } => variance == 0.0,
            TailClass::SubExponential { lambda, alpha } => lambda == 0.0 && alpha == 0.0,
            TailClass::SubGamma { eta, scale } => eta == 0.0 && scale == 0.0,
        }
    }

    /// One-sided bound on `P{X > t}`, capped at 1.
    pub fn upper_tail(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        let exponent = match *self {
            TailClass::SubGaussian { variance } => ratio(t * t, 2.0 * variance),
            TailClass::SubExponential { lambda, alpha } => {
                ratio(t * t, 2.0 * lambda * lambda).min(ratio(t, 2.0 * alpha))
            }
            TailClass::SubGamma { eta, scale } => ratio(t * t, 2.0 * eta + 2.0 * scale * t),
        };
        Ok((-exponent).exp().min(1.0))
    }
}

// t²/0 with t > 0 is an infinite exponent (zero probability); 0/0 is zero.
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "threshold must be finite and ≥ 0, got {t}"
        )))
    }
}

/// A tail probability bound at threshold `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub t: f64,
    pub bound: f64,
    pub class: TailClass,
}

impl TailBound {
    /// One-sided bound `P{X > t}` from a tail class.
    pub fn upper(class: TailClass, t: f64) -> Result<Self> {
        Ok(TailBound {
            t,
            bound: class.upper_tail(t)?,
            class,
        })
    }

    /// Two-sided bound `P{|X| > t}`: twice the one-sided value, capped at 1.
    pub fn two_sided(class: TailClass, t: f64) -> Result<Self> {
        check_t(t)?;
        let one = match class {
            TailClass::SubGaussian { variance } => (-ratio(t * t, 2.0 * variance)).exp(),
            TailClass::SubGamma { eta, scale } => {
                (-ratio(t * t, 2.0 * eta + 2.0 * scale * t)).exp()
            }
            other => other.upper_tail(t)?,
        };
        Ok(TailBound {
            t,
            bound: (2.0 * one).min(1.0),
            class,
        })
    }
}

/// Sub-Gaussian proxy from θ₂ deviation norms: `σ² = 8 Σ‖D_i‖²`.
pub fn subg_params_prop2(norms: &DeviationNormSet) -> Result<TailClass> {
    norms.expect(Regime::Theta2)?;
    Ok(TailClass::SubGaussian {
        variance: 8.0 * norms.sum_of_squares(),
    })
}

/// Sub-Gamma parameters from θ₁ deviation norms:
/// `(η, M) = (2 Σ‖D_i‖², max ‖D_i‖)`.
pub fn subgamma_params_cor3(norms: &DeviationNormSet) -> Result<TailClass> {
    norms.expect(Regime::Theta1)?;
    Ok(TailClass::SubGamma {
        eta: 2.0 * norms.sum_of_squares(),
        scale: norms.max(),
    })
}

fn subgamma(params: &TailClass) -> Result<(f64, f64)> {
    match *params {
        TailClass::SubGamma { eta, scale } => Ok((eta, scale)),
        other => Err(Error::Usage(format!(
            "expected sub-Gamma parameters, got {other:?}"
        ))),
    }
}

/// Deviation level `d(t) = √(2ηt) + Mt` exceeded with probability at most
/// `e^{−t}`.
pub fn subgamma_quantile(params: &TailClass, t: f64) -> Result<f64> {
    let (eta, m) = subgamma(params)?;
    check_t(t)?;
    Ok((2.0 * eta * t).sqrt() + m * t)
}

/// `min(1, exp(−t² / (2η + 2Mt)))`.
pub fn subgamma_tail_prob(params: &TailClass, t: f64) -> Result<f64> {
    subgamma(params)?;
    params.upper_tail(t)
}

/// `min(1, exp(−t² / (2σ²)))` for a sub-Gaussian class.
pub fn subg_tail_prob(params: &TailClass, t: f64) -> Result<f64> {
    match params {
        TailClass::SubGaussian { .. } => params.upper_tail(t),
        other => Err(Error::Usage(format!(
            "expected sub-Gaussian parameters, got {other:?}"
        ))),
    }
}

/// Reference distributions for the constant comparison below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceLaw {
    Gaussian { variance: f64 },
    Laplace { scale: f64 },
}

/// Tail-exponent denominators of the ψ-norm bounds versus the θ-norm bounds
/// for a sum of `n` i.i.d. summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantComparison {
    /// `64 e n σ² / √π` (Gaussian) or `4e² n λ² + 2eλ` (Laplace).
    pub psi_norm_constant: f64,
    /// `16 n σ²` (Gaussian) or `4 n λ² + 2λ` (Laplace).
    pub theta_norm_constant: f64,
    pub ratio: f64,
}

/// Compares the ψ-norm and θ-norm tail constants for Gaussian and Laplace
/// sums. The Laplace constants are evaluated at unit threshold, as in the
/// usual statement of the comparison.
pub fn remark1_constants(law: ReferenceLaw, n: usize) -> Result<ConstantComparison> {
    if n == 0 {
        return Err(Error::Usage("number of summands must be at least 1".into()));
    }
    let nf = n as f64;
    let e = std::f64::consts::E;
    let (old, new) = match law {
        ReferenceLaw::Gaussian { variance } => (
            64.0 * e * nf * variance / std::f64::consts::PI.sqrt(),
            16.0 * nf * variance,
        ),
        ReferenceLaw::Laplace { scale } => (
            4.0 * e * e * nf * scale * scale + 2.0 * e * scale,
            4.0 * nf * scale * scale + 2.0 * scale,
        ),
    };
    Ok(ConstantComparison {
        psi_norm_constant: old,
        theta_norm_constant: new,
        ratio: old / new,
    })
}

/// Deviation norms of `f = Σ X_k` for `n` i.i.d. summands: each
/// `D_{f,X_k} = X_k − EX_k`, so every entry is the norm of the centred
/// summand.
pub fn sum_deviation_norms(
    centered: &MomentOracle,
    n: usize,
    regime: Regime,
) -> Result<DeviationNormSet> {
    if n == 0 {
        return Err(Error::Usage("number of summands must be at least 1".into()));
    }
    let report = match regime {
        Regime::Theta1 => theta1_norm(centered, DEFAULT_P_MAX)?,
        Regime::Theta2 => theta2_norm(centered, DEFAULT_P_MAX)?,
    };
    DeviationNormSet::identical(n, report.value, regime)
}

/// [`sum_deviation_norms`] for observations drawn from a model at `θ*`.
pub fn sum_deviation_norms_for_model(
    model: &Arc<dyn ModelFamily>,
    theta_star: f64,
    n: usize,
    regime: Regime,
) -> Result<DeviationNormSet> {
    let oracle = centered_moment_oracle(model, theta_star)?;
    sum_deviation_norms(&oracle, n, regime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{ExponentialRate, GaussianVariance, ParameterSpace, ParetoShape};
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn subg_examples() {
        let n = 7;
        let sigma = 1.7;
        let set = DeviationNormSet::identical(n, sigma, Regime::Theta2).unwrap();
        let class = subg_params_prop2(&set).unwrap();
        let TailClass::SubGaussian { variance } = class else {
            unreachable!()
        };
        assert!((variance - 8.0 * n as f64 * sigma * sigma).abs() < 1e-12);
        // exp(−t²/(16 n σ²))
        let t = 3.0;
        let p = subg_tail_prob(&class, t).unwrap();
        assert!((p - (-t * t / (16.0 * n as f64 * sigma * sigma)).exp()).abs() < 1e-15);

        let zero = DeviationNormSet::identical(3, 0.0, Regime::Theta2).unwrap();
        assert_eq!(
            subg_params_prop2(&zero).unwrap(),
            TailClass::SubGaussian { variance: 0.0 }
        );
        let ones = DeviationNormSet::new(vec![1.0; 4], Regime::Theta2).unwrap();
        assert_eq!(
            subg_params_prop2(&ones).unwrap(),
            TailClass::SubGaussian { variance: 32.0 }
        );
    }

    #[test]
    fn subgamma_examples() {
        let lambda = 0.8;
        let n = 5;
        let set = DeviationNormSet::identical(n, lambda, Regime::Theta1).unwrap();
        let TailClass::SubGamma { eta, scale } = subgamma_params_cor3(&set).unwrap() else {
            unreachable!()
        };
        assert!((eta - 2.0 * n as f64 * lambda * lambda).abs() < 1e-12);
        assert_eq!(scale, lambda);

        let single = DeviationNormSet::new(vec![3.0], Regime::Theta1).unwrap();
        assert_eq!(
            subgamma_params_cor3(&single).unwrap(),
            TailClass::SubGamma {
                eta: 18.0,
                scale: 3.0
            }
        );
        let zero = DeviationNormSet::identical(2, 0.0, Regime::Theta1).unwrap();
        let c = subgamma_params_cor3(&zero).unwrap();
        assert!(c.is_degenerate());
    }

    #[test]
    fn wrong_regime_is_a_usage_error() {
        let s1 = DeviationNormSet::identical(2, 1.0, Regime::Theta1).unwrap();
        let s2 = DeviationNormSet::identical(2, 1.0, Regime::Theta2).unwrap();
        assert!(matches!(subg_params_prop2(&s1), Err(Error::Usage(_))));
        assert!(matches!(subgamma_params_cor3(&s2), Err(Error::Usage(_))));
        assert!(DeviationNormSet::new(vec![], Regime::Theta1).is_err());
        assert!(DeviationNormSet::new(vec![-1.0], Regime::Theta1).is_err());
    }

    #[test]
    fn quantile_examples() {
        let c = TailClass::SubGamma {
            eta: 2.0,
            scale: 1.0,
        };
        assert!((subgamma_quantile(&c, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(subgamma_quantile(&c, 0.0).unwrap(), 0.0);
        let c = TailClass::SubGamma {
            eta: 8.0,
            scale: 2.0,
        };
        assert!((subgamma_quantile(&c, 4.0).unwrap() - 16.0).abs() < 1e-14);
    }

    #[test]
    fn tail_prob_examples() {
        // Σ‖·‖² = 1 → η = 2.
        let c = TailClass::SubGamma {
            eta: 2.0,
            scale: 0.0,
        };
        assert!((subgamma_tail_prob(&c, 2.0).unwrap() - E.recip()).abs() < 1e-15);
        assert_eq!(subgamma_tail_prob(&c, 0.0).unwrap(), 1.0);
        let c = TailClass::SubGamma {
            eta: 0.0,
            scale: 1.0,
        };
        assert!((subgamma_tail_prob(&c, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(subgamma_tail_prob(&c, -1.0).is_err());
        assert!(subgamma_tail_prob(&TailClass::SubGaussian { variance: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn quantile_and_tail_prob_are_consistent() {
        // Without a scale term the two forms invert each other exactly.
        let c = TailClass::SubGamma {
            eta: 3.0,
            scale: 0.0,
        };
        for t in [0.5, 1.0, 2.0, 4.0] {
            let d = subgamma_quantile(&c, t).unwrap();
            let p = subgamma_tail_prob(&c, d).unwrap();
            assert!(p <= (-t).exp() * (1.0 + 1e-12), "t={t}: {p}");
        }
        // With M > 0 the Bernstein-form tail is looser than the quantile form:
        // e^{−t} ≤ tail(quantile(t)) ≤ e^{−t/2}.
        for (eta, m) in [(2.0, 1.0), (0.5, 3.0), (10.0, 0.1)] {
            let c = TailClass::SubGamma { eta, scale: m };
            for t in [0.5, 1.0, 2.0, 4.0] {
                let p = subgamma_tail_prob(&c, subgamma_quantile(&c, t).unwrap()).unwrap();
                assert!(p >= (-t).exp() * (1.0 - 1e-12));
                assert!(p <= (-t / 2.0).exp() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn constant_comparison_examples() {
        let g = remark1_constants(ReferenceLaw::Gaussian { variance: 1.0 }, 1).unwrap();
        assert!((g.psi_norm_constant - 98.15).abs() < 0.01);
        assert_eq!(g.theta_norm_constant, 16.0);
        assert!((g.ratio - 6.13).abs() < 0.01);
        let l = remark1_constants(ReferenceLaw::Laplace { scale: 1.0 }, 1).unwrap();
        assert!((l.psi_norm_constant - 34.99).abs() < 0.01);
        assert_eq!(l.theta_norm_constant, 6.0);
        assert!(remark1_constants(ReferenceLaw::Laplace { scale: 1.0 }, 0).is_err());
    }

    #[test]
    fn sum_norms_for_reference_laws() {
        let set = sum_deviation_norms(&MomentOracle::gaussian(2.0), 10, Regime::Theta2).unwrap();
        assert!(set.norms().iter().all(|v| (v - 2.0).abs() < 1e-10));
        assert_eq!(set.len(), 10);
        let set = sum_deviation_norms(&MomentOracle::laplace(0.7), 4, Regime::Theta1).unwrap();
        assert!(set.norms().iter().all(|v| (v - 0.7).abs() < 1e-10));
    }

    #[test]
    fn sum_norms_for_models() {
        let g: Arc<dyn ModelFamily> =
            Arc::new(GaussianVariance::new(ParameterSpace::new(0.5, 2.0).unwrap()).unwrap());
        let set = sum_deviation_norms_for_model(&g, 1.44, 3, Regime::Theta2).unwrap();
        assert!(set.norms().iter().all(|v| (v - 1.2).abs() < 1e-10));

        let p: Arc<dyn ModelFamily> =
            Arc::new(ParetoShape::new(1.0, ParameterSpace::new(1.0, 2.0).unwrap()).unwrap());
        assert_eq!(
            sum_deviation_norms_for_model(&p, 1.5, 3, Regime::Theta1).unwrap_err(),
            Error::MomentNonexistence { order: 2.0 }
        );

        // Centred Exp(1): E|X−1|^p/p! → 1/e, so the θ₁ scan creeps up to the
        // end of the p range and flags truncation.
        let e: Arc<dyn ModelFamily> =
            Arc::new(ExponentialRate::new(ParameterSpace::new(0.5, 2.0).unwrap()).unwrap());
        let oracle = centered_moment_oracle(&e, 1.0).unwrap();
        let r = theta1_norm(&oracle, DEFAULT_P_MAX).unwrap();
        assert!(r.truncated);
        assert!(r.value > 0.95 && r.value < 1.0, "{r:?}");
    }

    #[test]
    fn two_sided_doubles_and_caps() {
        let c = TailClass::SubGaussian { variance: 8.0 };
        let one = TailBound::upper(c, 4.0).unwrap().bound;
        let two = TailBound::two_sided(c, 4.0).unwrap().bound;
        assert!((two - 2.0 * one).abs() < 1e-15);
        assert_eq!(TailBound::two_sided(c, 0.0).unwrap().bound, 1.0);
    }

    proptest! {
        #[test]
        fn bounds_are_capped_and_nonincreasing(
            eta in 0.0f64..50.0,
            m in 0.0f64..5.0,
            var in 0.0f64..50.0,
            t1 in 0.0f64..40.0,
            dt in 0.0f64..40.0,
        ) {
            let t2 = t1 + dt;
            for class in [
                TailClass::SubGamma { eta, scale: m },
                TailClass::SubGaussian { variance: var },
                TailClass::SubExponential { lambda: var.sqrt(), alpha: m },
            ] {
                let a = class.upper_tail(t1).unwrap();
                let b = class.upper_tail(t2).unwrap();
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!(b <= a);
                let a2 = TailBound::two_sided(class, t1).unwrap().bound;
                let b2 = TailBound::two_sided(class, t2).unwrap().bound;
                prop_assert!(a2 <= 1.0 && b2 <= a2);
            }
        }
    }
}
