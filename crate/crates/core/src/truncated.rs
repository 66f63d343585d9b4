//! The log-truncated Z-estimator.
//!
//! Each score is passed through the influence function
//! `ψ(x) = sign(x) log(1 + |x| + x²/2)` at scale `β`, and the estimate is the
//! root of `Ẑ_β(θ) = (1/(nβ)) Σ ψ(β ℓ̇(X_i, θ))` on `Θ`. Because
//! `−log(1 − x + x²/2) ≤ ψ(x) ≤ log(1 + x + x²/2)`, the exponential moments
//! of `nβẐ_β` are controlled by second moments alone, which gives a
//! deviation band around `θ*` whose half-width `h(β)` depends on the Fisher
//! information and the first two moments of the Lipschitz envelope `c(X)`.
//!
//! Two forms of the band are provided:
//!
//! * [`BoundCase::GeneralC`]: `c(x)` varies with `x`;
//! * [`BoundCase::ConstantC`]: `c(x) ≡ c`, which gives a tighter band.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{ModelFamily, ParameterSpace};
use crate::mle::fit_mle;
use crate::numeric::{bisect, NeumaierSum};

/// Absolute θ tolerance of the root solver.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Grid used to look for extra sign changes of `Ẑ_β`.
const MONOTONICITY_PROBES: usize = 17;

/// `sign(x) log(1 + |x| + x²/2)`.
pub fn psi(x: f64) -> f64 {
    let a = x.abs();
    // x²/2 overflows well before the logarithm does.
    let magnitude = if a > 1e150 {
        2.0 * a.ln() - std::f64::consts::LN_2
    } else {
        (a + 0.5 * a * a).ln_1p()
    };
    magnitude.copysign(x)
}

/// `Ẑ_β(θ) = (1/(nβ)) Σ ψ(β ℓ̇(X_i, θ))`.
pub fn z_hat(model: &dyn ModelFamily, sample: &[f64], theta: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    model.check_theta(theta)?;
    if sample.is_empty() {
        return Err(Error::Usage("sample must be non-empty".into()));
    }
    let mut sum = NeumaierSum::new();
    for &x in sample {
        model.check_x(x)?;
        sum.add(psi(beta * model.eval(x, theta).score));
    }
    let z = sum.total() / (sample.len() as f64 * beta);
    if z.is_nan() {
        return Err(Error::Numeric(format!(
            "{}: truncated score is NaN at θ = {theta}",
            model.name()
        )));
    }
    Ok(z)
}

// Domain checks are done once by the caller.
fn z_hat_unchecked(model: &dyn ModelFamily, sample: &[f64], theta: f64, beta: f64) -> f64 {
    let sum: NeumaierSum = sample
        .iter()
        .map(|&x| psi(beta * model.eval(x, theta).score))
        .collect();
    sum.total() / (sample.len() as f64 * beta)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "β must be positive and finite, got {beta}"
        )))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("δ must lie in (0, 1), got {delta}")))
    }
}

/// Scale, confidence level and search interval for one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedScoreConfig {
    pub beta: f64,
    pub delta: f64,
    pub theta_space: ParameterSpace,
}

impl TruncatedScoreConfig {
    /// The band holds with probability `1 − 2δ`, so `δ < 1/2`.
    pub fn new(beta: f64, delta: f64, theta_space: ParameterSpace) -> Result<Self> {
        check_beta(beta)?;
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Config(format!(
                "δ must lie in (0, 1/2) for the truncated estimator, got {delta}"
            )));
        }
        Ok(TruncatedScoreConfig {
            beta,
            delta,
            theta_space,
        })
    }
}

/// Root of `Ẑ_β` and the outcome of the monotonicity probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub theta_hat: f64,
    /// Set when `Ẑ_β` changes sign more than once on a coarse grid.
    pub monotonicity_warning: Option<String>,
}

/// Bisection for `Ẑ_β(θ) = 0` on `config.theta_space`.
///
/// Only a sign change between the endpoints is required, so the solver is
/// indifferent to whether `Ẑ_β` increases or decreases in θ.
pub fn solve(
    model: &dyn ModelFamily,
    sample: &[f64],
    config: &TruncatedScoreConfig,
) -> Result<Solution> {
    check_beta(config.beta)?;
    if sample.is_empty() {
        return Err(Error::Usage("sample must be non-empty".into()));
    }
    for &x in sample {
        model.check_x(x)?;
    }
    let space = config.theta_space;
    let model_space = model.theta_space();
    if space.lower < model_space.lower || space.upper > model_space.upper {
        return Err(Error::Config(format!(
            "search interval [{}, {}] leaves the model's parameter space [{}, {}]",
            space.lower, space.upper, model_space.lower, model_space.upper
        )));
    }
    let beta = config.beta;
    let z = |t: f64| z_hat_unchecked(model, sample, t, beta);
    let theta_hat = bisect(|t| Ok(z(t)), space.lower, space.upper, ROOT_TOLERANCE)?;

    let signs: Vec<f64> = space
        .grid(MONOTONICITY_PROBES)
        .into_iter()
        .map(z)
        .filter(|v| *v != 0.0)
        .map(f64::signum)
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let monotonicity_warning = (changes > 1).then(|| {
        format!(
            "{}: truncated score changes sign {changes} times on a {MONOTONICITY_PROBES}-point grid; the root may not be unique",
            model.name()
        )
    });
    Ok(Solution {
        theta_hat,
        monotonicity_warning,
    })
}

/// Which form of the deviation band applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// `c(x)` depends on `x`; uses `E c(X)` and `E c²(X)`.
    GeneralC,
    /// `c(x) ≡ c`.
    ConstantC,
}

impl BoundCase {
    /// The tighter constant form when the family's envelope is
    /// `x`-independent, the general form otherwise.
    pub fn default_for(model: &dyn ModelFamily) -> Self {
        if model.constant_envelope().is_some() {
            BoundCase::ConstantC
        } else {
            BoundCase::GeneralC
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundCase::GeneralC => "general_c",
            BoundCase::ConstantC => "constant_c",
        }
    }
}

/// Population quantities entering the band: `I(θ*)`, `E c(X)`, `E c²(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub fisher: f64,
    pub c_mean: f64,
    pub c_sq_mean: f64,
}

impl TheoryInputs {
    pub fn new(fisher: f64, c_mean: f64, c_sq_mean: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(fisher) || !ok(c_mean) || !ok(c_sq_mean) {
            return Err(Error::Config(format!(
                "I, E c and E c² must be positive and finite, got {fisher}, {c_mean}, {c_sq_mean}"
            )));
        }
        // Jensen, up to rounding in the quadratures.
        if c_sq_mean < c_mean * c_mean * (1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "E c² = {c_sq_mean} is below (E c)² = {}",
                c_mean * c_mean
            )));
        }
        Ok(TheoryInputs {
            fisher,
            c_mean,
            c_sq_mean,
        })
    }

    /// Evaluates the three quantities under the model at `θ`.
    pub fn from_model(model: &dyn ModelFamily, theta: f64) -> Result<Self> {
        let fisher = model.fisher_information(theta)?;
        let (c_mean, c_sq_mean) = model.c_moments(theta)?;
        Self::new(fisher, c_mean, c_sq_mean)
    }

    fn for_case(&self, case: BoundCase) -> Result<()> {
        let c2 = self.c_mean * self.c_mean;
        if case == BoundCase::ConstantC && (self.c_sq_mean - c2).abs() > 1e-9 * c2 {
            return Err(Error::Config(format!(
                "the constant-c band needs an x-independent envelope, but E c² = {} ≠ (E c)² = {c2}",
                self.c_sq_mean
            )));
        }
        Ok(())
    }
}

/// Sample-size requirement at a fixed `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSizeRequirement {
    AtLeast(u64),
    /// `4β² E c² I ≥ (E c)²`: no `n` works at this `β`.
    Unsatisfiable,
}

/// `n ≥ 4 E c² log(1/δ) / ((E c)² − 4β² E c² I)`, rounded up.
pub fn min_sample_size(
    inputs: &TheoryInputs,
    beta: f64,
    delta: f64,
) -> Result<SampleSizeRequirement> {
    check_beta(beta)?;
    check_delta(delta)?;
    let l = (1.0 / delta).ln();
    let den = inputs.c_mean.powi(2) - 4.0 * beta * beta * inputs.c_sq_mean * inputs.fisher;
    if den <= 0.0 {
        return Ok(SampleSizeRequirement::Unsatisfiable);
    }
    let bound = 4.0 * inputs.c_sq_mean * l / den;
    // Absorb rounding so that exact integers are not bumped up.
    let n = (bound * (1.0 - 1e-12)).ceil().max(0.0);
    Ok(SampleSizeRequirement::AtLeast(n as u64))
}

/// The quantity under the square root of `h(β)`; the band exists iff it
/// is non-negative.
pub fn discriminant(
    inputs: &TheoryInputs,
    beta: f64,
    n: usize,
    delta: f64,
    case: BoundCase,
) -> f64 {
    let l = (1.0 / delta).ln();
    let nf = n as f64;
    match case {
        BoundCase::GeneralC => {
            let r = inputs.c_sq_mean / inputs.c_mean.powi(2);
            1.0 - 4.0 * beta * beta * r * inputs.fisher - 4.0 * r * l / nf
        }
        BoundCase::ConstantC => 1.0 - beta * beta * inputs.fisher - 2.0 * l / nf,
    }
}

/// Half-width `h(β)` of the band `[θ* − h, θ* + h]`.
///
/// * general: `(βI + log(1/δ)/(nβ)) / (½ E c (1 + √D))`, the smaller
///   positive root of `nβ² E c² t² − nβ E c t + nβ² I + log(1/δ)`;
/// * constant: `(βI/2 + log(1/δ)/(nβ)) / (½ c (1 + √D))`.
pub fn half_width(
    inputs: &TheoryInputs,
    beta: f64,
    n: usize,
    delta: f64,
    case: BoundCase,
) -> Result<f64> {
    check_beta(beta)?;
    check_delta(delta)?;
    check_n(n)?;
    inputs.for_case(case)?;
    let d = discriminant(inputs, beta, n, delta, case);
    if d < 0.0 {
        return Err(Error::Infeasible(match case {
            BoundCase::GeneralC => format!(
                "n = {n} violates n ≥ 4 E c² log(1/δ) / ((E c)² − 4β² E c² I) at β = {beta}"
            ),
            BoundCase::ConstantC => {
                format!("n = {n} violates n ≥ 2 log(1/δ) / (1 − β² I) at β = {beta}")
            }
        }));
    }
    let l = (1.0 / delta).ln();
    let nf = n as f64;
    let numerator = match case {
        BoundCase::GeneralC => beta * inputs.fisher + l / (nf * beta),
        BoundCase::ConstantC => 0.5 * beta * inputs.fisher + l / (nf * beta),
    };
    Ok(numerator / (0.5 * inputs.c_mean * (1.0 + d.sqrt())))
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Usage("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The `β` minimizing `h(β)`.
///
/// * general: `√(log(1/δ)(1 − s)/(nI))` with `s = 4 E c² log(1/δ)/(n (E c)²)`;
/// * constant: `√(2 log(1/δ)/(nI (1 + 2 log(1/δ)/(n − 2 log(1/δ)))))`.
pub fn tune_beta(inputs: &TheoryInputs, n: usize, delta: f64, case: BoundCase) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    inputs.for_case(case)?;
    let l = (1.0 / delta).ln();
    let nf = n as f64;
    let beta = match case {
        BoundCase::GeneralC => {
            let slack = nf * inputs.c_mean.powi(2) - 4.0 * inputs.c_sq_mean * l;
            if slack <= 0.0 {
                return Err(Error::Infeasible(format!(
                    "n (E c)² = {} must exceed 4 E c² log(1/δ) = {}",
                    nf * inputs.c_mean.powi(2),
                    4.0 * inputs.c_sq_mean * l
                )));
            }
            (l / (nf * inputs.fisher * (1.0 + 4.0 * inputs.c_sq_mean * l / slack))).sqrt()
        }
        BoundCase::ConstantC => {
            let slack = nf - 2.0 * l;
            if slack <= 0.0 {
                return Err(Error::Infeasible(format!(
                    "n = {n} must exceed 2 log(1/δ) = {}",
                    2.0 * l
                )));
            }
            (2.0 * l / (nf * inputs.fisher * (1.0 + 2.0 * l / slack))).sqrt()
        }
    };
    Ok(beta)
}

/// `h` at the tuned `β`:
///
/// * general: `2 √(I log(1/δ) / (n (E c)² − 4 E c² log(1/δ)))`;
/// * constant: `√(2 I log(1/δ) / (n c² − 2 c² log(1/δ)))`.
pub fn deviation_bound(
    inputs: &TheoryInputs,
    n: usize,
    delta: f64,
    case: BoundCase,
) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    inputs.for_case(case)?;
    let l = (1.0 / delta).ln();
    let nf = n as f64;
    let (num, den) = match case {
        BoundCase::GeneralC => (
            4.0 * inputs.fisher * l,
            nf * inputs.c_mean.powi(2) - 4.0 * inputs.c_sq_mean * l,
        ),
        BoundCase::ConstantC => {
            let c2 = inputs.c_mean.powi(2);
            (2.0 * inputs.fisher * l, nf * c2 - 2.0 * c2 * l)
        }
    };
    if den <= 0.0 {
        return Err(Error::Infeasible(format!(
            "deviation bound denominator {den} is not positive at n = {n}, δ = {delta}"
        )));
    }
    Ok((num / den).sqrt())
}

/// Where the band is centred and whose population quantities it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    /// Centred at a known `θ*`, with `I`, `E c`, `E c²` at `θ*`.
    Theoretical,
    /// Centred at `θ̂_β`, with the quantities plugged in at `θ̂_β`.
    Practical,
}

/// `(center − h, center + h)`.
pub fn interval(center: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h.is_finite()) || !center.is_finite() {
        return Err(Error::Usage(format!(
            "interval needs a finite centre and positive half-width, got {center}, {h}"
        )));
    }
    Ok((center - h, center + h))
}

/// How `β` is chosen for a robust fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaChoice {
    Auto,
    Fixed(f64),
}

/// Output of [`fit_robust`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustEstimate {
    pub theta_hat: f64,
    pub beta: f64,
    pub delta: f64,
    /// `None` when the sample-size condition fails at `beta`.
    pub half_width: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub mode: IntervalMode,
    pub n_condition_ok: bool,
    pub case: BoundCase,
    /// `β` came from [`tune_beta`].
    pub tuned: bool,
    pub monotonicity_warning: Option<String>,
}

/// Fits `θ̂_β` and its band.
///
/// In theoretical mode `theta_star` supplies the population quantities and
/// the centre. In practical mode they are evaluated at a pilot estimate (the
/// projected MLE) to tune `β`, and at `θ̂_β` for the band.
pub fn fit_robust(
    model: &dyn ModelFamily,
    sample: &[f64],
    delta: f64,
    beta: BetaChoice,
    case: BoundCase,
    mode: IntervalMode,
    theta_star: Option<f64>,
) -> Result<RobustEstimate> {
    let n = sample.len();
    check_n(n)?;
    let pilot = match (mode, theta_star) {
        (IntervalMode::Theoretical, Some(t)) => t,
        (IntervalMode::Theoretical, None) => {
            return Err(Error::Usage(
                "theoretical mode needs the true parameter".into(),
            ))
        }
        (IntervalMode::Practical, _) => fit_mle(model, sample)?.theta_hat,
    };
    let pilot_inputs = TheoryInputs::from_model(model, pilot)?;
    let (beta, tuned) = match beta {
        BetaChoice::Auto => (tune_beta(&pilot_inputs, n, delta, case)?, true),
        BetaChoice::Fixed(b) => (b, false),
    };
    let config = TruncatedScoreConfig::new(beta, delta, model.theta_space())?;
    let solution = solve(model, sample, &config)?;
    let (center, inputs) = match mode {
        IntervalMode::Theoretical => (pilot, pilot_inputs),
        IntervalMode::Practical => (
            solution.theta_hat,
            TheoryInputs::from_model(model, solution.theta_hat)?,
        ),
    };
    let n_condition_ok = discriminant(&inputs, beta, n, delta, case) >= 0.0;
    let half_width = if n_condition_ok {
        Some(half_width(&inputs, beta, n, delta, case)?)
    } else {
        None
    };
    let interval = half_width.map(|h| interval(center, h)).transpose()?;
    Ok(RobustEstimate {
        theta_hat: solution.theta_hat,
        beta,
        delta,
        half_width,
        interval,
        mode,
        n_condition_ok,
        case,
        tuned,
        monotonicity_warning: solution.monotonicity_warning,
    })
}
