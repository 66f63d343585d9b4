//! Deterministic Monte Carlo experiments.
//!
//! Every experiment draws trial `i` from the seed
//! [`trial_seed`]`(master_seed, i)`, runs trials through [`map_trials`] and
//! reduces the per-trial results in trial order with compensated sums. A
//! report therefore depends only on its configuration, never on the worker
//! count.
//!
//! Trials whose estimator fails (no root of the truncated score, say) are
//! left out of every numerator and denominator and counted in `failed`; more
//! than 1% failures turns the run into [`Error::FailureRate`].

mod exec;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_distr::{Exp1, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

pub use exec::{map_trials, seeds_digest, trial_seed, Execution};

use crate::concentration::{
    subg_params_prop2, subgamma_params_cor3, sum_deviation_norms, Regime, TailClass,
};
use crate::error::{Error, Result};
use crate::families::{FamilySpec, ModelFamily};
use crate::mle::{bias_estimate, fit_mle};
use crate::norms::MomentOracle;
use crate::numeric::NeumaierSum;
use crate::truncated::{
    deviation_bound, discriminant, half_width, solve, tune_beta, BetaChoice, BoundCase,
    TheoryInputs, TruncatedScoreConfig,
};

/// Which estimator a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Mle,
    Truncated,
}

/// Replacement contamination: `round(fraction · n)` observations of every
/// sample are overwritten with `magnitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    pub fraction: f64,
    pub magnitude: f64,
}

/// One estimation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub theta_star: f64,
    pub n: usize,
    pub trials: usize,
    pub delta: f64,
    pub estimator: Estimator,
    pub beta: BetaChoice,
    /// `None` picks [`BoundCase::default_for`] the family.
    pub case: Option<BoundCase>,
    pub master_seed: u64,
    pub contamination: Option<Contamination>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Config(format!(
                "δ must lie in (0, 1/2), got {}",
                self.delta
            )));
        }
        if let Some(c) = self.contamination {
            if !(0.0..1.0).contains(&c.fraction) || !c.magnitude.is_finite() {
                return Err(Error::Config(format!(
                    "contamination needs 0 ≤ fraction < 1 and a finite magnitude, got {} and {}",
                    c.fraction, c.magnitude
                )));
            }
        }
        Ok(())
    }
}

/// A proportion or mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Binomial proportion `k/m` with `√(p(1 − p)/m)`.
    pub fn proportion(hits: usize, m: usize) -> Self {
        let p = hits as f64 / m as f64;
        Estimate {
            value: p,
            se: (p * (1.0 - p) / m as f64).sqrt(),
        }
    }

    /// Sample mean with `s/√m`.
    pub fn mean(values: &[f64]) -> Self {
        let m = values.len() as f64;
        let mean = values.iter().copied().collect::<NeumaierSum>().total() / m;
        let ss = values
            .iter()
            .map(|v| (v - mean).powi(2))
            .collect::<NeumaierSum>()
            .total();
        let sd = if values.len() > 1 {
            (ss / (m - 1.0)).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: mean,
            se: sd / m.sqrt(),
        }
    }

    /// Lower end of the `k`-standard-error band.
    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.se
    }

    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.se
    }
}

/// One point of an empirical tail curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub empirical: f64,
    pub se: f64,
    pub bound: f64,
}

/// Paired comparison of the two estimators on contaminated samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContaminationSummary {
    pub fraction: f64,
    pub magnitude: f64,
    pub outliers_per_sample: usize,
    pub mle_rmse: Estimate,
    pub truncated_rmse: Estimate,
    /// Mean of `(θ̂_mle − θ*)² − (θ̂_β − θ*)²` over trials.
    pub mse_difference: Estimate,
    pub mle_projected: usize,
    /// Trials where `Ẑ_β` had no sign change on `Θ` and the estimate was
    /// taken at the boundary the score points to.
    pub truncated_projected: usize,
}

/// Outcome of any experiment; fields that do not apply are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub experiment: String,
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<f64>,
    pub n: usize,
    pub trials: usize,
    pub completed: usize,
    pub failed: usize,
    pub failure_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<Estimator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<BoundCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_condition_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation_bound: Option<f64>,
    /// Guaranteed probability `1 − 2δ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_coverage: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation_fraction_within_bound: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_bias: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contamination: Option<ContaminationSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tail_curve: Vec<TailPoint>,
    pub master_seed: u64,
    pub seeds_digest: String,
}

impl SimulationReport {
    fn new(experiment: &str, family: &str, n: usize, trials: usize, master_seed: u64) -> Self {
        SimulationReport {
            experiment: experiment.to_string(),
            family: family.to_string(),
            theta_star: None,
            n,
            trials,
            completed: trials,
            failed: 0,
            failure_rate: 0.0,
            estimator: None,
            delta: None,
            beta: None,
            case: None,
            n_condition_ok: None,
            half_width: None,
            deviation_bound: None,
            target: None,
            empirical_coverage: None,
            deviation_fraction_within_bound: None,
            bias: None,
            predicted_bias: None,
            rmse: None,
            contamination: None,
            tail_curve: Vec::new(),
            master_seed,
            seeds_digest: seeds_digest(master_seed, trials),
        }
    }
}

/// Tuning of the truncated estimator at `θ*`.
struct Tuning {
    case: BoundCase,
    beta: f64,
    inputs: TheoryInputs,
}

/// Model plus the truncated-estimator settings shared by the runs.
struct Setup {
    model: Arc<dyn ModelFamily>,
    tuning: Option<Tuning>,
}

impl Setup {
    /// `tuned` also computes `β` and the population quantities at `θ*`.
    fn new(config: &ExperimentConfig, tuned: bool) -> Result<Self> {
        config.validate()?;
        let model = config.family.build()?;
        model.check_theta(config.theta_star)?;
        let tuning = if tuned {
            let case = config
                .case
                .unwrap_or_else(|| BoundCase::default_for(model.as_ref()));
            let inputs = TheoryInputs::from_model(model.as_ref(), config.theta_star)?;
            let beta = match config.beta {
                BetaChoice::Auto => tune_beta(&inputs, config.n, config.delta, case)?,
                BetaChoice::Fixed(b) => b,
            };
            TruncatedScoreConfig::new(beta, config.delta, model.theta_space())?;
            Some(Tuning { case, beta, inputs })
        } else {
            None
        };
        Ok(Setup { model, tuning })
    }

    fn tuning(&self) -> &Tuning {
        self.tuning.as_ref().expect("setup was built with tuning")
    }

    fn sample(&self, config: &ExperimentConfig, seed: u64) -> Result<Vec<f64>> {
        let mut x = self.model.sample(config.theta_star, config.n, seed)?;
        if let Some(c) = config.contamination {
            let k = outlier_count(c.fraction, config.n);
            x[..k].iter_mut().for_each(|v| *v = c.magnitude);
        }
        Ok(x)
    }

    fn estimate(&self, config: &ExperimentConfig, estimator: Estimator, x: &[f64]) -> Result<f64> {
        match estimator {
            Estimator::Mle => Ok(fit_mle(self.model.as_ref(), x)?.theta_hat),
            Estimator::Truncated => {
                let cfg = TruncatedScoreConfig::new(
                    self.tuning().beta,
                    config.delta,
                    self.model.theta_space(),
                )?;
                Ok(solve(self.model.as_ref(), x, &cfg)?.theta_hat)
            }
        }
    }

    fn report(&self, experiment: &str, config: &ExperimentConfig) -> SimulationReport {
        let mut r = SimulationReport::new(
            experiment,
            config.family.name(),
            config.n,
            config.trials,
            config.master_seed,
        );
        r.theta_star = Some(config.theta_star);
        r.estimator = Some(config.estimator);
        r.delta = Some(config.delta);
        if let Some(t) = &self.tuning {
            r.beta = Some(t.beta);
            r.case = Some(t.case);
            r.target = Some(1.0 - 2.0 * config.delta);
            let ok = discriminant(&t.inputs, t.beta, config.n, config.delta, t.case) >= 0.0;
            r.n_condition_ok = Some(ok);
            if ok {
                r.half_width = half_width(&t.inputs, t.beta, config.n, config.delta, t.case).ok();
            }
            r.deviation_bound = deviation_bound(&t.inputs, config.n, config.delta, t.case).ok();
        }
        r
    }
}

fn outlier_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).min(n)
}

/// Runs the configured estimator on every trial and drops failures, with
/// the failure-rate check applied.
fn estimates(
    setup: &Setup,
    config: &ExperimentConfig,
    exec: Execution,
    report: &mut SimulationReport,
) -> Result<Vec<f64>> {
    let results = map_trials(config.trials, config.master_seed, exec, |_, seed| {
        setup
            .sample(config, seed)
            .and_then(|x| setup.estimate(config, config.estimator, &x))
    });
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = 0;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(Error::NoRoot { .. }) | Err(Error::Numeric(_)) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    check_failures(failed, config.trials)?;
    report.completed = ok.len();
    report.failed = failed;
    report.failure_rate = failed as f64 / config.trials as f64;
    let sq: Vec<f64> = ok.iter().map(|t| (t - config.theta_star).powi(2)).collect();
    report.rmse = Some(Estimate::mean(&sq).value.sqrt());
    Ok(ok)
}

fn check_failures(failed: usize, trials: usize) -> Result<()> {
    if failed * 100 > trials {
        Err(Error::FailureRate { failed, trials })
    } else {
        Ok(())
    }
}

/// Fraction of trials with `θ̂` inside `[θ* − h, θ* + h]`, `h = h(β)`.
///
/// When the sample-size condition fails at `β` there is no band; the report
/// says so and carries no coverage.
pub fn run_coverage(config: &ExperimentConfig, exec: Execution) -> Result<SimulationReport> {
    let setup = Setup::new(config, true)?;
    let mut report = setup.report("coverage", config);
    let est = estimates(&setup, config, exec, &mut report)?;
    if let Some(h) = report.half_width {
        let hits = est
            .iter()
            .filter(|t| (*t - config.theta_star).abs() <= h)
            .count();
        report.empirical_coverage = Some(Estimate::proportion(hits, est.len()));
    }
    Ok(report)
}

/// Fraction of trials with `|θ̂ − θ*|` strictly below the tuned deviation
/// bound.
pub fn run_deviation(config: &ExperimentConfig, exec: Execution) -> Result<SimulationReport> {
    let setup = Setup::new(config, true)?;
    let mut report = setup.report("deviation", config);
    let t = setup.tuning();
    let bound = deviation_bound(&t.inputs, config.n, config.delta, t.case)?;
    let est = estimates(&setup, config, exec, &mut report)?;
    let hits = est
        .iter()
        .filter(|t| (*t - config.theta_star).abs() < bound)
        .count();
    report.deviation_fraction_within_bound = Some(Estimate::proportion(hits, est.len()));
    Ok(report)
}

/// Monte Carlo mean of `θ̂ − θ*` against `κ/(2nI²)`.
pub fn run_bias(config: &ExperimentConfig, exec: Execution) -> Result<SimulationReport> {
    let setup = Setup::new(config, config.estimator == Estimator::Truncated)?;
    let predicted = bias_estimate(setup.model.as_ref(), config.theta_star, config.n)?.bias;
    let mut report = setup.report("bias", config);
    let est = estimates(&setup, config, exec, &mut report)?;
    let errors: Vec<f64> = est.iter().map(|t| t - config.theta_star).collect();
    report.bias = Some(Estimate::mean(&errors));
    report.predicted_bias = Some(predicted);
    Ok(report)
}

/// Paired RMSE of the MLE and the truncated estimator on the same
/// contaminated samples.
///
/// When `Ẑ_β` keeps one sign on `Θ` the truncated estimate is taken at the
/// boundary the root lies beyond, mirroring the MLE's projection; such
/// trials are counted rather than dropped.
pub fn run_contamination(config: &ExperimentConfig, exec: Execution) -> Result<SimulationReport> {
    let setup = Setup::new(config, true)?;
    let contamination = config.contamination.unwrap_or(Contamination {
        fraction: 0.0,
        magnitude: 0.0,
    });
    let mut report = setup.report("contamination", config);
    report.estimator = None;
    let space = setup.model.theta_space();
    let results = map_trials(config.trials, config.master_seed, exec, |_, seed| {
        let x = setup.sample(config, seed)?;
        let mle = fit_mle(setup.model.as_ref(), &x)?;
        let (truncated, projected) = match setup.estimate(config, Estimator::Truncated, &x) {
            Ok(t) => (t, false),
            // With ℓ̈ > 0 the score increases in θ, so a positive score at
            // both ends puts the root below Θ.
            Err(Error::NoRoot { f_lower, .. }) => (
                if f_lower > 0.0 {
                    space.lower
                } else {
                    space.upper
                },
                true,
            ),
            Err(e) => return Err(e),
        };
        Ok((mle.theta_hat, mle.projected, truncated, projected))
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = 0;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::Numeric(_)) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    check_failures(failed, config.trials)?;
    report.completed = rows.len();
    report.failed = failed;
    report.failure_rate = failed as f64 / config.trials as f64;

    let t = config.theta_star;
    let mle_sq: Vec<f64> = rows.iter().map(|r| (r.0 - t).powi(2)).collect();
    let tr_sq: Vec<f64> = rows.iter().map(|r| (r.2 - t).powi(2)).collect();
    let diff: Vec<f64> = mle_sq.iter().zip(&tr_sq).map(|(a, b)| a - b).collect();
    let rmse = |sq: &[f64]| {
        let mse = Estimate::mean(sq);
        let value = mse.value.sqrt();
        let se = if value > 0.0 {
            mse.se / (2.0 * value)
        } else {
            0.0
        };
        Estimate { value, se }
    };
    let truncated_rmse = rmse(&tr_sq);
    report.rmse = Some(truncated_rmse.value);
    report.contamination = Some(ContaminationSummary {
        fraction: contamination.fraction,
        magnitude: contamination.magnitude,
        outliers_per_sample: outlier_count(contamination.fraction, config.n),
        mle_rmse: rmse(&mle_sq),
        truncated_rmse,
        mse_difference: Estimate::mean(&diff),
        mle_projected: rows.iter().filter(|r| r.1).count(),
        truncated_projected: rows.iter().filter(|r| r.3).count(),
    });
    Ok(report)
}

/// Summand law for tail experiments on sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TailLaw {
    /// `N(0, σ²)`, compared with the sub-Gaussian bound from θ₂ norms.
    Gaussian { sigma: f64 },
    /// `Laplace(0, λ)`, compared with the sub-Gamma bound from θ₁ norms.
    Laplace { scale: f64 },
}

impl TailLaw {
    fn name(&self) -> &'static str {
        match self {
            TailLaw::Gaussian { .. } => "gaussian_sum",
            TailLaw::Laplace { .. } => "laplace_sum",
        }
    }

    fn sd(&self) -> f64 {
        match *self {
            TailLaw::Gaussian { sigma } => sigma,
            TailLaw::Laplace { scale } => std::f64::consts::SQRT_2 * scale,
        }
    }

    fn draw(&self, rng: &mut Xoshiro256PlusPlus) -> f64 {
        match *self {
            TailLaw::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            TailLaw::Laplace { scale } => {
                let e: f64 = rng.sample(Exp1);
                if rng.gen::<bool>() {
                    scale * e
                } else {
                    -scale * e
                }
            }
        }
    }

    /// Tail class of the centred sum of `n` summands.
    pub fn sum_class(&self, n: usize) -> Result<TailClass> {
        match *self {
            TailLaw::Gaussian { sigma } => subg_params_prop2(&sum_deviation_norms(
                &MomentOracle::gaussian(sigma),
                n,
                Regime::Theta2,
            )?),
            TailLaw::Laplace { scale } => subgamma_params_cor3(&sum_deviation_norms(
                &MomentOracle::laplace(scale),
                n,
                Regime::Theta1,
            )?),
        }
    }
}

/// Upper-tail experiment on sums of i.i.d. centred summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSumConfig {
    pub law: TailLaw,
    pub n: usize,
    pub trials: usize,
    /// Number of equally spaced thresholds in `[0, t_max]`.
    pub grid_points: usize,
    /// Defaults to four standard deviations of the sum.
    pub t_max: Option<f64>,
    pub master_seed: u64,
}

/// Empirical `P{S_n > t}` against the bound on a grid of `t`.
pub fn run_tail_sum(config: &TailSumConfig, exec: Execution) -> Result<SimulationReport> {
    if config.trials == 0 || config.n == 0 || config.grid_points < 2 {
        return Err(Error::Config(
            "tail runs need trials ≥ 1, n ≥ 1 and at least two grid points".into(),
        ));
    }
    let class = config.law.sum_class(config.n)?;
    let t_max = config
        .t_max
        .unwrap_or(4.0 * config.law.sd() * (config.n as f64).sqrt());
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Config(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let law = config.law;
    let n = config.n;
    let mut sums = map_trials(config.trials, config.master_seed, exec, |_, seed| {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..n)
            .map(|_| law.draw(&mut rng))
            .collect::<NeumaierSum>()
            .total()
    });
    sums.sort_by(f64::total_cmp);

    let step = t_max / (config.grid_points - 1) as f64;
    let mut curve = Vec::with_capacity(config.grid_points);
    for i in 0..config.grid_points {
        let t = step * i as f64;
        let above = sums.len() - sums.partition_point(|s| *s <= t);
        let p = Estimate::proportion(above, sums.len());
        curve.push(TailPoint {
            t,
            empirical: p.value,
            se: p.se,
            bound: class.upper_tail(t)?,
        });
    }
    let mut report = SimulationReport::new(
        "tail_sum",
        law.name(),
        config.n,
        config.trials,
        config.master_seed,
    );
    report.tail_curve = curve;
    Ok(report)
}
