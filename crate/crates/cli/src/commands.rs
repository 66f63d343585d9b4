//! The five subcommands. Each returns a JSON value plus any CSV curves.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use ltmle_core::concentration::Regime;
use ltmle_core::families::{
    centered_moment_oracle, difference_moment_oracle, FamilySpec, ModelFamily,
};
use ltmle_core::harness::{
    map_trials, run_bias, run_contamination, run_coverage, run_deviation, run_tail_sum,
    Contamination, Execution, ExperimentConfig, SimulationReport, TailPoint, TailSumConfig,
};
use ltmle_core::mle::{
    certify, difference_norms, fit_mle, mle_concentration, oracle_bound, LipschitzProfile,
};
use ltmle_core::norms::{theta1_norm, theta2_norm, MomentOracle};
use ltmle_core::numeric::roots::SUP_GRID_POINTS;
use ltmle_core::numeric::NeumaierSum;
use ltmle_core::truncated::{
    deviation_bound, discriminant, fit_robust, half_width, min_sample_size, tune_beta, BoundCase,
    TheoryInputs,
};
use ltmle_core::Error;
use serde_json::{json, Value};

use crate::config::{Command, ConfigErrors, DataSource, ExperimentKind, NormSource, RunConfig};

/// Version of the JSON layout written to standard output.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigErrors),
    /// Unreadable or malformed input outside the config file.
    Input(String),
    /// Non-finite data and other numerical breakdowns.
    Numeric(String),
    Core(Error),
}

impl CliError {
    /// 1 for anything the user can fix in the configuration or data,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Core(e) => match e {
                Error::Numeric(_)
                | Error::NoRoot { .. }
                | Error::MomentNonexistence { .. }
                | Error::FailureRate { .. } => 2,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigErrors> for CliError {
    fn from(e: ConfigErrors) -> Self {
        CliError::Config(e)
    }
}

pub struct Output {
    pub json: Value,
    /// `(file name, contents)` pairs written under the output directory.
    pub csv: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl Output {
    fn json(json: Value) -> Self {
        Output {
            json,
            csv: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

pub fn dispatch(cfg: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    let body = match cfg.command {
        Command::Fit { .. } => fit(cfg)?,
        Command::Tune => tune(cfg)?,
        Command::Norms => norms(cfg)?,
        Command::Bounds => bounds(cfg, exec)?,
        Command::Simulate => simulate(cfg, exec)?,
    };
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "result": body.json,
    });
    Ok(Output { json, ..body })
}

/// Reads newline-separated reals. Blank lines are skipped.
pub fn read_data_file(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let x: f64 = line.parse().map_err(|_| {
            CliError::Input(format!(
                "{}:{}: `{line}` is not a number",
                path.display(),
                i + 1
            ))
        })?;
        if !x.is_finite() {
            return Err(CliError::Numeric(format!(
                "{}:{}: non-finite value `{line}`",
                path.display(),
                i + 1
            )));
        }
        out.push(x);
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{} holds no data", path.display())));
    }
    Ok(out)
}

fn model_of(cfg: &RunConfig) -> Result<(FamilySpec, Arc<dyn ModelFamily>), CliError> {
    let spec = cfg
        .family
        .ok_or_else(|| CliError::Input("no [family] section".into()))?;
    Ok((spec, spec.build()?))
}

fn load_sample(cfg: &RunConfig, model: &dyn ModelFamily) -> Result<Vec<f64>, CliError> {
    let sample = match &cfg.data {
        Some(DataSource::File(p)) => read_data_file(p)?,
        Some(DataSource::Simulated { theta, n }) => model.sample(*theta, *n, cfg.seed)?,
        None => return Err(CliError::Input("no [data] section".into())),
    };
    for &x in &sample {
        model.check_x(x)?;
    }
    Ok(sample)
}

fn data_json(cfg: &RunConfig) -> Value {
    match &cfg.data {
        Some(DataSource::File(p)) => json!({ "file": p.display().to_string() }),
        Some(DataSource::Simulated { theta, n }) => json!({ "theta": theta, "n": n }),
        None => Value::Null,
    }
}

fn fit(cfg: &RunConfig) -> Result<Output, CliError> {
    let (spec, model) = model_of(cfg)?;
    let sample = load_sample(cfg, model.as_ref())?;
    let mle = fit_mle(model.as_ref(), &sample)?;
    let est = &cfg.estimator;
    let mut warnings = Vec::new();
    let robust = match est.kind {
        ltmle_core::harness::Estimator::Mle => None,
        ltmle_core::harness::Estimator::Truncated => {
            let case = est
                .case
                .unwrap_or_else(|| BoundCase::default_for(model.as_ref()));
            let r = fit_robust(
                model.as_ref(),
                &sample,
                est.delta,
                est.beta,
                case,
                est.mode,
                est.theta_star,
            )?;
            if let Some(w) = &r.monotonicity_warning {
                warnings.push(w.clone());
            }
            if !r.n_condition_ok {
                warnings.push(format!(
                    "n = {} is below the band's sample-size condition at β = {}; no interval reported",
                    sample.len(),
                    r.beta
                ));
            }
            Some(r)
        }
    };
    Ok(Output {
        json: json!({
            "family": spec.name(),
            "data": data_json(cfg),
            "n": sample.len(),
            "mle": mle,
            "robust": robust,
        }),
        csv: Vec::new(),
        warnings,
    })
}

fn tune(cfg: &RunConfig) -> Result<Output, CliError> {
    let (spec, model) = model_of(cfg)?;
    let sample = match cfg.data {
        Some(_) => Some(load_sample(cfg, model.as_ref())?),
        None => None,
    };
    let n = match (cfg.tune_n, &sample) {
        (Some(n), _) => n,
        (None, Some(s)) => s.len(),
        (None, None) => return Err(CliError::Input("no sample size to tune for".into())),
    };
    let (theta, theta_source) = match (cfg.tune_theta, cfg.estimator.theta_star, &sample) {
        (Some(t), _, _) => (t, "tune.theta"),
        (None, Some(t), _) => (t, "estimator.theta_star"),
        (None, None, Some(s)) => (fit_mle(model.as_ref(), s)?.theta_hat, "mle"),
        (None, None, None) => return Err(CliError::Input("no parameter to tune at".into())),
    };
    let delta = cfg.estimator.delta;
    let case = cfg
        .estimator
        .case
        .unwrap_or_else(|| BoundCase::default_for(model.as_ref()));
    let inputs = TheoryInputs::from_model(model.as_ref(), theta)?;
    let beta = tune_beta(&inputs, n, delta, case)?;
    Ok(Output::json(json!({
        "family": spec.name(),
        "theta": theta,
        "theta_source": theta_source,
        "n": n,
        "delta": delta,
        "case": case,
        "inputs": inputs,
        "beta": beta,
        "half_width": half_width(&inputs, beta, n, delta, case)?,
        "deviation_bound": deviation_bound(&inputs, n, delta, case)?,
        "discriminant": discriminant(&inputs, beta, n, delta, case),
        "min_sample_size": min_sample_size(&inputs, beta, delta)?,
    })))
}

fn norm_pair(oracle: &MomentOracle, p_max: u32) -> Value {
    let one = |r: ltmle_core::Result<ltmle_core::norms::NormReport>| match r {
        Ok(report) => json!(report),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "theta1": one(theta1_norm(oracle, p_max)),
        "theta2": one(theta2_norm(oracle, p_max)),
    })
}

fn norms(cfg: &RunConfig) -> Result<Output, CliError> {
    let p_max = cfg.norms.p_max;
    match cfg.norms.source {
        NormSource::Data => {
            let sample = match (&cfg.data, cfg.family) {
                (Some(DataSource::File(p)), _) => read_data_file(p)?,
                (Some(DataSource::Simulated { .. }), Some(_)) => {
                    let (_, model) = model_of(cfg)?;
                    load_sample(cfg, model.as_ref())?
                }
                _ => {
                    return Err(CliError::Input(
                        "simulated data needs a [family] section".into(),
                    ))
                }
            };
            let mean = ltmle_core::numeric::sum::mean(&sample);
            let centered: Vec<f64> = sample.iter().map(|x| x - mean).collect();
            let oracle = MomentOracle::empirical(&centered)?;
            Ok(Output::json(json!({
                "source": "data",
                "data": data_json(cfg),
                "n": sample.len(),
                "mean": mean,
                "p_max": p_max,
                "centered": norm_pair(&oracle, p_max),
            })))
        }
        NormSource::Model => {
            let (spec, model) = model_of(cfg)?;
            let theta = cfg
                .norms
                .theta
                .ok_or_else(|| CliError::Input("norms.theta is required".into()))?;
            let pair = |o: ltmle_core::Result<MomentOracle>| match o {
                Ok(o) => norm_pair(&o, p_max),
                Err(e) => json!({ "error": e.to_string() }),
            };
            Ok(Output::json(json!({
                "source": "model",
                "family": spec.name(),
                "theta": theta,
                "p_max": p_max,
                "centered": pair(centered_moment_oracle(&model, theta)),
                "difference": pair(difference_moment_oracle(&model, theta)),
            })))
        }
    }
}

fn curve_csv(points: &[TailPoint]) -> String {
    let mut s = String::from("t,bound,empirical,se\n");
    for p in points {
        s.push_str(&format!("{},{},{},{}\n", p.t, p.bound, p.empirical, p.se));
    }
    s
}

fn bounds(cfg: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    let (spec, model) = model_of(cfg)?;
    let b = cfg
        .bounds
        .as_ref()
        .ok_or_else(|| CliError::Input("no [bounds] section".into()))?;
    let regime = b.regime.unwrap_or(match spec {
        FamilySpec::GaussianMean { .. } => Regime::Theta2,
        _ => Regime::Theta1,
    });
    let certificate = match (b.c_h, b.c_l, b.x_box) {
        (Some(_), Some(_), _) => None,
        (_, _, Some((lo, hi))) => Some(certify(model.as_ref(), lo, hi, SUP_GRID_POINTS)?),
        _ => return Err(CliError::Input("no x box and no c_H/c_l overrides".into())),
    };
    let c_h = b.c_h.or(certificate.map(|c| c.c_h)).unwrap_or(f64::NAN);
    let c_l = b.c_l.or(certificate.map(|c| c.c_l)).unwrap_or(f64::NAN);
    let d_norms = difference_norms(&model, b.theta_star, b.n, regime)?;
    let profile = LipschitzProfile::new(c_h, c_l, d_norms)?;
    let oracle = oracle_bound(
        &profile,
        model.as_ref(),
        b.theta_star,
        b.n,
        cfg.estimator.delta,
    )?;

    let fits = map_trials(b.trials, cfg.seed, exec, |_, seed| {
        model
            .sample(b.theta_star, b.n, seed)
            .and_then(|x| fit_mle(model.as_ref(), &x))
            .map(|f| f.theta_hat)
    });
    let mut estimates = Vec::with_capacity(fits.len());
    let mut failed = 0;
    for f in fits {
        match f {
            Ok(t) => estimates.push(t),
            Err(Error::NoRoot { .. } | Error::Numeric(_)) => failed += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if failed * 100 > b.trials {
        return Err(Error::FailureRate {
            failed,
            trials: b.trials,
        }
        .into());
    }
    let m = estimates.len() as f64;
    let mean = estimates.iter().copied().collect::<NeumaierSum>().total() / m;
    let var = estimates
        .iter()
        .map(|t| (t - mean).powi(2))
        .collect::<NeumaierSum>()
        .total()
        / (m - 1.0).max(1.0);
    let sd = var.sqrt();
    let t_max = b.t_max.unwrap_or(4.0 * sd);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Numeric(format!(
            "cannot place thresholds: t_max = {t_max} (estimates have sd {sd})"
        )));
    }
    let mut deviations: Vec<f64> = estimates.iter().map(|t| (t - mean).abs()).collect();
    deviations.sort_by(f64::total_cmp);
    let mut curve = Vec::with_capacity(b.grid_points);
    for k in 1..=b.grid_points {
        let t = t_max * k as f64 / b.grid_points as f64;
        let above = deviations.len() - deviations.partition_point(|&d| d <= t);
        let p = above as f64 / m;
        curve.push(TailPoint {
            t,
            empirical: p,
            se: (p * (1.0 - p) / m).sqrt(),
            bound: mle_concentration(&profile, b.n, t)?.bound,
        });
    }
    let csv = vec![("bounds.csv".to_string(), curve_csv(&curve))];
    Ok(Output {
        json: json!({
            "family": spec.name(),
            "theta_star": b.theta_star,
            "n": b.n,
            "trials": b.trials,
            "failed": failed,
            "regime": regime,
            "certificate": certificate,
            "c_h": c_h,
            "c_l": c_l,
            "difference_norm": profile.d_norms.norms().first(),
            "tail_class": mle_concentration(&profile, b.n, t_max)?.class,
            "oracle_bound": oracle,
            "delta": cfg.estimator.delta,
            "mean_theta_hat": mean,
            "sd_theta_hat": sd,
            "curve": curve,
        }),
        csv,
        warnings: Vec::new(),
    })
}

fn simulate(cfg: &RunConfig, exec: Execution) -> Result<Output, CliError> {
    let e = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| CliError::Input("no [experiment] section".into()))?;
    let report: SimulationReport = if e.kind == ExperimentKind::TailSum {
        let law = e
            .law
            .ok_or_else(|| CliError::Input("experiment.law is required".into()))?;
        run_tail_sum(
            &TailSumConfig {
                law,
                n: e.n,
                trials: e.trials,
                grid_points: e.grid_points,
                t_max: e.t_max,
                master_seed: cfg.seed,
            },
            exec,
        )?
    } else {
        let family = cfg
            .family
            .ok_or_else(|| CliError::Input("no [family] section".into()))?;
        let theta_star = e
            .theta_star
            .ok_or_else(|| CliError::Input("experiment.theta_star is required".into()))?;
        let config = ExperimentConfig {
            family,
            theta_star,
            n: e.n,
            trials: e.trials,
            delta: cfg.estimator.delta,
            estimator: cfg.estimator.kind,
            beta: cfg.estimator.beta,
            case: cfg.estimator.case,
            master_seed: cfg.seed,
            contamination: e.contamination.map(|(fraction, magnitude)| Contamination {
                fraction,
                magnitude,
            }),
        };
        match e.kind {
            ExperimentKind::Coverage => run_coverage(&config, exec)?,
            ExperimentKind::Deviation => run_deviation(&config, exec)?,
            ExperimentKind::Bias => run_bias(&config, exec)?,
            ExperimentKind::Contamination => run_contamination(&config, exec)?,
            ExperimentKind::TailSum => unreachable!("handled above"),
        }
    };
    let csv = if report.tail_curve.is_empty() {
        Vec::new()
    } else {
        vec![("tail.csv".to_string(), curve_csv(&report.tail_curve))]
    };
    Ok(Output {
        json: serde_json::to_value(&report)
            .map_err(|e| CliError::Numeric(format!("cannot encode report: {e}")))?,
        csv,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn data_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_reals_and_skips_blank_lines() {
        let f = data_file("1.5\n\n  2e-1 \n3\n");
        assert_eq!(read_data_file(f.path()).unwrap(), vec![1.5, 0.2, 3.0]);
    }

    #[test]
    fn non_finite_is_numeric_and_garbage_is_input() {
        let f = data_file("1\nNaN\n");
        assert_eq!(read_data_file(f.path()).unwrap_err().exit_code(), 2);
        let f = data_file("1\ninf\n");
        assert_eq!(read_data_file(f.path()).unwrap_err().exit_code(), 2);
        let f = data_file("1\nabc\n");
        let e = read_data_file(f.path()).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains(":2:"));
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::Core(Error::Infeasible("x".into())).exit_code(), 1);
        assert_eq!(CliError::Core(Error::Config("x".into())).exit_code(), 1);
        assert_eq!(CliError::Core(Error::Numeric("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::Core(Error::FailureRate {
                failed: 2,
                trials: 10
            })
            .exit_code(),
            2
        );
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let s = curve_csv(&[TailPoint {
            t: 0.5,
            empirical: 0.25,
            se: 0.01,
            bound: 1.0,
        }]);
        assert_eq!(s, "t,bound,empirical,se\n0.5,1,0.25,0.01\n");
    }
}
