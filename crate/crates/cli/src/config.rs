//! Run configuration: a sectioned TOML file, validated in one pass so that
//! every problem is reported together.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ltmle_core::concentration::Regime;
use ltmle_core::families::{FamilySpec, FAMILY_NAMES};
use ltmle_core::harness::{Estimator, TailLaw};
use ltmle_core::truncated::{BetaChoice, BoundCase, IntervalMode};
use toml::{Table, Value};

/// One documented configuration key. The parser accepts exactly these.
pub struct KeyDoc {
    pub section: &'static str,
    pub key: &'static str,
    pub kind: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

const fn key(
    section: &'static str,
    key: &'static str,
    kind: &'static str,
    default: &'static str,
    doc: &'static str,
) -> KeyDoc {
    KeyDoc {
        section,
        key,
        kind,
        default,
        doc,
    }
}

pub const KEYS: &[KeyDoc] = &[
    key("run", "seed", "integer ≥ 0", "0", "Master seed for simulated data and Monte Carlo trials. `--seed` overrides it."),
    key("run", "workers", "integer ≥ 1", "all cores", "Worker threads for Monte Carlo runs. `--workers` overrides it. Results do not depend on it."),
    key("family", "name", "string", "required", "One of `gaussian_variance`, `gaussian_mean`, `pareto_shape`, `weibull_scale`, `exponential_rate`, `expfam_poisson`, `expfam_bernoulli`."),
    key("family", "lower", "real", "required", "Lower end of the parameter space Θ."),
    key("family", "upper", "real", "required", "Upper end of Θ."),
    key("family", "sigma", "real > 0", "none", "Known standard deviation (`gaussian_mean` only)."),
    key("family", "x_min", "real > 0", "none", "Known scale (`pareto_shape` only)."),
    key("family", "shape", "integer in [2, 64]", "none", "Known shape k (`weibull_scale` only)."),
    key("data", "file", "path", "none", "Newline-separated decimal reals, UTF-8, no header. Relative paths resolve against the config file's directory."),
    key("data", "theta", "real", "none", "Simulate the data at this parameter instead of reading a file."),
    key("data", "n", "integer ≥ 1", "none", "Size of the simulated sample. Required with `data.theta`."),
    key("estimator", "kind", "`mle` or `truncated`", "`mle`", "Estimator used by `fit` and `simulate`. `fit --robust` selects `truncated`."),
    key("estimator", "delta", "real", "0.05", "Confidence parameter δ. The truncated estimator and `tune` need δ ∈ (0,1/2). Otherwise δ ∈ (0,1)."),
    key("estimator", "beta", "real > 0 or `\"auto\"`", "`\"auto\"`", "Truncation level β. `auto` uses the β that minimizes the band half-width."),
    key("estimator", "case", "`general_c` or `constant_c`", "by family", "Band form. Defaults to `constant_c` when the Lipschitz envelope is constant in x."),
    key("estimator", "mode", "`practical` or `theoretical`", "`practical`", "Practical bands plug in estimates. Theoretical bands use `estimator.theta_star`."),
    key("estimator", "theta_star", "real", "none", "True parameter, required by theoretical mode."),
    key("tune", "theta", "real", "MLE of the data", "Parameter at which I, E c and E c² are evaluated."),
    key("tune", "n", "integer ≥ 1", "data size", "Sample size to tune for."),
    key("bounds", "theta_star", "real", "required", "True parameter for the simulated MLE tail."),
    key("bounds", "n", "integer ≥ 1", "required", "Sample size."),
    key("bounds", "trials", "integer ≥ 1", "2000", "Monte Carlo trials for the empirical tail."),
    key("bounds", "x_lower", "real", "none", "Lower end of the x box used to certify c_H and c_l."),
    key("bounds", "x_upper", "real", "none", "Upper end of the x box."),
    key("bounds", "c_h", "real > 0", "certified", "Override for the curvature lower bound c_H."),
    key("bounds", "c_l", "real > 0", "certified", "Override for the score Lipschitz constant c_l in x."),
    key("bounds", "regime", "`theta1` or `theta2`", "`theta2` for `gaussian_mean`, else `theta1`", "Norm applied to X − Y for an independent copy Y."),
    key("bounds", "grid_points", "integer ≥ 2", "20", "Number of thresholds t."),
    key("bounds", "t_max", "real > 0", "4 × empirical sd", "Largest threshold."),
    key("norms", "source", "`data` or `model`", "`data` if `[data]` is present", "Centred data moments, or model moments at `norms.theta`."),
    key("norms", "theta", "real", "none", "Parameter for `source = \"model\"`."),
    key("norms", "p_max", "integer ≥ 20", "50", "Largest moment order scanned."),
    key("experiment", "kind", "`coverage`, `deviation`, `bias`, `contamination` or `tail_sum`", "required", "Monte Carlo experiment run by `simulate`."),
    key("experiment", "theta_star", "real", "required", "True parameter (all kinds except `tail_sum`)."),
    key("experiment", "n", "integer ≥ 1", "required", "Sample size per trial."),
    key("experiment", "trials", "integer ≥ 1", "required", "Number of trials."),
    key("experiment", "contamination_fraction", "real in [0,1)", "none", "Share of each sample overwritten with the outlier value (`contamination` only)."),
    key("experiment", "contamination_magnitude", "real", "none", "Outlier value (`contamination` only)."),
    key("experiment", "law", "`gaussian` or `laplace`", "none", "Summand law (`tail_sum` only)."),
    key("experiment", "scale", "real > 0", "1", "Gaussian σ or Laplace scale (`tail_sum` only)."),
    key("experiment", "grid_points", "integer ≥ 2", "20", "Number of thresholds (`tail_sum` only)."),
    key("experiment", "t_max", "real > 0", "4 sd of the sum", "Largest threshold (`tail_sum` only)."),
    key("output", "dir", "path", "none", "Directory for the JSON result and CSV curves. `--out` overrides it."),
];

/// Markdown page listing every key, generated from [`KEYS`].
pub fn reference_page() -> String {
    let mut out = String::from(
        "# Configuration reference\n\n\
         Generated by `ltmle reference`. Run files are TOML with the sections below; \
         unknown sections and keys are rejected.\n",
    );
    let mut section = "";
    for k in KEYS {
        if k.section != section {
            section = k.section;
            let _ = write!(
                out,
                "\n## [{section}]\n\n| key | type | default | meaning |\n|---|---|---|---|\n"
            );
        }
        let _ = writeln!(
            out,
            "| `{}` | {} | {} | {} |",
            k.key, k.kind, k.default, k.doc
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit { robust: bool },
    Bounds,
    Tune,
    Norms,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit { .. } => "fit",
            Command::Bounds => "bounds",
            Command::Tune => "tune",
            Command::Norms => "norms",
            Command::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Simulated { theta: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub kind: Estimator,
    pub delta: f64,
    pub beta: BetaChoice,
    pub case: Option<BoundCase>,
    pub mode: IntervalMode,
    pub theta_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub theta_star: f64,
    pub n: usize,
    pub trials: usize,
    pub x_box: Option<(f64, f64)>,
    pub c_h: Option<f64>,
    pub c_l: Option<f64>,
    pub regime: Option<Regime>,
    pub grid_points: usize,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSource {
    Data,
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormsConfig {
    pub source: NormSource,
    pub theta: Option<f64>,
    pub p_max: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Coverage,
    Deviation,
    Bias,
    Contamination,
    TailSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub theta_star: Option<f64>,
    pub n: usize,
    pub trials: usize,
    pub contamination: Option<(f64, f64)>,
    pub law: Option<TailLaw>,
    pub grid_points: usize,
    pub t_max: Option<f64>,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub workers: Option<usize>,
    pub family: Option<FamilySpec>,
    pub data: Option<DataSource>,
    pub estimator: EstimatorConfig,
    pub tune_theta: Option<f64>,
    pub tune_n: Option<usize>,
    pub bounds: Option<BoundsConfig>,
    pub norms: NormsConfig,
    pub experiment: Option<ExperimentSection>,
    pub out_dir: Option<PathBuf>,
}

/// Every validation problem found in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration ({} problem", self.0.len())?;
        if self.0.len() != 1 {
            write!(f, "s")?;
        }
        write!(f, "):")?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

/// Typed access to the parsed table that records problems instead of
/// stopping at the first one.
struct Reader<'a> {
    root: &'a Table,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn raw(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.root.get(section)?.as_table()?.get(key)
    }

    fn has_section(&self, section: &str) -> bool {
        self.root.get(section).is_some()
    }

    fn f64(&mut self, section: &str, key: &str) -> Option<f64> {
        match self.raw(section, key)? {
            Value::Float(v) if v.is_finite() => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.errors.push(format!(
                    "{section}.{key}: expected a finite real, got {other}"
                ));
                None
            }
        }
    }

    fn u64(&mut self, section: &str, key: &str) -> Option<u64> {
        match self.raw(section, key)? {
            Value::Integer(v) if *v >= 0 => Some(*v as u64),
            other => {
                self.errors.push(format!(
                    "{section}.{key}: expected a non-negative integer, got {other}"
                ));
                None
            }
        }
    }

    fn count(&mut self, section: &str, key: &str, min: u64) -> Option<usize> {
        let v = self.u64(section, key)?;
        if v < min {
            self.errors
                .push(format!("{section}.{key}: must be at least {min}, got {v}"));
            return None;
        }
        Some(v as usize)
    }

    fn string(&mut self, section: &str, key: &str) -> Option<&'a str> {
        match self.raw(section, key)? {
            Value::String(s) => Some(s.as_str()),
            other => {
                self.errors
                    .push(format!("{section}.{key}: expected a string, got {other}"));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, section: &str, key: &str, options: &[(&str, T)]) -> Option<T> {
        let s = self.string(section, key)?;
        match options.iter().find(|(name, _)| *name == s) {
            Some((_, v)) => Some(*v),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.errors.push(format!(
                    "{section}.{key}: `{s}` is not one of {}",
                    names.join(", ")
                ));
                None
            }
        }
    }

    fn require<T>(&mut self, value: Option<T>, section: &str, key: &str, why: &str) -> Option<T> {
        if value.is_none() && self.raw(section, key).is_none() {
            self.errors
                .push(format!("{section}.{key} is required {why}"));
        }
        value
    }

    fn positive(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.f64(section, key)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.errors
                .push(format!("{section}.{key}: must be positive, got {v}"));
            None
        }
    }

    fn check_keys(&mut self) {
        for (section, value) in self.root {
            let Some(table) = value.as_table() else {
                self.errors.push(format!(
                    "top-level key `{section}` is not allowed; keys live in sections such as [run]"
                ));
                continue;
            };
            if !KEYS.iter().any(|k| k.section == section) {
                self.errors.push(format!("unknown section [{section}]"));
                continue;
            }
            for name in table.keys() {
                if !KEYS.iter().any(|k| k.section == section && k.key == name) {
                    self.errors.push(format!("unknown key {section}.{name}"));
                }
            }
        }
    }
}

/// Reads and validates `path` for `command`.
pub fn parse_config(path: &Path, command: Command) -> Result<RunConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("cannot read config {}: {e}", path.display())]))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_str(&text, base, command)
}

/// Validates config text; relative data paths resolve against `base`.
pub fn parse_str(text: &str, base: &Path, command: Command) -> Result<RunConfig, ConfigErrors> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![format!("TOML syntax: {}", e.message())])
    })?;
    let mut r = Reader {
        root: &root,
        errors: Vec::new(),
    };
    r.check_keys();

    let seed = r.u64("run", "seed").unwrap_or(0);
    let workers = r.count("run", "workers", 1);

    let family = read_family(&mut r);
    let data = read_data(&mut r, base);
    let estimator = read_estimator(&mut r, command);
    let tune_theta = r.f64("tune", "theta");
    let tune_n = r.count("tune", "n", 1);
    let bounds = if r.has_section("bounds") || command == Command::Bounds {
        read_bounds(&mut r)
    } else {
        None
    };
    let norms = read_norms(&mut r, command);
    let experiment = if r.has_section("experiment") || command == Command::Simulate {
        read_experiment(&mut r)
    } else {
        None
    };
    let out_dir = r.string("output", "dir").map(|d| base.join(d));

    // Cross-section requirements of the chosen command.
    let needs_family = match command {
        Command::Simulate => experiment
            .as_ref()
            .is_some_and(|e| e.kind != ExperimentKind::TailSum),
        Command::Norms => norms.source == NormSource::Model,
        _ => true,
    };
    if needs_family && !r.has_section("family") {
        r.errors
            .push(format!("[family] is required by `{}`", command.name()));
    }
    match command {
        Command::Fit { .. } if !r.has_section("data") => {
            r.errors.push("[data] is required by `fit`".into());
        }
        Command::Tune => {
            if tune_n.is_none() && data.is_none() && !r.has_section("data") {
                r.errors
                    .push("`tune` needs tune.n or a [data] section to take n from".into());
            }
            if tune_theta.is_none() && estimator.theta_star.is_none() && !r.has_section("data") {
                r.errors.push(
                    "`tune` needs tune.theta, estimator.theta_star or a [data] section for a pilot MLE"
                        .into(),
                );
            }
        }
        Command::Norms if norms.source == NormSource::Data && !r.has_section("data") => {
            r.errors
                .push("norms.source = \"data\" needs a [data] section".into());
        }
        _ => {}
    }
    if estimator.mode == IntervalMode::Theoretical && estimator.theta_star.is_none() {
        r.errors
            .push("estimator.mode = \"theoretical\" needs estimator.theta_star".into());
    }

    if r.errors.is_empty() {
        Ok(RunConfig {
            command,
            seed,
            workers,
            family,
            data,
            estimator,
            tune_theta,
            tune_n,
            bounds,
            norms,
            experiment,
            out_dir,
        })
    } else {
        Err(ConfigErrors(r.errors))
    }
}

fn read_family(r: &mut Reader) -> Option<FamilySpec> {
    if !r.has_section("family") {
        return None;
    }
    let name = r.string("family", "name");
    let name = r.require(name, "family", "name", "in [family]");
    let lower = r.f64("family", "lower");
    let lower = r.require(lower, "family", "lower", "in [family]");
    let upper = r.f64("family", "upper");
    let upper = r.require(upper, "family", "upper", "in [family]");
    let mut params = BTreeMap::new();
    let mut params_ok = true;
    for p in ["sigma", "x_min", "shape"] {
        if r.raw("family", p).is_some() {
            match r.f64("family", p) {
                Some(v) => {
                    params.insert(p.to_string(), v);
                }
                None => params_ok = false,
            }
        }
    }
    let name = name?;
    if !FAMILY_NAMES.contains(&name) {
        r.errors.push(format!(
            "family.name: unknown family `{name}` (expected one of {})",
            FAMILY_NAMES.join(", ")
        ));
        return None;
    }
    if !params_ok {
        return None;
    }
    match FamilySpec::from_name(name, &params, lower?, upper?) {
        Ok(spec) => Some(spec),
        Err(e) => {
            r.errors.push(format!("[family]: {e}"));
            None
        }
    }
}

fn read_data(r: &mut Reader, base: &Path) -> Option<DataSource> {
    if !r.has_section("data") {
        return None;
    }
    let file = r.string("data", "file");
    let theta = r.f64("data", "theta");
    let n = r.count("data", "n", 1);
    let simulated = r.raw("data", "theta").is_some() || r.raw("data", "n").is_some();
    match (file, simulated) {
        (Some(_), true) => {
            r.errors.push(
                "[data] must have exactly one source: data.file or data.theta with data.n".into(),
            );
            None
        }
        (Some(f), false) => {
            let path = base.join(f);
            if path.is_file() {
                Some(DataSource::File(path))
            } else {
                r.errors
                    .push(format!("data.file: no such file {}", path.display()));
                None
            }
        }
        (None, true) => {
            let theta = r.require(theta, "data", "theta", "with data.n");
            let n = r.require(n, "data", "n", "with data.theta");
            Some(DataSource::Simulated {
                theta: theta?,
                n: n?,
            })
        }
        (None, false) => {
            if r.raw("data", "file").is_none() {
                r.errors
                    .push("[data] needs data.file or data.theta with data.n".into());
            }
            None
        }
    }
}

fn read_estimator(r: &mut Reader, command: Command) -> EstimatorConfig {
    let kind = r
        .choice(
            "estimator",
            "kind",
            &[("mle", Estimator::Mle), ("truncated", Estimator::Truncated)],
        )
        .unwrap_or(Estimator::Mle);
    let kind = match command {
        Command::Fit { robust: true } => Estimator::Truncated,
        _ => kind,
    };
    let delta = r.f64("estimator", "delta").unwrap_or(0.05);
    let band = kind == Estimator::Truncated || command == Command::Tune;
    if band && !(delta > 0.0 && delta < 0.5) {
        r.errors.push(format!(
            "estimator.delta = {delta} violates δ ∈ (0,1/2), which the truncated estimator's band requires"
        ));
    } else if !(delta > 0.0 && delta < 1.0) {
        r.errors
            .push(format!("estimator.delta = {delta} violates δ ∈ (0,1)"));
    }
    let beta = match r.raw("estimator", "beta") {
        None => BetaChoice::Auto,
        Some(Value::String(s)) if s == "auto" => BetaChoice::Auto,
        Some(Value::String(s)) => {
            r.errors.push(format!(
                "estimator.beta: expected a positive real or \"auto\", got \"{s}\""
            ));
            BetaChoice::Auto
        }
        Some(_) => r
            .positive("estimator", "beta")
            .map_or(BetaChoice::Auto, BetaChoice::Fixed),
    };
    let case = r.choice(
        "estimator",
        "case",
        &[
            ("general_c", BoundCase::GeneralC),
            ("constant_c", BoundCase::ConstantC),
        ],
    );
    let mode = r
        .choice(
            "estimator",
            "mode",
            &[
                ("practical", IntervalMode::Practical),
                ("theoretical", IntervalMode::Theoretical),
            ],
        )
        .unwrap_or(IntervalMode::Practical);
    let theta_star = r.f64("estimator", "theta_star");
    EstimatorConfig {
        kind,
        delta,
        beta,
        case,
        mode,
        theta_star,
    }
}

fn read_bounds(r: &mut Reader) -> Option<BoundsConfig> {
    let why = "by `bounds`";
    let theta_star = r.f64("bounds", "theta_star");
    let theta_star = r.require(theta_star, "bounds", "theta_star", why);
    let n = r.count("bounds", "n", 1);
    let n = r.require(n, "bounds", "n", why);
    let trials = r.count("bounds", "trials", 1).unwrap_or(2000);
    let x_lower = r.f64("bounds", "x_lower");
    let x_upper = r.f64("bounds", "x_upper");
    let c_h = r.positive("bounds", "c_h");
    let c_l = r.positive("bounds", "c_l");
    let regime = r.choice(
        "bounds",
        "regime",
        &[("theta1", Regime::Theta1), ("theta2", Regime::Theta2)],
    );
    let grid_points = r.count("bounds", "grid_points", 2).unwrap_or(20);
    let t_max = r.positive("bounds", "t_max");
    let x_box = match (x_lower, x_upper) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        (Some(lo), Some(hi)) => {
            r.errors.push(format!(
                "bounds.x_lower = {lo} must be below bounds.x_upper = {hi}"
            ));
            None
        }
        (None, None) => None,
        _ => {
            r.errors
                .push("bounds.x_lower and bounds.x_upper go together".into());
            None
        }
    };
    let overridden = c_h.is_some() && c_l.is_some();
    if x_box.is_none() && !overridden && r.errors.iter().all(|e| !e.starts_with("bounds.x_")) {
        r.errors.push(
            "`bounds` needs bounds.x_lower/x_upper to certify c_H and c_l, or both overrides"
                .into(),
        );
    }
    Some(BoundsConfig {
        theta_star: theta_star?,
        n: n?,
        trials,
        x_box,
        c_h,
        c_l,
        regime,
        grid_points,
        t_max,
    })
}

fn read_norms(r: &mut Reader, command: Command) -> NormsConfig {
    let source = r
        .choice(
            "norms",
            "source",
            &[("data", NormSource::Data), ("model", NormSource::Model)],
        )
        .unwrap_or(if r.has_section("data") {
            NormSource::Data
        } else {
            NormSource::Model
        });
    let theta = r.f64("norms", "theta");
    let p_max = r.count("norms", "p_max", 20).unwrap_or(50) as u32;
    if command == Command::Norms && source == NormSource::Model && theta.is_none() {
        r.errors
            .push("norms.theta is required when norms.source = \"model\"".into());
    }
    NormsConfig {
        source,
        theta,
        p_max,
    }
}

fn read_experiment(r: &mut Reader) -> Option<ExperimentSection> {
    let why = "by `simulate`";
    let kind = r.choice(
        "experiment",
        "kind",
        &[
            ("coverage", ExperimentKind::Coverage),
            ("deviation", ExperimentKind::Deviation),
            ("bias", ExperimentKind::Bias),
            ("contamination", ExperimentKind::Contamination),
            ("tail_sum", ExperimentKind::TailSum),
        ],
    );
    let kind = r.require(kind, "experiment", "kind", why);
    let n = r.count("experiment", "n", 1);
    let n = r.require(n, "experiment", "n", why);
    let trials = r.count("experiment", "trials", 1);
    let trials = r.require(trials, "experiment", "trials", why);
    let theta_star = r.f64("experiment", "theta_star");
    let fraction = r.f64("experiment", "contamination_fraction");
    let magnitude = r.f64("experiment", "contamination_magnitude");
    let scale = r.positive("experiment", "scale").unwrap_or(1.0);
    let law = r.choice(
        "experiment",
        "law",
        &[
            ("gaussian", TailLaw::Gaussian { sigma: scale }),
            ("laplace", TailLaw::Laplace { scale }),
        ],
    );
    let grid_points = r.count("experiment", "grid_points", 2).unwrap_or(20);
    let t_max = r.positive("experiment", "t_max");
    let kind = kind?;
    match kind {
        ExperimentKind::TailSum => {
            r.require(law, "experiment", "law", "for kind = \"tail_sum\"");
        }
        _ => {
            r.require(theta_star, "experiment", "theta_star", why);
        }
    }
    let contamination = match (kind, fraction, magnitude) {
        (ExperimentKind::Contamination, Some(f), Some(m)) => {
            if !(0.0..1.0).contains(&f) {
                r.errors.push(format!(
                    "experiment.contamination_fraction = {f} must lie in [0,1)"
                ));
            }
            Some((f, m))
        }
        (ExperimentKind::Contamination, _, _) => {
            r.errors.push(
                "kind = \"contamination\" needs experiment.contamination_fraction and contamination_magnitude"
                    .into(),
            );
            None
        }
        _ => None,
    };
    Some(ExperimentSection {
        kind,
        theta_star,
        n: n?,
        trials: trials?,
        contamination,
        law,
        grid_points,
        t_max,
    })
}
