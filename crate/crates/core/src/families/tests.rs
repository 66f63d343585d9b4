use std::f64::consts::E;

use super::*;

fn space(lo: f64, hi: f64) -> ParameterSpace {
    ParameterSpace::new(lo, hi).unwrap()
}

fn all_families() -> Vec<(Arc<dyn ModelFamily>, Vec<f64>)> {
    let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    };
    vec![
        (
            Arc::new(GaussianVariance::new(space(0.5, 2.0)).unwrap()),
            lin(-3.0, 3.0, 20),
        ),
        (
            Arc::new(GaussianMean::new(1.3, space(-2.0, 2.0)).unwrap()),
            lin(-4.0, 4.0, 20),
        ),
        (
            Arc::new(ParetoShape::new(1.0, space(1.0, 2.0)).unwrap()),
            lin(1.01, 20.0, 20),
        ),
        (
            Arc::new(WeibullScale::new(2, space(0.5, 2.0)).unwrap()),
            lin(0.05, 4.0, 20),
        ),
        (
            Arc::new(WeibullScale::new(3, space(0.5, 2.0)).unwrap()),
            lin(0.05, 3.0, 20),
        ),
        (
            Arc::new(ExponentialRate::new(space(0.5, 3.0)).unwrap()),
            lin(0.0, 8.0, 20),
        ),
        (
            Arc::new(ExpFamily::poisson(space(-1.0, 1.0))),
            (0..20).map(f64::from).collect(),
        ),
        (
            Arc::new(ExpFamily::bernoulli(space(-2.0, 2.0))),
            (0..20).map(|i| f64::from(i % 2)).collect(),
        ),
    ]
}

fn interior_grid(s: ParameterSpace, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| s.lower + s.width() * (i as f64 + 0.5) / n as f64)
        .collect()
}

fn assert_fd(name: &str, what: &str, fd: f64, exact: f64) {
    let tol = 1e-6 * exact.abs().max(1.0);
    assert!(
        (fd - exact).abs() <= tol,
        "{name}: {what} finite difference {fd} vs {exact}"
    );
}

#[test]
fn derivatives_match_central_differences() {
    for (m, xs) in all_families() {
        for &x in &xs {
            for theta in interior_grid(m.theta_space(), 20) {
                let h = 1e-5 * (1.0 + theta.abs());
                let lo = m.eval(x, theta - h);
                let hi = m.eval(x, theta + h);
                let d = m.eval(x, theta);
                assert_fd(m.name(), "score", (hi.nll - lo.nll) / (2.0 * h), d.score);
                assert_fd(
                    m.name(),
                    "curvature",
                    (hi.score - lo.score) / (2.0 * h),
                    d.curvature,
                );
                assert_fd(
                    m.name(),
                    "third",
                    (hi.curvature - lo.curvature) / (2.0 * h),
                    d.third,
                );
            }
        }
    }
}

fn mc_mean(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn score_is_centred_and_fisher_matches_monte_carlo() {
    for (m, _) in all_families() {
        let s = m.theta_space();
        let theta = s.lower + 0.4 * s.width();
        let xs = m.sample(theta, 1_000_000, 17).unwrap();
        let (mean_score, se) = mc_mean(xs.iter().map(|&x| m.eval(x, theta).score));
        assert!(
            mean_score.abs() <= 3.0 * se,
            "{}: E score = {mean_score} ± {se}",
            m.name()
        );

        let fisher = m.fisher_information(theta).unwrap();
        assert!(fisher >= 0.0);
        let (mc, se) = mc_mean(xs.iter().map(|&x| m.eval(x, theta).curvature));
        let slack = 3.0 * se + 1e-9 * fisher;
        assert!(
            (mc - fisher).abs() <= slack,
            "{}: I = {fisher}, MC {mc} ± {se}",
            m.name()
        );
    }
}

#[test]
fn lipschitz_property_holds_on_grid() {
    for (m, xs) in all_families() {
        let grid = m.theta_space().grid(15);
        for &x in &xs {
            let c = m.lipschitz_envelope(x).unwrap();
            for &a in &grid {
                for &b in &grid {
                    let lhs = (m.eval(x, a).score - m.eval(x, b).score).abs();
                    assert!(
                        lhs <= c * (a - b).abs() * (1.0 + 1e-9) + 1e-14,
                        "{}: x={x} θ={a} θ*={b}: {lhs} > {c}·|Δθ|",
                        m.name()
                    );
                }
            }
        }
    }
}

#[test]
fn envelope_agrees_with_sup_of_curvature() {
    // The difference quotient's supremum over Θ² equals sup_Θ |ℓ̈| by the
    // mean value theorem; scan |ℓ̈| on a fine grid as an independent route.
    for (m, xs) in all_families() {
        let fine = m.theta_space().grid(100_001);
        for &x in xs.iter().step_by(3) {
            let oracle = fine
                .iter()
                .map(|&t| m.eval(x, t).curvature.abs())
                .fold(0.0, f64::max);
            let c = m.lipschitz_envelope(x).unwrap();
            assert!(
                (c - oracle).abs() <= 1e-6 * oracle.max(1e-12),
                "{}: x={x}: envelope {c} vs scan {oracle}",
                m.name()
            );
        }
    }
}

#[test]
fn score_examples() {
    let g = GaussianVariance::new(space(0.5, 2.0)).unwrap();
    assert_eq!(g.score_derivatives(1.0, 1.0).unwrap().score, 0.0);

    let p = ParetoShape::new(1.0, space(0.5, 2.0)).unwrap();
    assert!(p.score_derivatives(E, 1.0).unwrap().score.abs() < 1e-15);

    let e = ExponentialRate::new(space(0.5, 3.0)).unwrap();
    let d = e.score_derivatives(1.5, 2.0).unwrap();
    assert_eq!(d.score, 1.0);
}

#[test]
fn weibull_scale_derivatives_at_unit_point() {
    // Weibull(k = 2, λ = 1) at x = 1: ℓ = −ln 2 + 1, ℓ̇ = 2 − 2 = 0,
    // ℓ̈ = −2 + 6 = 4.
    let w = WeibullScale::new(2, space(0.5, 2.0)).unwrap();
    let d = w.score_derivatives(1.0, 1.0).unwrap();
    assert!((d.nll - (1.0 - 2f64.ln())).abs() < 1e-15);
    assert_eq!(d.score, 0.0);
    assert_eq!(d.curvature, 4.0);
    let h = 1e-6;
    let fd = (w.eval(1.0, 1.0 + h).nll - w.eval(1.0, 1.0 - h).nll) / (2.0 * h);
    assert!(fd.abs() < 1e-8);
}

#[test]
fn domain_errors() {
    let p = ParetoShape::new(1.0, space(1.0, 2.0)).unwrap();
    assert!(matches!(
        p.score_derivatives(0.5, 1.5),
        Err(Error::OutOfSupport { .. })
    ));
    assert!(matches!(
        p.score_derivatives(2.0, 2.5),
        Err(Error::OutOfParameterSpace { .. })
    ));
    let e = ExponentialRate::new(space(0.5, 3.0)).unwrap();
    assert!(e.score_derivatives(-1.0, 1.0).is_err());
    assert!(e.score_derivatives(f64::NAN, 1.0).is_err());
    let pois = ExpFamily::poisson(space(-1.0, 1.0));
    assert!(pois.score_derivatives(1.5, 0.0).is_err());
}

#[test]
fn zero_in_theta_is_rejected_where_required() {
    assert!(matches!(
        GaussianVariance::new(ParameterSpace {
            lower: 0.0,
            upper: 1.0
        }),
        Err(Error::Config(_))
    ));
    assert!(ParetoShape::new(
        1.0,
        ParameterSpace {
            lower: -1.0,
            upper: 1.0
        }
    )
    .is_err());
    assert!(WeibullScale::new(
        2,
        ParameterSpace {
            lower: 0.0,
            upper: 1.0
        }
    )
    .is_err());
    assert!(ParameterSpace::new(2.0, 1.0).is_err());
    assert!(ParameterSpace::new(0.0, f64::INFINITY).is_err());
}

#[test]
fn fisher_information_examples_against_quadrature() {
    let e = ExponentialRate::new(space(0.5, 3.0)).unwrap();
    assert_eq!(e.fisher_information(2.0).unwrap(), 0.25);
    let quad = e.expect(2.0, &|x| e.eval(x, 2.0).curvature, None).unwrap();
    assert!((quad - 0.25).abs() < 1e-8);

    let p = ParetoShape::new(1.0, space(1.0, 2.0)).unwrap();
    assert!((p.fisher_information(1.5).unwrap() - 1.0 / 2.25).abs() < 1e-15);
    let quad = p.expect(1.5, &|x| p.eval(x, 1.5).curvature, None).unwrap();
    assert!((quad - 0.444_444_444_444).abs() < 1e-8);

    let g = GaussianVariance::new(space(0.5, 2.0)).unwrap();
    assert_eq!(g.fisher_information(1.0).unwrap(), 0.5);
    let xs = g.sample(1.0, 1_000_000, 3).unwrap();
    let (mc, se) = mc_mean(xs.iter().map(|&x| g.eval(x, 1.0).curvature));
    assert!((mc - 0.5).abs() <= 3.0 * se);

    // Weibull has no quadrature-free route in the trait default, so check
    // the closed form k²/λ² against quadrature.
    let w = WeibullScale::new(3, space(0.5, 2.0)).unwrap();
    let quad = w.expect(1.2, &|x| w.eval(x, 1.2).curvature, None).unwrap();
    assert!((quad - w.fisher_information(1.2).unwrap()).abs() < 1e-8);
}

#[test]
fn envelope_examples() {
    let p = ParetoShape::new(1.0, space(1.0, 2.0)).unwrap();
    for x in [1.0, 3.0, 100.0] {
        assert_eq!(p.lipschitz_envelope(x).unwrap(), 1.0);
    }

    // Brute-force grid oracle for sup_{σ²,σ*²∈[0.5,2]} 1/(2σ²σ*²) at x = 0.
    let g = GaussianVariance::new(space(0.5, 2.0)).unwrap();
    let grid: Vec<f64> = (0..=1000).map(|i| 0.5 + 1.5 * i as f64 / 1000.0).collect();
    let oracle = grid
        .iter()
        .flat_map(|a| grid.iter().map(move |b| 1.0 / (2.0 * a * b)))
        .fold(0.0, f64::max);
    let c0 = g.lipschitz_envelope(0.0).unwrap();
    assert!((oracle - 2.0).abs() < 1e-15);
    assert!((c0 - 2.0).abs() < 1e-9, "{c0}");

    let pois = ExpFamily::poisson(space(-1.0, 1.0));
    let values: Vec<f64> = (0..100)
        .map(|x| pois.lipschitz_envelope(f64::from(x)).unwrap())
        .collect();
    assert!((values[0] - E).abs() < 1e-12);
    assert!(values.iter().all(|v| *v == values[0]));
}

#[test]
fn c_moment_examples() {
    let p = ParetoShape::new(1.0, space(1.0, 2.0)).unwrap();
    assert_eq!(p.c_moments(1.5).unwrap(), (1.0, 1.0));

    let pois = ExpFamily::poisson(space(-1.0, 1.0));
    let (m, s) = pois.c_moments(0.0).unwrap();
    assert!((m - E).abs() < 1e-12);
    assert!((s - E * E).abs() < 1e-11);
}

#[test]
fn gaussian_variance_c_moments_match_monte_carlo() {
    let g = GaussianVariance::new(space(0.5, 2.0)).unwrap();
    let (m, s) = g.c_moments(1.0).unwrap();
    let xs = g.sample(1.0, 1_000_000, 99).unwrap();
    // The envelope has a closed form on this box: the supremum of
    // |−1/(2v²) + x²/v³| over v ∈ [0.5, 2] is attained at an endpoint or at
    // the stationary point v = 3x².
    let c = |x: f64| {
        let f = |v: f64| (-1.0 / (2.0 * v * v) + x * x / (v * v * v)).abs();
        let mut best = f(0.5).max(f(2.0));
        let v = 3.0 * x * x;
        if (0.5..=2.0).contains(&v) {
            best = best.max(f(v));
        }
        best
    };
    let (mc_m, se_m) = mc_mean(xs.iter().map(|&x| c(x)));
    let (mc_s, se_s) = mc_mean(xs.iter().map(|&x| c(x).powi(2)));
    assert!(
        (m - mc_m).abs() <= 3.0 * se_m,
        "E c = {m} vs {mc_m} ± {se_m}"
    );
    assert!(
        (s - mc_s).abs() <= 3.0 * se_s,
        "E c² = {s} vs {mc_s} ± {se_s}"
    );
}

#[test]
fn exponential_sample_mean() {
    let e = ExponentialRate::new(space(0.5, 3.0)).unwrap();
    let xs = e.sample(1.0, 1_000_000, 5).unwrap();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - 1.0).abs() < 3.0 / 1000.0);
}

#[test]
fn pareto_sampler_passes_ks() {
    let p = ParetoShape::new(1.0, space(1.0, 4.0)).unwrap();
    let mut xs = p.sample(3.0, 1_000_000, 11).unwrap();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - x.powf(-3.0);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.002, "KS = {ks}");
}

#[test]
fn sampling_is_deterministic_and_validated() {
    let p = ParetoShape::new(1.0, space(1.0, 2.0)).unwrap();
    assert_eq!(
        p.sample(1.5, 100, 42).unwrap(),
        p.sample(1.5, 100, 42).unwrap()
    );
    assert_ne!(
        p.sample(1.5, 100, 42).unwrap(),
        p.sample(1.5, 100, 43).unwrap()
    );
    assert!(p.sample(1.5, 0, 1).is_err());
    assert!(p.sample(3.0, 10, 1).is_err());
}

#[test]
fn exponential_family_densities_sum_to_one() {
    for fam in [
        ExpFamily::poisson(space(-1.0, 1.0)),
        ExpFamily::bernoulli(space(-2.0, 2.0)),
    ] {
        for theta in fam.theta_space().grid(9) {
            let total = fam.expect(theta, &|_| 1.0, None).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "{}: {total}", fam.name());
        }
    }
}

#[test]
fn continuous_densities_integrate_to_one() {
    for (m, _) in all_families() {
        if matches!(m.support(), Support::Counts { .. }) {
            continue;
        }
        for theta in m.theta_space().grid(5) {
            let total = m.expect(theta, &|_| 1.0, None).unwrap();
            assert!(
                (total - 1.0).abs() < 1e-6,
                "{} at {theta}: {total}",
                m.name()
            );
        }
    }
}

#[test]
fn exponential_family_envelope_is_sup_of_second_derivative() {
    let b = ExpFamily::bernoulli(space(-2.0, 2.0));
    // p(1−p) peaks at θ = 0 with value 1/4.
    assert!((b.lipschitz_envelope(0.0).unwrap() - 0.25).abs() < 1e-12);
    let b = ExpFamily::bernoulli(space(1.0, 3.0));
    let expected = {
        let p = 1.0 / (1.0 + (-1.0f64).exp());
        p * (1.0 - p)
    };
    assert!((b.lipschitz_envelope(1.0).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn family_spec_round_trip_and_errors() {
    let mut params = BTreeMap::new();
    params.insert("x_min".to_string(), 1.0);
    let spec = FamilySpec::from_name("pareto_shape", &params, 1.0, 2.0).unwrap();
    assert_eq!(spec.name(), "pareto_shape");
    assert_eq!(spec.build().unwrap().name(), "pareto_shape");

    assert!(FamilySpec::from_name("cauchy", &BTreeMap::new(), 0.0, 1.0).is_err());
    assert!(FamilySpec::from_name("pareto_shape", &BTreeMap::new(), 1.0, 2.0).is_err());
    params.insert("shape".to_string(), 2.5);
    assert!(FamilySpec::from_name("pareto_shape", &params, 1.0, 2.0).is_err());
    let mut w = BTreeMap::new();
    w.insert("shape".to_string(), 2.5);
    assert!(FamilySpec::from_name("weibull_scale", &w, 0.5, 2.0).is_err());
    for name in FAMILY_NAMES {
        let mut p = BTreeMap::new();
        match name {
            "gaussian_mean" => {
                p.insert("sigma".into(), 1.0);
            }
            "pareto_shape" => {
                p.insert("x_min".into(), 1.0);
            }
            "weibull_scale" => {
                p.insert("shape".into(), 2.0);
            }
            _ => {}
        }
        let spec = FamilySpec::from_name(name, &p, 0.5, 2.0).unwrap();
        assert_eq!(spec.build().unwrap().name(), name);
    }
}

#[test]
fn pareto_centered_moments_stop_at_the_tail_index() {
    let m: Arc<dyn ModelFamily> = Arc::new(ParetoShape::new(1.0, space(1.0, 4.0)).unwrap());
    let o = centered_moment_oracle(&m, 3.0).unwrap();
    // Var of Pareto(k=3, x_min=1) = k/((k−1)²(k−2)) = 3/4.
    assert!((o.absolute_moment(2.0).unwrap() - 0.75).abs() < 1e-7);
    assert_eq!(
        o.absolute_moment(3.0).unwrap_err(),
        Error::MomentNonexistence { order: 3.0 }
    );
}

#[test]
fn generic_difference_oracle_matches_the_laplace_identity() {
    // Exponential: X − Y ~ Laplace(1/θ), so E|X − Y|^p = p!/θ^p. Compare the
    // override with the nested-quadrature route a family without one uses.
    let e = ExponentialRate::new(space(0.5, 3.0)).unwrap();
    let theta = 2.0;
    for p in [1.0, 2.0, 3.0] {
        let inner = |x: f64| {
            e.expect(theta, &|y| (x - y).abs().powf(p), Some(x))
                .unwrap()
        };
        let nested = e.expect(theta, &inner, None).unwrap();
        let exact = libm::tgamma(p + 1.0) / theta.powf(p);
        assert!((nested - exact).abs() < 1e-7, "p={p}: {nested} vs {exact}");
    }
}
