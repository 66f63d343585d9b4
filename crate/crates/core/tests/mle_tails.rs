//! The MLE's simulated two-sided tail stays under the certified bound.

use std::sync::Arc;

use ltmle_core::concentration::Regime;
use ltmle_core::families::{FamilySpec, ModelFamily, ParameterSpace};
use ltmle_core::harness::{map_trials, Execution};
use ltmle_core::mle::{certify, difference_norms, fit_mle, mle_concentration, LipschitzProfile};
use ltmle_core::numeric::roots::SUP_GRID_POINTS;

fn check(model: Arc<dyn ModelFamily>, theta: f64, n: usize, x_box: (f64, f64), regime: Regime) {
    let cert = certify(model.as_ref(), x_box.0, x_box.1, SUP_GRID_POINTS).unwrap();
    let norms = difference_norms(&model, theta, n, regime).unwrap();
    let profile = LipschitzProfile::new(cert.c_h, cert.c_l, norms).unwrap();
    let trials = 20_000;
    let fits = map_trials(trials, 41, Execution::default(), |_, seed| {
        let x = model.sample(theta, n, seed).unwrap();
        fit_mle(model.as_ref(), &x).unwrap().theta_hat
    });
    let mean = ltmle_core::numeric::sum::mean(&fits);
    let m = trials as f64;
    let mut nonvacuous = 0;
    for k in 1..=40 {
        let t = 0.025 * k as f64;
        let p = fits.iter().filter(|f| (*f - mean).abs() > t).count() as f64 / m;
        let se = (p * (1.0 - p) / m).sqrt();
        let bound = mle_concentration(&profile, n, t).unwrap().bound;
        assert!(
            p - 3.0 * se <= bound,
            "{}: t = {t}, empirical {p}, bound {bound}",
            model.name()
        );
        nonvacuous += usize::from(bound < 1.0);
    }
    assert!(
        nonvacuous > 0,
        "{}: bound is 1 on the whole grid",
        model.name()
    );
}

#[test]
fn gaussian_mean_theta2() {
    let spec = FamilySpec::GaussianMean {
        sigma: 1.0,
        space: ParameterSpace::new(-3.0, 3.0).unwrap(),
    };
    check(spec.build().unwrap(), 0.5, 40, (-6.0, 6.0), Regime::Theta2);
}

#[test]
fn exponential_rate_theta1() {
    let spec = FamilySpec::ExponentialRate {
        space: ParameterSpace::new(0.5, 2.0).unwrap(),
    };
    check(spec.build().unwrap(), 1.0, 400, (0.0, 30.0), Regime::Theta1);
}
