/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln p! for real p ≥ 0.
pub fn ln_factorial(p: f64) -> f64 {
    ln_gamma(p + 1.0)
}

/// ln (2p − 1)!! for integer p ≥ 1, via (2p)! / (2^p p!).
pub fn ln_odd_double_factorial(p: u32) -> f64 {
    let p = f64::from(p);
    ln_factorial(2.0 * p) - p * std::f64::consts::LN_2 - ln_factorial(p)
}
