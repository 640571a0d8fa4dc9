/// Probabilities are clamped into `[PROB_EPS, 1 - PROB_EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-7;

#[inline]
pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `-[t ln p + (1 - t) ln(1 - p)]` with `p` clamped.
pub fn binary_cross_entropy(prediction: f64, target: f64) -> f64 {
    let p = clamp_probability(prediction);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

/// Derivative of [`binary_cross_entropy`] with respect to the unclamped
/// prediction; zero where the clamp is active.
pub fn binary_cross_entropy_grad(prediction: f64, target: f64) -> f64 {
    if !(PROB_EPS..=1.0 - PROB_EPS).contains(&prediction) {
        return 0.0;
    }
    -(target / prediction) + (1.0 - target) / (1.0 - prediction)
}

/// Sum of squared differences.
pub fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
