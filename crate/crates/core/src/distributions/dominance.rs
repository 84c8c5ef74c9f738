use super::Pmf;

const SLACK: f64 = 1e-12;

/// True when `y` first-order stochastically dominates `x`: F_Y(v) ≤ F_X(v) for every v.
pub fn stochastic_dominance(x: &Pmf, y: &Pmf) -> bool {
    let top = x.support_max().max(y.support_max()) as i64;
    (0..=top).all(|v| y.cdf(v) <= x.cdf(v) + SLACK)
}
