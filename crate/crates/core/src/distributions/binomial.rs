use crate::error::{Error, Result};
use crate::numeric::{ln_binomial_cdf, ln_choose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailDirection {
    /// Pr[X ≤ j]
    AtMost,
    /// Pr[X ≥ j]
    AtLeast,
}

/// Natural log of a Binomial(n, q) tail, accurate far beyond f64 underflow.
pub fn log_binomial_tail(n: u64, q: f64, j: i64, direction: TailDirection) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain("q", q, "[0, 1]"));
    }
    Ok(match direction {
        TailDirection::AtMost => ln_binomial_cdf(n, j, q, 1.0 - q),
        // Pr[Bin(n, q) ≥ j] = Pr[Bin(n, 1 − q) ≤ n − j]
        TailDirection::AtLeast => ln_binomial_cdf(n, n as i64 - j, 1.0 - q, q),
    })
}

/// Pr[A = a] when drawing `draws` items without replacement from `population`
/// items of which `marked` are marked.
pub fn hypergeometric_pmf(population: u64, marked: u64, draws: u64, a: u64) -> Result<f64> {
    if marked > population || draws > population {
        return Err(Error::invalid(
            "hypergeometric",
            format!("marked ({marked}) and draws ({draws}) must not exceed population ({population})"),
        ));
    }
    if a > marked || a > draws || draws - a > population - marked {
        return Ok(0.0);
    }
    let ln = ln_choose(marked, a) + ln_choose(population - marked, draws - a) - ln_choose(population, draws);
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tails_of_a_fair_coin() {
        let up = log_binomial_tail(10, 0.5, 6, TailDirection::AtLeast).unwrap().exp();
        // Σ_{j≥6} C(10, j) = 386
        assert_relative_eq!(up, 386.0 / 1024.0, max_relative = 1e-13);
        let low = log_binomial_tail(10, 0.5, 4, TailDirection::AtMost).unwrap().exp();
        assert_relative_eq!(low, up, max_relative = 1e-13);
        assert!(log_binomial_tail(3, 1.2, 0, TailDirection::AtMost).is_err());
        let half = log_binomial_tail(10, 0.5, 5, TailDirection::AtLeast).unwrap();
        assert_relative_eq!(half, 0.623046875f64.ln(), max_relative = 1e-13);
        assert_eq!(log_binomial_tail(10, 0.3, 0, TailDirection::AtLeast).unwrap(), 0.0);
    }

    #[test]
    fn deep_tail_stays_finite_in_log_space() {
        // Pr[Bin(2000, 0.9) ≤ 100] is far below f64::MIN_POSITIVE
        let l = log_binomial_tail(2000, 0.9, 100, TailDirection::AtMost).unwrap();
        assert!(l.is_finite() && l < -3000.0);
        let leading = ln_choose(2000, 100) + 100.0 * 0.9f64.ln() + 1900.0 * 0.1f64.ln();
        // the neighbouring terms shrink geometrically by about 100/1901 · 1/9
        assert!(l >= leading && l < leading + 0.01);
    }

    #[test]
    fn large_committee_lower_tail_is_tiny() {
        let l = log_binomial_tail(1500, 0.8, 999, TailDirection::AtMost).unwrap();
        assert!(l <= 1e-12f64.ln());
    }

    #[test]
    fn hypergeometric_sums_to_one_and_matches_counting() {
        let total: f64 = (0..=5).map(|a| hypergeometric_pmf(20, 7, 5, a).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-13);
        // C(7,2)·C(13,3)/C(20,5) = 21·286/15504
        assert_relative_eq!(
            hypergeometric_pmf(20, 7, 5, 2).unwrap(),
            6006.0 / 15504.0,
            max_relative = 1e-12
        );
        assert_eq!(hypergeometric_pmf(10, 3, 9, 1).unwrap(), 0.0);
        assert!(hypergeometric_pmf(5, 6, 1, 0).is_err());
        assert_relative_eq!(hypergeometric_pmf(4, 2, 2, 1).unwrap(), 4.0 / 6.0, max_relative = 1e-13);
        assert_eq!(hypergeometric_pmf(9, 4, 0, 0).unwrap(), 1.0);
        for m in 0..=20u64 {
            for z0 in 0..=m {
                for z1 in 0..=m {
                    let total: f64 = (0..=z1).map(|a| hypergeometric_pmf(m, z0, z1, a).unwrap()).sum();
                    assert!((total - 1.0).abs() < 1e-12, "m={m} z0={z0} z1={z1}");
                }
            }
        }
    }
}
