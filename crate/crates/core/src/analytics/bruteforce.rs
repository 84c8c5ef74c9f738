use super::ToleranceSpec;
use crate::distributions::{pbd_pmf, PmfMethod, PoissonBinomialParams};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::simulator::resolve_adversarial;

/// Largest number of (type assignment, score vector) pairs enumerated.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// Success probability by enumerating every type assignment and every score
/// vector, resolving each committee with the adversarial rule.
///
/// Voter i approves an honest candidate with probability `p_h_votes[i]` and a
/// malicious one with probability `p_m_votes[i]`, independently across
/// candidates.
pub fn success_bruteforce(m: usize, tol: &ToleranceSpec, p: f64, p_h_votes: &[f64], p_m_votes: &[f64]) -> Result<f64> {
    let k = tol.committee_size();
    if m < k {
        return Err(Error::invalid("m", format!("m ≥ k violated: m = {m}, k = {k}")));
    }
    if p_h_votes.len() != p_m_votes.len() {
        return Err(Error::invalid(
            "p_m_votes",
            "one approval probability per voter and type",
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    let n = p_h_votes.len();
    let needed = ((n + 1) as f64).powi(m as i32) * 2f64.powi(m as i32);
    if needed > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: ENUMERATION_BUDGET,
        });
    }
    let pmf_h = pbd_pmf(&PoissonBinomialParams::new(p_h_votes.to_vec())?, PmfMethod::Convolution)?;
    let pmf_m = pbd_pmf(&PoissonBinomialParams::new(p_m_votes.to_vec())?, PmfMethod::Convolution)?;

    let mut total = NeumaierSum::default();
    let mut honest = vec![false; m];
    let mut scores = vec![0u32; m];
    for mask in 0u32..(1 << m) {
        let mut type_weight = 1.0;
        for (j, slot) in honest.iter_mut().enumerate() {
            *slot = mask >> j & 1 == 1;
            type_weight *= if *slot { p } else { 1.0 - p };
        }
        if type_weight == 0.0 {
            continue;
        }
        // odometer over {0..n}^m
        scores.iter_mut().for_each(|s| *s = 0);
        loop {
            let weight: f64 = scores
                .iter()
                .zip(&honest)
                .map(|(&s, &h)| if h { pmf_h.mass(s as i64) } else { pmf_m.mass(s as i64) })
                .product();
            if weight > 0.0 && resolve_adversarial(&scores, &honest, tol).is_honest {
                total.add(type_weight * weight);
            }
            let mut j = 0;
            while j < m && scores[j] as usize == n {
                scores[j] = 0;
                j += 1;
            }
            if j == m {
                break;
            }
            scores[j] += 1;
        }
    }
    Ok(total.total().clamp(0.0, 1.0))
}
