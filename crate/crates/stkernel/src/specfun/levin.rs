//! Levin u-transform for slowly convergent or divergent alternating series.

use crate::error::{Error, Result};

/// Levin u-transform of the series Σ terms[j], using all supplied terms.
///
/// Exact for geometric series and effective for alternating series whose terms
/// grow algebraically, where it returns the Borel/Abel-regularized sum.
pub fn levin_u(terms: &[f64]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::domain("levin_u", "no terms"));
    }
    if terms.len() == 1 {
        return Ok(terms[0]);
    }
    let beta = 1.0;
    let k = terms.len() - 1;
    let mut partial = 0.0;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut binom = 1.0;
    let big = beta + k as f64;
    for (j, &a) in terms.iter().enumerate() {
        partial += a;
        if a == 0.0 {
            // a vanishing term contributes nothing
            if j < k {
                binom *= (k - j) as f64 / (j + 1) as f64;
            }
            continue;
        }
        let omega = (beta + j as f64) * a;
        let w = binom * ((beta + j as f64) / big).powi(k as i32 - 1) / omega;
        let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
        num += sgn * w * partial;
        den += sgn * w;
        if j < k {
            binom *= (k - j) as f64 / (j + 1) as f64;
        }
    }
    let v = num / den;
    if !v.is_finite() {
        return Err(Error::numerical("levin_u", "transform denominator vanished"));
    }
    Ok(v)
}

/// Levin sequence over growing prefixes. Returns the estimate once successive
/// values agree to `rel_tol`, or the most stable estimate if rounding starts to
/// dominate first; also returns the number of terms used.
pub fn levin_sum<F>(mut term: F, rel_tol: f64, max_terms: usize) -> Result<(f64, usize)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut terms = Vec::with_capacity(max_terms);
    let mut prev = f64::NAN;
    let mut streak = 0;
    let mut best = (f64::INFINITY, f64::NAN, 0usize);
    for n in 0..max_terms {
        terms.push(term(n)?);
        if terms.len() < 4 {
            continue;
        }
        let est = levin_u(&terms)?;
        let diff = (est - prev).abs();
        if diff <= rel_tol * est.abs() {
            streak += 1;
            if streak >= 2 {
                return Ok((est, terms.len()));
            }
        } else {
            streak = 0;
        }
        if diff < best.0 {
            best = (diff, est, terms.len());
        } else if terms.len() > best.2 + 6 {
            break;
        }
        prev = est;
    }
    if best.0 <= rel_tol * best.1.abs() {
        Ok((best.1, best.2))
    } else {
        Err(Error::Truncation { partial: best.1, terms: terms.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alternating_harmonic() {
        let (v, _) = levin_sum(|n| Ok(if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64 + 1.0)), 1e-13, 60).unwrap();
        assert_relative_eq!(v, 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn divergent_factorial_series() {
        // Σ (−1)^n n! is Borel summable to e·E₁(1)
        let mut f = 1.0;
        let (v, _) = levin_sum(
            |n| {
                if n > 0 {
                    f *= n as f64;
                }
                Ok(if n % 2 == 0 { f } else { -f })
            },
            1e-8,
            40,
        )
        .unwrap();
        assert_relative_eq!(v, 0.596_347_362_323_194_1, max_relative = 1e-8);
    }

    #[test]
    fn divergent_power_growth() {
        // Σ (−1)^n (n+1) = 1/4 in the Abel sense
        let (v, _) = levin_sum(|n| Ok(if n % 2 == 0 { 1.0 } else { -1.0 } * (n as f64 + 1.0)), 1e-12, 40).unwrap();
        assert_relative_eq!(v, 0.25, max_relative = 1e-10);
    }
}
