//! Large-argument expansions of pFq(a; b; −X) with p = q − 1.
//!
//! The algebraic part is the sum over numerator parameters a_k of
//! C_k X^{−a_k} times its inverse-power correction series. The oscillatory part
//! is the exponential-type expansion whose coefficients come from the
//! hypergeometric differential equation; both are truncated at their smallest
//! term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::{is_nonpositive_integer, ln_gamma_signed};
use crate::specfun::hyper::{hyp_pfq, PFQParams, SeriesControl};

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticValue {
    pub value: f64,
    pub algebraic: Vec<f64>,
    pub oscillatory: f64,
    /// Absolute error estimate from the first omitted terms.
    pub error_estimate: f64,
    /// Indices of algebraic terms dropped because a reciprocal Gamma vanished.
    pub omitted: Vec<usize>,
}

/// Which printed form of an asymptotic expansion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionReading {
    /// Orientation and base validated against the convergent series.
    #[default]
    Corrected,
    /// Literal transcription of the published statement.
    AsPrinted,
}

fn signed_exp(ln_abs: f64, sign: f64) -> f64 {
    if sign == 0.0 {
        0.0
    } else {
        sign * ln_abs.exp()
    }
}

/// ln|∏Γ(num)/∏Γ(den)| and its sign; sign 0 when a denominator Gamma has a pole.
fn gamma_ratio(num: &[f64], den: &[f64], op: &'static str) -> Result<(f64, f64)> {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &x in num {
        if is_nonpositive_integer(x) {
            return Err(Error::Degenerate { op, detail: format!("Gamma pole at {x} in a numerator coefficient") });
        }
        let (l, s) = ln_gamma_signed(x)?;
        ln += l;
        sign *= s;
    }
    for &x in den {
        if is_nonpositive_integer(x) {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        let (l, s) = ln_gamma_signed(x)?;
        ln -= l;
        sign *= s;
    }
    Ok((ln, sign))
}

fn check_distinct(a: &[f64], op: &'static str) -> Result<()> {
    for i in 0..a.len() {
        if is_nonpositive_integer(a[i]) {
            return Err(Error::Degenerate { op, detail: format!("numerator parameter {} terminates the series", a[i]) });
        }
        for j in 0..i {
            let d = a[i] - a[j];
            if d == d.round() {
                return Err(Error::Degenerate {
                    op,
                    detail: format!("numerator parameters {} and {} differ by an integer", a[j], a[i]),
                });
            }
        }
    }
    Ok(())
}

fn apply_theta(betas: &[f64], s: f64) -> Vec<f64> {
    let mut v = vec![1.0];
    for &b in betas {
        let mut n = vec![0.0; v.len() + 1];
        for (off, &c) in v.iter().enumerate() {
            n[off + 1] += 0.5 * c;
            n[off] += ((s + off as f64) / 2.0 + b) * c;
        }
        v = n;
    }
    v
}

fn operator_row(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    let mut pb = Vec::with_capacity(b.len() + 1);
    pb.push(0.0);
    pb.extend(b.iter().map(|bj| bj - 1.0));
    let p = apply_theta(&pb, s);
    let q = apply_theta(a, s);
    (0..p.len()).map(|i| p[i] - if i >= 2 && i - 2 < q.len() { q[i - 2] / 4.0 } else { 0.0 }).collect()
}

/// Coefficients c_0..c_{n-1} of the exponential-type expansion e^w w^ν Σ c_k w^{−k}.
pub fn exponential_coefficients(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let q = b.len();
    let nu = a.iter().sum::<f64>() - b.iter().sum::<f64>() + 0.5;
    let mut rows = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    rows.push(operator_row(a, b, nu));
    c.push(1.0);
    for m in 1..n {
        let row = operator_row(a, b, nu - m as f64);
        let mut s = 0.0;
        for k in m.saturating_sub(q)..m {
            s += c[k] * rows[k][q + k - m];
        }
        c.push(-s / row[q]);
        rows.push(row);
    }
    c
}

#[derive(Debug, Clone)]
struct AlgebraicTerm {
    ak: f64,
    ln_c: f64,
    sign: f64,
}

#[derive(Debug, Clone)]
struct OscillatoryPart {
    ln_pref: f64,
    sign: f64,
    nu: f64,
    coeffs: Vec<f64>,
}

/// pFq(a; b; −x) for one parameter set, with every x-independent quantity of
/// the large-argument expansion computed once.
#[derive(Debug, Clone)]
pub struct NegPfq {
    params: PFQParams,
    ctrl: SeriesControl,
    algebraic: Vec<AlgebraicTerm>,
    omitted: Vec<usize>,
    oscillatory: Option<OscillatoryPart>,
    asymptotic: bool,
}

impl NegPfq {
    pub fn new(a: &[f64], b: &[f64], ctrl: &SeriesControl) -> Result<Self> {
        let params = PFQParams::new(a, b)?;
        let mut out = NegPfq {
            params,
            ctrl: *ctrl,
            algebraic: Vec::new(),
            omitted: Vec::new(),
            oscillatory: None,
            asymptotic: false,
        };
        if a.len() + 1 == b.len() && check_distinct(a, "pfq_neg").is_ok() {
            out.prepare_asymptotic()?;
        }
        Ok(out)
    }

    fn prepare_asymptotic(&mut self) -> Result<()> {
        const OP: &str = "pfq_neg_asymptotic";
        let a = self.params.upper().to_vec();
        let b = self.params.lower().to_vec();
        for (k, &ak) in a.iter().enumerate() {
            let mut num: Vec<f64> = b.clone();
            let mut den: Vec<f64> = b.iter().map(|bj| bj - ak).collect();
            for (i, &ai) in a.iter().enumerate() {
                if i != k {
                    num.push(ai - ak);
                    den.push(ai);
                }
            }
            let (ln_c, sign) = gamma_ratio(&num, &den, OP)?;
            if sign == 0.0 {
                self.omitted.push(k);
            }
            self.algebraic.push(AlgebraicTerm { ak, ln_c, sign });
        }
        let (ln_pref, sign) = gamma_ratio(&b, &a, OP)?;
        if sign != 0.0 {
            let nu = a.iter().sum::<f64>() - b.iter().sum::<f64>() + 0.5;
            self.oscillatory = Some(OscillatoryPart { ln_pref, sign, nu, coeffs: exponential_coefficients(&a, &b, 40) });
        }
        self.asymptotic = true;
        Ok(())
    }

    /// Large-argument expansion at x > 0.
    pub fn asymptotic(&self, x: f64) -> Result<AsymptoticValue> {
        const OP: &str = "pfq_neg_asymptotic";
        if !self.asymptotic {
            let (a, b) = (self.params.upper(), self.params.lower());
            if a.len() + 1 != b.len() {
                return Err(Error::domain(OP, format!("requires p = q - 1, got p={}, q={}", a.len(), b.len())));
            }
            check_distinct(a, OP)?;
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain(OP, format!("argument magnitude must be positive, got {x}")));
        }
        let (a, b) = (self.params.upper(), self.params.lower());
        let ln_x = x.ln();
        let mut err = 0.0;
        let mut algebraic = Vec::with_capacity(a.len());
        for (k, t) in self.algebraic.iter().enumerate() {
            if t.sign == 0.0 {
                algebraic.push(0.0);
                continue;
            }
            let ak = t.ak;
            let lead = signed_exp(t.ln_c - ak * ln_x, t.sign);
            let mut term = 1.0f64;
            let mut sum = 1.0;
            let mut last = 1.0f64;
            for m in 1..200 {
                let mf = m as f64;
                let mut r = (ak + mf - 1.0) / mf * (-1.0 / x);
                for &bj in b {
                    r *= ak - bj + mf;
                }
                for (i, &ai) in a.iter().enumerate() {
                    if i != k {
                        r /= ak - ai + mf;
                    }
                }
                let next = term * r;
                if next.abs() >= term.abs() {
                    break;
                }
                term = next;
                last = term.abs();
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            err += (lead * last).abs();
            algebraic.push(lead * sum);
        }

        let mut oscillatory = 0.0;
        if let Some(o) = &self.oscillatory {
            let w = 2.0 * x.sqrt();
            let mut s = 0.0;
            let mut prev = f64::INFINITY;
            let mut last = 0.0;
            let mut wk = 1.0;
            for (k, c) in o.coeffs.iter().enumerate() {
                let mag = (c * wk).abs();
                if mag == 0.0 {
                    wk /= w;
                    continue;
                }
                if mag > prev {
                    break;
                }
                s += c * wk * (w + PI * (o.nu - k as f64) / 2.0).cos();
                last = mag;
                prev = mag;
                if mag < 1e-17 * s.abs() {
                    break;
                }
                wk /= w;
            }
            let scale = signed_exp(o.ln_pref + 0.5 * o.nu * ln_x - 0.5 * PI.ln(), o.sign);
            oscillatory = scale * s;
            err += (scale * last).abs();
        }
        let value = algebraic.iter().sum::<f64>() + oscillatory;
        Ok(AsymptoticValue { value, algebraic, oscillatory, error_estimate: err, omitted: self.omitted.clone() })
    }

    /// pFq(a; b; −x), x ≥ 0, choosing between the convergent series and the
    /// large-argument expansion by their error estimates.
    pub fn eval(&self, x: f64) -> Result<PfqEval> {
        let sx = x.sqrt();
        let asym_ok = self.asymptotic && sx >= 4.0;
        let a_eval = if asym_ok {
            match self.asymptotic(x) {
                Ok(v) if v.value != 0.0 => Some(PfqEval {
                    value: v.value,
                    method: PfqMethod::Asymptotic,
                    rel_error: v.error_estimate / v.value.abs(),
                    terms: 0,
                }),
                _ => None,
            }
        } else {
            None
        };
        if let Some(t) = a_eval {
            if t.rel_error <= 1e-14 || sx > 22.0 {
                return Ok(t);
            }
        }
        let series = hyp_pfq(&self.params, -x, &self.ctrl);
        let s_eval = match &series {
            Ok(s) => Some(PfqEval {
                value: s.value,
                method: PfqMethod::Series,
                rel_error: s.cancellation_error(),
                terms: s.terms,
            }),
            Err(_) => None,
        };
        match (s_eval, a_eval) {
            (Some(s), Some(t)) => Ok(if s.rel_error <= t.rel_error { s } else { t }),
            (Some(s), None) => Ok(s),
            (None, Some(t)) => Ok(t),
            (None, None) => match series {
                Err(e) => Err(e),
                Ok(_) => Err(Error::numerical("pfq_neg", format!("no method converged at x={x}"))),
            },
        }
    }
}

/// Asymptotic value of pFq(a; b; −x) for large x > 0, p = q − 1.
pub fn pfq_neg_asymptotic(a: &[f64], b: &[f64], x: f64) -> Result<AsymptoticValue> {
    const OP: &str = "pfq_neg_asymptotic";
    if a.len() + 1 != b.len() {
        return Err(Error::domain(OP, format!("requires p = q - 1, got p={}, q={}", a.len(), b.len())));
    }
    check_distinct(a, OP)?;
    NegPfq::new(a, b, &SeriesControl::default())?.asymptotic(x)
}

/// Method chosen by [`pfq_neg`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfqMethod {
    Series,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfqEval {
    pub value: f64,
    pub method: PfqMethod,
    /// Estimated relative error.
    pub rel_error: f64,
    pub terms: usize,
}

/// pFq(a; b; −x), x ≥ 0; see [`NegPfq::eval`].
pub fn pfq_neg(a: &[f64], b: &[f64], x: f64, ctrl: &SeriesControl) -> Result<PfqEval> {
    NegPfq::new(a, b, ctrl)?.eval(x)
}

/// Three-term expansion of ₂F₃(a₁,a₂; b₁,b₂,b₃; −(τ/2)²).
pub fn hyp_2f3_asymptotic(a: [f64; 2], b: [f64; 3], tau: f64, reading: ExpansionReading) -> Result<AsymptoticValue> {
    const OP: &str = "hyp_2f3_asymptotic";
    if a[0] == a[1] {
        return Err(Error::Degenerate { op: OP, detail: "a1 = a2".into() });
    }
    if !(tau > 0.0) {
        return Err(Error::domain(OP, format!("tau must be positive, got {tau}")));
    }
    let half = tau / 2.0;
    let mut algebraic = Vec::with_capacity(2);
    let mut omitted = Vec::new();
    for k in 0..2 {
        let (ak, ao) = (a[k], a[1 - k]);
        // printed form carries Γ(a_k − a_other); the validated one Γ(a_other − a_k)
        let diff = match reading {
            ExpansionReading::Corrected => ao - ak,
            ExpansionReading::AsPrinted => ak - ao,
        };
        let num = [b[0], b[1], b[2], diff];
        let den = [ao, b[0] - ak, b[1] - ak, b[2] - ak];
        let (ln_c, sign) = gamma_ratio(&num, &den, OP)?;
        if sign == 0.0 {
            omitted.push(k);
        }
        algebraic.push(signed_exp(ln_c - 2.0 * ak * half.ln(), sign));
    }
    let chi = (a[0] + a[1] - b.iter().sum::<f64>() + 0.5) / 2.0;
    let (ln_p, sign) = gamma_ratio(&b, &a, OP)?;
    let oscillatory = match reading {
        ExpansionReading::Corrected => signed_exp(ln_p - 0.5 * PI.ln() + 2.0 * chi * half.ln(), sign) * (tau + PI * chi).cos(),
        ExpansionReading::AsPrinted => signed_exp(ln_p - 0.5 * PI.ln() + chi * tau.ln(), sign) * tau.cos(),
    };
    let value = algebraic.iter().sum::<f64>() + oscillatory;
    Ok(AsymptoticValue { value, algebraic, oscillatory, error_estimate: f64::NAN, omitted })
}

/// ϱ and ϱ₁ of the ₃F₄ expansion.
pub fn asymptotic_3f4_rho(a: [f64; 3], b: [f64; 4]) -> (f64, f64) {
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let rho = 0.5 * (sa - sb + 0.5);
    let mut e2b = 0.0;
    for j in 1..4 {
        for i in 0..j {
            e2b += b[j] * b[i];
        }
    }
    let mut e2a = 0.0;
    for j in 1..3 {
        for i in 0..j {
            e2a += a[j] * a[i];
        }
    }
    let rho1 = 2.0 * (e2b - e2a + 0.25 * (3.0 * sa + sb - 2.0) * (sa - sb) - 3.0 / 16.0);
    (rho, rho1)
}

/// Expansion of ₃F₄(a; b; −(z/2)²) with the ϱ₁ sine correction.
pub fn hyp_3f4_asymptotic(a: [f64; 3], b: [f64; 4], z: f64) -> Result<AsymptoticValue> {
    const OP: &str = "hyp_3f4_asymptotic";
    check_distinct_values(&a, OP)?;
    if !(z > 0.0) {
        return Err(Error::domain(OP, format!("z must be positive, got {z}")));
    }
    let half = z / 2.0;
    let (rho, rho1) = asymptotic_3f4_rho(a, b);
    let mut algebraic = Vec::with_capacity(3);
    let mut omitted = Vec::new();
    for k in 0..3 {
        let ak = a[k];
        let mut num = b.to_vec();
        let mut den: Vec<f64> = b.iter().map(|bj| bj - ak).collect();
        for (j, &aj) in a.iter().enumerate() {
            if j != k {
                num.push(aj - ak);
                den.push(aj);
            }
        }
        let (ln_c, sign) = gamma_ratio(&num, &den, OP)?;
        if sign == 0.0 {
            omitted.push(k);
        }
        algebraic.push(signed_exp(ln_c - 2.0 * ak * half.ln(), sign));
    }
    let (ln_p, sign) = gamma_ratio(&b, &a, OP)?;
    let phase = PI * rho + z;
    let oscillatory =
        signed_exp(ln_p - 0.5 * PI.ln() + 2.0 * rho * half.ln(), sign) * (phase.cos() + rho1 / z * phase.sin());
    let value = algebraic.iter().sum::<f64>() + oscillatory;
    Ok(AsymptoticValue { value, algebraic, oscillatory, error_estimate: f64::NAN, omitted })
}

fn check_distinct_values(a: &[f64], op: &'static str) -> Result<()> {
    for i in 0..a.len() {
        for j in 0..i {
            if a[i] == a[j] {
                return Err(Error::Degenerate { op, detail: format!("coincident numerator parameters {}", a[i]) });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_exponential_coefficient_matches_rho1() {
        let a = [0.3, 0.75, 1.6];
        let b = [1.5, 2.25, 6.0, 6.5];
        let c = exponential_coefficients(&a, &b, 3);
        let (_, rho1) = asymptotic_3f4_rho(a, b);
        assert_relative_eq!(c[1], rho1, max_relative = 1e-12);
    }

    #[test]
    fn rho_arithmetic() {
        let (rho, _) = asymptotic_3f4_rho([2.0, 2.5, 3.0], [1.5, 2.0, 6.0, 6.5]);
        assert_eq!(rho, -4.0);
    }

    #[test]
    fn bessel_reduction_has_no_algebraic_part() {
        // 1F2(a; a, b; −x) = 0F1(; b; −x): the reciprocal Gamma kills the algebraic term
        let v = pfq_neg_asymptotic(&[1.5], &[1.5, 2.5], 400.0).unwrap();
        assert_eq!(v.omitted, vec![0]);
        // 0F1(;5/2;−x) = 3(sin w − w cos w)/w³ with w = 2√x
        let w = 40.0f64;
        let want = 3.0 * (w.sin() - w * w.cos()) / w.powi(3);
        assert_relative_eq!(v.value, want, max_relative = 1e-12);
    }

    #[test]
    fn dispatch_agrees_across_crossover() {
        let ctrl = SeriesControl::default();
        let (a, b) = ([1.5], [4.0, 4.5]);
        for &sx in &[8.0, 10.0, 12.0, 15.0] {
            let x: f64 = sx * sx;
            let s = hyp_pfq(&PFQParams::new(&a, &b).unwrap(), -x, &ctrl).unwrap().value;
            let t = pfq_neg_asymptotic(&a, &b, x).unwrap().value;
            assert_relative_eq!(s, t, max_relative = 1e-6);
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(hyp_2f3_asymptotic([1.0, 1.0], [0.5, 3.0, 3.5], 200.0, ExpansionReading::Corrected).is_err());
        assert!(hyp_3f4_asymptotic([1.0, 2.0, 1.0], [1.5, 2.0, 6.0, 6.5], 300.0).is_err());
        assert!(pfq_neg_asymptotic(&[2.0, 2.5, 3.0], &[1.5, 2.0, 6.0, 6.5], 1e4).is_err());
    }
}
