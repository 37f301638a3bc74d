use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::is_nonpositive_integer;

/// Truncation policy for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
    pub consecutive_small: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { rel_tol: 1e-12, abs_tol: 1e-300, max_terms: 10_000, consecutive_small: 3 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Validation(format!("series.rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::Validation(format!("series.abs_tol must be >= 0, got {}", self.abs_tol)));
        }
        if self.max_terms < 8 {
            return Err(Error::Validation(format!("series.max_terms must be >= 8, got {}", self.max_terms)));
        }
        if self.consecutive_small < 2 {
            return Err(Error::Validation(format!(
                "series.consecutive_small must be >= 2, got {}",
                self.consecutive_small
            )));
        }
        Ok(())
    }
}

/// Parameters of pFq: numerator `upper`, denominator `lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct PFQParams {
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl PFQParams {
    pub fn new(upper: &[f64], lower: &[f64]) -> Result<Self> {
        if upper.len() > lower.len() + 1 {
            return Err(Error::domain("hyp_pfq", format!("p={} exceeds q+1={}", upper.len(), lower.len() + 1)));
        }
        if let Some(b) = lower.iter().find(|b| is_nonpositive_integer(**b)) {
            return Err(Error::domain("hyp_pfq", format!("denominator parameter {b} is a nonpositive integer")));
        }
        if upper.iter().chain(lower).any(|v| !v.is_finite()) {
            return Err(Error::domain("hyp_pfq", "non-finite parameter"));
        }
        Ok(PFQParams { upper: upper.to_vec(), lower: lower.to_vec() })
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
}

/// Partial sum of a series with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// Largest |term| seen; `max_term / |value|` measures cancellation.
    pub max_term: f64,
}

impl SeriesSum {
    /// Rough relative rounding error from cancellation among the terms.
    pub fn cancellation_error(&self) -> f64 {
        if self.value == 0.0 {
            return f64::INFINITY;
        }
        f64::EPSILON * (self.max_term / self.value.abs()).max(1.0) * (self.terms as f64).sqrt()
    }
}

/// Generalized hypergeometric series pFq(a; b; z).
pub fn hyp_pfq(params: &PFQParams, z: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    let (p, q) = (params.upper.len(), params.lower.len());
    let terminating = params.upper.iter().any(|a| is_nonpositive_integer(*a));
    if p == q + 1 && z.abs() >= 1.0 && !terminating {
        return Err(Error::domain("hyp_pfq", format!("p=q+1 series diverges for |z|={} >= 1", z.abs())));
    }
    if !z.is_finite() {
        return Err(Error::domain("hyp_pfq", "non-finite argument"));
    }
    let mut sum = 1.0;
    let mut term = 1.0f64;
    let mut max_term = 1.0f64;
    if z == 0.0 {
        return Ok(SeriesSum { value: 1.0, terms: 1, max_term });
    }
    let mut small = 0;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for a in &params.upper {
            ratio *= a + kf;
        }
        for b in &params.lower {
            ratio /= b + kf;
        }
        term *= ratio;
        sum += term;
        max_term = max_term.max(term.abs());
        if !sum.is_finite() {
            return Err(Error::Overflow { op: "hyp_pfq", detail: format!("partial sum overflowed at term {k}") });
        }
        if term.abs() <= ctrl.rel_tol * sum.abs() + ctrl.abs_tol {
            small += 1;
            if small >= ctrl.consecutive_small {
                return Ok(SeriesSum { value: sum, terms: k + 2, max_term });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Truncation { partial: sum, terms: ctrl.max_terms })
}
