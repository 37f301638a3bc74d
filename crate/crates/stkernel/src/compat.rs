//! Microergodic functionals and compatibility predicates for Tap/Tap, Tap/DGW
//! and Tap/DM pairs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{ell_theta, DGWParams, DMParams, Validate};
use crate::spectral::constants;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    TapDelta1,
    TapDelta2,
    Dgw,
    Dm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroergodicValue {
    pub value: f64,
    pub regime: Regime,
    pub formula_id: &'static str,
}

/// Which δ values the Tap/Tap predicate accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatMode {
    /// δ ∈ {1, 2} only.
    #[default]
    Stated,
    /// Experimental: case-1 formula on 0 < δ ≤ 1, case-2 formula on 1 < δ ≤ 2.
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub compatible: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
    pub tol: f64,
    pub gates: Vec<Gate>,
}

impl CompatReport {
    fn build(mut gates: Vec<Gate>, lhs: f64, rhs: f64, tol: f64, numeric_name: &str, sufficient_only: bool) -> Self {
        let rel_gap = rel_gap(lhs, rhs);
        let pass = rel_gap <= tol;
        let detail = if pass {
            format!("|lhs - rhs| / max = {rel_gap:.3e} <= {tol:.1e}")
        } else if sufficient_only {
            format!("condition not met: relative gap {rel_gap:.3e} > {tol:.1e}")
        } else {
            format!("relative gap {rel_gap:.3e} > {tol:.1e}")
        };
        gates.push(Gate { name: numeric_name.into(), pass, detail });
        let compatible = gates.iter().all(|g| g.pass);
        CompatReport { compatible, lhs, rhs, rel_gap, tol, gates }
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else if !m.is_finite() || a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        (a - b).abs() / m
    }
}

fn gate(name: &str, pass: bool, detail: impl Into<String>) -> Gate {
    Gate { name: name.into(), pass, detail: detail.into() }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("compat", format!("tolerance must be nonnegative, got {tol}")))
    }
}

/// (4a₂/ξ² + a₁/ξ) L, the δ-controlled factor of the case-1 functional.
fn case1_factor(p: &DGWParams) -> Result<f64> {
    let c = constants(p)?;
    let a2 = c.a2.ok_or_else(|| Error::Unsupported(format!("a2 undefined at delta = {}", p.delta)))?;
    Ok(c.l_s * (4.0 * a2 / (p.xi * p.xi) + c.a1 / p.xi))
}

fn finish(value: f64, regime: Regime, formula_id: &'static str) -> Result<MicroergodicValue> {
    if value > 0.0 && value.is_finite() {
        Ok(MicroergodicValue { value, regime, formula_id })
    } else {
        Err(Error::numerical("micro_tap", format!("microergodic value {value} is not positive")))
    }
}

fn micro_case1(p: &DGWParams, id: &'static str) -> Result<MicroergodicValue> {
    let v = case1_factor(p)? * p.sigma2 / p.beta.powf(2.0 * p.kappa + 1.0);
    finish(v, Regime::TapDelta1, id)
}

fn micro_case2(p: &DGWParams, id: &'static str) -> Result<MicroergodicValue> {
    let c = constants(p)?;
    let d = p.dim as f64;
    let v = p.sigma2 * c.l_s * p.beta.powf(d - 2.0 * c.eta) / p.xi;
    finish(v, Regime::TapDelta2, id)
}

/// Microergodic parameter of a DGW_Tap model, δ ∈ {1, 2}.
pub fn micro_tap(p: &DGWParams) -> Result<MicroergodicValue> {
    p.validate().into_result()?;
    if p.delta == 1.0 {
        micro_case1(p, "tap_tap.delta1")
    } else if p.delta == 2.0 {
        micro_case2(p, "tap_tap.delta2")
    } else {
        Err(Error::Unsupported(format!("micro_tap is defined for delta in {{1, 2}}, got {}", p.delta)))
    }
}

/// Experimental: case-1 functional on 0 < δ ≤ 1, case-2 on 1 < δ ≤ 2.
pub fn micro_tap_extended(p: &DGWParams) -> Result<MicroergodicValue> {
    p.validate().into_result()?;
    if p.delta <= 1.0 {
        micro_case1(p, "tap_tap.extended.case1")
    } else {
        micro_case2(p, "tap_tap.extended.case2")
    }
}

fn micro_for(p: &DGWParams, mode: CompatMode) -> Result<MicroergodicValue> {
    match mode {
        CompatMode::Stated => micro_tap(p),
        CompatMode::Extended => micro_tap_extended(p),
    }
}

fn shared_gates(gates: &mut Vec<Gate>, p0: &DGWParams, p1: &DGWParams) {
    gates.push(gate("dim_equal", p0.dim == p1.dim, format!("d0 = {}, d1 = {}", p0.dim, p1.dim)));
    gates.push(gate("mu_equal", same(p0.mu, p1.mu), format!("mu0 = {}, mu1 = {}", p0.mu, p1.mu)));
    gates.push(gate(
        "gamma_equal",
        same(p0.gamma_exp, p1.gamma_exp),
        format!("gamma0 = {}, gamma1 = {}", p0.gamma_exp, p1.gamma_exp),
    ));
}

fn admissible_gate(gates: &mut Vec<Gate>, name: &str, p: &DGWParams) -> bool {
    let v = p.validate();
    let ok = v.is_ok();
    let detail = if ok {
        "parameters admissible".to_string()
    } else {
        v.violations.iter().map(|i| i.message.clone()).collect::<Vec<_>>().join("; ")
    };
    gates.push(gate(name, ok, detail));
    ok
}

/// Tap/Tap predicate in the stated regime.
pub fn compat_tap_tap(p0: &DGWParams, p1: &DGWParams, tol: f64) -> Result<CompatReport> {
    compat_tap_tap_mode(p0, p1, tol, CompatMode::Stated)
}

pub fn compat_tap_tap_mode(p0: &DGWParams, p1: &DGWParams, tol: f64, mode: CompatMode) -> Result<CompatReport> {
    check_tol(tol)?;
    let mut gates = Vec::new();
    let ok0 = admissible_gate(&mut gates, "admissible_0", p0);
    let ok1 = admissible_gate(&mut gates, "admissible_1", p1);
    shared_gates(&mut gates, p0, p1);
    match mode {
        CompatMode::Stated => {
            gates.push(gate(
                "kappa_equal",
                same(p0.kappa, p1.kappa),
                format!("kappa0 = {}, kappa1 = {}", p0.kappa, p1.kappa),
            ));
            let d_ok = p0.delta == p1.delta && (p0.delta == 1.0 || p0.delta == 2.0);
            gates.push(gate(
                "delta_equal_in_1_2",
                d_ok,
                format!("delta0 = {}, delta1 = {}", p0.delta, p1.delta),
            ));
        }
        CompatMode::Extended => {
            gates.push(gate("experimental", true, "extended regimes 0 < delta <= 2"));
            if p0.delta <= 1.0 {
                let link = 2.0 * (p1.kappa - p0.kappa);
                gates.push(gate(
                    "kappa_delta_linkage",
                    (link - (p0.delta - 1.0)).abs() <= 1e-12,
                    format!("2(kappa1 - kappa0) = {link}, delta0 - 1 = {}", p0.delta - 1.0),
                ));
                gates.push(gate(
                    "delta_regime",
                    p1.delta <= 1.0,
                    format!("delta0 = {}, delta1 = {}", p0.delta, p1.delta),
                ));
            } else {
                gates.push(gate(
                    "kappa_equal",
                    same(p0.kappa, p1.kappa),
                    format!("kappa0 = {}, kappa1 = {}", p0.kappa, p1.kappa),
                ));
                gates.push(gate(
                    "delta_regime",
                    p1.delta > 1.0,
                    format!("delta0 = {}, delta1 = {}", p0.delta, p1.delta),
                ));
            }
        }
    }
    let structural_ok = ok0 && ok1 && gates.iter().all(|g| g.pass);
    let (lhs, rhs) = if structural_ok {
        (micro_for(p0, mode)?.value, micro_for(p1, mode)?.value)
    } else {
        (
            micro_for(p0, mode).map(|m| m.value).unwrap_or(f64::NAN),
            micro_for(p1, mode).map(|m| m.value).unwrap_or(f64::NAN),
        )
    };
    Ok(CompatReport::build(gates, lhs, rhs, tol, "microergodic_equal", false))
}

/// DGW side of the Tap/DGW equality: ϱ√(π/2)(a₁L/5)σ²β^{1+2κ}.
pub fn tap_dgw_lhs(p_dgw: &DGWParams) -> Result<f64> {
    let c = constants(p_dgw)?;
    Ok(c.rho_gamma_eta * (PI / 2.0).sqrt() * (c.a1 * c.l_s / 5.0) * p_dgw.sigma2
        * p_dgw.beta.powf(1.0 + 2.0 * p_dgw.kappa))
}

/// Tap side of the Tap/DGW equality: (a₁L/√(2π))σ²β^{1+2κ}.
pub fn tap_dgw_rhs(p_tap: &DGWParams) -> Result<f64> {
    let c = constants(p_tap)?;
    Ok(c.a1 * c.l_s / (2.0 * PI).sqrt() * p_tap.sigma2 * p_tap.beta.powf(1.0 + 2.0 * p_tap.kappa))
}

/// Tap/DGW sufficient condition; ϱ is evaluated with the DGW model's own η.
pub fn compat_tap_dgw(p_tap: &DGWParams, p_dgw: &DGWParams, tol: f64) -> Result<CompatReport> {
    check_tol(tol)?;
    let mut gates = Vec::new();
    let ok0 = admissible_gate(&mut gates, "admissible_dgw", p_dgw);
    let ok1 = admissible_gate(&mut gates, "admissible_tap", p_tap);
    gates.push(gate("dim_equal", p_dgw.dim == p_tap.dim, format!("d0 = {}, d1 = {}", p_dgw.dim, p_tap.dim)));
    gates.push(gate("tap_delta_one", p_tap.delta == 1.0, format!("delta1 = {}", p_tap.delta)));
    gates.push(gate(
        "gamma_dgw_strict",
        p_dgw.gamma_exp > 2.0 * p_dgw.kappa + 3.0,
        format!("gamma0 = {}, 2 kappa0 + 3 = {}", p_dgw.gamma_exp, 2.0 * p_dgw.kappa + 3.0),
    ));
    gates.push(gate(
        "gamma_tap_strict",
        p_tap.gamma_exp > 2.0 * p_tap.kappa + 3.0,
        format!("gamma1 = {}, 2 kappa1 + 3 = {}", p_tap.gamma_exp, 2.0 * p_tap.kappa + 3.0),
    ));
    let required = 1.0 + 2.0 * (p_tap.kappa - p_dgw.kappa);
    gates.push(gate(
        "delta_linkage",
        (p_dgw.delta - required).abs() <= 1e-12,
        format!("delta0 = {}, 1 + 2(kappa1 - kappa0) = {required}", p_dgw.delta),
    ));
    gates.push(gate("rho_uses_eta0", true, format!("rho evaluated with eta0 = {}", p_dgw.eta())));
    let (lhs, rhs) = if ok0 && ok1 {
        (tap_dgw_lhs(p_dgw)?, tap_dgw_rhs(p_tap)?)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CompatReport::build(gates, lhs, rhs, tol, "microergodic_equal", true))
}

/// Tap side of the Tap/DM equality, zero unless δ = 1.
pub fn tap_dm_lhs(chi: &DGWParams) -> Result<f64> {
    if chi.delta != 1.0 {
        return Ok(0.0);
    }
    Ok(case1_factor(chi)? * chi.sigma2 / ((2.0 * PI).sqrt() * chi.beta.powf(1.0 + 2.0 * chi.kappa)))
}

/// DM side of the Tap/DM equality, ℓ(θ)ε^{−2ν}.
pub fn tap_dm_rhs(theta: &DMParams) -> Result<f64> {
    if theta.eps == 0.0 {
        return Err(Error::Unsupported("Tap/DM compatibility requires eps in (0, 1]".into()));
    }
    Ok(ell_theta(theta)?.value * theta.eps.powf(-2.0 * theta.nu))
}

pub fn compat_tap_dm(theta0: &DMParams, chi: &DGWParams, tol: f64) -> Result<CompatReport> {
    check_tol(tol)?;
    if theta0.eps == 0.0 {
        return Err(Error::Unsupported("Tap/DM compatibility requires eps in (0, 1]".into()));
    }
    theta0.validate().into_result()?;
    let mut gates = Vec::new();
    let ok1 = admissible_gate(&mut gates, "admissible_tap", chi);
    let d = chi.dim as f64;
    gates.push(gate("dim_equal", theta0.dim == chi.dim, format!("d0 = {}, d1 = {}", theta0.dim, chi.dim)));
    let eta = chi.eta();
    gates.push(gate(
        "two_nu_eq_eta_plus_one",
        (2.0 * theta0.nu - (eta + 1.0)).abs() <= 1e-12 * (eta + 1.0),
        format!("2 nu = {}, eta + 1 = {}", 2.0 * theta0.nu, eta + 1.0),
    ));
    gates.push(gate(
        "kappa_gt_half_dm1",
        chi.kappa > (d - 1.0) / 2.0,
        format!("kappa = {}, (d-1)/2 = {}", chi.kappa, (d - 1.0) / 2.0),
    ));
    gates.push(gate("tap_delta_one", chi.delta == 1.0, format!("delta = {}", chi.delta)));
    let lhs = if ok1 { tap_dm_lhs(chi)? } else { f64::NAN };
    let rhs = tap_dm_rhs(theta0)?;
    Ok(CompatReport::build(gates, lhs, rhs, tol, "microergodic_equal", false))
}

/// σ² making micro_tap(template with σ²) equal to the target.
pub fn microergodic_solve_sigma2(template: &DGWParams, target: &MicroergodicValue) -> Result<f64> {
    let unit = micro_tap(&template.with_sigma2(1.0))?;
    if unit.regime != target.regime {
        return Err(Error::Validation(format!(
            "regime mismatch: template is {:?}, target is {:?}",
            unit.regime, target.regime
        )));
    }
    let s = target.value / unit.value;
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Validation(format!("infeasible: solved sigma2 = {s} is not positive")))
    }
}

/// σ² for the Tap model that satisfies the Tap/DGW equality against `p_dgw`.
pub fn tap_dgw_solve_sigma2(p_tap: &DGWParams, p_dgw: &DGWParams) -> Result<f64> {
    let unit = tap_dgw_rhs(&p_tap.with_sigma2(1.0))?;
    let s = tap_dgw_lhs(p_dgw)? / unit;
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Validation(format!("infeasible: solved sigma2 = {s} is not positive")))
    }
}

/// σ² for the Tap model that satisfies the Tap/DM equality against `theta`.
pub fn tap_dm_solve_sigma2(chi: &DGWParams, theta: &DMParams) -> Result<f64> {
    let unit = tap_dm_lhs(&chi.with_sigma2(1.0))?;
    let s = tap_dm_rhs(theta)? / unit;
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Validation(format!("infeasible: solved sigma2 = {s} is not positive")))
    }
}
