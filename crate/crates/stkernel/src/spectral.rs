//! Spectral densities of the GW, DGW_Tap and DGW models.
//!
//! Fourier convention: f̂(z, τ) = (2π)^{−(d+1)} ∫∫ e^{−i(⟨r,z⟩+uτ)} f(r, u) dr du.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{DGWParams, GWParams, Validate};
use crate::par::{self, Parallelism};
use crate::quad::{cos_finite, GaussLegendre, QuadTol};
use crate::specfun::{
    gamma_fn, is_nonpositive_integer, levin_sum, ln_beta, log_gamma, sin_pi, NegPfq, SeriesControl,
};

/// Largest zβ for which the n-series of the double-series density is summed.
pub const SERIES_MAX_ZBETA: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConstants {
    pub eta: f64,
    pub a1: f64,
    /// Undefined when δ/2 is a nonnegative integer.
    pub a2: Option<f64>,
    pub l_s: f64,
    pub c3: f64,
    pub k_s: f64,
    pub rho_gamma_eta: f64,
}

fn ln_l(mu: f64, kappa: f64, d: f64) -> Result<f64> {
    let eta = (d + 1.0) / 2.0 + kappa;
    Ok(log_gamma(kappa + (d + 1.0) / 2.0)? + log_gamma(2.0 * kappa + mu + 1.0)?
        - d / 2.0 * PI.ln()
        - log_gamma(kappa + 0.5)?
        - log_gamma(mu + 2.0 * eta)?)
}

/// L^ς in its κ > 0 form K^ς Γ(κ) / (2^{1−κ} B(2κ, μ+1)).
pub fn l_constant_kappa_form(mu: f64, kappa: f64, d: u32) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::domain("l_constant_kappa_form", "requires kappa > 0"));
    }
    let k = k_constant(mu, kappa, d as f64)?;
    Ok(k * gamma_fn(kappa)? / (2f64.powf(1.0 - kappa) * ln_beta(2.0 * kappa, mu + 1.0)?.exp()))
}

fn k_constant(mu: f64, kappa: f64, d: f64) -> Result<f64> {
    let eta = (d + 1.0) / 2.0 + kappa;
    let ln = (1.0 - kappa - d) * std::f64::consts::LN_2 - d / 2.0 * PI.ln() + log_gamma(mu + 1.0)?
        + log_gamma(2.0 * kappa + d)?
        - log_gamma(kappa + d / 2.0)?
        - log_gamma(mu + 2.0 * eta)?;
    Ok(ln.exp())
}

pub fn constants(p: &DGWParams) -> Result<SpectralConstants> {
    p.validate().into_result()?;
    let d = p.dim as f64;
    let eta = p.eta();
    let c3 = (log_gamma(p.mu + 2.0 * eta)? - log_gamma(p.mu)?).exp();
    let a1 = 5.0 * (2.0 / PI).sqrt() * c3;
    let pexp = p.gamma_exp + d - 2.0 * eta;
    let half = p.delta / 2.0;
    let a2 = if half == half.round() {
        None
    } else {
        Some(a1 * PI.sqrt() * pexp * gamma_fn(half + 1.0)? / (5.0 * gamma_fn(-half)? * 120.0 * 120.0))
    };
    let rho = pexp * gamma_fn(p.delta + 1.0)? * sin_pi(p.delta / 2.0) / (p.xi.powf(p.delta) * PI);
    Ok(SpectralConstants {
        eta,
        a1,
        a2,
        l_s: ln_l(p.mu, p.kappa, d)?.exp(),
        c3,
        k_s: k_constant(p.mu, p.kappa, d)?,
        rho_gamma_eta: rho,
    })
}

fn gw_f12(p: &GWParams, ctrl: &SeriesControl) -> Result<NegPfq> {
    let eta = (p.dim as f64 + 1.0) / 2.0 + p.kappa;
    NegPfq::new(&[eta], &[eta + p.mu / 2.0, eta + (p.mu + 1.0) / 2.0], ctrl)
}

/// d-dimensional isotropic spectral density of gw(·; β, μ, κ):
/// β^d L ₁F₂(η; η+μ/2, η+(μ+1)/2; −(zβ/2)²).
pub fn gw_spatial_spectrum(z: f64, p: &GWParams, ctrl: &SeriesControl) -> Result<f64> {
    p.validate().into_result()?;
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain("gw_spatial_spectrum", format!("frequency must be nonnegative, got {z}")));
    }
    let f = gw_f12(p, ctrl)?;
    let x = (z * p.beta / 2.0).powi(2);
    let l = ln_l(p.mu, p.kappa, p.dim as f64)?.exp();
    Ok(p.beta.powi(p.dim as i32) * l * f.eval(x)?.value)
}

/// Which printed form of the double series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesReading {
    /// (zβ/2)^{2n} with prefactor σ²β^dL ξ/π; matches the brute-force transform.
    #[default]
    Derived,
    /// (zβ/2)^n with prefactor σ²β^dL ξ^{3/2}τ^{−1/2}/(√2 π^{3/2}).
    AsPrinted,
}

/// How the inner k-series is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalSum {
    /// Closed-form resummation ∫₀¹ cos(ξτt)(1+t^δ)^{−(γ+d+2n)}(1−t)⁴ dt.
    #[default]
    Quadrature,
    /// Term-by-term ₂F₃ series with Levin u-transform acceleration.
    Levin,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesOptions {
    pub reading: SeriesReading,
    pub temporal: TemporalSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SeriesTermLedger {
    pub n_terms_spatial: usize,
    pub k_terms_temporal: usize,
    pub truncation_estimate: f64,
    pub converged: bool,
}

fn check_freq(op: &'static str, z: f64, tau: f64) -> Result<()> {
    if z >= 0.0 && tau >= 0.0 && z.is_finite() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("frequencies must be nonnegative and finite, got ({z}, {tau})")))
    }
}

/// ∫₀¹ cos(ωt)(1+t^δ)^{−a}(1−t)⁴ dt.
fn temporal_quadrature(a: f64, delta: f64, omega: f64) -> Result<(f64, usize)> {
    let q = cos_finite(
        |t| (1.0 + t.powf(delta)).powf(-a) * (1.0 - t).powi(4),
        omega,
        0.0,
        1.0,
        QuadTol { abs: 1e-300, rel: 1e-13, max_intervals: 200 },
    );
    let evals = q.evals;
    Ok((q.require("dgw_tap_spectrum_series")?, evals))
}

/// Rounding floor of the Levin-accelerated k-series in f64; the terms grow like
/// k^{a−6} so the attainable accuracy falls as a = γ+d+2n increases.
const LEVIN_FLOOR: f64 = 1e-7;

/// Σ_k (−1)^k (a)_k/k! B(5, 1+kδ) ₂F₃((kδ+1)/2, (kδ+2)/2; ½, (6+kδ)/2, (7+kδ)/2; −(ω/2)²).
fn temporal_levin(a: f64, delta: f64, omega: f64, ctrl: &SeriesControl) -> Result<(f64, usize)> {
    let x = (omega / 2.0).powi(2);
    let ln_ga = log_gamma(a)?;
    levin_sum(
        |k| {
            let kf = k as f64;
            let kd = kf * delta;
            let ln_coef = log_gamma(a + kf)? - ln_ga - log_gamma(kf + 1.0)? + ln_beta(5.0, 1.0 + kd)?;
            let f = NegPfq::new(&[(kd + 1.0) / 2.0, (kd + 2.0) / 2.0], &[0.5, (6.0 + kd) / 2.0, (7.0 + kd) / 2.0], ctrl)?
                .eval(x)?;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            Ok(s * ln_coef.exp() * f.value)
        },
        ctrl.rel_tol.max(LEVIN_FLOOR),
        ctrl.max_terms.min(200),
    )
}

/// Double-series form of the DGW_Tap spectral density, summed over
/// n exactly and over k by the selected method.
pub fn dgw_tap_spectrum_series(
    z: f64,
    tau: f64,
    p: &DGWParams,
    ctrl: &SeriesControl,
    opts: SeriesOptions,
) -> Result<(f64, SeriesTermLedger)> {
    const OP: &str = "dgw_tap_spectrum_series";
    check_freq(OP, z, tau)?;
    ctrl.validate()?;
    let c = constants(p)?;
    let zb = z * p.beta;
    if zb > SERIES_MAX_ZBETA {
        return Err(Error::Unsupported(format!(
            "{OP}: zβ = {zb} exceeds the series range {SERIES_MAX_ZBETA}; use dgw_tap_spectrum or dgw_tap_spectrum_asymptotic"
        )));
    }
    if opts.reading == SeriesReading::AsPrinted && tau == 0.0 {
        return Err(Error::domain(OP, "the printed prefactor τ^{-1/2} is singular at τ = 0"));
    }
    let d = p.dim as f64;
    let eta = c.eta;
    let (b1, b2) = (eta + p.mu / 2.0, eta + (p.mu + 1.0) / 2.0);
    let omega = p.xi * tau;
    let (pref, x) = match opts.reading {
        SeriesReading::Derived => (p.sigma2 * p.beta.powi(p.dim as i32) * c.l_s * p.xi / PI, (zb / 2.0).powi(2)),
        SeriesReading::AsPrinted => (
            p.sigma2 * p.beta.powi(p.dim as i32) * c.l_s * p.xi.powf(1.5) * tau.powf(-0.5)
                / (2f64.sqrt() * PI.powf(1.5)),
            zb / 2.0,
        ),
    };
    let mut ledger = SeriesTermLedger::default();
    let mut sum = 0.0;
    let mut coef = 1.0f64;
    let mut max_term = 0.0f64;
    let mut small = 0;
    for n in 0..ctrl.max_terms {
        let nf = n as f64;
        if n > 0 {
            coef *= -(eta + nf - 1.0) / ((b1 + nf - 1.0) * (b2 + nf - 1.0) * nf) * x;
        }
        let a = p.gamma_exp + d + 2.0 * nf;
        let (t, k_used) = match opts.temporal {
            TemporalSum::Quadrature => (temporal_quadrature(a, p.delta, omega)?.0, 0),
            TemporalSum::Levin => temporal_levin(a, p.delta, omega, ctrl)?,
        };
        ledger.k_terms_temporal = ledger.k_terms_temporal.max(k_used);
        let term = coef * t;
        sum += term;
        max_term = max_term.max(term.abs());
        ledger.n_terms_spatial = n + 1;
        if term.abs() <= ctrl.rel_tol * sum.abs() + ctrl.abs_tol || coef == 0.0 {
            small += 1;
            if small >= ctrl.consecutive_small {
                ledger.converged = true;
                ledger.truncation_estimate = pref.abs() * (term.abs() + f64::EPSILON * max_term);
                return Ok((pref * sum, ledger));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Truncation { partial: pref * sum, terms: ctrl.max_terms })
}

/// Quadrature rule on [0, ξ] for the resummed temporal integral.
struct TemporalRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TemporalRule {
    fn new(xi: f64, delta: f64, max_phase: f64) -> Self {
        let gl = GaussLegendre::new(16);
        let panels = ((max_phase / (PI / 4.0)).ceil() as usize).max(4);
        let h = xi / panels as f64;
        let mut edges = Vec::new();
        // c(u) = 1/(1+(u/ξ)^δ) is not smooth at 0 unless δ is an integer
        let grade = if delta == delta.round() { 0 } else { 40 };
        edges.push(0.0);
        for k in (0..grade).rev() {
            edges.push(h * 0.5f64.powi(k + 1));
        }
        for i in 1..=panels {
            edges.push(if i == panels { xi } else { h * i as f64 });
        }
        let mut nodes = Vec::with_capacity(edges.len() * 16);
        let mut weights = Vec::with_capacity(edges.len() * 16);
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(m + r * x);
                weights.push(r * wt);
            }
        }
        TemporalRule { nodes, weights }
    }
}

/// Values of a spectral density on a tensor grid, row-major in z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumGrid {
    pub zs: Vec<f64>,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumGrid {
    pub fn get(&self, iz: usize, it: usize) -> f64 {
        self.values[iz * self.taus.len() + it]
    }
}

/// Exact DGW_Tap spectral density on a grid via the resummed representation
/// (σ²β^dL/π) ∫₀^ξ cos(uτ)(1−u/ξ)⁴ c(u)^{γ+d} ₁F₂(η; η+μ/2, η+(μ+1)/2; −(zβc(u)/2)²) du,
/// c(u) = C(u; ξ, δ, 1). Valid at every frequency.
pub fn dgw_tap_spectrum_grid(
    zs: &[f64],
    taus: &[f64],
    p: &DGWParams,
    ctrl: &SeriesControl,
    policy: Parallelism,
) -> Result<SpectrumGrid> {
    const OP: &str = "dgw_tap_spectrum";
    for &z in zs {
        for &t in taus {
            check_freq(OP, z, t)?;
        }
    }
    ctrl.validate()?;
    let c = constants(p)?;
    let f = gw_f12(&p.gw(), ctrl)?;
    let zmax = zs.iter().cloned().fold(0.0, f64::max);
    let tmax = taus.iter().cloned().fold(0.0, f64::max);
    let rule = TemporalRule::new(p.xi, p.delta, tmax * p.xi + zmax * p.beta / 2.0 + 1.0);
    let d = p.dim as f64;
    let base: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| {
            let cu = 1.0 / (1.0 + (u / p.xi).powf(p.delta));
            (cu, w * (1.0 - u / p.xi).powi(4) * cu.powf(p.gamma_exp + d))
        })
        .collect();
    let pref = p.sigma2 * p.beta.powi(p.dim as i32) * c.l_s / PI;
    let rows = par::try_map_indexed(policy, zs.len(), |iz| -> Result<Vec<f64>> {
        let z = zs[iz];
        let mut h = Vec::with_capacity(base.len());
        for &(cu, w) in &base {
            let x = (z * p.beta * cu / 2.0).powi(2);
            h.push(w * f.eval(x)?.value);
        }
        Ok(taus
            .iter()
            .map(|&t| pref * rule.nodes.iter().zip(&h).map(|(u, hv)| hv * (u * t).cos()).sum::<f64>())
            .collect())
    })?;
    Ok(SpectrumGrid { zs: zs.to_vec(), taus: taus.to_vec(), values: rows.into_iter().flatten().collect() })
}

/// Exact DGW_Tap spectral density at one frequency pair.
pub fn dgw_tap_spectrum(z: f64, tau: f64, p: &DGWParams, ctrl: &SeriesControl) -> Result<f64> {
    Ok(dgw_tap_spectrum_grid(&[z], &[tau], p, ctrl, Parallelism::Sequential)?.values[0])
}

/// Which leading-order tail constants to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailReading {
    /// (σ²β^dLc₃/π)(zβ)^{−2η}[4/(ξτ²) + pΓ(δ+1)sin(πδ/2)ξ^{−δ}τ^{−δ−1}], p = γ+d−2η.
    #[default]
    Derived,
    /// Published regime formulas with a₁, a₂.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailValue {
    pub value: f64,
    /// Frequencies were below the asymptotic regime and the exact density was returned.
    pub deferred: bool,
    /// The leading coefficient vanishes and the true tail is of lower order.
    pub leading_vanishes: bool,
}

/// Smallest zβ and ξτ for which the leading-order tail is returned.
pub const TAIL_MIN_ARG: f64 = 50.0;

/// Leading-order DGW_Tap density for large z and τ.
pub fn dgw_tap_spectrum_asymptotic(z: f64, tau: f64, p: &DGWParams, reading: TailReading) -> Result<TailValue> {
    const OP: &str = "dgw_tap_spectrum_asymptotic";
    check_freq(OP, z, tau)?;
    let c = constants(p)?;
    if z * p.beta < TAIL_MIN_ARG || p.xi * tau < TAIL_MIN_ARG {
        let v = dgw_tap_spectrum(z, tau, p, &SeriesControl::default())?;
        return Ok(TailValue { value: v, deferred: true, leading_vanishes: false });
    }
    let d = p.dim as f64;
    let bz = (p.beta * z).powf(-2.0 * c.eta);
    let base = p.sigma2 * p.beta.powi(p.dim as i32) * c.l_s;
    let value = match reading {
        TailReading::Derived => {
            let pexp = p.gamma_exp + d - 2.0 * c.eta;
            let osc = pexp * gamma_fn(p.delta + 1.0)? * sin_pi(p.delta / 2.0) * p.xi.powf(-p.delta)
                * tau.powf(-p.delta - 1.0);
            base * c.c3 / PI * bz * (4.0 / (p.xi * tau * tau) + osc)
        }
        TailReading::AsPrinted => {
            let pre = base / (2.0 * PI).sqrt();
            if p.delta < 1.0 {
                let a2 = c.a2.ok_or_else(|| Error::numerical(OP, "a2 undefined"))?;
                pre * a2 * (p.xi * tau / 2.0).powf(-p.delta - 1.0) * bz
            } else if p.delta == 1.0 {
                let a2 = c.a2.ok_or_else(|| Error::numerical(OP, "a2 undefined"))?;
                pre * (4.0 * a2 / (p.xi * p.xi) + c.a1 / p.xi) * tau.powi(-2) * bz
            } else {
                pre * c.a1 / p.xi * tau.powi(-2) * bz
            }
        }
    };
    Ok(TailValue { value, deferred: false, leading_vanishes: false })
}

/// Leading tail σ²β^dLc₃(zβ)^{−2η} ϱ_{γ,η} τ^{−(1+δ)} of the untapered DGW density.
pub fn dgw_spectrum_tail(z: f64, tau: f64, p: &DGWParams) -> Result<TailValue> {
    check_freq("dgw_spectrum_tail", z, tau)?;
    let c = constants(p)?;
    let value = p.sigma2 * p.beta.powi(p.dim as i32) * c.l_s * c.c3 * (z * p.beta).powf(-2.0 * c.eta)
        * c.rho_gamma_eta
        * tau.powf(-(1.0 + p.delta));
    let vanishes = is_nonpositive_integer(-p.delta / 2.0);
    Ok(TailValue { value, deferred: false, leading_vanishes: vanishes })
}

/// A spectral density that can be tabulated on tensor grids.
pub trait SpectralDensity: Sync {
    fn dim(&self) -> u32;
    fn grid(&self, zs: &[f64], taus: &[f64], policy: Parallelism) -> Result<Vec<f64>>;
}

/// Exact DGW_Tap density as a [`SpectralDensity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapDensity {
    pub params: DGWParams,
    pub ctrl: SeriesControl,
}

impl SpectralDensity for TapDensity {
    fn dim(&self) -> u32 {
        self.params.dim
    }

    fn grid(&self, zs: &[f64], taus: &[f64], policy: Parallelism) -> Result<Vec<f64>> {
        Ok(dgw_tap_spectrum_grid(zs, taus, &self.params, &self.ctrl, policy)?.values)
    }
}

/// Pointwise density from a closure.
pub struct FnDensity<F> {
    pub dim: u32,
    pub f: F,
}

impl<F> SpectralDensity for FnDensity<F>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    fn dim(&self) -> u32 {
        self.dim
    }

    fn grid(&self, zs: &[f64], taus: &[f64], policy: Parallelism) -> Result<Vec<f64>> {
        let rows = par::try_map_indexed(policy, zs.len(), |iz| -> Result<Vec<f64>> {
            taus.iter().map(|&t| (self.f)(zs[iz], t)).collect()
        })?;
        Ok(rows.into_iter().flatten().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Region constant c; the excluded corner is [0, c₁] × [0, c₂].
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    /// Gauss–Legendre points per panel and axis.
    pub grid: usize,
    /// Geometric panel ratio beyond c.
    pub panel_ratio: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { c: 1.0, c1: 0.5, c2: 0.5, grid: 6, panel_ratio: std::f64::consts::SQRT_2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub cutoffs: Vec<f64>,
    pub partial: Vec<f64>,
}

impl ProbeResult {
    /// last / penultimate partial integral.
    pub fn plateau_ratio(&self) -> f64 {
        let n = self.partial.len();
        if n < 2 {
            return f64::NAN;
        }
        let (a, b) = (self.partial[n - 2], self.partial[n - 1]);
        if a == 0.0 && b == 0.0 {
            1.0
        } else {
            b / a
        }
    }

    /// last / first partial integral.
    pub fn growth(&self) -> f64 {
        let n = self.partial.len();
        if n == 0 || self.partial[0] == 0.0 {
            return if self.partial.iter().all(|v| *v == 0.0) { 1.0 } else { f64::INFINITY };
        }
        self.partial[n - 1] / self.partial[0]
    }
}

fn axis_edges(first: f64, c: f64, ratio: f64, cutoffs: &[f64]) -> Vec<f64> {
    let top = cutoffs.iter().cloned().fold(0.0, f64::max);
    let mut e = vec![0.0, first, c];
    let mut x = c;
    while x * ratio < top {
        x *= ratio;
        e.push(x);
    }
    e.extend_from_slice(cutoffs);
    e.retain(|v| *v <= top);
    e.sort_by(f64::total_cmp);
    e.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    e
}

/// Partial integrals of ∫_𝒜 z^{d−1}((f₁ − f₀)/f₀)² dz dτ over [0, C]² minus the
/// corner [0, c₁] × [0, c₂], for each cutoff C.
pub fn compat_integral_probe(
    model0: &dyn SpectralDensity,
    model1: &dyn SpectralDensity,
    cutoffs: &[f64],
    cfg: &ProbeConfig,
    policy: Parallelism,
) -> Result<ProbeResult> {
    const OP: &str = "compat_integral_probe";
    if model0.dim() != model1.dim() {
        return Err(Error::Validation(format!("{OP}: dimension mismatch {} vs {}", model0.dim(), model1.dim())));
    }
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[1] <= w[0]) || cutoffs[0] <= cfg.c {
        return Err(Error::Validation(format!("{OP}: cutoffs must increase and exceed c")));
    }
    if !(cfg.c > 0.0 && cfg.c1 > 0.0 && cfg.c2 > 0.0 && cfg.c1 * cfg.c1 + cfg.c2 * cfg.c2 < cfg.c * cfg.c) {
        return Err(Error::Validation(format!("{OP}: need c₁² + c₂² < c², all positive")));
    }
    if cfg.grid < 2 || !(cfg.panel_ratio > 1.0) {
        return Err(Error::Validation(format!("{OP}: grid >= 2 and panel_ratio > 1 required")));
    }
    let gl = GaussLegendre::new(cfg.grid);
    let expand = |edges: &[f64]| {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel = Vec::new();
        for (i, w) in edges.windows(2).enumerate() {
            let (m, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(m + r * x);
                weights.push(r * wt);
                panel.push(i);
            }
        }
        (nodes, weights, panel)
    };
    let ze = axis_edges(cfg.c1, cfg.c, cfg.panel_ratio, cutoffs);
    let te = axis_edges(cfg.c2, cfg.c, cfg.panel_ratio, cutoffs);
    let (zn, zw, zp) = expand(&ze);
    let (tn, tw, tp) = expand(&te);
    let f0 = model0.grid(&zn, &tn, policy)?;
    let f1 = model1.grid(&zn, &tn, policy)?;
    let d = model0.dim() as i32;
    let nt = tn.len();
    let mut partial = vec![0.0; cutoffs.len()];
    for iz in 0..zn.len() {
        for it in 0..nt {
            // corner panel: z ∈ [0, c₁] and τ ∈ [0, c₂]
            if zp[iz] == 0 && tp[it] == 0 {
                continue;
            }
            let a = f0[iz * nt + it];
            let b = f1[iz * nt + it];
            if !(a > 0.0) || !(b > 0.0) {
                return Err(Error::domain(
                    OP,
                    format!("nonpositive density at (z, τ) = ({}, {}): {a}, {b}", zn[iz], tn[it]),
                ));
            }
            let v = zn[iz].powi(d - 1) * ((b - a) / a).powi(2) * zw[iz] * tw[it];
            let zr = ze[zp[iz] + 1];
            let tr = te[tp[it] + 1];
            for (k, &cut) in cutoffs.iter().enumerate() {
                if zr <= cut * (1.0 + 1e-12) && tr <= cut * (1.0 + 1e-12) {
                    partial[k] += v;
                }
            }
        }
    }
    Ok(ProbeResult { cutoffs: cutoffs.to_vec(), partial })
}
