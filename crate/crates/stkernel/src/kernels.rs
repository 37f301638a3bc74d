//! Covariance families: Matérn, Generalized Wendland, Cauchy, DGW, its
//! temporally tapered variant, and the space-time Matérn DM.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive, cos_half_line, QuadTol};
use crate::specfun::{
    gamma_fn, hyp_pfq, ln_bessel_k, ln_beta, log_gamma, PFQParams, SeriesControl,
};

/// A violated or noteworthy constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub code: &'static str,
    pub message: String,
}

/// Outcome of parameter validation. Hard violations break positive
/// definiteness; warnings and notes do not.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub notes: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, code: &'static str, message: String) {
        self.violations.push(Issue { code, message });
    }

    fn warning(&mut self, code: &'static str, message: String) {
        self.warnings.push(Issue { code, message });
    }

    fn note(&mut self, code: &'static str, message: String) {
        self.notes.push(Issue { code, message });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msg: Vec<String> = self.violations.iter().map(|v| format!("{}: {}", v.code, v.message)).collect();
            Err(Error::Validation(msg.join("; ")))
        }
    }
}

pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

fn positive(rep: &mut ValidationReport, code: &'static str, name: &str, v: f64) {
    if !(v > 0.0) || !v.is_finite() {
        rep.violation(code, format!("{name} must be positive and finite, got {v}"));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaternParams {
    pub alpha: f64,
    pub nu: f64,
}

impl Validate for MaternParams {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        positive(&mut r, "matern.alpha", "alpha", self.alpha);
        positive(&mut r, "matern.nu", "nu", self.nu);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GWParams {
    pub beta: f64,
    pub mu: f64,
    pub kappa: f64,
    pub dim: u32,
}

impl Validate for GWParams {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        positive(&mut r, "gw.beta", "beta", self.beta);
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            r.violation("gw.kappa", format!("kappa must be nonnegative, got {}", self.kappa));
        }
        if !(1..=3).contains(&self.dim) {
            r.violation("gw.dim", format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        let bound = (self.dim as f64 + 1.0) / 2.0 + self.kappa;
        if !(self.mu >= bound) || !self.mu.is_finite() {
            r.violation("gw.mu", format!("mu must be >= (d+1)/2 + kappa = {bound}, got {}", self.mu));
        } else if self.mu == bound {
            r.note("gw.mu.boundary", format!("mu equals the positive-definiteness bound {bound}"));
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyParams {
    pub xi: f64,
    pub delta: f64,
    pub gamma_exp: f64,
}

impl Validate for CauchyParams {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        positive(&mut r, "cauchy.xi", "xi", self.xi);
        if !(self.delta > 0.0 && self.delta <= 2.0) {
            r.violation("cauchy.delta", format!("delta must lie in (0, 2], got {}", self.delta));
        }
        positive(&mut r, "cauchy.gamma_exp", "gamma_exp", self.gamma_exp);
        r
    }
}

/// Parameters χ = (σ², β, μ, κ, ξ, δ, γ) of the DGW and DGW_Tap models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DGWParams {
    pub sigma2: f64,
    pub beta: f64,
    pub mu: f64,
    pub kappa: f64,
    pub xi: f64,
    pub delta: f64,
    pub gamma_exp: f64,
    pub dim: u32,
    /// Offset ς* in the shape constraint; `None` means 0 with a warning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varsigma_star: Option<f64>,
}

impl DGWParams {
    pub fn eta(&self) -> f64 {
        (self.dim as f64 + 1.0) / 2.0 + self.kappa
    }

    pub fn gw(&self) -> GWParams {
        GWParams { beta: self.beta, mu: self.mu, kappa: self.kappa, dim: self.dim }
    }

    pub fn cauchy(&self) -> CauchyParams {
        CauchyParams { xi: self.xi, delta: self.delta, gamma_exp: self.gamma_exp }
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Self {
        DGWParams { sigma2, ..*self }
    }
}

impl Validate for DGWParams {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        positive(&mut r, "dgw.sigma2", "sigma2", self.sigma2);
        positive(&mut r, "dgw.beta", "beta", self.beta);
        positive(&mut r, "dgw.xi", "xi", self.xi);
        positive(&mut r, "dgw.gamma_exp", "gamma_exp", self.gamma_exp);
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            r.violation("dgw.kappa", format!("kappa must be nonnegative, got {}", self.kappa));
        }
        if !(self.delta > 0.0 && self.delta <= 2.0) {
            r.violation("dgw.delta", format!("delta must lie in (0, 2], got {}", self.delta));
        }
        if !(1..=2).contains(&self.dim) {
            r.violation("dgw.dim", format!("dim must be 1 or 2, got {}", self.dim));
        }
        let d = self.dim as f64;
        let vs = match self.varsigma_star {
            Some(v) => v,
            None => {
                r.warning("dgw.varsigma_star", "varsigma_star unspecified, treated as 0".into());
                0.0
            }
        };
        let mu_bound = ((d + 5.0) / 2.0 + self.kappa + vs).max(self.eta() + (d + 1.0) / 2.0);
        if !(self.mu > mu_bound) {
            r.violation("dgw.mu", format!("mu must exceed {mu_bound}, got {}", self.mu));
        }
        let g_bound = ((d + 3.0) / 2.0 + 2.0 * self.kappa).max(2.0 * self.kappa + 3.0);
        if !(self.gamma_exp >= g_bound) {
            r.violation("dgw.gamma_exp", format!("gamma_exp must be >= {g_bound}, got {}", self.gamma_exp));
        }
        r
    }
}

/// Parameters θ = (ν, ζ, υ, ε, σ²) of the space-time Matérn DM model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DMParams {
    pub nu: f64,
    pub zeta: f64,
    pub upsilon: f64,
    pub eps: f64,
    pub sigma2: f64,
    pub dim: u32,
}

impl Validate for DMParams {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        positive(&mut r, "dm.nu", "nu", self.nu);
        positive(&mut r, "dm.zeta", "zeta", self.zeta);
        positive(&mut r, "dm.upsilon", "upsilon", self.upsilon);
        positive(&mut r, "dm.sigma2", "sigma2", self.sigma2);
        if !(0.0..=1.0).contains(&self.eps) {
            r.violation("dm.eps", format!("eps must lie in [0, 1], got {}", self.eps));
        }
        if !(1..=2).contains(&self.dim) {
            r.violation("dm.dim", format!("dim must be 1 or 2, got {}", self.dim));
        }
        let d = self.dim as f64;
        if self.eps == 0.0 && !(self.nu > (d + 1.0) / 2.0) {
            r.violation("dm.nu", format!("eps = 0 requires nu > (d+1)/2 = {}, got {}", (d + 1.0) / 2.0, self.nu));
        } else if !(self.nu > d / 2.0 + 0.5) {
            r.violation("dm.nu", format!("nu must exceed (d+1)/2 = {}, got {}", (d + 1.0) / 2.0, self.nu));
        }
        r
    }
}

fn nonneg_lag(op: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("lag must be nonnegative and finite, got {v}")))
    }
}

/// Matérn correlation (2^{1−ν}/Γ(ν)) (r/α)^ν K_ν(r/α).
pub fn matern(r: f64, p: &MaternParams) -> Result<f64> {
    nonneg_lag("matern", r)?;
    p.validate().into_result()?;
    if r == 0.0 {
        return Ok(1.0);
    }
    let x = r / p.alpha;
    if p.nu == 0.5 {
        return Ok((-x).exp());
    }
    let ln = (1.0 - p.nu) * std::f64::consts::LN_2 - log_gamma(p.nu)? + p.nu * x.ln() + ln_bessel_k(p.nu, x)?;
    Ok(ln.exp().min(1.0))
}

/// Isotropic d-dimensional spectral density of the Matérn correlation.
pub fn matern_spectral(z: f64, p: &MaternParams, d: u32) -> Result<f64> {
    nonneg_lag("matern_spectral", z)?;
    p.validate().into_result()?;
    let df = d as f64;
    let ln = log_gamma(p.nu + df / 2.0)? - log_gamma(p.nu)? - df / 2.0 * PI.ln() + df * p.alpha.ln()
        - (p.nu + df / 2.0) * (p.alpha * p.alpha * z * z).ln_1p();
    Ok(ln.exp())
}

fn gw_unit(x: f64, mu: f64, kappa: f64) -> Result<f64> {
    if x >= 1.0 {
        return Ok(0.0);
    }
    if kappa == 0.0 {
        if mu == mu.round() && mu <= 64.0 {
            return Ok((1.0 - x).powi(mu as i32));
        }
        return Ok((1.0 - x).powf(mu));
    }
    // u = x + (1−x)s turns the integral into
    // (1−x)^{κ+μ} ∫₀¹ s^{κ−1}(1−s)^μ u(u+x)^{κ−1} ds
    let tol = QuadTol { abs: 0.0, rel: 1e-13, max_intervals: 400 };
    let q = if kappa < 1.0 {
        let inv = 1.0 / kappa;
        adaptive(
            |v| {
                let s = v.powf(inv);
                let u = x + (1.0 - x) * s;
                (1.0 - s).powf(mu) * u * (u + x).powf(kappa - 1.0) * inv
            },
            0.0,
            1.0,
            tol,
        )
    } else {
        adaptive(
            |s| {
                let u = x + (1.0 - x) * s;
                s.powf(kappa - 1.0) * (1.0 - s).powf(mu) * u * (u + x).powf(kappa - 1.0)
            },
            0.0,
            1.0,
            tol,
        )
    };
    let integral = q.require("gw")?;
    let ln = (kappa + mu) * (1.0 - x).ln() + integral.ln() - ln_beta(2.0 * kappa, mu + 1.0)?;
    Ok(ln.exp().clamp(0.0, 1.0))
}

/// Generalized Wendland correlation with support β.
pub fn gw(r: f64, p: &GWParams) -> Result<f64> {
    nonneg_lag("gw", r)?;
    p.validate().into_result()?;
    if r == 0.0 {
        return Ok(1.0);
    }
    gw_unit(r / p.beta, p.mu, p.kappa)
}

/// Support radius of the rescaled GW whose μ→∞ limit is Matérn(β, κ+½).
pub fn gw_rescaled_support(p: &GWParams) -> Result<f64> {
    let e = (log_gamma(p.mu + 2.0 * p.kappa + 1.0)? - log_gamma(p.mu)?) / (1.0 + 2.0 * p.kappa);
    Ok(p.beta * e.exp())
}

pub fn gw_rescaled(r: f64, p: &GWParams) -> Result<f64> {
    nonneg_lag("gw_rescaled", r)?;
    p.validate().into_result()?;
    if r == 0.0 {
        return Ok(1.0);
    }
    gw_unit(r / gw_rescaled_support(p)?, p.mu, p.kappa)
}

fn cauchy_raw(t: f64, xi: f64, delta: f64, gamma: f64) -> f64 {
    (1.0 + (t / xi).powf(delta)).powf(-gamma)
}

/// Cauchy correlation (1+(t/ξ)^δ)^{−γ}.
pub fn cauchy(t: f64, p: &CauchyParams) -> Result<f64> {
    nonneg_lag("cauchy", t)?;
    p.validate().into_result()?;
    Ok(cauchy_raw(t, p.xi, p.delta, p.gamma_exp))
}

/// Spatial support radius β·C(t; ξ, δ, 1) of DGW at temporal lag t.
pub fn dgw_support_radius(t: f64, p: &DGWParams) -> f64 {
    p.beta / (1.0 + (t / p.xi).powf(p.delta))
}

/// True when (r, t) lies in the open support of DGW.
pub fn dgw_in_support(r: f64, t: f64, p: &DGWParams) -> bool {
    r < dgw_support_radius(t, p)
}

/// True when (r, t) lies in the open support of DGW_Tap.
pub fn dgw_tap_in_support(r: f64, t: f64, p: &DGWParams) -> bool {
    t < p.xi && dgw_in_support(r, t, p)
}

fn dgw_unchecked(r: f64, t: f64, p: &DGWParams) -> Result<f64> {
    if !dgw_in_support(r, t, p) {
        return Ok(0.0);
    }
    let c1 = 1.0 / (1.0 + (t / p.xi).powf(p.delta));
    let cg = c1.powf(p.gamma_exp);
    let x = r / (p.beta * c1);
    let g = if r == 0.0 { 1.0 } else { gw_unit(x, p.mu, p.kappa)? };
    Ok(p.sigma2 * cg * g)
}

fn taper(t: f64, xi: f64) -> f64 {
    if t >= xi {
        0.0
    } else {
        (1.0 - t / xi).powi(4)
    }
}

/// DGW covariance σ² C(t;ξ,δ,γ) GW(r / C(t;ξ,δ,1); β, μ, κ).
pub fn dgw(r: f64, t: f64, p: &DGWParams) -> Result<f64> {
    nonneg_lag("dgw", r)?;
    nonneg_lag("dgw", t)?;
    p.validate().into_result()?;
    dgw_unchecked(r, t, p)
}

/// Temporally tapered DGW: dgw(r, t) (1 − t/ξ)₊⁴.
pub fn dgw_tap(r: f64, t: f64, p: &DGWParams) -> Result<f64> {
    nonneg_lag("dgw_tap", r)?;
    nonneg_lag("dgw_tap", t)?;
    p.validate().into_result()?;
    if !dgw_tap_in_support(r, t, p) {
        return Ok(0.0);
    }
    Ok(dgw_unchecked(r, t, p)? * taper(t, p.xi))
}

/// How ℓ(θ) was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EllMethod {
    ClosedForm,
    Hypergeometric,
    /// Gamma or ₂F₁ pole in the series representation; quadrature only.
    QuadratureFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllTheta {
    pub value: f64,
    pub method: EllMethod,
    /// ℓ from 1-D quadrature of the radial integral.
    pub quadrature: f64,
    /// ℓ from the closed or hypergeometric form, when available.
    pub analytic: Option<f64>,
}

/// ∫_{ℝ^d} (ζ²+|r|²)^{1/2−ν} (ζ²+ε|r|²)^{−1/2} dr by radial quadrature.
fn ell_radial_quadrature(p: &DMParams) -> Result<f64> {
    let d = p.dim as f64;
    let z2 = p.zeta * p.zeta;
    let surface = 2.0 * PI.powf(d / 2.0) / gamma_fn(d / 2.0)?;
    // r = ζ s/(1−s)
    let q = adaptive(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - s;
            let r = p.zeta * s / u;
            let jac = p.zeta / (u * u);
            r.powf(d - 1.0) * (z2 + r * r).powf(0.5 - p.nu) * (z2 + p.eps * r * r).powf(-0.5) * jac
        },
        0.0,
        1.0,
        QuadTol { abs: 0.0, rel: 1e-12, max_intervals: 2000 },
    );
    Ok(surface * q.require("ell_theta")?)
}

fn ell_radial_analytic(p: &DMParams) -> Result<Option<(f64, EllMethod)>> {
    let d = p.dim as f64;
    let nu = p.nu;
    let gap = nu - (d + 1.0) / 2.0;
    let lead = p.zeta.powf(d - 2.0 * nu) * PI.powf(d / 2.0);
    if p.eps == 0.0 {
        if gap <= 0.0 {
            return Ok(None);
        }
        let v = lead * gamma_fn(gap)? / gamma_fn(nu - 0.5)?;
        return Ok(Some((v, EllMethod::ClosedForm)));
    }
    if p.eps == 1.0 {
        let v = lead * gamma_fn(nu - d / 2.0)? / gamma_fn(nu)?;
        return Ok(Some((v, EllMethod::ClosedForm)));
    }
    if gap == gap.round() {
        return Ok(None);
    }
    let ctrl = SeriesControl { max_terms: 200_000, ..SeriesControl::default() };
    let f1 = hyp_pfq(&PFQParams::new(&[0.5, d / 2.0], &[(3.0 + d - 2.0 * nu) / 2.0])?, p.eps, &ctrl)?.value;
    let f2 = hyp_pfq(&PFQParams::new(&[nu - 0.5, nu - d / 2.0], &[nu - d / 2.0 + 0.5])?, p.eps, &ctrl)?.value;
    let t1 = gamma_fn(gap)? / gamma_fn(nu - 0.5)? * f1;
    let t2 = p.eps.powf(gap) * gamma_fn(-gap)? * gamma_fn(nu - d / 2.0)? / (PI.sqrt() * gamma_fn(d / 2.0)?) * f2;
    Ok(Some((lead * (t1 + t2), EllMethod::Hypergeometric)))
}

/// Normalizer ℓ(θ) making DM(0, 0) = σ².
pub fn ell_theta(p: &DMParams) -> Result<EllTheta> {
    p.validate().into_result()?;
    let pref = p.upsilon.powf(1.0 - 2.0 * p.nu) * gamma_fn(p.nu - 0.5)? * PI.sqrt();
    let quad = 1.0 / (pref * ell_radial_quadrature(p)?);
    match ell_radial_analytic(p)? {
        Some((radial, method)) => {
            let v = 1.0 / (pref * radial);
            let rel = (v - quad).abs() / v.abs();
            if rel > 1e-6 {
                return Err(Error::numerical(
                    "ell_theta",
                    format!("analytic {v} and quadrature {quad} disagree (relative {rel:.3e})"),
                ));
            }
            Ok(EllTheta { value: v, method, quadrature: quad, analytic: Some(v) })
        }
        None => Ok(EllTheta { value: quad, method: EllMethod::QuadratureFallback, quadrature: quad, analytic: None }),
    }
}

/// DM model with its normalizer computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct DmKernel {
    pub params: DMParams,
    pub ell: EllTheta,
    pub ctrl: SeriesControl,
}

impl DmKernel {
    pub fn new(params: DMParams, ctrl: SeriesControl) -> Result<Self> {
        ctrl.validate()?;
        let ell = ell_theta(&params)?;
        Ok(DmKernel { params, ell, ctrl })
    }

    /// g_M(r, τ), the spatial covariance at temporal frequency τ.
    pub fn g(&self, r: f64, tau: f64) -> f64 {
        let p = &self.params;
        let d = p.dim as f64;
        let lam = p.nu - d / 2.0;
        let v2 = p.upsilon * p.upsilon;
        let den = v2 + p.eps * tau * tau;
        let a = (p.zeta * p.zeta * (v2 + tau * tau) / den).sqrt();
        let pref = p.sigma2 * self.ell.value * PI.powf(d / 2.0);
        // (r/a)^λ K_λ(ar) = a^{−2λ} x^λ K_λ(x), x = ar
        let x = a * r;
        let xk = if x == 0.0 {
            ((lam - 1.0) * std::f64::consts::LN_2 + log_gamma(lam).unwrap_or(f64::NAN)).exp()
        } else {
            (lam * x.ln() + ln_bessel_k(lam, x).unwrap_or(f64::NEG_INFINITY) - (lam - 1.0) * std::f64::consts::LN_2)
                .exp()
                * 2f64.powf(lam - 1.0)
        };
        pref / 2f64.powf(lam - 1.0) * a.powf(-2.0 * lam) * den.powf(-p.nu) * xk
    }

    /// DM(r, t) = 2∫₀^∞ cos(tτ) g_M(r, τ) dτ.
    pub fn cov(&self, r: f64, t: f64) -> Result<f64> {
        nonneg_lag("dm", r)?;
        nonneg_lag("dm", t)?;
        let tol = QuadTol { abs: 1e-15 * self.params.sigma2, rel: self.ctrl.rel_tol.max(1e-11), max_intervals: 400 };
        let q = cos_half_line(|tau| self.g(r, tau), t, 0.0, tol);
        Ok(2.0 * q.require("dm")?)
    }
}

/// DM covariance; builds ℓ(θ) on every call, prefer [`DmKernel`] in loops.
pub fn dm(r: f64, t: f64, p: &DMParams, ctrl: &SeriesControl) -> Result<f64> {
    DmKernel::new(*p, *ctrl)?.cov(r, t)
}

/// A space-time covariance model with its support structure.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceTimeModel {
    Dgw(DGWParams),
    DgwTap(DGWParams),
    Dm(Box<DmKernel>),
}

impl SpaceTimeModel {
    pub fn dgw(p: DGWParams) -> Result<Self> {
        p.validate().into_result()?;
        Ok(SpaceTimeModel::Dgw(p))
    }

    pub fn dgw_tap(p: DGWParams) -> Result<Self> {
        p.validate().into_result()?;
        Ok(SpaceTimeModel::DgwTap(p))
    }

    pub fn dm(p: DMParams, ctrl: SeriesControl) -> Result<Self> {
        Ok(SpaceTimeModel::Dm(Box::new(DmKernel::new(p, ctrl)?)))
    }

    pub fn variance(&self) -> f64 {
        match self {
            SpaceTimeModel::Dgw(p) | SpaceTimeModel::DgwTap(p) => p.sigma2,
            SpaceTimeModel::Dm(k) => k.params.sigma2,
        }
    }

    pub fn dim(&self) -> u32 {
        match self {
            SpaceTimeModel::Dgw(p) | SpaceTimeModel::DgwTap(p) => p.dim,
            SpaceTimeModel::Dm(k) => k.params.dim,
        }
    }

    /// Same model with unit variance.
    pub fn correlation(&self) -> Self {
        match self {
            SpaceTimeModel::Dgw(p) => SpaceTimeModel::Dgw(p.with_sigma2(1.0)),
            SpaceTimeModel::DgwTap(p) => SpaceTimeModel::DgwTap(p.with_sigma2(1.0)),
            SpaceTimeModel::Dm(k) => {
                let mut k = (**k).clone();
                k.params.sigma2 = 1.0;
                SpaceTimeModel::Dm(Box::new(k))
            }
        }
    }

    pub fn has_compact_support(&self) -> bool {
        !matches!(self, SpaceTimeModel::Dm(_))
    }

    /// False only where the covariance is structurally zero.
    pub fn in_support(&self, r: f64, t: f64) -> bool {
        match self {
            SpaceTimeModel::Dgw(p) => dgw_in_support(r, t, p),
            SpaceTimeModel::DgwTap(p) => dgw_tap_in_support(r, t, p),
            SpaceTimeModel::Dm(_) => true,
        }
    }

    pub fn cov(&self, r: f64, t: f64) -> Result<f64> {
        match self {
            SpaceTimeModel::Dgw(p) => dgw_unchecked(r, t, p),
            SpaceTimeModel::DgwTap(p) => {
                if !dgw_tap_in_support(r, t, p) {
                    Ok(0.0)
                } else {
                    Ok(dgw_unchecked(r, t, p)? * taper(t, p.xi))
                }
            }
            SpaceTimeModel::Dm(k) => k.cov(r, t),
        }
    }
}
