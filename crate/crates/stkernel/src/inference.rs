//! Gaussian likelihood, profile variance, simulation, microergodic fits,
//! Monte Carlo experiments and simple kriging.
//!
//! Replicate `r` of a run seeded with `seed` draws from ChaCha20 keyed by
//! `seed` on stream `r` (stream `(step << 32) | r` inside an experiment
//! ladder), so replicates are reproducible independently of the thread count.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::compat::{micro_tap, MicroergodicValue};
use crate::covmat::{assemble, cholesky, AssembleOptions, CholeskyFactor, CovMatrix, JitterPolicy, SpaceTimeDesign};
use crate::error::{Error, Result};
use crate::kernels::{DGWParams, SpaceTimeModel, Validate};
use crate::par::{self, Parallelism};

fn check_len(z: &[f64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::Validation(format!("observation vector has length {}, matrix has order {n}", z.len())));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("observations must be finite".into()));
    }
    Ok(())
}

/// Log-likelihood −½(N log(2πσ²) + log|R| + zᵀR⁻¹z/σ²) from a factor of R.
pub fn loglik_factored(z: &[f64], r: &CholeskyFactor, sigma2: f64) -> Result<f64> {
    check_len(z, r.n())?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Validation(format!("sigma2 must be positive, got {sigma2}")));
    }
    let n = z.len() as f64;
    Ok(-0.5 * (n * (2.0 * PI * sigma2).ln() + r.log_det() + r.quad_form(z) / sigma2))
}

/// Log-likelihood with R the correlation matrix.
pub fn loglik(z: &[f64], r: &CovMatrix, sigma2: f64) -> Result<f64> {
    check_len(z, r.n())?;
    loglik_factored(z, &cholesky(r, &JitterPolicy::default())?, sigma2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileVariance {
    pub sigma2: f64,
    /// Set for a single observation or a zero quadratic form.
    pub degenerate: bool,
}

pub fn sigma2_profile_factored(z: &[f64], r: &CholeskyFactor) -> Result<ProfileVariance> {
    check_len(z, r.n())?;
    let s = r.quad_form(z) / z.len() as f64;
    Ok(ProfileVariance { sigma2: s, degenerate: z.len() == 1 || s == 0.0 })
}

/// zᵀR⁻¹z / N, the maximizer of the likelihood in σ².
pub fn sigma2_profile(z: &[f64], r: &CovMatrix) -> Result<ProfileVariance> {
    check_len(z, r.n())?;
    sigma2_profile_factored(z, &cholesky(r, &JitterPolicy::default())?)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One field realization L·w for stream `stream`.
pub fn simulate_factored(f: &CholeskyFactor, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, stream);
    let w: Vec<f64> = (0..f.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
    f.correlate(&w)
}

/// Zero-mean Gaussian realization on `design` (stored point order).
pub fn simulate(design: &SpaceTimeDesign, model: &SpaceTimeModel, seed: u64) -> Result<Vec<f64>> {
    let m = assemble(design, model, &AssembleOptions::default())?;
    Ok(simulate_factored(&cholesky(&m, &JitterPolicy::default())?, seed, 0))
}

/// `replicates` realizations on streams 0..replicates.
pub fn simulate_replicates(f: &CholeskyFactor, seed: u64, replicates: usize, policy: Parallelism) -> Vec<Vec<f64>> {
    par::map_indexed(policy, replicates, |r| simulate_factored(f, seed, r as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub sigma2_hat: f64,
    pub tau_fixed: DGWParams,
    pub micro_hat: MicroergodicValue,
    pub loglik: f64,
    pub n_obs: usize,
    pub degenerate: bool,
}

/// Correlation matrix of a DGW_Tap model factored once for repeated fits.
#[derive(Debug, Clone)]
pub struct TapFitter {
    tau: DGWParams,
    factor: CholeskyFactor,
}

impl TapFitter {
    pub fn new(design: &SpaceTimeDesign, tau_fixed: &DGWParams, opts: &AssembleOptions) -> Result<Self> {
        let tau = tau_fixed.with_sigma2(1.0);
        tau.validate().into_result()?;
        micro_tap(&tau)?;
        let r = assemble(design, &SpaceTimeModel::DgwTap(tau), opts)?;
        Ok(TapFitter { tau, factor: cholesky(&r, &JitterPolicy::default())? })
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn fit(&self, z: &[f64]) -> Result<FitResult> {
        let prof = sigma2_profile_factored(z, &self.factor)?;
        if !(prof.sigma2 > 0.0) {
            return Err(Error::Degenerate { op: "fit_microergodic", detail: "zero quadratic form".into() });
        }
        let micro_hat = micro_tap(&self.tau.with_sigma2(prof.sigma2))?;
        Ok(FitResult {
            sigma2_hat: prof.sigma2,
            tau_fixed: self.tau,
            micro_hat,
            loglik: loglik_factored(z, &self.factor, prof.sigma2)?,
            n_obs: z.len(),
            degenerate: prof.degenerate,
        })
    }
}

/// σ̂² under the fixed DGW_Tap correlation and the implied microergodic value.
pub fn fit_microergodic(z: &[f64], design: &SpaceTimeDesign, tau_fixed: &DGWParams) -> Result<FitResult> {
    TapFitter::new(design, tau_fixed, &AssembleOptions::default())?.fit(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_space: usize,
    pub m_time: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCExperiment {
    pub replicates: usize,
    pub ladder: Vec<GridSpec>,
    /// Spatial extent [a, b] of every axis.
    pub space: (f64, f64),
    pub horizon: (f64, f64),
    pub true_model: DGWParams,
    /// Correlation parameters used for fitting; σ² is ignored.
    pub fitted: DGWParams,
    pub seed: u64,
}

impl MCExperiment {
    /// 15 × 10 grid on [0,1]², 200 replicates, correctly specified δ = 1 model.
    pub fn desk_default() -> Self {
        let p = DGWParams {
            sigma2: 1.0,
            beta: 1.0,
            mu: 4.0,
            kappa: 0.0,
            xi: 1.0,
            delta: 1.0,
            gamma_exp: 4.0,
            dim: 1,
            varsigma_star: Some(0.0),
        };
        MCExperiment {
            replicates: 200,
            ladder: vec![GridSpec { n_space: 15, m_time: 10 }],
            space: (0.0, 1.0),
            horizon: (0.0, 1.0),
            true_model: p,
            fitted: p,
            seed: 20240501,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCRow {
    pub n_space: usize,
    pub m_time: usize,
    pub n_points: usize,
    pub replicates: usize,
    pub micro_true: f64,
    pub mean_micro: f64,
    pub bias: f64,
    pub std_err: f64,
    /// Empirical variance of √N(micro_hat − micro_true).
    pub var_scaled: f64,
    pub target_var: f64,
    pub var_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCTable {
    pub rows: Vec<MCRow>,
    /// Replicate micro_hat values per ladder step.
    pub estimates: Vec<Vec<f64>>,
}

pub fn mc_experiment(cfg: &MCExperiment, policy: Parallelism) -> Result<MCTable> {
    if cfg.replicates == 0 {
        return Err(Error::Validation("replicates must be positive".into()));
    }
    if cfg.ladder.is_empty() {
        return Err(Error::Validation("design ladder is empty".into()));
    }
    if cfg.true_model.dim != cfg.fitted.dim {
        return Err(Error::Validation("true and fitted models differ in dimension".into()));
    }
    for w in cfg.ladder.windows(2) {
        if w[1].n_space < w[0].n_space || w[1].m_time < w[0].m_time || w[1] == w[0] {
            return Err(Error::Validation("design ladder must strictly densify".into()));
        }
    }
    let micro_true = micro_tap(&cfg.true_model)?.value;
    let truth = SpaceTimeModel::dgw_tap(cfg.true_model)?;
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for (step, g) in cfg.ladder.iter().enumerate() {
        let design =
            crate::covmat::grid_design(g.n_space, g.m_time, cfg.true_model.dim as usize, cfg.space, cfg.horizon)?;
        let opts = AssembleOptions { policy, ..Default::default() };
        let k_true = cholesky(&assemble(&design, &truth, &opts)?, &JitterPolicy::default())?;
        let fitter = TapFitter::new(&design, &cfg.fitted, &opts)?;
        let est = par::try_map_indexed(policy, cfg.replicates, |r| {
            let z = simulate_factored(&k_true, cfg.seed, ((step as u64) << 32) | r as u64);
            fitter.fit(&z).map(|f| f.micro_hat.value)
        })?;
        let n = design.len() as f64;
        let reps = est.len() as f64;
        let mean = est.iter().sum::<f64>() / reps;
        let var_mean = if est.len() > 1 {
            est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1.0)
        } else {
            0.0
        };
        let var_scaled = est.iter().map(|v| n * (v - micro_true).powi(2)).sum::<f64>() / reps;
        let target = 2.0 * micro_true * micro_true;
        rows.push(MCRow {
            n_space: g.n_space,
            m_time: g.m_time,
            n_points: design.len(),
            replicates: cfg.replicates,
            micro_true,
            mean_micro: mean,
            bias: mean - micro_true,
            std_err: (var_mean / reps).sqrt(),
            var_scaled,
            target_var: target,
            var_ratio: var_scaled / target,
        });
        estimates.push(est);
    }
    Ok(MCTable { rows, estimates })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigeResult {
    pub predictor: f64,
    pub krige_var: f64,
    pub weights: Vec<f64>,
    /// True when a slightly negative variance was clamped to 0.
    pub clamped: bool,
}

/// Simple kriging with the covariance matrix factored once.
#[derive(Debug, Clone)]
pub struct Kriger {
    design: SpaceTimeDesign,
    model: SpaceTimeModel,
    factor: CholeskyFactor,
    sill: f64,
}

fn exact_site(design: &SpaceTimeDesign, s: &[f64], t: f64) -> Option<usize> {
    (0..design.len()).find(|&i| design.time(i) == t && design.coords(i) == s)
}

impl Kriger {
    pub fn new(design: &SpaceTimeDesign, model: &SpaceTimeModel, opts: &AssembleOptions) -> Result<Self> {
        let m = assemble(design, model, opts)?;
        let factor = cholesky(&m, &JitterPolicy::default())?;
        Ok(Kriger { design: design.clone(), model: model.clone(), factor, sill: model.cov(0.0, 0.0)? })
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Covariances between the design points and (s, t).
    pub fn cross_cov(&self, s: &[f64], t: f64) -> Result<Vec<f64>> {
        cross_cov(&self.design, &self.model, s, t)
    }

    /// Weights and variance at (s, t), independent of the data.
    pub fn weights(&self, s: &[f64], t: f64) -> Result<(Vec<f64>, f64, bool)> {
        if s.len() != self.design.dim() || s.iter().any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::Validation("kriging target must be finite with the design dimension".into()));
        }
        if let Some(i) = exact_site(&self.design, s, t) {
            let mut w = vec![0.0; self.design.len()];
            w[i] = 1.0;
            return Ok((w, 0.0, false));
        }
        let c = self.cross_cov(s, t)?;
        if c.iter().all(|&v| v == 0.0) {
            return Ok((c, self.sill, false));
        }
        let w = self.factor.solve(&c);
        let v = self.sill - c.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        Ok(if v < 0.0 { (w, 0.0, true) } else { (w, v, false) })
    }

    pub fn predict(&self, z: &[f64], s: &[f64], t: f64) -> Result<KrigeResult> {
        check_len(z, self.design.len())?;
        let (weights, krige_var, clamped) = self.weights(s, t)?;
        let predictor = weights.iter().zip(z).map(|(a, b)| a * b).sum();
        Ok(KrigeResult { predictor, krige_var, weights, clamped })
    }
}

pub fn cross_cov(design: &SpaceTimeDesign, model: &SpaceTimeModel, s: &[f64], t: f64) -> Result<Vec<f64>> {
    (0..design.len())
        .map(|i| {
            let (r, u) = design.lag_to(i, s, t);
            if model.in_support(r, u) {
                model.cov(r, u)
            } else {
                Ok(0.0)
            }
        })
        .collect()
}

/// Simple-kriging predictor and variance at (s, t).
pub fn krige(z: &[f64], design: &SpaceTimeDesign, model: &SpaceTimeModel, s: &[f64], t: f64) -> Result<KrigeResult> {
    Kriger::new(design, model, &AssembleOptions::default())?.predict(z, s, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisspecRow {
    pub step: usize,
    pub n_points: usize,
    pub target: usize,
    pub true_var: f64,
    pub asserted_var: f64,
    /// E[(Z₀ − ŵᵀZ)²] under the true model with the wrong-model weights.
    pub realized_var: f64,
    pub asserted_over_true: f64,
    pub realized_over_true: f64,
}

/// Closed-form kriging-variance ratios of a wrong model against the true one.
pub fn misspec_krige_study(
    true_model: &SpaceTimeModel,
    wrong_model: &SpaceTimeModel,
    ladder: &[SpaceTimeDesign],
    targets: &[(Vec<f64>, f64)],
    policy: Parallelism,
) -> Result<Vec<MisspecRow>> {
    if ladder.is_empty() || targets.is_empty() {
        return Err(Error::Validation("ladder and targets must be nonempty".into()));
    }
    let opts = AssembleOptions { policy, ..Default::default() };
    let mut rows = Vec::new();
    for (step, design) in ladder.iter().enumerate() {
        let k0 = assemble(design, true_model, &opts)?;
        let t0 = Kriger::new(design, true_model, &opts)?;
        let t1 = Kriger::new(design, wrong_model, &opts)?;
        for (ti, (s, t)) in targets.iter().enumerate() {
            let (_, v0, _) = t0.weights(s, *t)?;
            let (w1, v1, _) = t1.weights(s, *t)?;
            let c0 = t0.cross_cov(s, *t)?;
            let kw = k0.mul_vec(&w1);
            let realized = t0.sill - 2.0 * w1.iter().zip(&c0).map(|(a, b)| a * b).sum::<f64>()
                + w1.iter().zip(&kw).map(|(a, b)| a * b).sum::<f64>();
            let ratio = |a: f64, b: f64| if b == 0.0 && a == 0.0 { 1.0 } else { a / b };
            rows.push(MisspecRow {
                step,
                n_points: design.len(),
                target: ti,
                true_var: v0,
                asserted_var: v1,
                realized_var: realized,
                asserted_over_true: ratio(v1, v0),
                realized_over_true: ratio(realized, v0),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covmat::grid_design;

    fn tap() -> DGWParams {
        DGWParams {
            sigma2: 1.0,
            beta: 0.5,
            mu: 4.0,
            kappa: 0.0,
            xi: 0.7,
            delta: 1.0,
            gamma_exp: 4.0,
            dim: 1,
            varsigma_star: Some(0.0),
        }
    }

    #[test]
    fn loglik_trivial_cases() {
        let one = CovMatrix::from_dense(1, vec![1.0]).unwrap();
        let v = loglik(&[0.0], &one, 1.0).unwrap();
        assert!((v + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let id = CovMatrix::from_dense(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let z = [0.3, -1.2];
        let iid: f64 = z.iter().map(|x| -0.5 * (2.0 * PI * 2.0).ln() - x * x / 4.0).sum();
        assert!((loglik(&z, &id, 2.0).unwrap() - iid).abs() < 1e-14);
        assert!((sigma2_profile(&z, &id).unwrap().sigma2 - (0.09 + 1.44) / 2.0).abs() < 1e-15);
        assert!(sigma2_profile(&[0.0, 0.0], &id).unwrap().degenerate);
    }

    #[test]
    fn profile_maximizes_loglik_on_both_paths() {
        let d = grid_design(5, 4, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let model = SpaceTimeModel::DgwTap(tap());
        let z = simulate(&d, &model, 7).unwrap();
        assert_eq!(z, simulate(&d, &model, 7).unwrap());
        let sparse = assemble(&d, &model, &AssembleOptions::default()).unwrap();
        let dense = assemble(
            &d,
            &model,
            &AssembleOptions { layout: crate::covmat::LayoutChoice::Dense, ..Default::default() },
        )
        .unwrap();
        let s = sigma2_profile(&z, &sparse).unwrap().sigma2;
        let a = loglik(&z, &sparse, s).unwrap();
        let b = loglik(&z, &dense, s).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs());
        assert!(a >= loglik(&z, &sparse, 1.1 * s).unwrap());
        assert!(a >= loglik(&z, &sparse, 0.9 * s).unwrap());
        let fit = fit_microergodic(&z, &d, &tap()).unwrap();
        assert!((fit.sigma2_hat - s).abs() < 1e-12 * s);
        let m1 = micro_tap(&tap()).unwrap().value;
        assert!((fit.micro_hat.value - m1 * s).abs() < 1e-12 * m1 * s);
    }

    #[test]
    fn kriging_interpolates_and_decays() {
        let d = grid_design(4, 3, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let model = SpaceTimeModel::DgwTap(tap());
        let z = simulate(&d, &model, 11).unwrap();
        let at = krige(&z, &d, &model, d.coords(5), d.time(5)).unwrap();
        assert_eq!(at.predictor, z[5]);
        assert_eq!(at.krige_var, 0.0);
        let far = krige(&z, &d, &model, &[10.0], 10.0).unwrap();
        assert_eq!(far.predictor, 0.0);
        assert_eq!(far.krige_var, 1.0);
        let near = krige(&z, &d, &model, &[0.4], 0.6).unwrap();
        let fewer = d.filter(|i| i != 5).unwrap();
        let near2 = Kriger::new(&fewer, &model, &AssembleOptions::default())
            .unwrap()
            .weights(&[0.4], 0.6)
            .unwrap()
            .1;
        assert!(near.krige_var <= near2 + 1e-15);
    }

    #[test]
    fn misspec_identity_gives_unit_ratios() {
        let model = SpaceTimeModel::DgwTap(tap());
        let ladder = [grid_design(3, 3, 1, (0.0, 1.0), (0.0, 1.0)).unwrap()];
        let rows =
            misspec_krige_study(&model, &model, &ladder, &[(vec![0.3], 0.4)], Parallelism::Sequential).unwrap();
        assert_eq!(rows[0].asserted_over_true, 1.0);
        assert!((rows[0].realized_over_true - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mc_rejects_zero_replicates() {
        let mut cfg = MCExperiment::desk_default();
        cfg.replicates = 0;
        assert!(matches!(mc_experiment(&cfg, Parallelism::Sequential), Err(Error::Validation(_))));
    }
}
