//! Command execution and artifact writing.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use stkernel::compat::{compat_tap_dgw, compat_tap_dm, compat_tap_tap_mode, CompatReport};
use stkernel::covmat::{assemble, cholesky, grid_design, AssembleOptions, SpaceTimeDesign};
use stkernel::inference::{mc_experiment, misspec_krige_study, simulate_replicates, Kriger, MCExperiment, TapFitter};
use stkernel::kernels::{DGWParams, SpaceTimeModel, Validate};
use stkernel::spectral::{dgw_tap_spectrum_grid, dgw_tap_spectrum_series, SERIES_MAX_ZBETA};
use stkernel::Parallelism;

use crate::config::{Command, DataSpec, DesignSpec, ModelSpec, RunConfig, SpectrumMethod, DEFAULT_SEED};
use crate::error::CliError;
use crate::io::{self, fmt_f64, point_cells, point_header, Observations, Table};

/// Process-level settings from flags and environment.
#[derive(Debug, Clone)]
pub struct RunEnv {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub timestamp: bool,
    pub policy: Parallelism,
    pub threads: Option<usize>,
}

struct Artifacts<'a> {
    cfg: &'a RunConfig,
    env: &'a RunEnv,
    seed: u64,
    files: Vec<String>,
    extra: serde_json::Map<String, Value>,
}

impl<'a> Artifacts<'a> {
    fn csv(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        t.write(&self.env.out.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        write_json(&self.env.out.join(name), v)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        let mut meta = serde_json::Map::new();
        meta.insert("command".into(), json!(self.cfg.command));
        meta.insert("seed".into(), json!(self.seed));
        meta.insert(
            "versions".into(),
            json!({ "stkernel": stkernel::VERSION, "stkernel-cli": env!("CARGO_PKG_VERSION") }),
        );
        meta.insert("parallelism".into(), json!(self.env.policy));
        meta.insert("threads".into(), json!(self.env.threads));
        meta.insert("config".into(), serde_json::to_value(self.cfg).expect("config serializes"));
        meta.insert("outputs".into(), json!(self.files));
        for (k, v) in self.extra {
            meta.insert(k, v);
        }
        if self.env.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            meta.insert("timestamp".into(), json!(secs));
        }
        let name = format!("{}.meta.json", self.cfg.command.name());
        write_json(&self.env.out.join(name), &Value::Object(meta))
    }
}

fn write_json(path: &std::path::Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn invalid(field: &str) -> impl Fn(stkernel::Error) -> CliError + '_ {
    move |e| if e.is_validation() { CliError::config(field, e.to_string()) } else { CliError::Library(e) }
}

fn build_model(spec: &ModelSpec, cfg: &RunConfig, field: &str) -> Result<SpaceTimeModel, CliError> {
    match *spec {
        ModelSpec::Dgw(p) => SpaceTimeModel::dgw(p),
        ModelSpec::DgwTap(p) => SpaceTimeModel::dgw_tap(p),
        ModelSpec::Dm(p) => p.validate().into_result().and_then(|_| SpaceTimeModel::dm(p, cfg.series_control())),
    }
    .map_err(invalid(field))
}

fn tap_params(spec: &ModelSpec, field: &str) -> Result<DGWParams, CliError> {
    match *spec {
        ModelSpec::DgwTap(p) => {
            p.validate().into_result().map_err(invalid(field))?;
            Ok(p)
        }
        other => Err(CliError::config(field, format!("expected a dgw_tap model, got {}", other.family()))),
    }
}

fn design(cfg: &RunConfig) -> Result<SpaceTimeDesign, CliError> {
    match cfg.design.as_ref().expect("checked block") {
        DesignSpec::Csv(p) => io::read_design(p, "design.csv"),
        DesignSpec::Grid(g) => {
            grid_design(g.n_space, g.m_time, g.dim, g.space, g.horizon).map_err(invalid("design.grid"))
        }
        DesignSpec::Points(r) => io::inline_design(r.dim, &r.rows, "design.points.rows"),
    }
}

fn observations(cfg: &RunConfig) -> Result<Observations, CliError> {
    match cfg.data.as_ref().expect("checked block") {
        DataSpec::Csv(p) => io::read_observations(p, "data.csv"),
        DataSpec::Inline(r) => io::inline_observations(r.dim, &r.rows, "data.inline"),
    }
}

fn check_dim(model: &SpaceTimeModel, design: &SpaceTimeDesign, field: &str) -> Result<(), CliError> {
    if model.dim() as usize != design.dim() {
        return Err(CliError::config(
            field,
            format!("model dimension {} differs from design dimension {}", model.dim(), design.dim()),
        ));
    }
    Ok(())
}

fn assemble_opts(cfg: &RunConfig, env: &RunEnv) -> AssembleOptions {
    AssembleOptions { policy: env.policy, ..cfg.assemble.unwrap_or_default() }
}

fn validate_models(cfg: &RunConfig) -> Result<(), CliError> {
    for (name, spec) in [("model", &cfg.model), ("model_b", &cfg.model_b)] {
        let Some(spec) = spec else { continue };
        let report = match spec {
            ModelSpec::Dgw(p) | ModelSpec::DgwTap(p) => p.validate(),
            ModelSpec::Dm(p) => p.validate(),
        };
        report.into_result().map_err(invalid(&format!("{name}.{}", spec.family())))?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig, env: &RunEnv) -> Result<(), CliError> {
    validate_models(cfg)?;
    std::fs::create_dir_all(&env.out).map_err(|e| CliError::Output(format!("{}: {e}", env.out.display())))?;
    let seed = env.seed.or(cfg.seed).unwrap_or(match (&cfg.command, &cfg.mc) {
        (Command::Mc, Some(mc)) => mc.seed,
        _ => DEFAULT_SEED,
    });
    let mut a = Artifacts { cfg, env, seed, files: Vec::new(), extra: serde_json::Map::new() };
    match cfg.command {
        Command::Eval => eval(&mut a)?,
        Command::Spectrum => spectrum(&mut a)?,
        Command::Compat => compat(&mut a)?,
        Command::Assemble => assemble_cmd(&mut a)?,
        Command::Simulate => simulate(&mut a)?,
        Command::Fit => fit(&mut a)?,
        Command::Krige => krige(&mut a)?,
        Command::Mc => mc(&mut a)?,
        Command::Misspec => misspec(&mut a)?,
    }
    a.finish()
}

fn eval(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let model = build_model(cfg.model.as_ref().unwrap(), cfg, "model")?;
    let block = cfg.eval.as_ref().unwrap();
    let mut t = Table::new(["r", "t", "value"]);
    for r in block.r.values() {
        for tt in block.t.values() {
            let v = model.cov(r, tt).map_err(invalid("eval"))?;
            t.push(vec![fmt_f64(r), fmt_f64(tt), fmt_f64(v)]);
        }
    }
    a.csv("eval.csv", &t)
}

fn spectrum(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let p = tap_params(cfg.model.as_ref().unwrap(), "model")?;
    let block = cfg.spectrum.as_ref().unwrap();
    let ctrl = cfg.series_control();
    let (zs, taus) = (block.z.values(), block.tau.values());
    let exact = match block.method {
        SpectrumMethod::Series => None,
        _ => Some(dgw_tap_spectrum_grid(&zs, &taus, &p, &ctrl, a.env.policy).map_err(invalid("spectrum"))?),
    };
    let mut t = Table::new(["z", "tau", "value", "n_terms", "k_terms", "converged"]);
    for (iz, &z) in zs.iter().enumerate() {
        for (it, &tau) in taus.iter().enumerate() {
            let use_series = match block.method {
                SpectrumMethod::Series => true,
                SpectrumMethod::Exact => false,
                SpectrumMethod::Auto => z * p.beta <= SERIES_MAX_ZBETA,
            };
            let row = if use_series {
                let (v, l) = dgw_tap_spectrum_series(z, tau, &p, &ctrl, block.options).map_err(invalid("spectrum"))?;
                [fmt_f64(v), l.n_terms_spatial.to_string(), l.k_terms_temporal.to_string(), l.converged.to_string()]
            } else {
                let v = exact.as_ref().unwrap().get(iz, it);
                [fmt_f64(v), "0".into(), "0".into(), "true".into()]
            };
            let mut cells = vec![fmt_f64(z), fmt_f64(tau)];
            cells.extend(row);
            t.push(cells);
        }
    }
    a.csv("spectrum.csv", &t)
}

fn compat_report(cfg: &RunConfig) -> Result<CompatReport, CliError> {
    let block = cfg.compat.unwrap_or_default();
    let (m0, m1) = (cfg.model.as_ref().unwrap(), cfg.model_b.as_ref().unwrap());
    let r = match (*m0, *m1) {
        (ModelSpec::DgwTap(p0), ModelSpec::DgwTap(p1)) => compat_tap_tap_mode(&p0, &p1, block.tol, block.mode),
        (ModelSpec::DgwTap(tap), ModelSpec::Dgw(full)) | (ModelSpec::Dgw(full), ModelSpec::DgwTap(tap)) => {
            compat_tap_dgw(&tap, &full, block.tol)
        }
        (ModelSpec::DgwTap(tap), ModelSpec::Dm(dm)) | (ModelSpec::Dm(dm), ModelSpec::DgwTap(tap)) => {
            compat_tap_dm(&dm, &tap, block.tol)
        }
        (x, y) => {
            return Err(CliError::config(
                "model_b",
                format!("no compatibility predicate for the pair ({}, {})", x.family(), y.family()),
            ))
        }
    };
    r.map_err(invalid("compat"))
}

fn compat(a: &mut Artifacts) -> Result<(), CliError> {
    let report = compat_report(a.cfg)?;
    let mut t = Table::new(["name", "pass", "detail"]);
    for g in &report.gates {
        t.push(vec![g.name.clone(), g.pass.to_string(), g.detail.clone()]);
    }
    a.json("compat.json", &serde_json::to_value(&report).expect("report serializes"))?;
    a.csv("compat.csv", &t)?;
    a.extra.insert("compatible".into(), json!(report.compatible));
    Ok(())
}

fn design_table(d: &SpaceTimeDesign) -> Table {
    let mut t = Table::new(["i".to_string(), "input_row".to_string()].into_iter().chain(point_header(d.dim())));
    for i in 0..d.len() {
        let mut row = vec![i.to_string(), d.input_index(i).to_string()];
        row.extend(point_cells(d.coords(i), d.time(i)));
        t.push(row);
    }
    t
}

fn assemble_cmd(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let model = build_model(cfg.model.as_ref().unwrap(), cfg, "model")?;
    let d = design(cfg)?;
    check_dim(&model, &d, "design")?;
    let m = assemble(&d, &model, &assemble_opts(cfg, a.env)).map_err(invalid("assemble"))?;
    let mut t = Table::new(["i", "j", "value"]);
    for (i, j, v) in m.triplets() {
        t.push(vec![i.to_string(), j.to_string(), fmt_f64(v)]);
    }
    a.csv("assemble.csv", &t)?;
    a.csv("assemble_points.csv", &design_table(&d))?;
    let meta = m.metadata();
    a.json("assemble.json", &serde_json::to_value(&meta).expect("metadata serializes"))?;
    a.extra.insert("matrix".into(), serde_json::to_value(&meta).expect("metadata serializes"));
    Ok(())
}

fn simulate(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let model = build_model(cfg.model.as_ref().unwrap(), cfg, "model")?;
    let d = design(cfg)?;
    check_dim(&model, &d, "design")?;
    let reps = cfg.simulate.unwrap_or_default().replicates;
    if reps == 0 {
        return Err(CliError::config("simulate.replicates", "must be positive"));
    }
    let m = assemble(&d, &model, &assemble_opts(cfg, a.env)).map_err(invalid("assemble"))?;
    let f = cholesky(&m, &cfg.jitter.clone().unwrap_or_default())?;
    let draws = simulate_replicates(&f, a.seed, reps, a.env.policy);
    let mut t = Table::new(
        std::iter::once("replicate".to_string()).chain(point_header(d.dim())).chain(std::iter::once("value".into())),
    );
    for (r, z) in draws.iter().enumerate() {
        for (i, v) in z.iter().enumerate() {
            let mut row = vec![r.to_string()];
            row.extend(point_cells(d.coords(i), d.time(i)));
            row.push(fmt_f64(*v));
            t.push(row);
        }
    }
    a.csv("simulate.csv", &t)?;
    a.extra.insert("jitter".into(), json!(f.jitter()));
    Ok(())
}

fn fit(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let p = tap_params(cfg.model.as_ref().unwrap(), "model")?;
    let obs = observations(cfg)?;
    if p.dim as usize != obs.design.dim() {
        return Err(CliError::config("data", "model dimension differs from data dimension"));
    }
    let fitter = TapFitter::new(&obs.design, &p, &assemble_opts(cfg, a.env)).map_err(invalid("model"))?;
    let mut t = Table::new(["replicate", "n_obs", "sigma2_hat", "micro_hat", "regime", "loglik", "degenerate"]);
    for (r, z) in obs.replicates.iter().enumerate() {
        let f = fitter.fit(z)?;
        let regime = serde_json::to_value(f.micro_hat.regime).expect("regime serializes");
        t.push(vec![
            r.to_string(),
            f.n_obs.to_string(),
            fmt_f64(f.sigma2_hat),
            fmt_f64(f.micro_hat.value),
            regime.as_str().unwrap_or_default().to_string(),
            fmt_f64(f.loglik),
            f.degenerate.to_string(),
        ]);
    }
    a.csv("fit.csv", &t)
}

fn krige(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let model = build_model(cfg.model.as_ref().unwrap(), cfg, "model")?;
    let obs = observations(cfg)?;
    check_dim(&model, &obs.design, "data")?;
    let dim = obs.design.dim();
    let targets = io::split_points(dim, &cfg.krige.as_ref().unwrap().targets, "krige.targets")?;
    let k = Kriger::new(&obs.design, &model, &assemble_opts(cfg, a.env)).map_err(invalid("model"))?;
    let mut t = Table::new(
        std::iter::once("replicate".to_string())
            .chain(point_header(dim))
            .chain(["predictor", "krige_var", "clamped"].map(String::from)),
    );
    for (r, z) in obs.replicates.iter().enumerate() {
        for (s, tt) in &targets {
            let res = k.predict(z, s, *tt).map_err(invalid("krige.targets"))?;
            let mut row = vec![r.to_string()];
            row.extend(point_cells(s, *tt));
            row.extend([fmt_f64(res.predictor), fmt_f64(res.krige_var), res.clamped.to_string()]);
            t.push(row);
        }
    }
    a.csv("krige.csv", &t)
}

fn mc(a: &mut Artifacts) -> Result<(), CliError> {
    let mut exp = a.cfg.mc.clone().unwrap_or_else(MCExperiment::desk_default);
    exp.seed = a.seed;
    let table = mc_experiment(&exp, a.env.policy).map_err(invalid("mc"))?;
    let mut t = Table::new([
        "n_space", "m_time", "n_points", "replicates", "micro_true", "mean_micro", "bias", "std_err", "var_scaled",
        "target_var", "var_ratio",
    ]);
    for r in &table.rows {
        t.push(vec![
            r.n_space.to_string(),
            r.m_time.to_string(),
            r.n_points.to_string(),
            r.replicates.to_string(),
            fmt_f64(r.micro_true),
            fmt_f64(r.mean_micro),
            fmt_f64(r.bias),
            fmt_f64(r.std_err),
            fmt_f64(r.var_scaled),
            fmt_f64(r.target_var),
            fmt_f64(r.var_ratio),
        ]);
    }
    let mut e = Table::new(["step", "replicate", "micro_hat"]);
    for (s, est) in table.estimates.iter().enumerate() {
        for (r, v) in est.iter().enumerate() {
            e.push(vec![s.to_string(), r.to_string(), fmt_f64(*v)]);
        }
    }
    a.csv("mc.csv", &t)?;
    a.csv("mc_estimates.csv", &e)?;
    a.extra.insert("experiment".into(), serde_json::to_value(&exp).expect("experiment serializes"));
    Ok(())
}

fn misspec(a: &mut Artifacts) -> Result<(), CliError> {
    let cfg = a.cfg;
    let truth = build_model(cfg.model.as_ref().unwrap(), cfg, "model")?;
    let wrong = build_model(cfg.model_b.as_ref().unwrap(), cfg, "model_b")?;
    let b = cfg.misspec.as_ref().unwrap();
    let ladder = b
        .ladder
        .iter()
        .enumerate()
        .map(|(k, g)| {
            grid_design(g.n_space, g.m_time, b.dim, b.space, b.horizon).map_err(|e| {
                if e.is_validation() {
                    CliError::config(format!("misspec.ladder[{k}]"), e.to_string())
                } else {
                    CliError::Library(e)
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(d) = ladder.first() {
        check_dim(&truth, d, "misspec.dim")?;
        check_dim(&wrong, d, "misspec.dim")?;
    }
    let targets = io::split_points(b.dim, &b.targets, "misspec.targets")?;
    let rows = misspec_krige_study(&truth, &wrong, &ladder, &targets, a.env.policy).map_err(invalid("misspec"))?;
    let mut t = Table::new([
        "step", "n_points", "target", "true_var", "asserted_var", "realized_var", "asserted_over_true",
        "realized_over_true",
    ]);
    for r in &rows {
        t.push(vec![
            r.step.to_string(),
            r.n_points.to_string(),
            r.target.to_string(),
            fmt_f64(r.true_var),
            fmt_f64(r.asserted_var),
            fmt_f64(r.realized_var),
            fmt_f64(r.asserted_over_true),
            fmt_f64(r.realized_over_true),
        ]);
    }
    a.csv("misspec.csv", &t)
}
