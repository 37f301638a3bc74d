//! Run configuration: one JSON document per invocation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stkernel::compat::{CompatMode, DEFAULT_TOL};
use stkernel::covmat::{AssembleOptions, JitterPolicy};
use stkernel::inference::{GridSpec, MCExperiment};
use stkernel::kernels::{DGWParams, DMParams};
use stkernel::spectral::SeriesOptions;
use stkernel::specfun::SeriesControl;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eval,
    Spectrum,
    Compat,
    Assemble,
    Simulate,
    Fit,
    Krige,
    Mc,
    Misspec,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Eval,
        Command::Spectrum,
        Command::Compat,
        Command::Assemble,
        Command::Simulate,
        Command::Fit,
        Command::Krige,
        Command::Mc,
        Command::Misspec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Spectrum => "spectrum",
            Command::Compat => "compat",
            Command::Assemble => "assemble",
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Krige => "krige",
            Command::Mc => "mc",
            Command::Misspec => "misspec",
        }
    }

    /// (required, optional) blocks besides `command`, `seed` and `output`.
    pub fn blocks(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Command::Eval => (&["model", "eval"], &["series"]),
            Command::Spectrum => (&["model", "spectrum"], &["series"]),
            Command::Compat => (&["model", "model_b"], &["compat"]),
            Command::Assemble => (&["model", "design"], &["assemble", "series"]),
            Command::Simulate => (&["model", "design"], &["simulate", "assemble", "jitter", "series"]),
            Command::Fit => (&["model", "data"], &["assemble"]),
            Command::Krige => (&["model", "data", "krige"], &["assemble", "series"]),
            Command::Mc => (&[], &["mc"]),
            Command::Misspec => (&["model", "model_b", "misspec"], &["series"]),
        }
    }
}

/// A parameter record tagged with its model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Dgw(DGWParams),
    DgwTap(DGWParams),
    Dm(DMParams),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Dgw(_) => "dgw",
            ModelSpec::DgwTap(_) => "dgw_tap",
            ModelSpec::Dm(_) => "dm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub num: usize,
}

/// Grid axis given explicitly or as evenly spaced values with endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Values(Vec<f64>),
    Linspace(Linspace),
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Values(v) => v.clone(),
            Axis::Linspace(l) if l.num == 1 => vec![l.start],
            Axis::Linspace(l) => {
                let h = (l.stop - l.start) / (l.num - 1) as f64;
                (0..l.num).map(|k| if k + 1 == l.num { l.stop } else { l.start + h * k as f64 }).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n_space: usize,
    pub m_time: usize,
    pub dim: usize,
    pub space: (f64, f64),
    pub horizon: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineRows {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Space-time design: CSV with header `x[,y][,z],t`, a lattice, or inline rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignSpec {
    Csv(PathBuf),
    Grid(GridBlock),
    Points(InlineRows),
}

/// Observations: CSV with header `[replicate,]x[,y][,z],t,value`, or inline
/// rows `[x.., t, value]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSpec {
    Csv(PathBuf),
    Inline(InlineRows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalBlock {
    pub r: Axis,
    pub t: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    /// Double series where zβ is in range, resummed spectral integral elsewhere.
    #[default]
    Auto,
    Series,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub z: Axis,
    pub tau: Axis,
    #[serde(default)]
    pub method: SpectrumMethod,
    #[serde(default)]
    pub options: SeriesOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompatBlock {
    pub tol: f64,
    pub mode: CompatMode,
}

impl Default for CompatBlock {
    fn default() -> Self {
        CompatBlock { tol: DEFAULT_TOL, mode: CompatMode::Stated }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateBlock {
    pub replicates: usize,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        SimulateBlock { replicates: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigeBlock {
    /// Target points `[x.., t]`.
    pub targets: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MisspecBlock {
    pub ladder: Vec<GridSpec>,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default = "unit")]
    pub space: (f64, f64),
    #[serde(default = "unit")]
    pub horizon: (f64, f64),
    pub targets: Vec<Vec<f64>>,
}

fn one() -> usize {
    1
}

fn unit() -> (f64, f64) {
    (0.0, 1.0)
}

pub const DEFAULT_SEED: u64 = 20240501;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_b: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesControl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compat: Option<CompatBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assemble: Option<AssembleOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krige: Option<KrigeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<MCExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub misspec: Option<MisspecBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |name, on: bool| {
            if on {
                v.push(name)
            }
        };
        mark("model", self.model.is_some());
        mark("model_b", self.model_b.is_some());
        mark("design", self.design.is_some());
        mark("data", self.data.is_some());
        mark("series", self.series.is_some());
        mark("eval", self.eval.is_some());
        mark("spectrum", self.spectrum.is_some());
        mark("compat", self.compat.is_some());
        mark("assemble", self.assemble.is_some());
        mark("simulate", self.simulate.is_some());
        mark("jitter", self.jitter.is_some());
        mark("krige", self.krige.is_some());
        mark("mc", self.mc.is_some());
        mark("misspec", self.misspec.is_some());
        v
    }

    /// Rejects missing required blocks and blocks the command does not use.
    pub fn check_blocks(&self) -> Result<(), CliError> {
        let (required, optional) = self.command.blocks();
        let present = self.present();
        for r in required {
            if !present.contains(r) {
                return Err(CliError::config(*r, format!("block required by command {}", self.command.name())));
            }
        }
        for p in present {
            if !required.contains(&p) && !optional.contains(&p) {
                return Err(CliError::config(p, format!("block not used by command {}", self.command.name())));
            }
        }
        Ok(())
    }

    /// Resolves relative input paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(DesignSpec::Csv(p)) = &mut self.design {
            fix(p);
        }
        if let Some(DataSpec::Csv(p)) = &mut self.data {
            fix(p);
        }
        if let Some(p) = &mut self.output {
            fix(p);
        }
    }

    pub fn series_control(&self) -> SeriesControl {
        self.series.unwrap_or_default()
    }
}

/// Parses a config, reporting the JSON path of the first offending field.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        let inner = e.inner().to_string();
        if let Some(rest) = inner.strip_prefix("missing field `") {
            if let Some(field) = rest.split('`').next() {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
        }
        CliError::config(path, inner)
    })?;
    cfg.check_blocks()?;
    Ok(cfg)
}
