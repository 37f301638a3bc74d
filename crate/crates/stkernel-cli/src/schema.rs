//! Self-describing configuration schema with defaults and runnable examples.

use serde_json::{json, Value};
use stkernel::covmat::{AssembleOptions, JitterPolicy};
use stkernel::inference::MCExperiment;
use stkernel::spectral::{ProbeConfig, SeriesOptions, SERIES_MAX_ZBETA};
use stkernel::specfun::SeriesControl;

use crate::config::{Command, CompatBlock, SimulateBlock, DEFAULT_SEED};

fn dgw_fields() -> Value {
    json!({
        "sigma2": "number > 0",
        "beta": "number > 0",
        "mu": "number",
        "kappa": "number >= 0",
        "xi": "number > 0",
        "delta": "number in (0, 2]",
        "gamma_exp": "number > 0",
        "dim": "integer in 1..=3",
        "varsigma_star": "number, optional, default 0"
    })
}

fn desk_tap() -> Value {
    json!({ "sigma2": 1.0, "beta": 1.0, "mu": 4.0, "kappa": 0.0, "xi": 1.0, "delta": 1.0, "gamma_exp": 4.0, "dim": 1 })
}

fn desk_tap_scaled(sigma2: f64) -> Value {
    let mut v = desk_tap();
    v["sigma2"] = json!(sigma2);
    v
}

fn inline_data() -> Value {
    json!({ "inline": { "dim": 1, "rows": [
        [0.0, 0.0, 0.31], [0.5, 0.0, -0.12], [1.0, 0.0, 0.05],
        [0.0, 0.5, 0.44], [0.5, 0.5, 0.02], [1.0, 0.5, -0.27]
    ] } })
}

/// Runnable example config for a command.
pub fn example(c: Command) -> Value {
    let tap = json!({ "dgw_tap": desk_tap() });
    match c {
        Command::Eval => json!({
            "command": "eval",
            "model": tap,
            "eval": { "r": { "linspace": { "start": 0.0, "stop": 2.0, "num": 9 } },
                      "t": { "linspace": { "start": 0.0, "stop": 1.5, "num": 7 } } }
        }),
        Command::Spectrum => json!({
            "command": "spectrum",
            "model": tap,
            "spectrum": { "z": { "values": [0.5, 1.0, 2.0, 50.0] }, "tau": { "values": [0.5, 1.0, 2.0] } }
        }),
        Command::Compat => json!({ "command": "compat", "model": tap, "model_b": tap }),
        Command::Assemble => json!({
            "command": "assemble",
            "model": tap,
            "design": { "grid": { "n_space": 5, "m_time": 4, "dim": 1, "space": [0.0, 1.0], "horizon": [0.0, 1.0] } }
        }),
        Command::Simulate => json!({
            "command": "simulate",
            "model": tap,
            "design": { "grid": { "n_space": 5, "m_time": 4, "dim": 1, "space": [0.0, 1.0], "horizon": [0.0, 1.0] } },
            "simulate": { "replicates": 2 },
            "seed": 7
        }),
        Command::Fit => json!({ "command": "fit", "model": tap, "data": inline_data() }),
        Command::Krige => json!({
            "command": "krige",
            "model": tap,
            "data": inline_data(),
            "krige": { "targets": [[0.25, 0.25], [0.5, 0.0], [9.0, 9.0]] }
        }),
        Command::Mc => {
            let mut mc = serde_json::to_value(MCExperiment::desk_default()).expect("experiment serializes");
            mc["replicates"] = json!(20);
            mc["ladder"] = json!([{ "n_space": 5, "m_time": 4 }]);
            json!({ "command": "mc", "mc": mc })
        }
        Command::Misspec => json!({
            "command": "misspec",
            "model": tap,
            "model_b": { "dgw_tap": desk_tap_scaled(2.0) },
            "misspec": { "ladder": [{ "n_space": 4, "m_time": 3 }, { "n_space": 8, "m_time": 5 }],
                         "targets": [[0.5, 0.5]] }
        }),
    }
}

fn outputs(c: Command) -> Value {
    let files: &[&str] = match c {
        Command::Eval => &["eval.csv"],
        Command::Spectrum => &["spectrum.csv"],
        Command::Compat => &["compat.json", "compat.csv"],
        Command::Assemble => &["assemble.csv", "assemble_points.csv", "assemble.json"],
        Command::Simulate => &["simulate.csv"],
        Command::Fit => &["fit.csv"],
        Command::Krige => &["krige.csv"],
        Command::Mc => &["mc.csv", "mc_estimates.csv"],
        Command::Misspec => &["misspec.csv"],
    };
    let mut v: Vec<String> = files.iter().map(|s| s.to_string()).collect();
    v.push(format!("{}.meta.json", c.name()));
    json!(v)
}

pub fn schema() -> Value {
    let mut commands = serde_json::Map::new();
    for c in Command::ALL {
        let (req, opt) = c.blocks();
        commands.insert(
            c.name().into(),
            json!({ "required": req, "optional": opt, "outputs": outputs(c), "example": example(c) }),
        );
    }
    json!({
        "format": "stkernel run config (JSON, unknown keys rejected)",
        "version": env!("CARGO_PKG_VERSION"),
        "command": Command::ALL.iter().map(|c| c.name()).collect::<Vec<_>>(),
        "commands": commands,
        "common": {
            "seed": "u64, optional; --seed overrides",
            "output": "directory, optional; --out overrides; relative paths resolve against the config file"
        },
        "blocks": {
            "model": { "one_of": { "dgw": dgw_fields(), "dgw_tap": dgw_fields(), "dm": {
                "nu": "number > 0", "zeta": "number > 0", "upsilon": "number > 0", "eps": "number >= 0",
                "sigma2": "number > 0", "dim": "integer in 1..=3" } } },
            "model_b": "same as model",
            "design": { "one_of": {
                "csv": "path to CSV with header x[,y][,z],t",
                "grid": { "n_space": "integer", "m_time": "integer", "dim": "integer", "space": "[a, b]", "horizon": "[t0, t1]" },
                "points": { "dim": "integer", "rows": "[[x.., t], ...]" } } },
            "data": { "one_of": {
                "csv": "path to CSV with header [replicate,]x[,y][,z],t,value",
                "inline": { "dim": "integer", "rows": "[[x.., t, value], ...]" } } },
            "axis": { "one_of": { "values": "[number, ...]", "linspace": { "start": "number", "stop": "number", "num": "integer" } } },
            "eval": { "r": "axis", "t": "axis" },
            "spectrum": { "z": "axis", "tau": "axis", "method": "auto | series | exact", "options": {
                "reading": "derived | as_printed", "temporal": "quadrature | levin" } },
            "compat": { "tol": "number", "mode": "stated | extended" },
            "assemble": { "layout": "auto | dense | csr", "max_entries": "integer", "lag_cache": "bool", "policy": "sequential | parallel (overridden by --threads)" },
            "simulate": { "replicates": "integer >= 1" },
            "jitter": { "ladder": "[relative shift, ...]" },
            "krige": { "targets": "[[x.., t], ...]" },
            "mc": { "replicates": "integer", "ladder": "[{n_space, m_time}, ...]", "space": "[a, b]", "horizon": "[t0, t1]",
                    "true_model": "dgw_tap parameters", "fitted": "dgw_tap parameters (sigma2 ignored)", "seed": "u64" },
            "misspec": { "ladder": "[{n_space, m_time}, ...]", "dim": "integer", "space": "[a, b]", "horizon": "[t0, t1]", "targets": "[[x.., t], ...]" },
            "series": { "rel_tol": "number", "abs_tol": "number", "max_terms": "integer", "consecutive_small": "integer" }
        },
        "defaults": {
            "series": SeriesControl::default(),
            "spectrum": { "method": "auto", "options": SeriesOptions::default(), "series_max_zbeta": SERIES_MAX_ZBETA },
            "compat": CompatBlock::default(),
            "assemble": AssembleOptions::default(),
            "jitter": JitterPolicy::default(),
            "jitter_reference": "mean diagonal",
            "simulate": SimulateBlock::default(),
            "mc": MCExperiment::desk_default(),
            "misspec": { "dim": 1, "space": [0.0, 1.0], "horizon": [0.0, 1.0] },
            "probe": ProbeConfig::default(),
            "varsigma_star": 0.0,
            "seed": DEFAULT_SEED,
            "rng": "ChaCha20 seeded from u64, stream = replicate index (mc: step << 32 | replicate)",
            "point_ordering": "time_major",
            "sparse_format": "csr, sorted columns, both triangles",
            "csv_float_format": "shortest round-trip decimal",
            "threads": "rayon default; STKERNEL_THREADS when --threads is absent; 1 runs sequentially"
        },
        "flags": ["--config <path>", "--out <dir>", "--seed <u64>", "--no-timestamp", "--threads <n>", "--schema"],
        "env": { "STKERNEL_THREADS": "worker threads when --threads is absent" },
        "exit_codes": { "0": "success", "2": "validation failure", "3": "numerical failure" }
    })
}
