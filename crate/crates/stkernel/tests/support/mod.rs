//! Shared oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use stkernel::kernels::{dgw_support_radius, dgw_tap, DGWParams};
use stkernel::quad::{cos_finite, QuadTol};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../stkernel/tests/data").join(name)
}

/// Data rows of a fixture CSV, header skipped.
pub fn fixture(name: &str) -> Vec<Vec<String>> {
    let path = data_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

/// d = 1 spectral density of dgw_tap by brute force: a cosine transform in
/// space nested inside a cosine transform in time.
pub fn tap_spectrum_brute_force(z: f64, tau: f64, p: &DGWParams) -> f64 {
    assert_eq!(p.dim, 1);
    let tol = QuadTol { abs: 1e-14, rel: 1e-10, max_intervals: 2000 };
    let inner = |u: f64| {
        let rad = dgw_support_radius(u, p);
        cos_finite(|r| dgw_tap(r, u, p).unwrap(), z, 0.0, rad, tol).value
    };
    let outer = cos_finite(inner, tau, 0.0, p.xi, tol).value;
    outer / (PI * PI)
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}
