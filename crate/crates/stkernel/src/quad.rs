//! Quadrature: Gauss–Legendre rules, adaptive Gauss–Kronrod, and Fourier-type
//! integrals over half-lines.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// The shared 64-point rule.
    pub fn order64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

/// Result of a numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Quad {
    pub fn require(self, op: &'static str) -> Result<f64> {
        if self.converged && self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(Error::numerical(op, format!("quadrature did not converge (value {}, error {})", self.value, self.error)))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol { abs: 1e-300, rel: 1e-12, max_intervals: 2000 }
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[10];
    let mut rg = 0.0;
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    let val = rk * h;
    let err = ((rk - rg) * h).abs();
    (val, err)
}

/// Adaptive 21-point Gauss–Kronrod integration of f over [a, b].
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: QuadTol) -> Quad {
    if a == b {
        return Quad { value: 0.0, error: 0.0, evals: 0, converged: true };
    }
    let mut ints: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk21(&mut f, a, b);
    ints.push((a, b, v, e));
    let mut evals = 21;
    loop {
        let total: f64 = ints.iter().map(|i| i.2).sum();
        let err: f64 = ints.iter().map(|i| i.3).sum();
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Quad { value: total, error: err, evals, converged: true };
        }
        if ints.len() >= tol.max_intervals {
            return Quad { value: total, error: err, evals, converged: false };
        }
        let (idx, _) = ints
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("interval list is never empty");
        let (lo, hi, _, _) = ints.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let total: f64 = ints.iter().map(|i| i.2).sum::<f64>();
            return Quad { value: total, error: err, evals, converged: false };
        }
        let (v1, e1) = gk21(&mut f, lo, mid);
        let (v2, e2) = gk21(&mut f, mid, hi);
        evals += 42;
        ints.push((lo, mid, v1, e1));
        ints.push((mid, hi, v2, e2));
    }
}

/// ∫_a^b f(x) cos(ωx) dx with panels no wider than a quarter period.
pub fn cos_finite<F: FnMut(f64) -> f64>(mut f: F, omega: f64, a: f64, b: f64, tol: QuadTol) -> Quad {
    let span = b - a;
    let panels = if omega > 0.0 { ((span * omega / (PI / 2.0)).ceil() as usize).max(1) } else { 1 };
    let h = span / panels as f64;
    let mut out = Quad { value: 0.0, error: 0.0, evals: 0, converged: true };
    let panel_tol = QuadTol { max_intervals: tol.max_intervals.max(50) / 4 + 10, ..tol };
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == panels { b } else { lo + h };
        let q = adaptive(|x| f(x) * (omega * x).cos(), lo, hi, panel_tol);
        out.value += q.value;
        out.error += q.error;
        out.evals += q.evals;
        out.converged &= q.converged;
    }
    out
}

/// Wynn's epsilon algorithm on a sequence of partial sums.
pub fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let v = if d == 0.0 { f64::INFINITY } else { prev[i + 1] + 1.0 / d };
            next.push(v);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            if let Some(last) = cur.last() {
                if last.is_finite() {
                    best = *last;
                } else {
                    break;
                }
            }
        }
    }
    best
}

/// ∫_a^∞ f(x) cos(ωx) dx for f decaying to zero; panels between zeros of the
/// cosine, accelerated by the epsilon algorithm. For ω = 0 a compactifying map
/// is used instead.
pub fn cos_half_line<F: FnMut(f64) -> f64>(mut f: F, omega: f64, a: f64, tol: QuadTol) -> Quad {
    if omega == 0.0 {
        return adaptive(
            |s| {
                if s >= 1.0 {
                    return 0.0;
                }
                let u = 1.0 - s;
                f(a + s / u) / (u * u)
            },
            0.0,
            1.0,
            tol,
        );
    }
    let half = PI / omega;
    // first zero of cos(ωx) beyond a
    let k0 = ((omega * a / PI) - 0.5).ceil().max(0.0);
    let mut z = (k0 + 0.5) * half;
    if z <= a {
        z += half;
    }
    let head = adaptive(|x| f(x) * (omega * x).cos(), a, z, tol);
    let mut evals = head.evals;
    let mut partial = Vec::with_capacity(64);
    let mut sum = head.value;
    let mut err = head.error;
    let mut converged = head.converged;
    let mut est_prev = f64::NAN;
    for i in 0..400 {
        let lo = z + i as f64 * half;
        let q = adaptive(|x| f(x) * (omega * x).cos(), lo, lo + half, tol);
        evals += q.evals;
        err += q.error;
        converged &= q.converged;
        sum += q.value;
        partial.push(sum);
        if partial.len() >= 6 {
            let start = partial.len().saturating_sub(40);
            let est = wynn_epsilon(&partial[start..]);
            if (est - est_prev).abs() <= tol.rel.max(1e-14) * est.abs() + tol.abs {
                return Quad { value: est, error: err + (est - est_prev).abs(), evals, converged };
            }
            est_prev = est;
        }
    }
    Quad { value: est_prev, error: f64::INFINITY, evals, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_exact_for_polynomials() {
        let g = GaussLegendre::new(7);
        let v = g.integrate(|x| x.powi(12) + 3.0 * x.powi(5), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 13.0, max_relative = 1e-14);
        let g64 = GaussLegendre::order64();
        assert_relative_eq!(g64.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(g64.integrate(|x| x.exp(), 0.0, 1.0), std::f64::consts::E - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let q = adaptive(|x| x.powf(-0.5), 0.0, 1.0, QuadTol { rel: 1e-10, ..Default::default() });
        assert!(q.converged);
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn fourier_half_line() {
        // ∫_0^∞ cos(ωx)/(1+x²) dx = (π/2)e^{−ω}
        for &w in &[0.5, 1.0, 3.0] {
            let q = cos_half_line(|x| 1.0 / (1.0 + x * x), w, 0.0, QuadTol::default());
            assert_relative_eq!(q.value, PI / 2.0 * (-w).exp(), max_relative = 1e-9);
        }
        let q = cos_half_line(|x| 1.0 / (1.0 + x * x), 0.0, 0.0, QuadTol::default());
        assert_relative_eq!(q.value, PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn finite_cosine_panels() {
        let q = cos_finite(|_| 1.0, 40.0, 0.0, 2.0, QuadTol::default());
        assert_relative_eq!(q.value, (80.0f64).sin() / 40.0, max_relative = 1e-11);
    }
}
