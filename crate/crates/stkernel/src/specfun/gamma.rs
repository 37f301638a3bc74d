use std::f64::consts::PI;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// zeta(2), zeta(3), ..., zeta(25)
const ZETA: [f64; 24] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_370_0,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926_0,
    1.000_000_059_608_189_1,
    1.000_000_029_803_503_5,
];

// B_{2k} / (2k (2k-1)), k = 1..11
const STIRLING: [f64; 11] = [
    0.083_333_333_333_333_33,
    -0.002_777_777_777_777_778,
    0.000_793_650_793_650_793_7,
    -0.000_595_238_095_238_095_2,
    0.000_841_750_841_750_841_8,
    -0.001_917_526_917_526_917_5,
    0.006_410_256_410_256_410,
    -0.029_550_653_594_771_24,
    0.179_644_372_368_830_57,
    -1.392_432_216_905_901_1,
    13.402_864_044_168_392,
];

fn zeta_int(k: usize) -> f64 {
    if k - 2 < ZETA.len() {
        ZETA[k - 2]
    } else {
        (1..=6).map(|n| (n as f64).powi(-(k as i32))).sum()
    }
}

/// ln Γ(1+e) for |e| ≤ 0.5, accurate in relative terms near e = 0.
fn ln_gamma_1p(e: f64) -> f64 {
    let mut sum = -EULER_GAMMA * e;
    let mut pow = -e;
    for k in 2..80 {
        pow *= -e;
        let term = zeta_int(k) * pow / k as f64;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING {
        let term = c * p;
        corr += term;
        if term.abs() < 1e-17 * corr.abs() {
            break;
        }
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_1p(x) - x.ln()
    } else if x <= 1.5 {
        ln_gamma_1p(x - 1.0)
    } else if x <= 2.5 {
        let e = x - 2.0;
        e.ln_1p() + ln_gamma_1p(e)
    } else if x <= 3.5 {
        let e = x - 3.0;
        ((x - 1.0) * (x - 2.0)).ln() + ln_gamma_1p(e)
    } else if x < 12.0 {
        let m = (x - 3.5).ceil() as usize;
        let mut prod = 1.0;
        for i in 1..=m {
            prod *= x - i as f64;
        }
        prod.ln() + ln_gamma_pos(x - m as f64)
    } else {
        ln_gamma_stirling(x)
    }
}

/// Natural log of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma", format!("argument must be positive and finite, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

/// sin(πx) with exact zeros at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r <= 0.25 {
        (PI * r).sin()
    } else if r <= 0.75 {
        (PI * (0.5 - r)).cos()
    } else if r <= 1.25 {
        (PI * (1.0 - r)).sin()
    } else if r <= 1.75 {
        -(PI * (1.5 - r)).cos()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// (ln |Γ(x)|, sign Γ(x)) for any x that is not a pole.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::domain("ln_gamma_signed", format!("non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole { op: "gamma", x });
    }
    if x > 0.0 {
        return Ok((ln_gamma_pos(x), 1.0));
    }
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Ok((lg, s.signum()))
}

/// Γ(x) for real x off the poles, negative arguments through reflection.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole { op: "gamma_fn", x });
    }
    if !x.is_finite() {
        return Err(Error::domain("gamma_fn", format!("non-finite argument {x}")));
    }
    if x > 171.624 {
        return Err(Error::Overflow { op: "gamma_fn", detail: format!("Γ({x}) exceeds f64 range") });
    }
    if x > 0.0 && x == x.floor() {
        let mut f = 1.0;
        for i in 2..(x as u64) {
            f *= i as f64;
        }
        return Ok(f);
    }
    if x > 0.0 {
        return Ok(ln_gamma_pos(x).exp());
    }
    let s = sin_pi(x);
    let g1 = 1.0 - x;
    if g1 < 171.0 {
        Ok(PI / (s * gamma_fn(g1)?))
    } else {
        Ok(s.signum() * (PI.ln() - s.abs().ln() - ln_gamma_pos(g1)).exp())
    }
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > 0.0 && x < 170.0 {
        return 1.0 / gamma_fn(x).unwrap_or(f64::INFINITY);
    }
    match ln_gamma_signed(x) {
        Ok((lg, s)) => s * (-lg).exp(),
        Err(_) => 0.0,
    }
}

pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain("beta_fn", format!("arguments must be positive, got ({a}, {b})")));
    }
    Ok(ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b))
}

/// B(a,b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if a > 0.0 && b > 0.0 && a + b < 170.0 {
        return Ok(gamma_fn(a)? * (gamma_fn(b)? / gamma_fn(a + b)?));
    }
    Ok(ln_beta(a, b)?.exp())
}

/// Rising factorial (a)_k as an explicit product.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    let mut p = 1.0;
    for j in 0..k {
        p *= a + j as f64;
    }
    p
}

/// Right-hand side of the factorization of (2n+d+γ)_k into n-Pochhammers.
pub fn pochhammer_split(n: u32, d: u32, gamma: f64, k: u32) -> f64 {
    let dg = d as f64 + gamma;
    let kf = k as f64;
    let num = pochhammer((dg + kf) / 2.0, n) * pochhammer((dg + kf + 1.0) / 2.0, n) * pochhammer(dg, k);
    let den = pochhammer(dg / 2.0, n) * pochhammer((dg + 1.0) / 2.0, n);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_simple_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.572_364_942_924_700_1, max_relative = 1e-15);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-15);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_near_zeros_is_relatively_accurate() {
        // ln Γ(1+e) ≈ -γe for tiny e
        let e = 1e-9;
        assert_relative_eq!(log_gamma(1.0 + e).unwrap(), -EULER_GAMMA * e, max_relative = 1e-8);
        assert_relative_eq!(log_gamma(2.0 + e).unwrap(), (1.0 - EULER_GAMMA) * e, max_relative = 1e-8);
    }

    #[test]
    fn gamma_reflection_and_poles() {
        assert_relative_eq!(gamma_fn(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-15);
        assert_eq!(gamma_fn(4.0).unwrap(), 6.0);
        assert!(matches!(gamma_fn(0.0), Err(Error::Pole { .. })));
        assert!(matches!(gamma_fn(-3.0), Err(Error::Pole { .. })));
        assert_eq!(rgamma(-2.0), 0.0);
        assert_relative_eq!(gamma_fn(-1.5).unwrap(), 4.0 * PI.sqrt() / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_fn(1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(beta_fn(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(beta_fn(0.5, 0.5).unwrap(), PI, max_relative = 1e-15);
        assert!(beta_fn(0.0, 1.0).is_err());
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(7.3, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert_eq!(pochhammer(2.5, 3), 39.375);
        assert_eq!(pochhammer(-2.0, 4), 0.0);
        assert_eq!(pochhammer_split(1, 2, 1.0, 2), 30.0);
        assert_eq!(pochhammer_split(0, 3, 2.5, 4), pochhammer(5.5, 4));
        assert_eq!(pochhammer_split(5, 1, 0.7, 0), 1.0);
    }

    #[test]
    fn sin_pi_exact_zeros() {
        for k in -5..5 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert_eq!(sin_pi(0.5), 1.0);
        assert_eq!(sin_pi(-0.5), -1.0);
    }
}
