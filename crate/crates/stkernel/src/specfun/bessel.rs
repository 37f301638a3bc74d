use std::f64::consts::PI;

use crate::error::{Error, Result};

// Taylor coefficients of 1/Γ(z) = Σ_{k≥1} RG[k-1] z^k
const RG: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_86,
    -0.655_878_071_520_253_88,
    -0.042_002_635_034_095_236,
    0.166_538_611_382_291_49,
    -0.042_197_734_555_544_337,
    -0.009_621_971_527_876_973_6,
    0.007_218_943_246_663_099_5,
    -0.001_165_167_591_859_065_1,
    -0.000_215_241_674_114_950_97,
    0.000_128_050_282_388_116_19,
    -0.000_020_134_854_780_788_239,
    -1.250_493_482_142_670_7e-6,
    1.133_027_231_981_695_9e-6,
    -2.056_338_416_977_607_1e-7,
    6.116_095_104_481_415_8e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_020_1e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_205_7e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_8e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
];

const EPS: f64 = 1e-16;
const LN_RESCALE: f64 = 280.0 * std::f64::consts::LN_10;

/// Returns (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut even = 0.0; // Σ_{k even} RG_k μ^{k-2}
    let mut odd = 0.0; // Σ_{k odd} RG_k μ^{k-1}
    let mu2 = mu * mu;
    let mut p = 1.0;
    for j in 0..13 {
        odd += RG[2 * j] * p;
        even += RG[2 * j + 1] * p;
        p *= mu2;
    }
    let gampl = odd + mu * even;
    let gammi = odd - mu * even;
    (-even, odd, gampl, gammi)
}

/// K_μ(x), K_{μ+1}(x) for |μ| ≤ 1/2 and small x by Temme's series.
fn temme_series(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..10_000 {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// e^x K_μ(x), e^x K_{μ+1}(x) for |μ| ≤ 1/2 and x ≥ 2 by Steed's continued fraction.
fn steed_cf2_scaled(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 1..100_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("bessel_k", format!("continued fraction failed at x={x}")));
    }
    h *= a1;
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let k1 = kmu * (mu + x + 0.5 - h) / x;
    Ok((kmu, k1))
}

/// ln K_ν(x); stays finite where K_ν itself over- or underflows.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_k", format!("argument must be positive and finite, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("bessel_k", format!("order must be finite, got {nu}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut kmu, mut k1, mut ln_scale) = if x < 2.0 {
        let (a, b) = temme_series(mu, x);
        (a, b, 0.0)
    } else {
        let (a, b) = steed_cf2_scaled(mu, x)?;
        (a, b, -x)
    };
    let xi2 = 2.0 / x;
    for i in 1..=(nl as u64) {
        let next = (mu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
        if k1 > 1e280 {
            kmu *= 1e-280;
            k1 *= 1e-280;
            ln_scale += LN_RESCALE;
        }
    }
    if !(kmu > 0.0) || !kmu.is_finite() {
        return Err(Error::numerical("bessel_k", format!("non-positive intermediate at nu={nu}, x={x}")));
    }
    Ok(kmu.ln() + ln_scale)
}

/// Modified Bessel function of the second kind K_ν(x), x > 0.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let lk = ln_bessel_k(nu, x)?;
    if lk > 709.78 {
        return Err(Error::Overflow { op: "bessel_k", detail: format!("K_{nu}({x}) exceeds f64 range") });
    }
    if lk < -745.0 {
        return Err(Error::Overflow { op: "bessel_k", detail: format!("K_{nu}({x}) underflows f64") });
    }
    Ok(lk.exp())
}

/// Exponentially scaled e^x K_ν(x).
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let lk = ln_bessel_k(nu, x)? + x;
    if lk > 709.78 {
        return Err(Error::Overflow { op: "bessel_k_scaled", detail: format!("e^x K_{nu}({x}) exceeds f64 range") });
    }
    Ok(lk.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_integer_closed_form() {
        let want = (PI / 2.0).sqrt() * (-1f64).exp();
        assert_relative_eq!(bessel_k(0.5, 1.0).unwrap(), want, max_relative = 1e-14);
        assert_eq!(bessel_k(-0.5, 1.0).unwrap(), bessel_k(0.5, 1.0).unwrap());
        for &x in &[0.01, 0.7, 1.9, 2.1, 15.0, 300.0] {
            let k15 = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
            assert_relative_eq!(bessel_k(1.5, x).unwrap(), k15, max_relative = 1e-13);
        }
    }

    #[test]
    fn known_values() {
        assert_relative_eq!(bessel_k(1.0, 2.0).unwrap(), 0.139_865_881_816_522_43, max_relative = 1e-14);
        assert_relative_eq!(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_33, max_relative = 1e-14);
    }

    #[test]
    fn domain_and_overflow() {
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -1.0).is_err());
        assert!(matches!(bessel_k(50.0, 1e-8), Err(Error::Overflow { .. })));
        assert!(ln_bessel_k(50.0, 1e-8).unwrap().is_finite());
        assert!(matches!(bessel_k(0.0, 800.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn recurrence_in_order() {
        for &nu in &[0.3, 1.0, 2.7, 10.2] {
            for &x in &[0.05, 1.0, 1.99, 2.01, 7.0, 40.0] {
                let lhs = bessel_k(nu + 1.0, x).unwrap();
                let rhs = bessel_k(nu - 1.0, x).unwrap() + 2.0 * nu / x * bessel_k(nu, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }
}
