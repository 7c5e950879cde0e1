//! Frequency, runs and chi-square tests for output strings.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const MIN_BITS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
    /// False when the test's precondition on the data failed; it then fails.
    pub applicable: bool,
}

impl RandReport {
    fn new(test: &str, statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        RandReport { test: test.into(), statistic, p_value, alpha, pass: p_value >= alpha, applicable: true }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(arg(alloc::format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(())
}

fn check_bits(bits: &[u32]) -> Result<usize> {
    if bits.len() < MIN_BITS {
        return Err(arg(alloc::format!("need at least {MIN_BITS} bits, got {}", bits.len())));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::OutOfRange { value: b, bound: 2 });
    }
    Ok(bits.iter().filter(|&&b| b == 1).count())
}

/// Frequency (monobit) test.
pub fn monobit(bits: &[u32], alpha: f64) -> Result<RandReport> {
    check_alpha(alpha)?;
    let ones = check_bits(bits)?;
    let n = bits.len() as f64;
    let s = 2.0 * ones as f64 - n;
    let s_obs = libm::fabs(s) / libm::sqrt(n);
    Ok(RandReport::new("monobit", s_obs, libm::erfc(s_obs / core::f64::consts::SQRT_2), alpha))
}

/// Runs test; not applicable when the ones proportion is off by 2/√n or more.
pub fn runs_test(bits: &[u32], alpha: f64) -> Result<RandReport> {
    check_alpha(alpha)?;
    let ones = check_bits(bits)?;
    let n = bits.len() as f64;
    let pi = ones as f64 / n;
    if libm::fabs(pi - 0.5) >= 2.0 / libm::sqrt(n) {
        return Ok(RandReport {
            test: "runs".into(),
            statistic: 0.0,
            p_value: 0.0,
            alpha,
            pass: false,
            applicable: false,
        });
    }
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = runs as f64;
    let q = pi * (1.0 - pi);
    let p = libm::erfc(libm::fabs(v - 2.0 * n * q) / (2.0 * libm::sqrt(2.0 * n) * q));
    Ok(RandReport::new("runs", v, p, alpha))
}

/// Pearson chi-square against the uniform law on `0..modulus`.
pub fn chisq_uniform(symbols: &[u32], modulus: u32, alpha: f64) -> Result<RandReport> {
    check_alpha(alpha)?;
    if modulus < 2 {
        return Err(arg(alloc::format!("modulus {modulus} below 2")));
    }
    if symbols.len() < 5 * modulus as usize {
        return Err(arg(alloc::format!("need at least {} symbols, got {}", 5 * modulus, symbols.len())));
    }
    let mut counts = alloc::vec![0usize; modulus as usize];
    for &s in symbols {
        if s >= modulus {
            return Err(Error::OutOfRange { value: s, bound: modulus });
        }
        counts[s as usize] += 1;
    }
    let expected = symbols.len() as f64 / f64::from(modulus);
    let x2: f64 = counts.iter().map(|&c| (c as f64 - expected) * (c as f64 - expected) / expected).sum();
    let p = gamma_q(f64::from(modulus - 1) / 2.0, x2 / 2.0);
    Ok(RandReport::new("chisq", x2, p, alpha))
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..1000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if libm::fabs(term) < libm::fabs(sum) * 1e-16 {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    // modified Lentz
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn gamma_q_closed_forms() {
        // Q(1, x) = e^-x, Q(1/2, x) = erfc(√x)
        for x in [0.1, 0.5, 1.0, 2.5, 7.0, 30.0] {
            assert!((gamma_q(1.0, x) - libm::exp(-x)).abs() < 1e-13);
            assert!((gamma_q(0.5, x) - libm::erfc(libm::sqrt(x))).abs() < 1e-13);
        }
        // Q(2, x) = (1 + x) e^-x
        for x in [0.3, 3.0, 10.0] {
            assert!((gamma_q(2.0, x) - (1.0 + x) * libm::exp(-x)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_and_alternating_strings() {
        let zeros = alloc::vec![0u32; 1000];
        let r = monobit(&zeros, 0.01).unwrap();
        assert!(r.p_value < 1e-10 && !r.pass);
        let runs = runs_test(&zeros, 0.01).unwrap();
        assert!(!runs.applicable && !runs.pass);

        let alt: Vec<u32> = (0..1000).map(|i| i % 2).collect();
        assert!(monobit(&alt, 0.01).unwrap().pass);
        let r = runs_test(&alt, 0.01).unwrap();
        assert!(r.applicable && !r.pass);
    }

    #[test]
    fn argument_errors() {
        assert!(monobit(&[0; 99], 0.01).is_err());
        assert!(runs_test(&[2; 200], 0.01).is_err());
        assert!(monobit(&[0; 200], 0.0).is_err());
        assert!(chisq_uniform(&[0; 29], 6, 0.01).is_err());
        assert!(chisq_uniform(&[6; 30], 6, 0.01).is_err());
    }

    #[test]
    fn same_symbol_fails_chisq() {
        let r = chisq_uniform(&[3; 1000], 6, 0.01).unwrap();
        assert!(r.p_value < 1e-10 && !r.pass);
    }
}
