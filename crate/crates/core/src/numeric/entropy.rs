use std::f64::consts::LN_2;

use crate::error::{CapacityError, Result};

/// Entropy of a thermal state with mean photon number `x`, in bits.
///
/// `g(x) = (x+1) log2(x+1) - x log2(x)`, with `g(0) = 0`.
pub fn g(x: f64) -> Result<f64> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(CapacityError::Domain(format!("g requires x >= 0, got {x}")));
    }
    Ok(g_raw(x))
}

/// Derivative `log2((x+1)/x)`.
pub fn g_prime(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(CapacityError::Domain(format!("g' requires x > 0, got {x}")));
    }
    Ok(g_prime_raw(x))
}

/// Second derivative `-1/(ln2 x (x+1))`.
pub fn g_second(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(CapacityError::Domain(format!("g'' requires x > 0, got {x}")));
    }
    Ok(g_second_raw(x))
}

/// `kappa(x) = g'(x - 1/2) / (2x)`, defined for `x > 1/2`.
pub fn kappa(x: f64) -> Result<f64> {
    if !(x > 0.5) {
        return Err(CapacityError::Domain(format!("kappa requires x > 1/2, got {x}")));
    }
    Ok(kappa_raw(x))
}

/// Derivative of [`kappa`].
pub fn kappa_prime(x: f64) -> Result<f64> {
    if !(x > 0.5) {
        return Err(CapacityError::Domain(format!("kappa' requires x > 1/2, got {x}")));
    }
    Ok(kappa_prime_raw(x))
}

/// Symplectic eigenvalue whose water-filling multiplier is `mu`: `coth(mu ln2)/2`.
pub fn nu_from_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(CapacityError::Domain(format!("nu_from_mu requires mu > 0, got {mu}")));
    }
    Ok(nu_from_mu_raw(mu))
}

/// Inverse of [`nu_from_mu`]: `g'(nu - 1/2) / 2`.
pub fn mu_from_nu(nu: f64) -> Result<f64> {
    if !(nu > 0.5) {
        return Err(CapacityError::Domain(format!("mu_from_nu requires nu > 1/2, got {nu}")));
    }
    Ok(0.5 * g_prime_raw(nu - 0.5))
}

#[inline]
pub(crate) fn g_raw(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x <= 1.0 {
        ((x + 1.0) * x.ln_1p() - x * x.ln()) / LN_2
    } else {
        (x.ln_1p() + x * (1.0 / x).ln_1p()) / LN_2
    }
}

#[inline]
pub(crate) fn g_prime_raw(x: f64) -> f64 {
    (1.0 / x).ln_1p() / LN_2
}

#[inline]
pub(crate) fn g_second_raw(x: f64) -> f64 {
    -1.0 / (LN_2 * x * (x + 1.0))
}

#[inline]
pub(crate) fn kappa_raw(x: f64) -> f64 {
    g_prime_raw(x - 0.5) / (2.0 * x)
}

#[inline]
pub(crate) fn kappa_prime_raw(x: f64) -> f64 {
    let y = x - 0.5;
    g_second_raw(y) / (2.0 * x) - g_prime_raw(y) / (2.0 * x * x)
}

#[inline]
pub(crate) fn nu_from_mu_raw(mu: f64) -> f64 {
    0.5 + 1.0 / (2.0 * mu * LN_2).exp_m1()
}

/// Entropy of a single-mode Gaussian state with symplectic eigenvalue `nu`.
#[inline]
pub(crate) fn entropy_nu(nu: f64) -> f64 {
    g_raw((nu - 0.5).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_reference_values() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert!((g(1.0).unwrap() - 2.0).abs() < 1e-15);
        let expected = 1.5 * 3f64.log2() - 1.0;
        assert!((g(0.5).unwrap() - expected).abs() < 1e-15);
        assert!((g(0.5).unwrap() - 1.377444).abs() < 1e-6);
        assert!(g(-1e-3).is_err());
        assert!(g(f64::NAN).is_err());
    }

    #[test]
    fn g_branches_agree_at_one() {
        let x = 1.0;
        let a = ((x + 1.0) * f64::ln_1p(x) - x * x.ln()) / LN_2;
        let b = (f64::ln_1p(x) + x * (1.0 / x).ln_1p()) / LN_2;
        assert!((a - b).abs() < 1e-15);
        let below = g_raw(1.0 - 1e-12);
        let above = g_raw(1.0 + 1e-12);
        assert!((above - below).abs() < 1e-11);
    }

    #[test]
    fn g_large_argument_is_accurate() {
        // log2(e) + log2(x) + 1/(2 ln2 x) asymptotics
        let x: f64 = 1e8;
        let approx = (1.0 / LN_2) + x.log2() + 1.0 / (2.0 * LN_2 * x);
        assert!((g_raw(x) - approx).abs() < 1e-12);
    }

    #[test]
    fn derivative_reference_values() {
        assert!((g_prime(0.5).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!((g_prime(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(g_prime(1e6).unwrap() < 1e-5);
        assert!(g_prime(0.0).is_err());
        assert!((g_second(1.0).unwrap() + 0.5 / LN_2).abs() < 1e-15);
        assert!(g_second(0.0).is_err());
    }

    #[test]
    fn kappa_reference_values() {
        assert!((kappa(1.0).unwrap() - 0.5 * 3f64.log2()).abs() < 1e-15);
        assert!(kappa(1.0).unwrap() > kappa(2.0).unwrap());
        assert!(kappa(1e9).unwrap() < 1e-17);
        assert!(kappa(0.5).is_err());
    }

    #[test]
    fn nu_mu_reference_values() {
        assert!((nu_from_mu(1.0).unwrap() - 5.0 / 6.0).abs() < 1e-14);
        assert!((nu_from_mu(0.5).unwrap() - 1.5).abs() < 1e-14);
        assert!(nu_from_mu(1e-9).unwrap() > 1e8);
        assert!(nu_from_mu(0.0).is_err());
        assert!((mu_from_nu(1.5).unwrap() - 0.5).abs() < 1e-15);
    }
}
