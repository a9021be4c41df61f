use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::multi_mode::ModeEnsemble;
use crate::one_mode::OneModeNoise;

/// Largest correlation accepted for Gauss-Markov noise.
pub const PHI_MAX: f64 = 0.999;

/// Stationary noise description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Covariance `N phi^|i-j|` in q and `N (-phi)^|i-j|` in p.
    GaussMarkov {
        #[serde(rename = "N")]
        n: f64,
        phi: f64,
    },
    /// Autoregressive noise with separate coefficients per quadrature.
    Ar {
        q_coeffs: Vec<f64>,
        p_coeffs: Vec<f64>,
        q_variance: f64,
        p_variance: f64,
    },
    /// Spectra sampled at increasing points of `[0, pi]`, interpolated linearly
    /// and held constant outside the sampled range.
    Tabulated { x: Vec<f64>, gq: Vec<f64>, gp: Vec<f64> },
    /// A finite set of already diagonalized modes.
    Modes { modes: Vec<OneModeNoise> },
}

impl NoiseModel {
    pub fn gauss_markov(n: f64, phi: f64) -> Result<Self> {
        let m = NoiseModel::GaussMarkov { n, phi };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::GaussMarkov { n, phi } => {
                if !(*n >= 0.0) || !n.is_finite() {
                    return Err(CapacityError::Domain(format!("N must be >= 0, got {n}")));
                }
                if !(*phi >= 0.0 && *phi <= PHI_MAX) {
                    return Err(CapacityError::Domain(format!(
                        "phi must lie in [0, {PHI_MAX}], got {phi}"
                    )));
                }
            }
            NoiseModel::Ar { q_coeffs, p_coeffs, q_variance, p_variance } => {
                for (name, v) in [("q_variance", q_variance), ("p_variance", p_variance)] {
                    if !(*v >= 0.0) || !v.is_finite() {
                        return Err(CapacityError::Model(format!("{name} must be >= 0, got {v}")));
                    }
                }
                for (name, c) in [("q_coeffs", q_coeffs), ("p_coeffs", p_coeffs)] {
                    if c.iter().any(|v| !v.is_finite()) {
                        return Err(CapacityError::Model(format!("{name} contains non-finite values")));
                    }
                    if !ar_is_stationary(c) {
                        return Err(CapacityError::Model(format!("{name} {c:?} are not stationary")));
                    }
                }
            }
            NoiseModel::Tabulated { x, gq, gp } => {
                if x.is_empty() || x.len() != gq.len() || x.len() != gp.len() {
                    return Err(CapacityError::Model(format!(
                        "tabulated spectrum needs equal nonempty columns, got {}, {}, {}",
                        x.len(),
                        gq.len(),
                        gp.len()
                    )));
                }
                if x.iter().any(|v| !(*v >= 0.0 && *v <= PI)) {
                    return Err(CapacityError::Model("tabulated x must lie in [0, pi]".into()));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(CapacityError::Model("tabulated x must be strictly increasing".into()));
                }
                if gq.iter().chain(gp.iter()).any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(CapacityError::Model(
                        "tabulated spectra must be finite and nonnegative".into(),
                    ));
                }
            }
            NoiseModel::Modes { modes } => {
                if modes.is_empty() {
                    return Err(CapacityError::Model("mode list must be nonempty".into()));
                }
            }
        }
        Ok(())
    }

    /// Noise variances at spectral position `x`. Not defined for `Modes`.
    pub fn noise_at(&self, x: f64) -> Result<OneModeNoise> {
        let (q, p) = match self {
            NoiseModel::GaussMarkov { n, phi } => gm_pair(*n, *phi, x),
            NoiseModel::Ar { q_coeffs, p_coeffs, q_variance, p_variance } => (
                ar_spectrum_unchecked(q_coeffs, *q_variance, x),
                ar_spectrum_unchecked(p_coeffs, *p_variance, x),
            ),
            NoiseModel::Tabulated { x: xs, gq, gp } => (interp(xs, gq, x), interp(xs, gp, x)),
            NoiseModel::Modes { .. } => {
                return Err(CapacityError::Domain(
                    "a mode list has no continuous spectrum".into(),
                ))
            }
        };
        OneModeNoise::new(q, p)
    }

    pub fn ensemble(&self) -> Option<Result<ModeEnsemble>> {
        match self {
            NoiseModel::Modes { modes } => Some(ModeEnsemble::new(modes.clone())),
            _ => None,
        }
    }
}

#[inline]
fn gm_pair(n: f64, phi: f64, x: f64) -> (f64, f64) {
    let num = n * (1.0 - phi * phi);
    let a = 1.0 + phi * phi;
    let b = 2.0 * phi * x.cos();
    (num / (a - b), num / (a + b))
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (x - x0) / (x1 - x0);
    ys[j - 1] + t * (ys[j] - ys[j - 1])
}

/// Gauss-Markov quadrature spectra at `x`.
pub fn gauss_markov_spectrum(n: f64, phi: f64, x: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&phi) {
        return Err(CapacityError::Domain(format!("phi must lie in [0, 1), got {phi}")));
    }
    if !(n >= 0.0) {
        return Err(CapacityError::Domain(format!("N must be >= 0, got {n}")));
    }
    Ok(gm_pair(n, phi, x))
}

fn ar_spectrum_unchecked(coeffs: &[f64], variance: f64, x: f64) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for (k, phi) in coeffs.iter().enumerate() {
        let kx = (k + 1) as f64 * x;
        re -= phi * kx.cos();
        im -= phi * kx.sin();
    }
    variance / (re * re + im * im)
}

/// Spectrum `variance / |1 - sum_k phi_k e^{ikx}|^2` of an autoregressive process.
pub fn ar_spectrum(coeffs: &[f64], variance: f64, x: f64) -> Result<f64> {
    if !ar_is_stationary(coeffs) {
        return Err(CapacityError::Model(format!("coefficients {coeffs:?} are not stationary")));
    }
    Ok(ar_spectrum_unchecked(coeffs, variance, x))
}

/// True iff all roots of `1 - sum_k phi_k y^k` lie strictly outside the unit
/// circle. Uses the step-down recursion on reflection coefficients.
pub fn ar_is_stationary(coeffs: &[f64]) -> bool {
    let mut a: Vec<f64> = coeffs.to_vec();
    while let Some(&last) = a.last() {
        if last == 0.0 {
            a.pop();
        } else {
            break;
        }
    }
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let m = a.len();
        let denom = 1.0 - k * k;
        let next: Vec<f64> = (0..m - 1)
            .map(|j| (a[j] + k * a[m - 2 - j]) / denom)
            .collect();
        a = next;
    }
    true
}

/// Coefficients `(-1)^k phi_k`, the p-quadrature partner of a q process under
/// the Gauss-Markov sign alternation.
pub fn ar_p_mirror(q_coeffs: &[f64]) -> Vec<f64> {
    q_coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { -c } else { *c })
        .collect()
}

/// Mean photon number above which Gauss-Markov noise admits global water-filling.
pub fn gm_threshold_nbar(n: f64, phi: f64) -> f64 {
    2.0 * phi * (n + 0.5) / (1.0 - phi)
}
