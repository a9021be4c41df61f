//! Optimal input covariance in the original, correlated mode basis.
//!
//! Spectra on `[0, pi]` are mirrored evenly onto `[0, 2pi]`, so the Toeplitz
//! diagonals are the cosine coefficients `(1/pi) int_0^pi cos(kx) f(x) dx`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::numeric::{QuadratureGrid, SolverTolerances};
use crate::spectral::{gm_threshold_nbar, solve_mu_spectral, spectral_grid, NoiseModel, SpectralSolution, PHI_MAX};

pub const DEFAULT_K_MAX: usize = 64;

/// Diagonals `k = 0..=k_max` of the Toeplitz input covariance blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCovariance {
    pub q_diagonals: Vec<f64>,
    pub p_diagonals: Vec<f64>,
    /// Largest relative deviation of the truncated series from the sampled
    /// spectra over all grid nodes.
    pub truncation_error: f64,
}

impl ToeplitzCovariance {
    pub fn k_max(&self) -> usize {
        self.q_diagonals.len().saturating_sub(1)
    }

    /// Truncated cosine series `c_0 + 2 sum_k c_k cos(kx)` for both quadratures.
    pub fn reconstruct(&self, x: f64) -> (f64, f64) {
        (series(&self.q_diagonals, x), series(&self.p_diagonals, x))
    }

    /// `n x n` Toeplitz block built from the q diagonals (requires `n <= k_max + 1`).
    pub fn q_block(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        toeplitz(&self.q_diagonals, n)
    }

    pub fn p_block(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        toeplitz(&self.p_diagonals, n)
    }
}

fn toeplitz(d: &[f64], n: usize) -> Option<Vec<Vec<f64>>> {
    if n > d.len() {
        return None;
    }
    Some((0..n).map(|i| (0..n).map(|j| d[i.abs_diff(j)]).collect()).collect())
}

fn series(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, v)| if k == 0 { *v } else { 2.0 * v * (k as f64 * x).cos() })
        .sum()
}

fn cosine_coefficients(grid: &QuadratureGrid, values: &[f64], k_max: usize) -> Vec<f64> {
    let total = grid.total_weight();
    (0..=k_max)
        .into_par_iter()
        .map(|k| {
            grid.nodes
                .iter()
                .zip(&grid.weights)
                .zip(values)
                .map(|((x, w), v)| w * (k as f64 * x).cos() * v)
                .sum::<f64>()
                / total
        })
        .collect()
}

fn build(grid: &QuadratureGrid, q: &[f64], p: &[f64], k_max: usize) -> ToeplitzCovariance {
    let q_diagonals = cosine_coefficients(grid, q, k_max);
    let p_diagonals = cosine_coefficients(grid, p, k_max);
    let mut cov = ToeplitzCovariance { q_diagonals, p_diagonals, truncation_error: 0.0 };
    cov.truncation_error = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let (rq, rp) = cov.reconstruct(x);
            ((rq - q[i]).abs() / q[i]).max((rp - p[i]).abs() / p[i])
        })
        .reduce(|| 0.0, f64::max);
    cov
}

/// Toeplitz diagonals of the optimal input covariance.
pub fn input_fourier_coefficients(solution: &SpectralSolution, k_max: usize) -> ToeplitzCovariance {
    build(&solution.grid, &solution.gin_q, &solution.gin_p, k_max)
}

/// Diagonal `k` of the input covariance of Gauss-Markov noise in the global
/// water-filling regime, where `gin_q(x) = sqrt(gq(x)/gp(x)) / 2`. The result
/// does not depend on `N`.
pub fn gm_global_wf_input(phi: f64, k: usize) -> Result<(f64, f64)> {
    if !(0.0..=PHI_MAX).contains(&phi) {
        return Err(CapacityError::Domain(format!("phi must lie in [0, {PHI_MAX}], got {phi}")));
    }
    let model = NoiseModel::GaussMarkov { n: 1.0, phi };
    let grid = spectral_grid(&model, 2 * SolverTolerances::default().grid_size);
    let a = 1.0 + phi * phi;
    let values: Vec<f64> = grid
        .nodes
        .iter()
        .map(|x| {
            let b = 2.0 * phi * x.cos();
            0.5 * ((a + b) / (a - b)).sqrt()
        })
        .collect();
    let total = grid.total_weight();
    let q: f64 = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .zip(&values)
        .map(|((x, w), v)| w * (k as f64 * x).cos() * v)
        .sum::<f64>()
        / total;
    let p = if k % 2 == 0 { q } else { -q };
    Ok((q, p))
}

/// Determinant of the reduced single-mode input covariance and whether it
/// certifies entanglement (`det0 > 1/4`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementWitness {
    pub det0: f64,
    pub entangled: bool,
}

impl EntanglementWitness {
    fn from_det(det0: f64) -> Self {
        EntanglementWitness { det0, entangled: det0 > 0.25 + 1e-10 }
    }
}

pub fn entanglement_witness(cov: &ToeplitzCovariance) -> EntanglementWitness {
    EntanglementWitness::from_det(cov.q_diagonals[0] * cov.p_diagonals[0])
}

/// Witness for Gauss-Markov noise in the global water-filling regime.
pub fn entanglement_witness_gm(phi: f64) -> Result<EntanglementWitness> {
    let (q0, p0) = gm_global_wf_input(phi, 0)?;
    Ok(EntanglementWitness::from_det(q0 * p0))
}

/// Modulated output covariance `value * Identity` in global water-filling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCovariance {
    /// Common diagonal value, `nbar + N + 1/2`.
    pub value: f64,
    /// Mean of the solved spectra, which matches `value` up to the solver's
    /// energy slack and quadrature error.
    pub sampled_mean: f64,
    /// Bound on `|c_k|` for every `k >= 1`, for both quadratures.
    pub certificate_bound: f64,
    pub q_coefficients: Vec<f64>,
    pub p_coefficients: Vec<f64>,
}

/// Overall modulated output of Gauss-Markov noise above the global
/// water-filling threshold.
pub fn modulated_output_covariance(
    n: f64,
    phi: f64,
    nbar: f64,
    k_max: usize,
    tol: &SolverTolerances,
) -> Result<ScalarCovariance> {
    let model = NoiseModel::gauss_markov(n, phi)?;
    let thr = gm_threshold_nbar(n, phi);
    if !(nbar >= thr) {
        return Err(CapacityError::Regime(format!(
            "modulated output is proportional to the identity only for nbar >= {thr}, got {nbar}"
        )));
    }
    let s = solve_mu_spectral(&model, nbar, tol)?;
    let gbar_q: Vec<f64> = (0..s.grid.len()).map(|i| s.gin_q[i] + s.gmod_q[i] + s.noise_q[i]).collect();
    let gbar_p: Vec<f64> = (0..s.grid.len()).map(|i| s.gin_p[i] + s.gmod_p[i] + s.noise_p[i]).collect();
    let sampled_mean = 0.5 * (s.grid.mean(&gbar_q) + s.grid.mean(&gbar_p));
    let dq: Vec<f64> = gbar_q.iter().map(|v| v - sampled_mean).collect();
    let dp: Vec<f64> = gbar_p.iter().map(|v| v - sampled_mean).collect();
    let abs_q: Vec<f64> = dq.iter().map(|v| v.abs()).collect();
    let abs_p: Vec<f64> = dp.iter().map(|v| v.abs()).collect();
    let certificate_bound = s.grid.mean(&abs_q).max(s.grid.mean(&abs_p));
    let q_coefficients = cosine_coefficients(&s.grid, &dq, k_max).split_off(1);
    let p_coefficients = cosine_coefficients(&s.grid, &dp, k_max).split_off(1);
    Ok(ScalarCovariance { value: nbar + n + 0.5, sampled_mean, certificate_bound, q_coefficients, p_coefficients })
}
