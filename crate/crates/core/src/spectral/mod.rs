//! Noise with a continuous spectrum over `x` in `[0, pi]`.
//!
//! Each quadrature node is treated as an independent mode with weight `w_i`;
//! spectral averages are `sum(w f) / sum(w)`, the discrete form of
//! `(1/pi) int_0^pi f(x) dx`.

mod grid;
mod model;

pub use grid::spectral_grid;
pub use model::{
    ar_is_stationary, ar_p_mirror, ar_spectrum, gauss_markov_spectrum, gm_threshold_nbar, NoiseModel,
    PHI_MAX,
};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::multi_mode::{canonical_order, solve_mu, solve_weighted};
use crate::numeric::entropy::{entropy_nu, g_raw};
use crate::numeric::{QuadratureGrid, SolverTolerances};
use crate::one_mode::{nu_bar_threshold_canon, regime_for_mu, OneModeNoise, Regime};

/// Set membership of a spectral node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetLabel {
    N1,
    N2,
    N3,
}

impl From<Regime> for SetLabel {
    fn from(r: Regime) -> Self {
        match r {
            Regime::Vacuum => SetLabel::N1,
            Regime::SingleQuadrature => SetLabel::N2,
            Regime::WaterFilling => SetLabel::N3,
        }
    }
}

impl SetLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SetLabel::N1 => "N1",
            SetLabel::N2 => "N2",
            SetLabel::N3 => "N3",
        }
    }
}

/// Optimal spectra sampled on the quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSolution {
    pub nbar: f64,
    pub mu: f64,
    pub grid: QuadratureGrid,
    pub noise_q: Vec<f64>,
    pub noise_p: Vec<f64>,
    pub gin_q: Vec<f64>,
    pub gin_p: Vec<f64>,
    pub gmod_q: Vec<f64>,
    pub gmod_p: Vec<f64>,
    pub nu_bar: Vec<f64>,
    pub nu_out: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub labels: Vec<SetLabel>,
    /// Capacity in bits per channel use.
    pub capacity: f64,
    pub rate_is_global_wf: bool,
}

impl SpectralSolution {
    /// Weighted mean of nodal values.
    pub fn average(&self, values: &[f64]) -> f64 {
        self.grid.mean(values)
    }

    /// Fraction of total weight carried by nodes with the given label.
    pub fn set_fraction(&self, label: SetLabel) -> f64 {
        let w: f64 = self
            .labels
            .iter()
            .zip(&self.grid.weights)
            .filter(|(l, _)| **l == label)
            .map(|(_, w)| w)
            .sum();
        w / self.grid.total_weight()
    }
}

/// Per-node noise on the model's quadrature grid.
pub fn grid_noise(model: &NoiseModel, tol: &SolverTolerances) -> Result<(QuadratureGrid, Vec<OneModeNoise>)> {
    model.validate()?;
    tol.validate()?;
    if let Some(ensemble) = model.ensemble() {
        let ensemble = ensemble?;
        let n = ensemble.len();
        let w = PI / n as f64;
        let grid = QuadratureGrid {
            nodes: (0..n).map(|i| (i as f64 + 0.5) * w).collect(),
            weights: vec![w; n],
        };
        return Ok((grid, ensemble.modes().to_vec()));
    }
    let grid = spectral_grid(model, tol.grid_size);
    let noises = grid
        .nodes
        .iter()
        .map(|&x| model.noise_at(x))
        .collect::<Result<Vec<_>>>()?;
    Ok((grid, noises))
}

/// Set label of every grid node at multiplier `mu`.
pub fn classify_spectrum(model: &NoiseModel, mu: f64, grid: &QuadratureGrid) -> Result<Vec<SetLabel>> {
    if let Some(ensemble) = model.ensemble() {
        return Ok(ensemble?
            .modes()
            .iter()
            .map(|n| SetLabel::from(regime_for_mu(n, mu)))
            .collect());
    }
    grid.nodes
        .iter()
        .map(|&x| model.noise_at(x).map(|n| SetLabel::from(regime_for_mu(&n, mu))))
        .collect()
}

/// Optimal allocation for mean photon number `nbar` per mode.
pub fn solve_mu_spectral(model: &NoiseModel, nbar: f64, tol: &SolverTolerances) -> Result<SpectralSolution> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(CapacityError::Domain(format!("nbar must be >= 0, got {nbar}")));
    }
    let (grid, noises) = grid_noise(model, tol)?;
    let lambda = 2.0 * nbar + 1.0;
    let (mu, lambdas, solutions, capacity) = if let Some(ensemble) = model.ensemble() {
        let ensemble = ensemble?;
        let m = solve_mu(&ensemble, lambda * ensemble.len() as f64, tol)?;
        (m.mu, m.lambdas, m.per_mode, m.c1_per_mode)
    } else {
        let target = lambda * grid.total_weight();
        let alloc = solve_weighted(&noises, &grid.weights, target, tol)?;
        let capacity = alloc.weighted_sum(&grid.weights, |i| alloc.solutions[i].chi) / grid.total_weight();
        (alloc.mu, alloc.lambdas, alloc.solutions, capacity)
    };
    let labels: Vec<SetLabel> = solutions.iter().map(|s| SetLabel::from(s.regime)).collect();
    let rate_is_global_wf = labels.iter().all(|l| *l == SetLabel::N3);
    Ok(SpectralSolution {
        nbar,
        mu,
        noise_q: noises.iter().map(|n| n.gq()).collect(),
        noise_p: noises.iter().map(|n| n.gp()).collect(),
        gin_q: solutions.iter().map(|s| s.gin_q).collect(),
        gin_p: solutions.iter().map(|s| s.gin_p).collect(),
        gmod_q: solutions.iter().map(|s| s.gmod_q).collect(),
        gmod_p: solutions.iter().map(|s| s.gmod_p).collect(),
        nu_bar: solutions.iter().map(|s| s.nu_bar).collect(),
        nu_out: solutions.iter().map(|s| s.nu_out).collect(),
        lambdas,
        labels,
        capacity: capacity.max(0.0),
        rate_is_global_wf,
        grid,
    })
}

/// Closed-form capacity when every node is water-filled, or `None` below the
/// global water-filling threshold.
pub fn global_wf_capacity(model: &NoiseModel, nbar: f64, tol: &SolverTolerances) -> Result<Option<f64>> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(CapacityError::Domain(format!("nbar must be >= 0, got {nbar}")));
    }
    let (grid, noises) = grid_noise(model, tol)?;
    if let NoiseModel::GaussMarkov { n, phi } = model {
        if nbar < gm_threshold_nbar(*n, *phi) {
            return Ok(None);
        }
        let order = canonical_order(&noises, &grid.weights);
        let out: f64 = order
            .iter()
            .map(|&i| grid.weights[i] * g_raw((noises[i].gq() * noises[i].gp()).sqrt()))
            .sum::<f64>()
            / grid.total_weight();
        return Ok(Some((g_raw(nbar + n) - out).max(0.0)));
    }
    let order = canonical_order(&noises, &grid.weights);
    let mean_noise = order
        .iter()
        .map(|&i| grid.weights[i] * 0.5 * (noises[i].gq() + noises[i].gp()))
        .sum::<f64>()
        / grid.total_weight();
    let nu_bar = nbar + 0.5 + mean_noise;
    let needed = noises
        .par_iter()
        .map(|n| {
            let (cq, cp) = n.canonical();
            nu_bar_threshold_canon(cq, cp)
        })
        .reduce(|| 0.0, f64::max);
    if nu_bar < needed {
        return Ok(None);
    }
    let out: f64 = order
        .iter()
        .map(|&i| grid.weights[i] * entropy_nu(0.5 + (noises[i].gq() * noises[i].gp()).sqrt()))
        .sum::<f64>()
        / grid.total_weight();
    Ok(Some((entropy_nu(nu_bar) - out).max(0.0)))
}

/// Capacity in bits per use, using the closed form above the global
/// water-filling threshold and the full solver below it.
pub fn capacity_spectral(model: &NoiseModel, nbar: f64, tol: &SolverTolerances) -> Result<f64> {
    if model.ensemble().is_none() {
        if let Some(c) = global_wf_capacity(model, nbar, tol)? {
            return Ok(c);
        }
    }
    Ok(solve_mu_spectral(model, nbar, tol)?.capacity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::g;

    #[test]
    fn memoryless_closed_form() {
        let tol = SolverTolerances::default();
        let m = NoiseModel::gauss_markov(1.3, 0.0).unwrap();
        let c = capacity_spectral(&m, 0.7, &tol).unwrap();
        assert!((c - (g(2.0).unwrap() - g(1.3).unwrap())).abs() < 1e-12);
        let s = solve_mu_spectral(&m, 0.7, &tol).unwrap();
        assert!((s.capacity - c).abs() < 1e-10);
        assert!(s.rate_is_global_wf);
    }

    #[test]
    fn gauss_markov_mass() {
        let tol = SolverTolerances::default();
        for phi in [0.3, 0.85, 0.99] {
            let m = NoiseModel::gauss_markov(1.0, phi).unwrap();
            let (grid, noises) = grid_noise(&m, &tol).unwrap();
            let q: Vec<f64> = noises.iter().map(|n| n.gq()).collect();
            assert!((grid.mean(&q) - 1.0).abs() < 1e-9, "phi = {phi}: {}", grid.mean(&q));
        }
    }

    #[test]
    fn closed_form_matches_solver_at_threshold() {
        let tol = SolverTolerances::default();
        let m = NoiseModel::gauss_markov(1.0, 0.85).unwrap();
        let closed = global_wf_capacity(&m, 17.0, &tol).unwrap().unwrap();
        let full = solve_mu_spectral(&m, 17.0, &tol).unwrap();
        assert!((closed - full.capacity).abs() < 1e-6);
        assert!(global_wf_capacity(&m, 16.0, &tol).unwrap().is_none());
    }

    #[test]
    fn modes_variant_matches_multi_mode() {
        let tol = SolverTolerances::default();
        let modes = vec![OneModeNoise::new(0.8, 0.8).unwrap(); 3];
        let m = NoiseModel::Modes { modes };
        let s = solve_mu_spectral(&m, 1.5, &tol).unwrap();
        let expected = g(2.3).unwrap() - g(0.8).unwrap();
        assert!((s.capacity - expected).abs() < 1e-10);
    }
}
