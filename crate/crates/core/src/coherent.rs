//! Coherent-state rate, entanglement gain and gain sweeps.
//!
//! With coherent inputs every quadrature sees noise `g + 1/2` and the
//! modulation follows classical water-filling over all quadrature channels.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::multi_mode::canonical_order;
use crate::numeric::entropy::entropy_nu;
use crate::numeric::{bisect, Bracket, SolverTolerances};
use crate::one_mode::{solve_one_mode, InputEnergy, OneModeNoise};
use crate::spectral::{capacity_spectral, grid_noise, spectral_grid, NoiseModel};

/// Capacity, coherent rate and their ratio at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub nbar: f64,
    /// `nbar / N`.
    pub snr: f64,
    /// Noise correlation; NaN for models without a single correlation parameter.
    pub phi: f64,
    pub capacity: f64,
    pub rate: f64,
    pub gain: f64,
}

/// Which channel a gain sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainChannel {
    /// Two Gauss-Markov modes, diagonalized into `(N(1+phi), N(1-phi))`.
    TwoMode,
    /// Gauss-Markov noise over infinitely many modes.
    InfiniteMode,
}

/// Water level `L` with `sum_k w_k max(0, L - n_k) = budget`.
fn water_level(channels: &mut [(f64, f64)], budget: f64) -> f64 {
    channels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (mut w_sum, mut wn_sum) = (0.0, 0.0);
    for k in 0..channels.len() {
        w_sum += channels[k].1;
        wn_sum += channels[k].1 * channels[k].0;
        let level = (budget + wn_sum) / w_sum;
        if k + 1 == channels.len() || level <= channels[k + 1].0 {
            return level.max(channels[k].0);
        }
    }
    unreachable!("channel list is nonempty")
}

/// Coherent rate over weighted nodes with per-mode modulation budget `2 nbar`.
/// Returns the rate and the water level.
pub(crate) fn coherent_rate_nodes(noises: &[OneModeNoise], weights: &[f64], nbar: f64) -> (f64, f64) {
    let total_w: f64 = weights.iter().sum();
    let mut channels: Vec<(f64, f64)> = noises
        .iter()
        .zip(weights)
        .flat_map(|(n, &w)| [(n.gq() + 0.5, w), (n.gp() + 0.5, w)])
        .collect();
    let level = water_level(&mut channels, 2.0 * nbar * total_w);
    let order = canonical_order(noises, weights);
    let rate: f64 = order
        .iter()
        .map(|&i| {
            let (nq, np) = (noises[i].gq() + 0.5, noises[i].gp() + 0.5);
            let (bq, bp) = (nq.max(level), np.max(level));
            weights[i] * (entropy_nu((bq * bp).sqrt()) - entropy_nu((nq * np).sqrt()))
        })
        .sum::<f64>()
        / total_w;
    (rate.max(0.0), level)
}

/// Mean photon number above which every quadrature of Gauss-Markov noise is
/// modulated by the coherent strategy.
pub fn gm_coherent_threshold_nbar(n: f64, phi: f64) -> f64 {
    2.0 * phi * n / (1.0 - phi)
}

fn gm_q(n: f64, phi: f64, x: f64) -> f64 {
    n * (1.0 - phi * phi) / (1.0 + phi * phi - 2.0 * phi * x.cos())
}

/// `int_alpha^pi gq(x) dx` for Gauss-Markov noise, in closed form.
fn gm_q_tail(n: f64, phi: f64, alpha: f64) -> f64 {
    let c = (1.0 + phi) / (1.0 - phi);
    n * (PI - 2.0 * (c * (0.5 * alpha).tan()).atan())
}

/// Boundary `alpha` of the modulated q band `[alpha, pi]` for coherent inputs
/// below the coherent threshold.
pub fn gm_alpha(n: f64, phi: f64, nbar: f64, tol: &SolverTolerances) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) || !(n > 0.0) {
        return Err(CapacityError::Domain(format!(
            "alpha equation needs 0 < phi < 1 and N > 0, got phi = {phi}, N = {n}"
        )));
    }
    let thr = gm_coherent_threshold_nbar(n, phi);
    if !(nbar > 0.0 && nbar < thr) {
        return Err(CapacityError::Regime(format!(
            "alpha equation applies for 0 < nbar < {thr}, got {nbar}"
        )));
    }
    let eq = |alpha: f64| ((PI - alpha) * gm_q(n, phi, alpha) - gm_q_tail(n, phi, alpha)) / PI - nbar;
    let tight = SolverTolerances { root_tol: 1e-14, max_iter: tol.max_iter.max(100), ..*tol };
    bisect(eq, Bracket::new(0.0, PI)?, &tight)
}

/// Coherent rate of Gauss-Markov noise from the step-function modulation
/// defined by [`gm_alpha`].
pub fn coherent_rate_gm_alpha(n: f64, phi: f64, nbar: f64, tol: &SolverTolerances) -> Result<f64> {
    let alpha = gm_alpha(n, phi, nbar, tol)?;
    let level_noise = gm_q(n, phi, alpha);
    let model = NoiseModel::gauss_markov(n, phi)?;
    let grid = spectral_grid(&model, tol.grid_size);
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|&x| {
            let (gq, gp) = (gm_q(n, phi, x), gm_q(n, phi, PI - x));
            let mq = if x > alpha { level_noise - gq } else { 0.0 };
            let mp = if x < PI - alpha { level_noise - gp } else { 0.0 };
            let (nq, np) = (gq + 0.5, gp + 0.5);
            entropy_nu(((nq + mq) * (np + mp)).sqrt()) - entropy_nu((nq * np).sqrt())
        })
        .collect();
    Ok(grid.mean(&terms).max(0.0))
}

/// Coherent-state rate in bits per use.
pub fn coherent_rate_spectral(model: &NoiseModel, nbar: f64, tol: &SolverTolerances) -> Result<f64> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(CapacityError::Domain(format!("nbar must be >= 0, got {nbar}")));
    }
    let (grid, noises) = grid_noise(model, tol)?;
    if let NoiseModel::GaussMarkov { n, phi } = model {
        if nbar >= gm_coherent_threshold_nbar(*n, *phi) {
            let order = canonical_order(&noises, &grid.weights);
            let out: f64 = order
                .iter()
                .map(|&i| {
                    let (nq, np) = (noises[i].gq() + 0.5, noises[i].gp() + 0.5);
                    grid.weights[i] * entropy_nu((nq * np).sqrt())
                })
                .sum::<f64>()
                / grid.total_weight();
            return Ok((entropy_nu(nbar + n + 0.5) - out).max(0.0));
        }
    }
    Ok(coherent_rate_nodes(&noises, &grid.weights, nbar).0)
}

fn model_snr_phi(model: &NoiseModel, nbar: f64, tol: &SolverTolerances) -> Result<(f64, f64)> {
    if let NoiseModel::GaussMarkov { n, phi } = model {
        return Ok((nbar / n, *phi));
    }
    let (grid, noises) = grid_noise(model, tol)?;
    let mean: Vec<f64> = noises.iter().map(|m| 0.5 * (m.gq() + m.gp())).collect();
    Ok((nbar / grid.mean(&mean), f64::NAN))
}

fn gain_point(nbar: f64, snr: f64, phi: f64, capacity: f64, rate: f64) -> Result<GainPoint> {
    if !(rate > 0.0) {
        return Err(CapacityError::DegenerateInput(format!(
            "coherent rate vanishes at nbar = {nbar}; the gain is undefined"
        )));
    }
    Ok(GainPoint { nbar, snr, phi, capacity, rate, gain: capacity / rate })
}

/// Ratio of the capacity to the coherent-state rate.
pub fn gain(model: &NoiseModel, nbar: f64, tol: &SolverTolerances) -> Result<GainPoint> {
    if !(nbar > 0.0) {
        return Err(CapacityError::DegenerateInput(format!(
            "gain needs nbar > 0, got {nbar}"
        )));
    }
    let capacity = capacity_spectral(model, nbar, tol)?;
    let rate = coherent_rate_spectral(model, nbar, tol)?;
    let (snr, phi) = model_snr_phi(model, nbar, tol)?;
    gain_point(nbar, snr, phi, capacity, rate)
}

/// Coherent rate of one mode with modulation budget `2 nbar`.
fn one_mode_coherent_rate(noise: &OneModeNoise, nbar: f64) -> f64 {
    coherent_rate_nodes(std::slice::from_ref(noise), &[1.0], nbar).0
}

/// Capacity and coherent rate per mode of two Gauss-Markov modes.
pub fn two_mode_gain(n: f64, phi: f64, nbar: f64) -> Result<GainPoint> {
    if !(0.0..1.0).contains(&phi) || !(n >= 0.0) {
        return Err(CapacityError::Domain(format!(
            "two-mode gain needs 0 <= phi < 1 and N >= 0, got phi = {phi}, N = {n}"
        )));
    }
    let noise = OneModeNoise::new(n * (1.0 + phi), n * (1.0 - phi))?;
    let capacity = solve_one_mode(&noise, InputEnergy::from_nbar(nbar)?)?.chi;
    let rate = one_mode_coherent_rate(&noise, nbar);
    gain_point(nbar, nbar / n, phi, capacity, rate)
}

/// Gain at every point of `nbar_grid` with noise `N = nbar / snr`, and the
/// point of largest gain (ties go to the smallest `nbar`).
pub fn gain_sweep(
    channel: GainChannel,
    snr: f64,
    phi: f64,
    nbar_grid: &[f64],
    tol: &SolverTolerances,
) -> Result<Vec<GainPoint>> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(CapacityError::Domain(format!("snr must be positive, got {snr}")));
    }
    nbar_grid
        .par_iter()
        .map(|&nbar| {
            let n = nbar / snr;
            match channel {
                GainChannel::TwoMode => two_mode_gain(n, phi, nbar),
                GainChannel::InfiniteMode => gain(&NoiseModel::gauss_markov(n, phi)?, nbar, tol),
            }
        })
        .collect()
}

/// The grid point of largest gain; ties go to the smallest `nbar`.
pub fn max_gain_over_nbar(
    channel: GainChannel,
    snr: f64,
    phi: f64,
    nbar_grid: &[f64],
    tol: &SolverTolerances,
) -> Result<GainPoint> {
    if nbar_grid.is_empty() {
        return Err(CapacityError::Domain("nbar grid must be nonempty".into()));
    }
    let points = gain_sweep(channel, snr, phi, nbar_grid, tol)?;
    let mut best = points[0];
    for p in &points[1..] {
        if p.gain > best.gain || (p.gain == best.gain && p.nbar < best.nbar) {
            best = *p;
        }
    }
    Ok(best)
}
