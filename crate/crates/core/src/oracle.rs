//! Brute-force verification of the analytic solvers.
//!
//! Every routine here works directly from the Holevo quantity and the
//! constraints, without using the closed forms of the solver modules, so a
//! disagreement points to a bug on one side or the other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::multi_mode::ModeEnsemble;
use crate::numeric::entropy::{entropy_nu, g_prime_raw, kappa_prime_raw, kappa_raw};
use crate::one_mode::{
    holevo_chi, lambda_threshold_canon, solve_one_mode, InputEnergy, OneModeNoise, OneModeSolution,
    Regime,
};

/// Resolution of the brute-force grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub gin_q_points: usize,
    pub split_points: usize,
    pub refine_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { gin_q_points: 64, split_points: 64, refine_rounds: 3 }
    }
}

impl GridSpec {
    pub fn new(gin_q_points: usize, split_points: usize, refine_rounds: usize) -> Result<Self> {
        let spec = GridSpec { gin_q_points, split_points, refine_rounds };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gin_q_points < 16 || self.split_points < 16 {
            return Err(CapacityError::Domain(format!(
                "grid resolutions must be at least 16, got {} x {}",
                self.gin_q_points, self.split_points
            )));
        }
        Ok(())
    }
}

/// Best grid point found by the one-mode search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptimum {
    pub chi: f64,
    pub gin_q: f64,
    pub gin_p: f64,
    pub gmod_q: f64,
    pub gmod_p: f64,
    /// Modulation split `gmod_q / (gmod_q + gmod_p)`.
    pub split: f64,
    /// Spacing of the final `gin_q` grid around the optimum.
    pub gin_q_step: f64,
}

/// Feasible range of `gin_q`: `gin_q + 1/(4 gin_q) <= lambda`.
fn feasible_gin_range(lambda: f64) -> (f64, f64) {
    let r = (lambda * lambda - 1.0).max(0.0).sqrt();
    (0.5 * (lambda - r), 0.5 * (lambda + r))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Index of the largest value; ties go to the earliest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Window of two cells on each side of `i`.
fn window(grid: &[f64], i: usize) -> (f64, f64) {
    let lo = grid[i.saturating_sub(2)];
    let hi = grid[(i + 2).min(grid.len() - 1)];
    (lo, hi)
}

fn local_step(grid: &[f64], i: usize) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
    let right = if i + 1 < grid.len() { grid[i + 1] - grid[i] } else { 0.0 };
    left.max(right)
}

fn point_chi(noise: &OneModeNoise, lambda: f64, a: f64, s: f64) -> f64 {
    let b = 0.25 / a;
    let m = (lambda - a - b).max(0.0);
    holevo_chi(noise, a, b, s * m, (1.0 - s) * m)
}

/// Maximizes the Holevo quantity with zero cross terms over a grid in the
/// input variance `gin_q` and the modulation split, refining around the best
/// cell.
pub fn brute_force_one_mode(noise: &OneModeNoise, lambda: f64, grid: &GridSpec) -> Result<OracleOptimum> {
    grid.validate()?;
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(CapacityError::Domain(format!("lambda must be at least 1, got {lambda}")));
    }
    let (mut a_lo, mut a_hi) = feasible_gin_range(lambda);
    let (mut s_lo, mut s_hi) = (0.0, 1.0);
    let mut best = (f64::NEG_INFINITY, a_lo, 0.0, 0.0);
    for _ in 0..=grid.refine_rounds {
        let av = log_grid(a_lo, a_hi, grid.gin_q_points);
        let sv = lin_grid(s_lo, s_hi, grid.split_points);
        let values: Vec<f64> = (0..av.len() * sv.len())
            .into_par_iter()
            .map(|k| point_chi(noise, lambda, av[k / sv.len()], sv[k % sv.len()]))
            .collect();
        let k = argmax(&values);
        let (i, j) = (k / sv.len(), k % sv.len());
        best = (values[k], av[i], sv[j], local_step(&av, i));
        (a_lo, a_hi) = window(&av, i);
        (s_lo, s_hi) = window(&sv, j);
    }
    let (chi, a, s, step) = best;
    let b = 0.25 / a;
    let m = (lambda - a - b).max(0.0);
    Ok(OracleOptimum {
        chi,
        gin_q: a,
        gin_p: b,
        gmod_q: s * m,
        gmod_p: (1.0 - s) * m,
        split: s,
        gin_q_step: step,
    })
}

/// Best energy split found for a small ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteOptimum {
    pub chi: f64,
    pub lambdas: Vec<f64>,
    /// Spacing of the final energy-split grid.
    pub lambda_step: f64,
}

/// Inner resolution for the per-mode searches of `brute_force_finite`.
const INNER_GRID: GridSpec = GridSpec { gin_q_points: 32, split_points: 32, refine_rounds: 6 };

/// Maximizes the total Holevo quantity of one or two modes over the energy
/// split `lambda_1 + lambda_2 = lambda`, using one-mode searches inside.
pub fn brute_force_finite(ensemble: &ModeEnsemble, lambda: f64, grid: &GridSpec) -> Result<FiniteOptimum> {
    grid.validate()?;
    let modes = ensemble.modes();
    match modes.len() {
        1 => {
            let best = brute_force_one_mode(&modes[0], lambda, grid)?;
            Ok(FiniteOptimum { chi: best.chi, lambdas: vec![lambda], lambda_step: 0.0 })
        }
        2 => {
            if !(lambda >= 2.0) || !lambda.is_finite() {
                return Err(CapacityError::Domain(format!(
                    "lambda must be at least 2 for two modes, got {lambda}"
                )));
            }
            let total = |l1: f64| -> Result<f64> {
                let c1 = brute_force_one_mode(&modes[0], l1.max(1.0), &INNER_GRID)?.chi;
                let c2 = brute_force_one_mode(&modes[1], (lambda - l1).max(1.0), &INNER_GRID)?.chi;
                Ok(c1 + c2)
            };
            let (mut lo, mut hi) = (1.0, lambda - 1.0);
            let mut best = (total(lo)?, lo, 0.0);
            if hi > lo {
                for _ in 0..=grid.refine_rounds {
                    let lv = lin_grid(lo, hi, grid.gin_q_points);
                    let values = lv.iter().map(|&l| total(l)).collect::<Result<Vec<f64>>>()?;
                    let i = argmax(&values);
                    best = (values[i], lv[i], local_step(&lv, i));
                    (lo, hi) = window(&lv, i);
                }
            }
            Ok(FiniteOptimum { chi: best.0, lambdas: vec![best.1, lambda - best.1], lambda_step: best.2 })
        }
        n => Err(CapacityError::Size(format!("brute-force search supports at most 2 modes, got {n}"))),
    }
}

/// Residuals of the six stationarity conditions with zero cross terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub residuals: [f64; 6],
    /// Purity multiplier fitted to the first two conditions.
    pub tau: f64,
}

impl StationarityReport {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Evaluates the stationarity conditions of the Lagrangian at a water-filling
/// solution. The purity multiplier is fitted by least squares to the two
/// input-variance conditions, so a wrong point leaves a nonzero residual.
pub fn stationarity_residuals(noise: &OneModeNoise, solution: &OneModeSolution) -> Result<StationarityReport> {
    if solution.regime != Regime::WaterFilling {
        return Err(CapacityError::Regime(format!(
            "stationarity residuals need a water-filling solution, got {}",
            solution.regime.as_str()
        )));
    }
    let (bq, bp) = solution.gbar(noise);
    let (oq, op) = solution.gout(noise);
    let kb = kappa_raw((bq * bp).sqrt());
    let ko = kappa_raw((oq * op).sqrt());
    let mu = solution.mu;
    let a1 = kb * bp - ko * op - mu;
    let a2 = kb * bq - ko * oq - mu;
    let (iq, ip) = (solution.gin_q, solution.gin_p);
    let tau = (a1 * ip + a2 * iq) / (ip * ip + iq * iq);
    Ok(StationarityReport {
        residuals: [a1 - tau * ip, a2 - tau * iq, kb * bp - mu, kb * bq - mu, 0.0, 0.0],
        tau,
    })
}

/// Curvature of the Lagrangian at a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    pub regime: Regime,
    /// `A` and `B` of the cross-term block.
    pub cov_a: f64,
    pub cov_b: f64,
    /// Factor `c` with `B = kappa(nu_out) c` (water-filling only).
    pub cov_c: Option<f64>,
    /// `A` and `B` of the reduced variance Hessian (water-filling only).
    pub var_a: Option<f64>,
    pub var_b: Option<f64>,
    pub cov_eigenvalues: Vec<f64>,
    pub var_eigenvalues: Vec<f64>,
    pub negative_definite: bool,
}

/// Eigenvalues of `-[[A+B, A], [A, A]]`, the larger one first.
fn block_eigenvalues(a: f64, b: f64) -> [f64; 2] {
    let root = (a * a + 0.25 * b * b).sqrt();
    [-a + a * a / (root + 0.5 * b), -a - 0.5 * b - root]
}

/// Curvature of the Lagrangian at a water-filling or single-quadrature
/// solution.
///
/// Water-filling: the cross-term block `-[[A+B, A], [A, A]]` with
/// `A = kappa(nu_bar)`, `B = kappa(nu_out) c`, `c = 2 sqrt(gq gp)`, and the
/// Hessian of the reduced Holevo quantity in `(gin_q, gmod_q)`, which has the
/// same shape. Single quadrature: the cross-term curvature
/// `-kappa(nu_bar) - kappa(nu_out) (gout_q/gin_q - 1)` and the second derivative
/// of the Holevo quantity along the one-dimensional constraint curve.
pub fn hessian_check(noise: &OneModeNoise, solution: &OneModeSolution) -> Result<HessianReport> {
    let (cq, cp) = noise.canonical();
    let (a, _, _, _) = solution.canonical_parts();
    let kb = kappa_raw(solution.nu_bar);
    let ko = kappa_raw(solution.nu_out);
    match solution.regime {
        Regime::Vacuum => Err(CapacityError::Regime(
            "vacuum solution has no interior Hessian".to_string(),
        )),
        Regime::WaterFilling => {
            let c = 2.0 * (cq * cp).sqrt();
            let b = ko * c;
            let va = g_prime_raw(solution.nu_bar - 0.5) / solution.nu_bar;
            let vb = g_prime_raw(solution.nu_out - 0.5) * cq / (4.0 * solution.nu_out * a * a * a);
            let cov = block_eigenvalues(kb, b);
            let var = block_eigenvalues(va, vb);
            let negative_definite = cov.iter().chain(&var).all(|h| *h < 0.0);
            Ok(HessianReport {
                regime: Regime::WaterFilling,
                cov_a: kb,
                cov_b: b,
                cov_c: Some(c),
                var_a: Some(va),
                var_b: Some(vb),
                cov_eigenvalues: cov.to_vec(),
                var_eigenvalues: var.to_vec(),
                negative_definite,
            })
        }
        Regime::SingleQuadrature => {
            let lambda = solution.lambda();
            let b = ko * ((a + cq) / a - 1.0);
            let cov = -kb - b;
            let var = reduced_second_derivative(cq, cp, lambda, a);
            Ok(HessianReport {
                regime: Regime::SingleQuadrature,
                cov_a: kb,
                cov_b: b,
                cov_c: None,
                var_a: None,
                var_b: None,
                cov_eigenvalues: vec![cov],
                var_eigenvalues: vec![var],
                negative_definite: cov < 0.0 && var < 0.0,
            })
        }
    }
}

/// Second derivative of the Holevo quantity in `a = gin_q` along the
/// single-quadrature constraint curve (canonical orientation).
fn reduced_second_derivative(cq: f64, cp: f64, lambda: f64, a: f64) -> f64 {
    let bq = a + cq;
    let bp = lambda - a + cp;
    let nu_bar = (bq * bp).sqrt();
    let nu_out = (bq * (0.25 / a + cp)).sqrt();
    let d = cp - cq / (4.0 * a * a);
    kappa_prime_raw(nu_bar) * (bp - bq).powi(2) / (2.0 * nu_bar) - 2.0 * kappa_raw(nu_bar)
        - kappa_prime_raw(nu_out) * d * d / (2.0 * nu_out)
        - kappa_raw(nu_out) * cq / (2.0 * a * a * a)
}

/// Outcome of `concavity_probe`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub mu: Vec<f64>,
    pub chi: Vec<f64>,
    pub mu_strictly_decreasing: bool,
    /// Largest second difference of `chi` over the grid, scaled to unit spacing
    /// on a uniform grid.
    pub max_second_difference: f64,
    /// Largest change of `chi` or `mu` across the water-filling threshold, if
    /// the grid straddles it.
    pub threshold_jump: Option<f64>,
    pub passed: bool,
}

/// Checks that `mu(lambda)` decreases and `chi(lambda)` is concave on a sorted
/// energy grid, and that nothing jumps at the regime boundary.
pub fn concavity_probe(noise: &OneModeNoise, lambda_grid: &[f64]) -> Result<ConcavityReport> {
    if lambda_grid.len() < 3 || lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CapacityError::Domain(
            "lambda grid must be strictly increasing with at least 3 points".to_string(),
        ));
    }
    let sols = lambda_grid
        .par_iter()
        .map(|&l| solve_one_mode(noise, InputEnergy::new(l)?))
        .collect::<Result<Vec<_>>>()?;
    let mu: Vec<f64> = sols.iter().map(|s| s.mu).collect();
    let chi: Vec<f64> = sols.iter().map(|s| s.chi).collect();
    let mu_strictly_decreasing = mu.windows(2).all(|w| w[1] < w[0]);
    let max_second_difference = (1..lambda_grid.len() - 1)
        .map(|i| {
            let h1 = lambda_grid[i] - lambda_grid[i - 1];
            let h2 = lambda_grid[i + 1] - lambda_grid[i];
            2.0 * (h1 * (chi[i + 1] - chi[i]) - h2 * (chi[i] - chi[i - 1])) / (h1 + h2)
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let (cq, cp) = noise.canonical();
    let thr = lambda_threshold_canon(cq, cp);
    let first = lambda_grid[0];
    let last = lambda_grid[lambda_grid.len() - 1];
    let threshold_jump = if thr.is_finite() && thr > first && thr < last {
        let delta = 1e-10 * thr;
        let below = solve_one_mode(noise, InputEnergy::new(thr - delta)?)?;
        let above = solve_one_mode(noise, InputEnergy::new(thr + delta)?)?;
        Some((below.chi - above.chi).abs().max((below.mu - above.mu).abs()))
    } else {
        None
    };
    let passed = mu_strictly_decreasing
        && max_second_difference <= 1e-8
        && threshold_jump.map_or(true, |j| j <= 1e-8);
    Ok(ConcavityReport { mu, chi, mu_strictly_decreasing, max_second_difference, threshold_jump, passed })
}

/// Result of the search with nonzero cross terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotCheckReport {
    pub solver_chi: f64,
    pub best_chi: f64,
    /// `(gin_q, gin_qp, gmod_q, gmod_qp)` of the best grid point.
    pub best_point: [f64; 4],
    /// `best_chi - solver_chi`; positive values mean the grid beat the solver.
    pub excess: f64,
}

/// Holevo quantity with general input and modulation covariances
/// `[[a, c], [c, (1/4 + c^2)/a]]` and `[[mq, cm], [cm, mp]]`.
fn chi_with_cross_terms(gq: f64, gp: f64, a: f64, c: f64, mq: f64, mp: f64, cm: f64) -> f64 {
    let b = (0.25 + c * c) / a;
    let out = ((a + gq) * (b + gp) - c * c).max(0.25);
    let bar = ((a + mq + gq) * (b + mp + gp) - (c + cm) * (c + cm)).max(0.25);
    entropy_nu(bar.sqrt()) - entropy_nu(out.sqrt())
}

/// Coarse 4-D grid over input variance, input cross term, modulation split and
/// modulation cross term. Every grid point satisfies purity and the energy
/// constraint exactly.
pub fn cross_term_spot_check(noise: &OneModeNoise, lambda: f64, points: usize) -> Result<SpotCheckReport> {
    if points < 3 {
        return Err(CapacityError::Domain(format!("need at least 3 points per axis, got {points}")));
    }
    let solver_chi = solve_one_mode(noise, InputEnergy::new(lambda)?)?.chi;
    let (gq, gp) = (noise.gq(), noise.gp());
    let (lo, hi) = feasible_gin_range(lambda);
    let av = log_grid(lo, hi, points);
    let unit = lin_grid(-1.0, 1.0, points);
    let split = lin_grid(0.0, 1.0, points);
    let n = points;
    let values: Vec<(f64, [f64; 4])> = (0..n * n * n * n)
        .into_par_iter()
        .map(|k| {
            let a = av[k / (n * n * n)];
            let cmax = (a * (lambda - a) - 0.25).max(0.0).sqrt();
            let c = unit[(k / (n * n)) % n] * cmax;
            let m = (lambda - a - (0.25 + c * c) / a).max(0.0);
            let s = split[(k / n) % n];
            let (mq, mp) = (s * m, (1.0 - s) * m);
            let cm = unit[k % n] * (mq * mp).sqrt();
            (chi_with_cross_terms(gq, gp, a, c, mq, mp, cm), [a, c, mq, cm])
        })
        .collect();
    let chis: Vec<f64> = values.iter().map(|v| v.0).collect();
    let (best_chi, best_point) = values[argmax(&chis)];
    Ok(SpotCheckReport { solver_chi, best_chi, best_point, excess: best_chi - solver_chi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::g;

    fn noise(gq: f64, gp: f64) -> OneModeNoise {
        OneModeNoise::new(gq, gp).unwrap()
    }

    fn solve(n: &OneModeNoise, l: f64) -> OneModeSolution {
        solve_one_mode(n, InputEnergy::new(l).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_reference_value() {
        let best = brute_force_one_mode(&noise(1.0, 1.0), 3.0, &GridSpec::default()).unwrap();
        let hand = g(2.0).unwrap() - g(1.0).unwrap();
        assert!((best.chi - hand).abs() < 1e-4);
        assert!((best.chi - 0.754888).abs() < 1e-4);
    }

    #[test]
    fn matches_water_filling_solution() {
        let n = noise(2.0, 0.5);
        let best = brute_force_one_mode(&n, 5.0, &GridSpec::default()).unwrap();
        let s = solve(&n, 5.0);
        assert!((best.chi - s.chi).abs() < 1e-4);
        assert!(best.chi <= s.chi + 1e-9);
        assert!((best.gin_q - s.gin_q).abs() <= 2.0 * best.gin_q_step + 1e-9);
    }

    #[test]
    fn below_threshold_argmax_has_no_q_modulation() {
        let n = noise(2.0, 0.5);
        let best = brute_force_one_mode(&n, 2.0, &GridSpec::default()).unwrap();
        assert!(best.split < 1e-3, "split = {}", best.split);
        let s = solve(&n, 2.0);
        assert_eq!(s.regime, Regime::SingleQuadrature);
        assert!((best.chi - s.chi).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let n = noise(1.0, 1.0);
        assert!(brute_force_one_mode(&n, 0.5, &GridSpec::default()).is_err());
        assert!(GridSpec::new(8, 64, 1).is_err());
        let vac = brute_force_one_mode(&n, 1.0, &GridSpec::default()).unwrap();
        assert!(vac.chi.abs() < 1e-15);
    }

    #[test]
    fn two_identical_modes_split_evenly() {
        let e = ModeEnsemble::new(vec![noise(1.5, 0.5), noise(1.5, 0.5)]).unwrap();
        let best = brute_force_finite(&e, 6.0, &GridSpec::new(16, 16, 3).unwrap()).unwrap();
        assert!((best.lambdas[0] - 3.0).abs() <= best.lambda_step + 1e-9);
        let zero = brute_force_finite(&e, 2.0, &GridSpec::default()).unwrap();
        assert!(zero.chi.abs() < 1e-15);
        let three = ModeEnsemble::new(vec![noise(1.0, 1.0); 3]).unwrap();
        assert!(matches!(
            brute_force_finite(&three, 6.0, &GridSpec::default()),
            Err(CapacityError::Size(_))
        ));
    }

    #[test]
    fn stationarity_at_water_filling() {
        let n = noise(2.0, 0.5);
        let s = solve(&n, 5.0);
        assert!(stationarity_residuals(&n, &s).unwrap().max_abs() <= 1e-8);
        let sym = noise(1.0, 1.0);
        let r = stationarity_residuals(&sym, &solve(&sym, 3.0)).unwrap();
        assert!((r.residuals[0] - r.residuals[1]).abs() < 1e-15);
        let mut bad = s;
        bad.gin_q += 0.01;
        bad.gin_p = 0.25 / bad.gin_q;
        bad.gmod_q = 5.0 - bad.gin_q - bad.gin_p - bad.gmod_p;
        let worst = stationarity_residuals(&n, &bad).unwrap().max_abs();
        assert!(worst > 1e-3, "worst residual {worst}");
        assert!(stationarity_residuals(&n, &solve(&n, 2.0)).is_err());
    }

    /// Holevo quantity on the water-filling constraint surface as a function of
    /// `(gin_q, gmod_q)`.
    fn reduced_chi(n: &OneModeNoise, lambda: f64, a: f64, m: f64) -> f64 {
        let b = 0.25 / a;
        holevo_chi(n, a, b, m, lambda - a - b - m)
    }

    #[test]
    fn variance_hessian_matches_finite_differences() {
        let n = noise(2.0, 0.5);
        let s = solve(&n, 5.0);
        let h = 1e-4;
        let f = |da: f64, dm: f64| reduced_chi(&n, 5.0, s.gin_q + da, s.gmod_q + dm);
        let haa = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
        let hmm = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
        let ham = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        let tr = haa + hmm;
        let det = haa * hmm - ham * ham;
        let disc = (0.25 * tr * tr - det).sqrt();
        let fd = [0.5 * tr + disc, 0.5 * tr - disc];
        let rep = hessian_check(&n, &s).unwrap();
        assert!(rep.negative_definite);
        for (x, y) in fd.iter().zip(&rep.var_eigenvalues) {
            assert!(((x - y) / y).abs() < 0.01, "fd {x} vs {y}");
        }
    }

    #[test]
    fn cross_term_hessian_matches_finite_differences() {
        // Lagrangian in the two cross terms at fixed variances; the symmetric
        // off-diagonal entries make it twice the per-entry block.
        let n = noise(2.0, 0.5);
        let s = solve(&n, 5.0);
        let rep = hessian_check(&n, &s).unwrap();
        let (a, b) = (s.gin_q, s.gin_p);
        let tau = -kappa_raw(s.nu_out) * (a + 2.0) / a;
        let lag = |c: f64, cm: f64| {
            let bar = (a + s.gmod_q + 2.0) * (b + s.gmod_p + 0.5) - (c + cm) * (c + cm);
            let out = (a + 2.0) * (b + 0.5) - c * c;
            entropy_nu(bar.sqrt()) - entropy_nu(out.sqrt()) - tau * (a * b - c * c)
        };
        let h = 1e-4;
        let l0 = lag(0.0, 0.0);
        let h11 = (lag(h, 0.0) - 2.0 * l0 + lag(-h, 0.0)) / (h * h) / 2.0;
        let h22 = (lag(0.0, h) - 2.0 * l0 + lag(0.0, -h)) / (h * h) / 2.0;
        let h12 = (lag(h, h) - lag(h, -h) - lag(-h, h) + lag(-h, -h)) / (4.0 * h * h) / 2.0;
        let (ka, kb) = (rep.cov_a, rep.cov_b);
        assert!(((h11 + ka + kb) / (ka + kb)).abs() < 0.01);
        assert!(((h22 + ka) / ka).abs() < 0.01);
        assert!(((h12 + ka) / ka).abs() < 0.01);
    }

    #[test]
    fn single_quadrature_curvature() {
        let n = noise(2.0, 0.5);
        let s = solve(&n, 2.0);
        let rep = hessian_check(&n, &s).unwrap();
        assert!(rep.negative_definite);
        // along the curve gmod_q = 0
        let h = 1e-4;
        let f = |a: f64| holevo_chi(&n, a, 0.25 / a, 0.0, 2.0 - a - 0.25 / a);
        let fd = (f(s.gin_q + h) - 2.0 * f(s.gin_q) + f(s.gin_q - h)) / (h * h);
        let v = rep.var_eigenvalues[0];
        assert!(((fd - v) / v).abs() < 0.01, "fd {fd} vs {v}");
        assert!(hessian_check(&n, &solve(&n, 1.0)).is_err());
    }

    #[test]
    fn concavity_on_both_regimes() {
        let n = noise(2.0, 0.5);
        let thr = crate::one_mode::lambda_threshold(&n).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| 1.0 + (2.0 * thr - 1.0) * i as f64 / 199.0).collect();
        let rep = concavity_probe(&n, &grid).unwrap();
        assert!(rep.mu_strictly_decreasing);
        assert!(rep.max_second_difference <= 1e-8);
        assert!(rep.threshold_jump.unwrap() <= 1e-8);
        assert!(rep.passed);
    }

    #[test]
    fn cross_terms_do_not_help() {
        let n = noise(2.0, 0.5);
        for l in [2.0, 5.0] {
            let rep = cross_term_spot_check(&n, l, 9).unwrap();
            assert!(rep.excess <= 1e-9, "excess {} at lambda {l}", rep.excess);
        }
    }
}
