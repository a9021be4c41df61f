//! Finite sets of modes with commuting q and p noise blocks.
//!
//! Every mode shares one Lagrange multiplier `mu`. The per-mode energy
//! `lambda_i(mu)` is strictly decreasing, so the energy constraint is a
//! one-dimensional monotone root problem in `mu`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};
use crate::numeric::{find_root, Bracket, SolverTolerances};
use crate::one_mode::{
    mu_zero, regime_for_mu, solve_for_mu, vacuum_solution, OneModeNoise, OneModeSolution, Regime,
};

/// Diagonalized noise: one [`OneModeNoise`] per normal mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEnsemble {
    modes: Vec<OneModeNoise>,
}

impl ModeEnsemble {
    pub fn new(modes: Vec<OneModeNoise>) -> Result<Self> {
        if modes.is_empty() {
            return Err(CapacityError::Domain("mode ensemble must be nonempty".into()));
        }
        Ok(ModeEnsemble { modes })
    }

    pub fn modes(&self) -> &[OneModeNoise] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Quadrature noise covariance blocks of `n` modes without q-p cross terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNoise {
    q_block: DMatrix<f64>,
    p_block: DMatrix<f64>,
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

impl BlockNoise {
    pub fn new(q_block: DMatrix<f64>, p_block: DMatrix<f64>) -> Result<Self> {
        let n = q_block.nrows();
        if n == 0 || q_block.ncols() != n || p_block.nrows() != n || p_block.ncols() != n {
            return Err(CapacityError::Model(format!(
                "noise blocks must be square and of equal size, got {}x{} and {}x{}",
                q_block.nrows(),
                q_block.ncols(),
                p_block.nrows(),
                p_block.ncols()
            )));
        }
        if q_block.iter().chain(p_block.iter()).any(|v| !v.is_finite()) {
            return Err(CapacityError::Model("noise blocks contain non-finite entries".into()));
        }
        for (name, m) in [("q", &q_block), ("p", &p_block)] {
            let asym = max_asymmetry(m);
            if asym > 1e-12 * m.abs().max().max(1.0) {
                return Err(CapacityError::Model(format!(
                    "{name} block is not symmetric (max asymmetry {asym:e})"
                )));
            }
        }
        Ok(BlockNoise { q_block, p_block })
    }

    /// Gauss-Markov blocks `N phi^|i-j|` and `N (-phi)^|i-j|` for `n` modes.
    pub fn gauss_markov(n: usize, noise: f64, phi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&phi) || !(noise >= 0.0) {
            return Err(CapacityError::Domain(format!(
                "Gauss-Markov blocks need 0 <= phi < 1 and N >= 0, got phi = {phi}, N = {noise}"
            )));
        }
        let q = DMatrix::from_fn(n, n, |i, j| noise * phi.powi(i.abs_diff(j) as i32));
        let p = DMatrix::from_fn(n, n, |i, j| noise * (-phi).powi(i.abs_diff(j) as i32));
        BlockNoise::new(q, p)
    }

    pub fn q_block(&self) -> &DMatrix<f64> {
        &self.q_block
    }

    pub fn p_block(&self) -> &DMatrix<f64> {
        &self.p_block
    }

    pub fn dim(&self) -> usize {
        self.q_block.nrows()
    }

    /// Frobenius norm of `[Q, P]`.
    pub fn commutator_norm(&self) -> f64 {
        (&self.q_block * &self.p_block - &self.p_block * &self.q_block).norm()
    }
}

fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

fn normalize_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Joint eigenbasis of commuting noise blocks.
///
/// Column `i` of the returned basis is the eigenvector shared by mode `i`'s q
/// and p variances. Modes are ordered by ascending q variance; ties are
/// broken by ascending p variance.
pub fn diagonalize_noise(noise: &BlockNoise) -> Result<(ModeEnsemble, DMatrix<f64>)> {
    let q = noise.q_block();
    let p = noise.p_block();
    let n = noise.dim();
    let scale = q.abs().max().max(p.abs().max()).max(1.0);
    let comm = noise.commutator_norm();
    if comm > 1e-8 * scale * scale {
        return Err(CapacityError::Model(format!(
            "noise blocks do not commute (commutator norm {comm:e})"
        )));
    }
    let (q_vals, q_vecs) = sorted_eigen(q);
    let cluster_tol = 1e-9 * scale;
    let mut basis = DMatrix::<f64>::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && q_vals[end] - q_vals[end - 1] <= cluster_tol {
            end += 1;
        }
        let vc = q_vecs.columns(start, end - start).into_owned();
        if end - start == 1 {
            basis.set_column(start, &vc.column(0));
        } else {
            let pc = vc.transpose() * p * &vc;
            let pc = 0.5 * (&pc + pc.transpose());
            let (_, w) = sorted_eigen(&pc);
            let rotated = &vc * w;
            for k in 0..(end - start) {
                basis.set_column(start + k, &rotated.column(k));
            }
        }
        start = end;
    }
    let mut modes = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: DVector<f64> = basis.column(i).into_owned();
        normalize_sign(&mut v);
        basis.set_column(i, &v);
        let qi = (v.transpose() * q * &v)[(0, 0)];
        let pi = (v.transpose() * p * &v)[(0, 0)];
        let psd_tol = 1e-10 * scale;
        if qi < -psd_tol || pi < -psd_tol {
            return Err(CapacityError::Model(format!(
                "noise blocks are not positive semidefinite (mode {i}: q = {qi:e}, p = {pi:e})"
            )));
        }
        modes.push(OneModeNoise::new(qi.max(0.0), pi.max(0.0))?);
    }
    let dq = DMatrix::from_diagonal(&DVector::from_iterator(n, modes.iter().map(|m| m.gq())));
    let dp = DMatrix::from_diagonal(&DVector::from_iterator(n, modes.iter().map(|m| m.gp())));
    let err_q = (&basis * dq * basis.transpose() - q).norm();
    let err_p = (&basis * dp * basis.transpose() - p).norm();
    if err_q.max(err_p) > 1e-8 * scale {
        return Err(CapacityError::Model(format!(
            "joint diagonalization failed to reproduce the blocks (error {:e})",
            err_q.max(err_p)
        )));
    }
    Ok((ModeEnsemble::new(modes)?, basis))
}

/// Index sets of vacuum (`n1`), single-quadrature (`n2`) and water-filled
/// (`n3`) modes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
    pub n3: Vec<usize>,
}

impl Partition {
    fn from_regimes<I: IntoIterator<Item = Regime>>(regimes: I) -> Self {
        let mut p = Partition::default();
        for (i, r) in regimes.into_iter().enumerate() {
            match r {
                Regime::Vacuum => p.n1.push(i),
                Regime::SingleQuadrature => p.n2.push(i),
                Regime::WaterFilling => p.n3.push(i),
            }
        }
        p
    }
}

/// Set membership of every mode at multiplier `mu`.
pub fn classify_modes(ensemble: &ModeEnsemble, mu: f64) -> Partition {
    Partition::from_regimes(ensemble.modes().iter().map(|m| regime_for_mu(m, mu)))
}

/// Optimal allocation over a finite set of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiModeSolution {
    pub mu: f64,
    pub per_mode: Vec<OneModeSolution>,
    /// Energy `lambda_i` assigned to each mode.
    pub lambdas: Vec<f64>,
    pub partition: Partition,
    /// One-shot capacity of all modes together, in bits.
    pub c1: f64,
    pub c1_per_mode: f64,
}

/// Weighted energy allocation shared by the finite and spectral solvers.
pub(crate) struct WeightedAllocation {
    pub mu: f64,
    pub lambdas: Vec<f64>,
    pub solutions: Vec<OneModeSolution>,
    /// Summation order that makes weighted sums independent of input order.
    pub order: Vec<usize>,
}

impl WeightedAllocation {
    pub fn weighted_sum<F: Fn(usize) -> f64>(&self, weights: &[f64], f: F) -> f64 {
        self.order.iter().map(|&i| weights[i] * f(i)).sum()
    }
}

pub(crate) fn canonical_order(noises: &[OneModeNoise], weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..noises.len()).collect();
    order.sort_by(|&a, &b| {
        let (na, nb) = (&noises[a], &noises[b]);
        na.gq()
            .total_cmp(&nb.gq())
            .then(na.gp().total_cmp(&nb.gp()))
            .then(weights[a].total_cmp(&weights[b]))
            .then(Ordering::Equal)
    });
    order
}

fn evaluate_all(noises: &[OneModeNoise], mu: f64) -> Result<Vec<(f64, OneModeSolution)>> {
    noises.par_iter().map(|n| solve_for_mu(n, mu)).collect()
}

fn weighted_energy(
    noises: &[OneModeNoise],
    weights: &[f64],
    order: &[usize],
    mu: f64,
) -> Result<f64> {
    let lambdas: Vec<f64> = noises
        .par_iter()
        .map(|n| solve_for_mu(n, mu).map(|(l, _)| l))
        .collect::<Result<_>>()?;
    Ok(order.iter().map(|&i| weights[i] * lambdas[i]).sum())
}

fn vacuum_allocation(noises: &[OneModeNoise], order: Vec<usize>) -> WeightedAllocation {
    let mu = noises.iter().map(mu_zero).fold(0.0, f64::max);
    WeightedAllocation {
        mu,
        lambdas: vec![1.0; noises.len()],
        solutions: noises.iter().map(vacuum_solution).collect(),
        order,
    }
}

/// Finds `mu` such that `sum_i w_i lambda_i(mu) = target`.
pub(crate) fn solve_weighted(
    noises: &[OneModeNoise],
    weights: &[f64],
    target: f64,
    tol: &SolverTolerances,
) -> Result<WeightedAllocation> {
    tol.validate()?;
    let order = canonical_order(noises, weights);
    let floor: f64 = order.iter().map(|&i| weights[i]).sum();
    if !target.is_finite() || target < floor * (1.0 - 1e-14) {
        return Err(CapacityError::InfeasibleEnergy { lambda: target, floor });
    }
    if target <= floor * (1.0 + 1e-15) {
        return Ok(vacuum_allocation(noises, order));
    }
    let energy = |mu: f64| weighted_energy(noises, weights, &order, mu);

    let mu_max = noises
        .iter()
        .map(mu_zero)
        .filter(|m| m.is_finite())
        .fold(0.0, f64::max);
    let mut hi = if mu_max > 0.0 { mu_max } else { 1.0 };
    let mut iters = 0;
    while energy(hi)? > target {
        hi *= 2.0;
        iters += 1;
        if iters > tol.max_iter {
            return Err(CapacityError::Convergence {
                iterations: iters,
                detail: format!("no upper multiplier bracket for energy {target}"),
            });
        }
    }
    let mut lo = 1e-12f64.min(0.5 * hi);
    iters = 0;
    while energy(lo)? < target {
        lo *= 1e-3;
        iters += 1;
        if iters > tol.max_iter || lo == 0.0 {
            return Err(CapacityError::Convergence {
                iterations: iters,
                detail: format!("no lower multiplier bracket for energy {target}"),
            });
        }
    }

    // Root in t = ln(mu); the residual is evaluated per mode in parallel.
    let ftol = 1e-13 * target.max(1.0);
    let mut failure: Option<CapacityError> = None;
    let residual = |t: f64| match energy(t.exp()) {
        Ok(e) => e - target,
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    };
    let bracket = Bracket::new(lo.ln(), hi.ln())?;
    let root = find_root(residual, bracket, 1e-15, ftol, tol.max_iter);
    if let Some(err) = failure {
        return Err(err);
    }
    let mu = root?.exp();

    let results = evaluate_all(noises, mu)?;
    let (lambdas, solutions): (Vec<f64>, Vec<OneModeSolution>) = results.into_iter().unzip();
    let total: f64 = order.iter().map(|&i| weights[i] * lambdas[i]).sum();
    let slack = (1e-8f64).max(1e-10 * target);
    if (total - target).abs() > slack {
        return Err(CapacityError::Convergence {
            iterations: tol.max_iter,
            detail: format!(
                "energy closure failed: allocated {total}, requested {target} at mu = {mu}"
            ),
        });
    }
    Ok(WeightedAllocation { mu, lambdas, solutions, order })
}

/// Total energy `sum_i lambda_i(mu)` consumed by the ensemble.
pub fn total_input_energy(ensemble: &ModeEnsemble, mu: f64) -> Result<f64> {
    let w = vec![1.0; ensemble.len()];
    let order = canonical_order(ensemble.modes(), &w);
    weighted_energy(ensemble.modes(), &w, &order, mu)
}

/// Optimal allocation of total energy `lambda` (at least `n`) over the ensemble.
pub fn solve_mu(ensemble: &ModeEnsemble, lambda: f64, tol: &SolverTolerances) -> Result<MultiModeSolution> {
    let n = ensemble.len();
    let weights = vec![1.0; n];
    let alloc = solve_weighted(ensemble.modes(), &weights, lambda, tol)?;
    let c1 = alloc.weighted_sum(&weights, |i| alloc.solutions[i].chi);
    let partition = Partition::from_regimes(alloc.solutions.iter().map(|s| s.regime));
    Ok(MultiModeSolution {
        mu: alloc.mu,
        per_mode: alloc.solutions,
        lambdas: alloc.lambdas,
        partition,
        c1,
        c1_per_mode: c1 / n as f64,
    })
}
