use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SolverTolerances;
use crate::error::{CapacityError, Result};

/// Quadrature nodes and weights on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted sum of precomputed nodal values.
    pub fn sum(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted mean `sum(w f) / sum(w)` of precomputed nodal values.
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.sum(values) / self.total_weight()
    }
}

/// Composite two-point Gauss-Legendre rule with `panels` equal panels on `[a, b]`.
pub fn gauss_legendre_panels(a: f64, b: f64, panels: usize) -> QuadratureGrid {
    let h = (b - a) / panels as f64;
    let off = 0.5 * h / 3f64.sqrt();
    let mut nodes = Vec::with_capacity(2 * panels);
    let mut weights = Vec::with_capacity(2 * panels);
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        nodes.push(mid - off);
        nodes.push(mid + off);
        weights.push(0.5 * h);
        weights.push(0.5 * h);
    }
    QuadratureGrid { nodes, weights }
}

/// Integrates `f` over `[a, b]` with `tol.grid_size` Gauss-Legendre panels.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: &SolverTolerances) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(a < b) {
        return Err(CapacityError::Domain(format!(
            "integration requires a < b, got [{a}, {b}]"
        )));
    }
    tol.validate()?;
    let grid = gauss_legendre_panels(a, b, tol.grid_size);
    let values: Vec<f64> = grid.nodes.par_iter().map(|&x| f(x)).collect();
    Ok(grid.sum(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_and_constant() {
        let tol = SolverTolerances::default();
        let s = integrate(f64::sin, 0.0, PI, &tol).unwrap();
        assert!((s - 2.0).abs() < 2e-8);
        let c = integrate(|_| 1.0, 0.0, PI, &tol).unwrap();
        assert!((c - PI).abs() < 1e-12);
    }

    #[test]
    fn cubic_is_exact_on_one_panel() {
        let tol = SolverTolerances { grid_size: 2, ..Default::default() };
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, &tol).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_rejected() {
        let tol = SolverTolerances::default();
        assert!(integrate(|x| x, 1.0, 1.0, &tol).is_err());
    }
}
