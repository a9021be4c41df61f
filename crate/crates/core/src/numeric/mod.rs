//! Scalar special functions, root finding and fixed-node quadrature.

pub(crate) mod entropy;
mod quadrature;
mod roots;

pub use entropy::{g, g_prime, g_second, kappa, kappa_prime, mu_from_nu, nu_from_mu};
pub use quadrature::{gauss_legendre_panels, integrate, QuadratureGrid};
pub use roots::{bisect, find_root};

use serde::{Deserialize, Serialize};

use crate::error::{CapacityError, Result};

/// Tolerances shared by every iterative solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    /// Absolute tolerance on the width of a root bracket.
    pub root_tol: f64,
    /// Absolute tolerance on the Lagrange multiplier.
    pub mu_tol: f64,
    /// Number of quadrature panels on `[0, pi]`.
    pub grid_size: usize,
    /// Iteration cap for every loop.
    pub max_iter: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            root_tol: 1e-12,
            mu_tol: 1e-10,
            grid_size: 2048,
            max_iter: 200,
        }
    }
}

impl SolverTolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.root_tol > 0.0) || !(self.mu_tol > 0.0) {
            return Err(CapacityError::Domain(format!(
                "tolerances must be positive (root_tol = {}, mu_tol = {})",
                self.root_tol, self.mu_tol
            )));
        }
        if self.grid_size < 2 {
            return Err(CapacityError::Domain(format!(
                "grid_size must be at least 2, got {}",
                self.grid_size
            )));
        }
        if self.max_iter < 1 {
            return Err(CapacityError::Domain("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_grid_size(mut self, grid_size: usize) -> Self {
        self.grid_size = grid_size;
        self
    }
}

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CapacityError::Domain(format!(
                "invalid bracket [{lo}, {hi}]"
            )));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}
