use std::f64::consts::{FRAC_PI_2, PI};

use super::model::NoiseModel;
use crate::numeric::{gauss_legendre_panels, QuadratureGrid};

/// Quadrature grid on `[0, pi]` with `panels` two-point panels.
///
/// Gauss-Markov spectra with `phi > 0` peak at both ends of the interval with
/// width about `1 - phi`; for them the nodes are concentrated near `0` and `pi`
/// by the substitution `x = 2 atan(beta tan(theta/2))`. The grid is mirror
/// symmetric: node `i` and node `len-1-i` satisfy `x_i + x_j = pi`.
pub fn spectral_grid(model: &NoiseModel, panels: usize) -> QuadratureGrid {
    match model {
        NoiseModel::GaussMarkov { phi, .. } if *phi > 0.0 => {
            let beta = ((1.0 - phi) / (1.0 + phi)).max(0.05);
            mapped_grid(beta, panels)
        }
        _ => gauss_legendre_panels(0.0, PI, panels),
    }
}

fn mapped_grid(beta: f64, panels: usize) -> QuadratureGrid {
    let half = panels.div_ceil(2).max(1);
    let theta_max = 2.0 * (1.0 / beta).atan();
    let base = gauss_legendre_panels(0.0, theta_max, half);
    let mut nodes = Vec::with_capacity(4 * half);
    let mut weights = Vec::with_capacity(4 * half);
    for (&th, &w) in base.nodes.iter().zip(&base.weights) {
        let t = (0.5 * th).tan();
        let sec2 = 1.0 + t * t;
        let x = 2.0 * (beta * t).atan();
        nodes.push(x.min(FRAC_PI_2));
        weights.push(w * beta * sec2 / (1.0 + beta * beta * t * t));
    }
    let n = nodes.len();
    for i in (0..n).rev() {
        nodes.push(PI - nodes[i]);
        weights.push(weights[i]);
    }
    QuadratureGrid { nodes, weights }
}
