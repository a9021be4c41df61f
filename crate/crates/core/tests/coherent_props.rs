use capwater_core::coherent::{
    coherent_rate_gm_alpha, coherent_rate_spectral, gain, gain_sweep, gm_coherent_threshold_nbar, max_gain_over_nbar,
    two_mode_gain, GainChannel,
};
use capwater_core::numeric::g;
use capwater_core::spectral::{capacity_spectral, grid_noise, NoiseModel};
use capwater_core::SolverTolerances;

fn gm(n: f64, phi: f64) -> NoiseModel {
    NoiseModel::gauss_markov(n, phi).unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn capacity_dominates_coherent_rate() {
    let tol = SolverTolerances::default().with_grid_size(512);
    for phi in [0.0, 0.3, 0.6, 0.9, 0.99] {
        for nbar in log_grid(0.01, 100.0, 9) {
            let m = gm(1.0, phi);
            let c = capacity_spectral(&m, nbar, &tol).unwrap();
            let r = coherent_rate_spectral(&m, nbar, &tol).unwrap();
            assert!(c >= r - 1e-9, "phi {phi} nbar {nbar}: C {c} < R {r}");
            let t = two_mode_gain(1.0, phi, nbar).unwrap();
            assert!(t.capacity >= t.rate - 1e-9);
        }
    }
}

#[test]
fn coherent_output_eigenvalue_exceeds_optimal() {
    let tol = SolverTolerances::default();
    for phi in [0.2, 0.7, 0.95] {
        let (_, noises) = grid_noise(&gm(1.5, phi), &tol).unwrap();
        for m in noises {
            let (q, p) = (m.gq(), m.gp());
            let coherent = (0.25 + 0.5 * (q + p) + q * p).sqrt();
            let optimal = (0.25 + (q * p).sqrt() + q * p).sqrt();
            assert!(coherent >= optimal);
        }
    }
}

#[test]
fn coherent_rate_above_threshold_closed_form() {
    let tol = SolverTolerances::default();
    let (n, phi) = (1.0, 0.5);
    let nbar = gm_coherent_threshold_nbar(n, phi) + 0.5;
    let m = gm(n, phi);
    let (grid, noises) = grid_noise(&m, &tol).unwrap();
    let out: Vec<f64> = noises
        .iter()
        .map(|x| {
            let nu = ((x.gq() + 0.5) * (x.gp() + 0.5)).sqrt();
            g(nu - 0.5).unwrap()
        })
        .collect();
    let expected = g(nbar + n).unwrap() - grid.mean(&out);
    let r = coherent_rate_spectral(&m, nbar, &tol).unwrap();
    assert!((r - expected).abs() < 1e-12);
}

#[test]
fn alpha_route_agrees_below_threshold() {
    let tol = SolverTolerances::default();
    for (phi, nbar) in [(0.5, 0.3), (0.85, 2.0), (0.9, 10.0)] {
        let level = coherent_rate_spectral(&gm(1.0, phi), nbar, &tol).unwrap();
        let alpha = coherent_rate_gm_alpha(1.0, phi, nbar, &tol).unwrap();
        assert!((level - alpha).abs() < 1e-5, "phi {phi}: {level} vs {alpha}");
    }
}

#[test]
fn gain_limits() {
    let tol = SolverTolerances::default();
    for nbar in [0.1, 1.0, 10.0] {
        let p = gain(&gm(1.0, 0.0), nbar, &tol).unwrap();
        assert!((p.gain - 1.0).abs() < 1e-9);
    }
    // towards full correlation the gain falls back to 1
    let g90 = gain(&gm(1.0, 0.9), 1.0, &tol).unwrap().gain;
    let g999 = gain(&gm(1.0, 0.999), 1.0, &tol).unwrap().gain;
    assert!(g999 >= 1.0 - 1e-9 && g999 < g90, "{g999} vs {g90}");
    assert!(gain(&gm(1.0, 0.5), 0.0, &tol).is_err());
}

#[test]
fn sweep_domain_gain_bound() {
    let tol = SolverTolerances::default().with_grid_size(256);
    let nbars = log_grid(0.01, 100.0, 12);
    for snr in [0.5, 2.0, 10.0] {
        for phi in [0.0, 0.5, 0.8, 0.9, 0.95, 0.99] {
            let best = max_gain_over_nbar(GainChannel::InfiniteMode, snr, phi, &nbars, &tol).unwrap();
            assert!(best.gain >= 1.0 - 1e-9 && best.gain <= 1.12, "snr {snr} phi {phi}: {}", best.gain);
        }
    }
}

#[test]
fn sweep_preserves_order() {
    let tol = SolverTolerances::default().with_grid_size(128);
    let nbars = [5.0, 0.1, 1.0, 0.5];
    let pts = gain_sweep(GainChannel::TwoMode, 1.0, 0.5, &nbars, &tol).unwrap();
    for (p, n) in pts.iter().zip(nbars) {
        assert_eq!(p.nbar, n);
        assert!((p.snr - 1.0).abs() < 1e-15);
    }
    let inf = gain_sweep(GainChannel::InfiniteMode, 2.0, 0.5, &nbars, &tol).unwrap();
    assert!(inf.iter().zip(nbars).all(|(p, n)| p.nbar == n));
    // a flat gain profile picks the smallest nbar
    let flat = max_gain_over_nbar(GainChannel::TwoMode, 1.0, 0.0, &[3.0, 1.0, 2.0], &tol).unwrap();
    assert!((flat.gain - 1.0).abs() < 1e-12);
    assert!(gain_sweep(GainChannel::TwoMode, 0.0, 0.5, &nbars, &tol).is_err());
}
