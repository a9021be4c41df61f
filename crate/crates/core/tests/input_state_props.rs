use capwater_core::input_state::{
    entanglement_witness, entanglement_witness_gm, gm_global_wf_input, input_fourier_coefficients,
    modulated_output_covariance, DEFAULT_K_MAX,
};
use capwater_core::spectral::{solve_mu_spectral, NoiseModel};
use capwater_core::SolverTolerances;

#[test]
fn parseval_zero_coefficient() {
    let tol = SolverTolerances::default();
    for (phi, nbar) in [(0.3, 0.5), (0.7, 2.0), (0.9, 40.0)] {
        let s = solve_mu_spectral(&NoiseModel::gauss_markov(1.0, phi).unwrap(), nbar, &tol).unwrap();
        let cov = input_fourier_coefficients(&s, DEFAULT_K_MAX);
        assert!((cov.q_diagonals[0] - s.average(&s.gin_q)).abs() < 1e-12);
        assert!((cov.p_diagonals[0] - s.average(&s.gin_p)).abs() < 1e-12);
        let w = entanglement_witness(&cov);
        assert!(w.det0 >= 0.25 - 1e-12);
    }
}

#[test]
fn toeplitz_reconstruction_within_one_percent() {
    let tol = SolverTolerances::default();
    for phi in [0.0, 0.3, 0.6, 0.9] {
        let model = NoiseModel::gauss_markov(1.0, phi).unwrap();
        let nbar = 2.0 * phi * 1.5 / (1.0 - phi) + 1.0;
        let s = solve_mu_spectral(&model, nbar, &tol).unwrap();
        assert!(s.rate_is_global_wf);
        let cov = input_fourier_coefficients(&s, DEFAULT_K_MAX);
        assert_eq!(cov.k_max(), DEFAULT_K_MAX);
        assert!(cov.truncation_error < 0.01, "phi {phi}: {}", cov.truncation_error);
        // global water-filling input does not depend on nbar or N
        for k in [0, 1, 5] {
            let (q, p) = gm_global_wf_input(phi, k).unwrap();
            assert!((cov.q_diagonals[k] - q).abs() < 1e-8, "phi {phi} k {k}");
            assert!((cov.p_diagonals[k] - p).abs() < 1e-8);
        }
        let block = cov.q_block(4).unwrap();
        assert_eq!(block[0][3], cov.q_diagonals[3]);
        assert_eq!(block[2][1], cov.q_diagonals[1]);
        assert!(cov.q_block(DEFAULT_K_MAX + 2).is_none());
    }
}

#[test]
fn witness_grows_with_correlation() {
    let phis = [0.0, 0.2, 0.5, 0.7, 0.9];
    let det: Vec<f64> = phis.iter().map(|&p| entanglement_witness_gm(p).unwrap().det0).collect();
    assert_eq!(det[0], 0.25);
    assert!(det.windows(2).all(|w| w[1] > w[0]));
    assert!(phis[1..].iter().all(|&p| entanglement_witness_gm(p).unwrap().entangled));
    assert!(entanglement_witness_gm(1.0).is_err());
}

#[test]
fn modulated_output_is_scalar_above_threshold() {
    let tol = SolverTolerances::default();
    for (n, phi) in [(1.0, 0.3), (0.5, 0.8), (2.0, 0.9)] {
        let nbar = 2.0 * phi * (n + 0.5) / (1.0 - phi) * 1.1 + 0.1;
        let c = modulated_output_covariance(n, phi, nbar, 16, &tol).unwrap();
        assert_eq!(c.value, nbar + n + 0.5);
        assert!((c.sampled_mean - c.value).abs() <= 1e-8 * c.value);
        assert!(c.certificate_bound <= 1e-10);
        assert!(c.q_coefficients.iter().chain(&c.p_coefficients).all(|v| v.abs() <= c.certificate_bound + 1e-15));
    }
}
