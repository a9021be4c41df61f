use capwater_core::numeric::{
    bisect, find_root, g, g_prime, g_second, gauss_legendre_panels, integrate, kappa, kappa_prime, mu_from_nu,
    nu_from_mu,
};
use capwater_core::{Bracket, SolverTolerances};
use proptest::prelude::*;

#[test]
fn g_derivatives_match_finite_differences() {
    let h = 1e-4;
    for x in [0.1, 1.0, 10.0] {
        let d1 = (g(x + h).unwrap() - g(x - h).unwrap()) / (2.0 * h);
        assert!((d1 - g_prime(x).unwrap()).abs() <= 1e-6, "g' at {x}");
        if x >= 1.0 {
            let d2 = (g_prime(x + h).unwrap() - g_prime(x - h).unwrap()) / (2.0 * h);
            assert!((d2 - g_second(x).unwrap()).abs() <= 1e-6, "g'' at {x}");
        }
    }
}

#[test]
fn g_second_near_zero() {
    // At x = 0.1 the central difference with h = 1e-4 carries a truncation
    // error h^2 g''''/6 of about 4.8e-6, so check that error term and a
    // fourth-order stencil instead.
    let (x, h) = (0.1f64, 1e-4);
    let gp = |t: f64| g_prime(t).unwrap();
    let central = (gp(x + h) - gp(x - h)) / (2.0 * h);
    let g4 = -2.0 * (1.0 / x.powi(3) - 1.0 / (x + 1.0).powi(3)) / std::f64::consts::LN_2;
    let predicted = h * h * g4 / 6.0;
    let err = central - g_second(x).unwrap();
    assert!((err - predicted).abs() <= 1e-8, "error {err} vs predicted {predicted}");
    let five = (-gp(x + 2.0 * h) + 8.0 * gp(x + h) - 8.0 * gp(x - h) + gp(x - 2.0 * h)) / (12.0 * h);
    assert!((five - g_second(x).unwrap()).abs() <= 1e-6);
}

#[test]
fn kappa_positive_and_decreasing() {
    let xs: Vec<f64> = (0..200).map(|i| 0.5 + 10f64.powf(-6.0 + 9.3 * i as f64 / 199.0)).collect();
    let k: Vec<f64> = xs.iter().map(|&x| kappa(x).unwrap()).collect();
    assert!(k.iter().all(|v| *v > 0.0));
    assert!(k.windows(2).all(|w| w[1] < w[0]));
    assert!(xs.iter().all(|&x| kappa_prime(x).unwrap() < 0.0));
}

#[test]
fn mu_nu_round_trip() {
    let tol = SolverTolerances::default();
    for i in 1..=400 {
        let nu = 0.5 + 99.5 * i as f64 / 400.0;
        let mu = mu_from_nu(nu).unwrap();
        let back = nu_from_mu(mu).unwrap();
        assert!((back - nu).abs() <= tol.root_tol * nu.max(1.0) * 10.0, "nu {nu} -> {back}");
    }
}

#[test]
fn quadrature_and_roots() {
    let tol = SolverTolerances::default();
    let v = integrate(|x: f64| x.exp(), 0.0, 1.0, &tol).unwrap();
    assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    let grid = gauss_legendre_panels(0.0, std::f64::consts::PI, 16);
    assert_eq!(grid.len(), 32);
    let root = bisect(|x| x * x - 2.0, Bracket::new(0.0, 2.0).unwrap(), &tol).unwrap();
    assert!((root - 2f64.sqrt()).abs() < 1e-11);
    let root = find_root(|x: f64| x.cos() - x, Bracket::new(0.0, 1.0).unwrap(), 1e-14, 0.0, 200).unwrap();
    assert!((root - 0.7390851332151607).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn g_is_concave(a in 1e-6f64..100.0, d in 1e-6f64..100.0) {
        let b = a + d;
        let mid = g(0.5 * (a + b)).unwrap();
        prop_assert!(mid + 1e-12 >= 0.5 * (g(a).unwrap() + g(b).unwrap()));
    }

    #[test]
    fn g_is_increasing(a in 0.0f64..1e3, d in 1e-3f64..10.0) {
        prop_assert!(g(a + d).unwrap() > g(a).unwrap());
    }
}
