//! Solver checks against independent oracles: the closed-form Gaussian ground
//! state of the logarithmic model, a standalone high-accuracy shooting solve
//! of the canonical cubic equation u'' + (2/x) u' = u - u^3, and the limiting
//! behaviors of the gauged continuation.

use kgm_core::{
    eom_residual, solve_gauged, solve_qball, GaugedOptions, ModelConfig, Potential, RadialProfile,
    ShootOptions, SolverError,
};

fn log_model(mu2: f64, g: f64, omega: f64) -> ModelConfig {
    ModelConfig::new(omega, 0.0, 0.0, Potential::logarithmic(mu2, g).unwrap()).unwrap()
}

/// Central value of the nodeless solution of u'' + (2/x) u' = u - u^3,
/// computed by an RK4 shooting bisection independent of the library solver.
fn canonical_cubic_central_value() -> f64 {
    let h = 5e-4;
    let x_max = 14.0;
    let steps = (x_max / h) as usize;
    // Returns true when the shot crosses zero (amplitude too large).
    let crosses = |a: f64| -> bool {
        let mut u = a;
        let mut v = 0.0;
        for i in 0..steps {
            let x = i as f64 * h;
            let f = |x: f64, u: f64, v: f64| -> (f64, f64) {
                let rhs = u - u * u * u;
                if x == 0.0 {
                    (v, rhs / 3.0)
                } else {
                    (v, rhs - 2.0 * v / x)
                }
            };
            let (k1u, k1v) = f(x, u, v);
            let (k2u, k2v) = f(x + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
            let (k3u, k3v) = f(x + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
            let (k4u, k4v) = f(x + h, u + h * k3u, v + h * k3v);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if u < 0.0 {
                return true;
            }
            if u > 0.0 && v > 0.0 {
                return false; // turned back: amplitude too small
            }
        }
        false
    };
    let mut lo = 4.0;
    let mut hi = 5.0;
    assert!(!crosses(lo) && crosses(hi), "oracle bracket does not straddle the boundary");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if crosses(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn gaussian_ground_state_of_logarithmic_model() {
    // phi(r) = exp((mu2 - omega^2 + 2g)/(2g)) exp(-g r^2/2); at mu2 = g =
    // omega = 1 the amplitude is exactly e.
    let model = log_model(1.0, 1.0, 1.0);
    let opts = ShootOptions { r_max: 8.0, n: 2048, ..Default::default() };
    let profile = solve_qball(&model, &opts).unwrap();
    let amp = std::f64::consts::E;
    assert!((profile.phi()[0] - amp).abs() / amp < 1e-9, "phi(0) = {}", profile.phi()[0]);
    let mut max_err = 0.0f64;
    for (i, &ri) in profile.r().iter().enumerate() {
        let exact = amp * (-0.5 * ri * ri).exp();
        max_err = max_err.max((profile.phi()[i] - exact).abs());
    }
    assert!(max_err / amp < 1e-6, "relative sup-norm error {}", max_err / amp);
    assert_eq!(profile.node_count(), 0);
    assert!(profile.check_decay().is_ok());
}

#[test]
fn gaussian_amplitude_formula_across_parameters() {
    for (mu2, g, omega) in [(1.0, 1.0, 0.5), (2.0, 0.8, 1.2), (1.0, 2.0, 1.0)] {
        let model = log_model(mu2, g, omega);
        let width = 1.0 / g.sqrt();
        let opts = ShootOptions { r_max: 8.0 * width, n: 2048, ..Default::default() };
        let profile = solve_qball(&model, &opts).unwrap();
        let amp = ((mu2 - omega * omega + 2.0 * g) / (2.0 * g)).exp();
        assert!(
            (profile.phi()[0] - amp).abs() / amp < 1e-8,
            "phi(0) = {} vs {amp} at (mu2, g, omega) = ({mu2}, {g}, {omega})",
            profile.phi()[0]
        );
    }
}

#[test]
fn quartic_thick_wall_matches_canonical_oracle() {
    // phi'' + (2/r) phi' = (mu2 - omega^2) phi - 2 g^2 phi^3 reduces to the
    // canonical cubic equation under x = kappa r, phi = kappa/(sqrt(2) g) u,
    // so phi(0) = u0 kappa / (sqrt(2) g).
    let u0 = canonical_cubic_central_value();
    assert!((4.3..4.4).contains(&u0), "canonical central value {u0} outside the known window");
    let model =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    let opts = ShootOptions { r_max: 40.0, n: 4096, ..Default::default() };
    let profile = solve_qball(&model, &opts).unwrap();
    let expected = u0 * 0.5f64.sqrt() / (2.0f64.sqrt() * 1.0);
    let got = profile.phi()[0];
    assert!(
        (got - expected).abs() / expected < 1e-6,
        "phi(0) = {got} vs oracle {expected}"
    );
    assert_eq!(profile.node_count(), 0);
}

#[test]
fn excluded_power_law_has_no_solution() {
    // gamma > 0, p = 4, m^2 >= omega^2: excluded, so every shot fails.
    let model =
        ModelConfig::new(0.5f64.sqrt(), 1.0, 0.0, Potential::power_law(1.0, 4.0).unwrap())
            .unwrap();
    let opts = ShootOptions { r_max: 30.0, n: 1024, ..Default::default() };
    match solve_qball(&model, &opts) {
        Err(SolverError::NoSolution { trace, .. }) => assert!(!trace.is_empty()),
        other => panic!("expected NoSolution, got {other:?}"),
    }
}

#[test]
fn excited_state_has_requested_nodes() {
    // The 1-node state has a large, fast-varying core (phi(0) ~ 7), so the
    // second-order residual needs a fine grid.
    let model =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    let opts =
        ShootOptions { r_max: 45.0, n: 32768, nodes: 1, tol: 0.1, ..Default::default() };
    let profile = solve_qball(&model, &opts).unwrap();
    assert_eq!(profile.node_count(), 1);
    assert!(profile.phi()[0] > 0.0);
    assert!(profile.check_decay().is_ok());
}

#[test]
fn gauged_continuation_approaches_ungauged_limit() {
    let base =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    let shoot = ShootOptions { r_max: 40.0, n: 2048, ..Default::default() };
    let ungauged = solve_qball(&base, &shoot).unwrap();
    let mut prev_err = f64::INFINITY;
    for e in [0.08, 0.04, 0.02] {
        let model = base.with_e(e).unwrap();
        let opts = GaugedOptions {
            r_max: 40.0,
            n: 2048,
            seed: Some(ungauged.clone()),
            ..Default::default()
        };
        let gauged = solve_gauged(&model, &opts).unwrap();
        let err = gauged
            .phi()
            .iter()
            .zip(ungauged.phi())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1.0 * e, "|phi_e - phi_0| = {err} at e = {e}");
        assert!(err < prev_err, "error should shrink with e");
        prev_err = err;
    }
}

#[test]
fn gauged_field_sign_and_monotonicity() {
    let model =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.1, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    let opts = GaugedOptions { r_max: 40.0, n: 2048, ..Default::default() };
    let profile = solve_gauged(&model, &opts).unwrap();
    let a0 = profile.a0();
    // Same sign as omega * e everywhere (zero only at the boundary).
    for (i, &v) in a0.iter().enumerate().take(profile.len() - 1) {
        assert!(v > 0.0, "A0 changed sign at index {i}: {v}");
    }
    // |A0| monotone decreasing in r.
    for w in a0.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "A0 not monotone: {} -> {}", w[0], w[1]);
    }
    // Coulomb tail: r A0 / (1 - r/R) constant over the outer region.
    let (c, variation) = kgm_core::coulomb_tail_diagnostic(&profile).unwrap();
    assert!(c > 0.0);
    assert!(variation < 1e-2, "Coulomb tail variation {variation}");
}

#[test]
fn gauge_consistency_zeroing_e_degenerates_a0_equation() {
    let model =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.1, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    let opts = GaugedOptions { r_max: 40.0, n: 2048, ..Default::default() };
    let profile = solve_gauged(&model, &opts).unwrap();
    // Setting e = 0 after the fact makes the admissible gauge field vanish
    // identically, and with it the gauge-field equation residual.
    let ungauged_model = profile.model().with_e(0.0).unwrap();
    let stripped = RadialProfile::new(
        profile.r().to_vec(),
        profile.phi().to_vec(),
        vec![0.0; profile.len()],
        ungauged_model,
        0.0,
    )
    .unwrap();
    let res = eom_residual(&stripped).unwrap();
    assert!(res.a0.iter().all(|&v| v == 0.0));
}

#[test]
fn zero_seed_yields_zero_profile() {
    let model =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.1, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    let n = 512;
    let h = 20.0 / (n - 1) as f64;
    let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let zero = RadialProfile::new(
        r,
        vec![0.0; n],
        vec![0.0; n],
        model.with_e(0.0).unwrap(),
        0.0,
    )
    .unwrap();
    let opts = GaugedOptions { r_max: 20.0, n, seed: Some(zero), ..Default::default() };
    let profile = solve_gauged(&model, &opts).unwrap();
    assert!(profile.phi().iter().all(|&v| v == 0.0));
    assert!(profile.a0().iter().all(|&v| v == 0.0));
}
