use kgm_core::*;
use std::time::Instant;

fn main() {
    // Criterion 2 probe: quartic profile virial residuals at two grids.
    let model =
        ModelConfig::new(0.5f64.sqrt(), 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
    for n in [2049usize, 4097, 8193, 16385] {
        let t0 = Instant::now();
        let opts = ShootOptions { r_max: 40.0, n, ..Default::default() };
        let p = solve_qball(&model, &opts).unwrap();
        let f = compute_functionals(&p).unwrap();
        let mut worst = 0.0f64;
        for alpha in [0.0, 0.5, 1.0, 1.5] {
            worst = worst.max(residual_general(&f, p.model(), alpha));
        }
        let amp = residual_amplitude(&f, p.model());
        println!("quartic n={n}: worst_general={worst:.3e} amplitude={amp:.3e}  ({:?})", t0.elapsed());
    }
    // Gauged profile at e=0.05.
    let gm = model.with_e(0.05).unwrap();
    for n in [2049usize, 4097, 8193] {
        let t0 = Instant::now();
        let opts = GaugedOptions { r_max: 40.0, n, ..Default::default() };
        let p = solve_gauged(&gm, &opts).unwrap();
        let f = compute_functionals(&p).unwrap();
        let mut worst = 0.0f64;
        for alpha in [0.0, 0.5, 1.0, 1.5] {
            worst = worst.max(residual_general(&f, p.model(), alpha));
        }
        let amp = residual_amplitude(&f, p.model());
        println!("gauged n={n}: worst_general={worst:.3e} amplitude={amp:.3e}  ({:?})", t0.elapsed());
    }
    // Criterion 7 probe: closed-form vs direct S(lambda) on a synthetic profile.
    let pl_model = ModelConfig::new(0.9, 0.4, 0.7, Potential::power_law(1.3, 4.0).unwrap()).unwrap();
    for n in [8193usize, 16385, 32769] {
        let h = 12.0 / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let phi: Vec<f64> = r.iter().map(|&x| 1.3 * (-0.5 * x * x).exp() * (1.0 + 0.3 * x * x)).collect();
        let a0: Vec<f64> = r.iter().map(|&x| 0.8 * (-0.55 * x * x).exp()).collect();
        let p = RadialProfile::new(r, phi, a0, pl_model.clone(), 0.0).unwrap();
        let f = compute_functionals(&p).unwrap();
        let mut worst = 0.0f64;
        for lambda in [0.5, 0.8, 1.25, 2.0] {
            let s = ScalingParams::new(1.5, 0.0, lambda).unwrap();
            let cf = closed_form_action(&f, &pl_model, s).unwrap();
            let direct = scaling_curve(&p, &[s]).unwrap()[0].1;
            let rel = (cf - direct).abs() / cf.abs().max(1e-300);
            println!("  n={n} lambda={lambda}: cf={cf:.6e} direct={direct:.6e} rel={rel:.3e}");
            worst = worst.max(rel);
        }
        println!("synthetic n={n}: worst rel={worst:.3e}");
    }
}
