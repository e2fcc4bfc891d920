use kgm_core::*;
fn main() {
    let model = ModelConfig::new(1.0, 0.0, 0.0, Potential::logarithmic(1.0, 1.0).unwrap()).unwrap();
    // loose tol to get the profile out, then inspect
    let p = solve_qball(&model, &ShootOptions { r_max: 8.0, n: 1024, tol: f64::INFINITY, ..Default::default() }).unwrap();
    let res = eom_residual(&p).unwrap();
    for (i, v) in res.phi.iter().enumerate() {
        if !v.is_finite() || v.abs() > 1.0 {
            println!("i={i} r={:.4} phi={:e} res={:e}", p.r()[i], p.phi()[i], v);
        }
    }
    let n = p.len();
    for i in (0..n).step_by(64) {
        println!("sample i={i} r={:.3} phi={:e}", p.r()[i], p.phi()[i]);
    }
    println!("last phi={:e}", p.phi()[n-1]);
}
