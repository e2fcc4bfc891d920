//! Damped Newton relaxation for the coupled gauged system
//!
//!   phi'' + (2/r) phi' = (m^2 - (omega - e A0)^2) phi + V'(phi)/2,
//!   A0''  + (2/r) A0'  = -2 e phi^2 (omega - e A0),
//!
//! discretized by second-order central differences with phi'(0) = A0'(0) = 0
//! and phi(R) = A0(R) = 0, solved by Newton steps on the block-tridiagonal
//! Jacobian with an Armijo line search, continued geometrically in the gauge
//! coupling from the ungauged seed.

use crate::numerics::{solve_block_tridiag, Mat2};
use crate::potentials::ModelConfig;
use crate::profile::RadialProfile;

use super::{fd_residuals, solve_qball, GaugedOptions, ShootOptions, SolverError};

/// Curvature values are clamped to this magnitude near the origin of the
/// field, where super-exponential families have unbounded V''.
const CURVATURE_CAP: f64 = 1e12;

fn rhs_jacobian(model: &ModelConfig, phi: f64, a0: f64) -> Mat2 {
    let e = model.e();
    let shifted = model.omega() - e * a0;
    let mut curv = model.potential().curvature(phi);
    if !curv.is_finite() {
        curv = if curv.is_nan() { 0.0 } else { curv.signum() * CURVATURE_CAP };
    }
    Mat2 {
        a: model.m() * model.m() - shifted * shifted + 0.5 * curv,
        b: 2.0 * e * shifted * phi,
        c: -4.0 * e * phi * shifted,
        d: 2.0 * e * e * phi * phi,
    }
}

fn residual_norm(model: &ModelConfig, r: &[f64], phi: &[f64], a0: &[f64], h: f64) -> f64 {
    let (rp, ra) = fd_residuals(model, r, phi, a0, h);
    rp.iter().chain(&ra).fold(0.0f64, |m, v| m.max(v.abs()))
}

/// One Newton relaxation at fixed model parameters. `phi` and `a0` hold the
/// initial guess and are updated in place on success; the boundary values
/// phi[n-1] = a0[n-1] = 0 are enforced throughout.
fn newton_relax(
    model: &ModelConfig,
    r: &[f64],
    h: f64,
    phi: &mut [f64],
    a0: &mut [f64],
    opts: &GaugedOptions,
) -> Result<f64, SolverError> {
    let n = r.len();
    let m = n - 1; // unknown nodes 0..m-1
    phi[n - 1] = 0.0;
    a0[n - 1] = 0.0;
    let h2 = h * h;
    let mut norm = residual_norm(model, r, phi, a0, h);
    for iter in 0..opts.max_iterations {
        if norm <= opts.tol {
            return Ok(norm);
        }
        let (res_phi, res_a0) = fd_residuals(model, r, phi, a0, h);
        let mut lower = vec![Mat2::default(); m];
        let mut diag = vec![Mat2::default(); m];
        let mut upper = vec![Mat2::default(); m];
        let mut rhs = vec![[0.0; 2]; m];
        for i in 0..m {
            let drhs = rhs_jacobian(model, phi[i], a0[i]);
            let lap_diag = if i == 0 { -6.0 / h2 } else { -2.0 / h2 };
            diag[i] = Mat2 {
                a: lap_diag - drhs.a,
                b: -drhs.b,
                c: -drhs.c,
                d: lap_diag - drhs.d,
            };
            if i == 0 {
                upper[i] = Mat2 { a: 6.0 / h2, b: 0.0, c: 0.0, d: 6.0 / h2 };
            } else {
                let off_lo = 1.0 / h2 - 1.0 / (r[i] * h);
                let off_hi = 1.0 / h2 + 1.0 / (r[i] * h);
                lower[i] = Mat2 { a: off_lo, b: 0.0, c: 0.0, d: off_lo };
                if i < m - 1 {
                    upper[i] = Mat2 { a: off_hi, b: 0.0, c: 0.0, d: off_hi };
                }
            }
            rhs[i] = [-res_phi[i], -res_a0[i]];
        }
        let delta = solve_block_tridiag(&lower, &diag, &upper, &rhs).ok_or(
            SolverError::NoConvergence { iterations: iter, residual: norm },
        )?;
        // Armijo backtracking on the residual norm.
        let mut step = 1.0;
        let mut accepted = false;
        while step >= opts.damping_min {
            let mut phi_try = phi.to_vec();
            let mut a0_try = a0.to_vec();
            for i in 0..m {
                phi_try[i] += step * delta[i][0];
                a0_try[i] += step * delta[i][1];
            }
            let norm_try = residual_norm(model, r, &phi_try, &a0_try, h);
            if norm_try.is_finite() && norm_try <= (1.0 - 0.25 * step) * norm {
                phi.copy_from_slice(&phi_try);
                a0.copy_from_slice(&a0_try);
                norm = norm_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NoConvergence { iterations: iter, residual: norm });
        }
    }
    if norm <= opts.tol {
        Ok(norm)
    } else {
        Err(SolverError::NoConvergence { iterations: opts.max_iterations, residual: norm })
    }
}

/// Resamples a seed profile onto the target uniform grid by cubic
/// interpolation; identity when the grids already agree.
fn resample(values: &[f64], h_src: f64, r_target: &[f64]) -> Vec<f64> {
    r_target
        .iter()
        .map(|&ri| crate::numerics::cubic_interp_uniform(h_src, values, ri))
        .collect()
}

/// Gauged solver: damped Newton with geometric continuation in e.
///
/// Starts from the ungauged profile (solved here when no seed is supplied),
/// advances the coupling by a step that doubles on success and halves on
/// failure, and fails with `ContinuationBreakdown` when the step falls below
/// `min_continuation_step` before the target coupling. A profile whose seed
/// is identically zero converges immediately to the zero profile.
pub fn solve_gauged(model: &ModelConfig, opts: &GaugedOptions) -> Result<RadialProfile, SolverError> {
    if !(model.e() > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "gauged solver requires e > 0, got e = {}; use the shooting solver instead",
            model.e()
        )));
    }
    if opts.n < 32 {
        return Err(SolverError::InvalidInput(format!("grid needs n >= 32 points, got {}", opts.n)));
    }
    if !(opts.r_max > 0.0) || !opts.r_max.is_finite() {
        return Err(SolverError::InvalidInput(format!("r_max must be positive, got {}", opts.r_max)));
    }
    let n = opts.n;
    let h = opts.r_max / (n - 1) as f64;
    let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();

    let (mut phi, mut a0) = match &opts.seed {
        Some(seed) => {
            let h_src = seed.spacing()?;
            let same_grid = seed.len() == n
                && (seed.r_max() - opts.r_max).abs() <= 1e-12 * opts.r_max;
            if same_grid {
                (seed.phi().to_vec(), seed.a0().to_vec())
            } else {
                (resample(seed.phi(), h_src, &r), resample(seed.a0(), h_src, &r))
            }
        }
        None => {
            // The seed is only an initial guess; Newton drives the residual,
            // so the derived shooting tolerance stays loose on purpose.
            let shoot_opts = opts.seed_options.clone().unwrap_or(ShootOptions {
                r_max: opts.r_max,
                n: opts.n,
                tol: 1.0,
                ..Default::default()
            });
            let ungauged = solve_qball(&model.with_e(0.0)?, &shoot_opts)?;
            (ungauged.phi().to_vec(), ungauged.a0().to_vec())
        }
    };

    let e_target = model.e();
    let mut e_cur = 0.0;
    let mut step = e_target;
    while e_cur < e_target {
        let e_try = (e_cur + step).min(e_target);
        let model_try = model.with_e(e_try)?;
        let mut phi_try = phi.clone();
        let mut a0_try = a0.clone();
        match newton_relax(&model_try, &r, h, &mut phi_try, &mut a0_try, opts) {
            Ok(_) => {
                phi = phi_try;
                a0 = a0_try;
                e_cur = e_try;
                step *= 2.0;
            }
            Err(SolverError::NoConvergence { .. }) => {
                step *= 0.5;
                if step < opts.min_continuation_step {
                    return Err(SolverError::ContinuationBreakdown {
                        reached_e: e_cur,
                        target_e: e_target,
                    });
                }
            }
            Err(other) => return Err(other),
        }
    }

    let residual = residual_norm(model, &r, &phi, &a0, h);
    let profile = RadialProfile::new(r, phi, a0, model.clone(), residual)?;
    profile.check_decay()?;
    Ok(profile)
}

/// Coulomb-tail diagnostic for gauged profiles solved with the Dirichlet
/// screen A0(R) = 0: outside the source the potential follows
/// c (1/r - 1/R), so c = A0(r) / (1/r - 1/R) should be constant over the
/// outer region. Returns (c_estimate, relative_variation), or None when the
/// profile has no gauge field.
pub fn coulomb_tail_diagnostic(profile: &RadialProfile) -> Option<(f64, f64)> {
    let r = profile.r();
    let a0 = profile.a0();
    let big_r = profile.r_max();
    let n = r.len();
    let from = (n as f64 * 0.65) as usize;
    let to = (n as f64 * 0.9) as usize;
    if to <= from + 2 {
        return None;
    }
    let mut cs = Vec::with_capacity(to - from);
    for i in from..to {
        let geom = 1.0 / r[i] - 1.0 / big_r;
        if geom <= 0.0 {
            continue;
        }
        cs.push(a0[i] / geom);
    }
    if cs.len() < 3 {
        return None;
    }
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    if mean == 0.0 || !mean.is_finite() {
        return None;
    }
    let var = cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / cs.len() as f64;
    Some((mean, var.sqrt() / mean.abs()))
}
