//! Radial soliton profile construction.
//!
//! The ungauged field is solved by bisection shooting on the central value;
//! the coupled gauged system by damped Newton relaxation on a second-order
//! finite-difference discretization, with geometric continuation in the gauge
//! coupling starting from the ungauged seed. Everything is posed in the
//! spherically symmetric sector on a uniform grid over [0, R_max] with the
//! r = 0 regularization 3 f''(0) = RHS.

mod newton;
mod shooting;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potentials::{ModelConfig, ModelError};
use crate::profile::{ProfileError, RadialProfile};
use crate::virial::ScalingParams;

pub use newton::{coulomb_tail_diagnostic, solve_gauged};
pub use shooting::solve_qball;

/// Outcome label of a single shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotClass {
    /// Turned back (or diverged) before reaching the target node count.
    Under,
    /// Crossed zero more than the target number of times.
    Over,
    /// Reached the outer radius with the target node count and a decayed tail.
    Decayed,
}

/// One entry of the bisection trace.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShotRecord {
    pub amplitude: f64,
    pub class: ShotClass,
    pub nodes: usize,
}

#[derive(Debug, Error)]
pub enum SolverError {
    /// No profile with the requested node count exists in the bracket: either
    /// the bracket endpoints classify identically, the field never decays, or
    /// the discretized residual of the best shot exceeds the tolerance.
    #[error("no solution: {reason}")]
    NoSolution { reason: String, trace: Vec<ShotRecord> },
    /// The damped Newton iteration stalled.
    #[error("newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    /// Continuation in the gauge coupling failed before reaching the target.
    #[error("continuation stalled at e = {reached_e} (target {target_e})")]
    ContinuationBreakdown { reached_e: f64, target_e: f64 },
    /// Node counts along the bracket were not monotone in the central value,
    /// so the bisection premise does not hold for this model.
    #[error("node count not monotone across the bracket: {details}")]
    NonMonotoneNodes { details: String, trace: Vec<ShotRecord> },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Options for the ungauged shooting solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Outer radius of the uniform grid.
    pub r_max: f64,
    /// Number of grid points.
    pub n: usize,
    /// Requested node count (0 = nodeless ground state).
    pub nodes: usize,
    /// Bisection bracket for the central value, in units of the natural field
    /// scale (taken as 1 in natural units).
    pub bracket: (f64, f64),
    /// Upper bound on the max-norm of the discretized equation residual of
    /// the returned profile.
    pub tol: f64,
    /// Cap on bisection iterations (the bracket normally collapses to
    /// machine precision first).
    pub max_bisections: usize,
}

impl ShootOptions {
    pub fn new(r_max: f64) -> Self {
        ShootOptions { r_max, ..Default::default() }
    }
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            r_max: 30.0,
            n: 2048,
            nodes: 0,
            bracket: (1e-3, 1e3),
            tol: 5e-2,
            max_bisections: 200,
        }
    }
}

/// Options for the gauged Newton solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugedOptions {
    pub r_max: f64,
    pub n: usize,
    /// Convergence target for the max-norm of the discretized residual.
    pub tol: f64,
    /// Smallest accepted line-search damping factor.
    pub damping_min: f64,
    /// Cap on Newton iterations per continuation step.
    pub max_iterations: usize,
    /// Continuation stops when the step in e falls below this.
    pub min_continuation_step: f64,
    /// Ungauged seed profile; solved on the fly when absent.
    #[serde(skip)]
    pub seed: Option<RadialProfile>,
    /// Shooting options used when the seed must be solved here.
    pub seed_options: Option<ShootOptions>,
}

impl GaugedOptions {
    pub fn new(r_max: f64) -> Self {
        GaugedOptions { r_max, ..Default::default() }
    }
}

impl Default for GaugedOptions {
    fn default() -> Self {
        GaugedOptions {
            r_max: 30.0,
            n: 2048,
            tol: 1e-8,
            damping_min: 1e-9,
            max_iterations: 60,
            min_continuation_step: 1e-6,
            seed: None,
            seed_options: None,
        }
    }
}

/// Right-hand side of the scalar field equation,
/// phi'' + (2/r) phi' = (m^2 - (omega - e A0)^2) phi + V'(phi)/2.
pub(crate) fn rhs_phi(model: &ModelConfig, phi: f64, a0: f64) -> f64 {
    let shifted = model.omega() - model.e() * a0;
    (model.m() * model.m() - shifted * shifted) * phi + 0.5 * model.potential().slope(phi)
}

/// Right-hand side of the gauge field equation,
/// A0'' + (2/r) A0' = -2 e phi^2 (omega - e A0).
pub(crate) fn rhs_a0(model: &ModelConfig, phi: f64, a0: f64) -> f64 {
    -2.0 * model.e() * phi * phi * (model.omega() - model.e() * a0)
}

/// Second-order finite-difference residuals of both field equations on a
/// uniform grid. Row 0 uses the regularized origin form 3 f''(0) = RHS with
/// the symmetric second difference; the last row belongs to the Dirichlet
/// boundary and is reported as zero.
pub(crate) fn fd_residuals(
    model: &ModelConfig,
    r: &[f64],
    phi: &[f64],
    a0: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = r.len();
    let h2 = h * h;
    let mut res_phi = vec![0.0; n];
    let mut res_a0 = vec![0.0; n];
    res_phi[0] = 6.0 * (phi[1] - phi[0]) / h2 - rhs_phi(model, phi[0], a0[0]);
    res_a0[0] = 6.0 * (a0[1] - a0[0]) / h2 - rhs_a0(model, phi[0], a0[0]);
    for i in 1..n - 1 {
        let lap_phi =
            (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / h2 + (phi[i + 1] - phi[i - 1]) / (r[i] * h);
        let lap_a0 =
            (a0[i + 1] - 2.0 * a0[i] + a0[i - 1]) / h2 + (a0[i + 1] - a0[i - 1]) / (r[i] * h);
        res_phi[i] = lap_phi - rhs_phi(model, phi[i], a0[i]);
        res_a0[i] = lap_a0 - rhs_a0(model, phi[i], a0[i]);
    }
    (res_phi, res_a0)
}

/// Discretized equation-of-motion residuals of a profile.
#[derive(Clone, Debug)]
pub struct EomResidual {
    pub phi: Vec<f64>,
    pub a0: Vec<f64>,
}

impl EomResidual {
    pub fn max_norm(&self) -> f64 {
        self.phi
            .iter()
            .chain(&self.a0)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Evaluates the second-order central-difference residuals of both equations
/// of motion over the profile's grid. Requires a uniform grid with at least
/// three points.
pub fn eom_residual(profile: &RadialProfile) -> Result<EomResidual, SolverError> {
    let h = profile.spacing()?;
    let (phi, a0) =
        fd_residuals(profile.model(), profile.r(), profile.phi(), profile.a0(), h);
    Ok(EomResidual { phi, a0 })
}

/// Rescales a profile as phi(r) -> lambda^alpha phi(lambda r),
/// A0(r) -> lambda^beta A0(lambda r), re-sampled onto the original grid by
/// cubic interpolation. Radii beyond the stored grid count as fully decayed.
/// Exact (bitwise) for lambda = 1.
pub fn rescale_profile(
    profile: &RadialProfile,
    scaling: ScalingParams,
) -> Result<RadialProfile, SolverError> {
    let lambda = scaling.lambda;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(SolverError::InvalidInput(format!(
            "scaling factor must be positive, got {lambda}"
        )));
    }
    let h = profile.spacing()?;
    let phi_amp = lambda.powf(scaling.alpha);
    let a0_amp = lambda.powf(scaling.beta);
    let (phi, a0) = if lambda == 1.0 {
        (
            profile.phi().iter().map(|&v| phi_amp * v).collect::<Vec<_>>(),
            profile.a0().iter().map(|&v| a0_amp * v).collect::<Vec<_>>(),
        )
    } else {
        let mut phi = Vec::with_capacity(profile.len());
        let mut a0 = Vec::with_capacity(profile.len());
        for &ri in profile.r() {
            let x = lambda * ri;
            phi.push(phi_amp * crate::numerics::cubic_interp_uniform(h, profile.phi(), x));
            a0.push(a0_amp * crate::numerics::cubic_interp_uniform(h, profile.a0(), x));
        }
        (phi, a0)
    };
    let r = profile.r().to_vec();
    let (res_phi, res_a0) = fd_residuals(profile.model(), &r, &phi, &a0, h);
    let residual = res_phi
        .iter()
        .chain(&res_a0)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(RadialProfile::new(r, phi, a0, profile.model().clone(), residual)?)
}

/// Outer-radius heuristic: 30 / kappa from the linearized decay rate when it
/// is real, stretched to 30 seed widths when a width estimate is available.
/// None when neither rule applies (marginal m = omega cases need an explicit
/// radius).
pub fn suggest_r_max(model: &ModelConfig, seed_width: Option<f64>) -> Option<f64> {
    let from_kappa = model
        .decay_rate_sq()
        .filter(|&k2| k2 > 0.0)
        .map(|k2| 30.0 / k2.sqrt());
    let from_width = seed_width.filter(|w| *w > 0.0).map(|w| 30.0 * w);
    match (from_kappa, from_width) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    }
}

/// Rough width scale of the soliton core for the built-in families, used only
/// to size default grids.
pub fn natural_width(model: &ModelConfig) -> Option<f64> {
    use crate::potentials::Potential;
    match model.potential() {
        Potential::Logarithmic { g, .. } if *g > 0.0 => Some(1.0 / g.sqrt()),
        _ => model
            .decay_rate_sq()
            .filter(|&k2| k2 > 0.0)
            .map(|k2| 1.0 / k2.sqrt()),
    }
}
