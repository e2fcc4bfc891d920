//! Integral functionals of a profile and the scaling (virial) identities any
//! genuine solution must satisfy.
//!
//! Two independent routes are provided: closed-form identity residuals
//! assembled from one functional evaluation, and a direct stationarity oracle
//! that rescales the profile, re-quadratures the action and differentiates
//! S(lambda) numerically. Agreement of the two validates the change-of-
//! variables algebra; failure of either on a converged profile flags a solver
//! or quadrature bug.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{fit_radial_exp_tail, gradient_uniform, simpson_uniform};
use crate::potentials::{ModelConfig, Potential};
use crate::profile::{ProfileError, RadialProfile};
use crate::solver::{rescale_profile, SolverError};

#[derive(Debug, Error)]
pub enum VirialError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("operation requires a power-law potential, got {0}")]
    NotPowerLaw(String),
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),
}

/// The seven integral quantities of one profile. All integrals are over
/// three-dimensional space, reduced to 4 pi Int r^2 (.) dr.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSet {
    /// Int phi^2; nonnegative.
    pub norm: f64,
    /// Int (grad phi)^2; nonnegative.
    pub kinetic: f64,
    /// (1/2) Int (grad A0)^2; nonnegative.
    pub gauge_kinetic: f64,
    /// 2 e omega Int A0 phi^2; either sign.
    pub coupling_linear: f64,
    /// e^2 Int A0^2 phi^2; nonnegative.
    pub coupling_quad: f64,
    /// Int V(phi); either sign.
    pub potential: f64,
    /// Int V'(phi) phi; either sign.
    pub potential_slope: f64,
}

/// Parameters of the profile modification
/// phi(r) -> lambda^alpha phi(lambda r), A0(r) -> lambda^beta A0(lambda r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl ScalingParams {
    pub fn new(alpha: f64, beta: f64, lambda: f64) -> Result<Self, VirialError> {
        if ![alpha, beta, lambda].iter().all(|x| x.is_finite()) {
            return Err(VirialError::InvalidScaling("parameters must be finite".into()));
        }
        if !(lambda > 0.0) {
            return Err(VirialError::InvalidScaling(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(ScalingParams { alpha, beta, lambda })
    }
}

/// Computes every functional by composite Simpson over the grid, gradients by
/// central differences, plus small analytic tail corrections: an exponential
/// model fitted to the outer decade of the scalar field, and for gauged
/// profiles the Coulomb continuation of the gauge-field gradient energy
/// beyond the grid. Refuses profiles that fail the decay invariants, since
/// their tails are not under control.
pub fn compute_functionals(profile: &RadialProfile) -> Result<FunctionalSet, VirialError> {
    profile.check_decay_with(crate::profile::DECAY_LEVEL, 1e-2)?;
    let h = profile.spacing()?;
    let n = profile.len();
    let r = profile.r();
    let phi = profile.phi();
    let a0 = profile.a0();
    let model = profile.model();
    let pot = model.potential();
    let e = model.e();
    let omega = model.omega();

    let dphi = gradient_uniform(h, phi, true);
    let da0 = gradient_uniform(h, a0, true);

    let weighted = |f: &dyn Fn(usize) -> f64| -> f64 {
        let vals: Vec<f64> = (0..n).map(|i| 4.0 * PI * r[i] * r[i] * f(i)).collect();
        simpson_uniform(h, &vals)
    };

    let mut set = FunctionalSet {
        norm: weighted(&|i| phi[i] * phi[i]),
        kinetic: weighted(&|i| dphi[i] * dphi[i]),
        gauge_kinetic: 0.5 * weighted(&|i| da0[i] * da0[i]),
        coupling_linear: 2.0 * e * omega * weighted(&|i| a0[i] * phi[i] * phi[i]),
        coupling_quad: e * e * weighted(&|i| a0[i] * a0[i] * phi[i] * phi[i]),
        potential: weighted(&|i| pot.value(phi[i])),
        potential_slope: weighted(&|i| pot.slope(phi[i]) * phi[i]),
    };

    // Exponential tail of the scalar field beyond R, fitted to the outer
    // fifth of the grid. The A0-weighted integrals carry phi^2 and need none.
    let big_r = profile.r_max();
    if let Some((kappa, b)) = fit_radial_exp_tail(r, phi, n * 4 / 5, n) {
        let tail_norm = 2.0 * PI * b * b * (-2.0 * kappa * big_r).exp() / kappa;
        if tail_norm.is_finite() {
            set.norm += tail_norm;
            set.kinetic += (kappa + 1.0 / big_r).powi(2) * tail_norm;
            if let Some(c0) = pot.curvature_at_origin() {
                set.potential += 0.5 * c0 * tail_norm;
                set.potential_slope += c0 * tail_norm;
            }
        }
    }
    // Coulomb continuation of the gauge-field gradient: outside the source
    // A0' = -c/r^2, so the missing (1/2) Int_R^inf (grad A0)^2 is 2 pi c^2/R.
    if e > 0.0 && n >= 3 {
        let da0_edge = (3.0 * a0[n - 1] - 4.0 * a0[n - 2] + a0[n - 3]) / (2.0 * h);
        let c = -big_r * big_r * da0_edge;
        if c.is_finite() {
            set.gauge_kinetic += 2.0 * PI * c * c / big_r;
        }
    }
    Ok(set)
}

/// Noether charge Q = Int 2 (omega - e A0) phi^2, a convenience observable.
pub fn charge(profile: &RadialProfile) -> Result<f64, VirialError> {
    profile.check_decay_with(crate::profile::DECAY_LEVEL, 1e-2)?;
    let h = profile.spacing()?;
    let model = profile.model();
    let vals: Vec<f64> = (0..profile.len())
        .map(|i| {
            let r = profile.r()[i];
            let phi = profile.phi()[i];
            let a0 = profile.a0()[i];
            4.0 * PI * r * r * 2.0 * (model.omega() - model.e() * a0) * phi * phi
        })
        .collect();
    Ok(simpson_uniform(h, &vals))
}

/// Reduced action of a functional set:
/// S = -Pi1 + Pi2 + (omega^2 - m^2) V1 - I1 + I2 - V2.
pub fn action_from_functionals(f: &FunctionalSet, model: &ModelConfig) -> f64 {
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    -f.kinetic + f.gauge_kinetic + (omega2 - m2) * f.norm - f.coupling_linear + f.coupling_quad
        - f.potential
}

/// Reduced action of a profile, assembled from its functionals.
pub fn action_value(profile: &RadialProfile) -> Result<f64, VirialError> {
    Ok(action_from_functionals(&compute_functionals(profile)?, profile.model()))
}

fn normalized_residual(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if scale == 0.0 {
        0.0
    } else {
        sum.abs() / scale
    }
}

fn power_law_exponent(model: &ModelConfig) -> Result<f64, VirialError> {
    match model.potential() {
        Potential::PowerLaw { p, .. } => Ok(*p),
        other => Err(VirialError::NotPowerLaw(format!("{other:?}"))),
    }
}

/// Terms of the general-(alpha, beta) identity for a power-law potential:
///
/// -(2a-1) Pi1 + (2b-1) Pi2 + (2a-3)(omega^2-m^2) V1 - (2a+b-3) I1
///   + (2a+2b-3) I2 - (p a - 3) V2 = 0.
fn power_law_terms(
    f: &FunctionalSet,
    model: &ModelConfig,
    alpha: f64,
    beta: f64,
    p: f64,
) -> [f64; 6] {
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    [
        -(2.0 * alpha - 1.0) * f.kinetic,
        (2.0 * beta - 1.0) * f.gauge_kinetic,
        (2.0 * alpha - 3.0) * (omega2 - m2) * f.norm,
        -(2.0 * alpha + beta - 3.0) * f.coupling_linear,
        (2.0 * alpha + 2.0 * beta - 3.0) * f.coupling_quad,
        -(p * alpha - 3.0) * f.potential,
    ]
}

/// Normalized residual |LHS| / sum |terms| of the two-parameter scaling
/// identity for power-law potentials (0/0 evaluates to 0). Vanishes, up to
/// quadrature error, on any true solution.
pub fn residual_power_law(
    f: &FunctionalSet,
    model: &ModelConfig,
    alpha: f64,
    beta: f64,
) -> Result<f64, VirialError> {
    let p = power_law_exponent(model)?;
    Ok(normalized_residual(&power_law_terms(f, model, alpha, beta, p)))
}

/// Unnormalized left-hand side of the same identity; affine in alpha at fixed
/// beta and in beta at fixed alpha.
pub fn lhs_power_law(
    f: &FunctionalSet,
    model: &ModelConfig,
    alpha: f64,
    beta: f64,
) -> Result<f64, VirialError> {
    let p = power_law_exponent(model)?;
    Ok(power_law_terms(f, model, alpha, beta, p).iter().sum())
}

fn general_terms(f: &FunctionalSet, model: &ModelConfig, alpha: f64) -> [f64; 5] {
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    [
        -(2.0 * alpha - 1.0) * f.kinetic,
        (5.0 - 4.0 * alpha) * f.gauge_kinetic,
        (2.0 * alpha - 3.0) * (omega2 - m2) * f.norm,
        (3.0 - 2.0 * alpha) * f.coupling_quad,
        -(alpha * f.potential_slope - 3.0 * f.potential),
    ]
}

/// Normalized residual of the single-parameter identity (the beta = 3 - 2
/// alpha specialization, valid for any potential):
///
/// -(2a-1) Pi1 + (5-4a) Pi2 + (2a-3)(omega^2-m^2) V1 + (3-2a) I2
///   - (a J - 3 V2) = 0,
///
/// where J = Int V'(phi) phi. The potential term is kept as the single
/// combination (a J - 3 V2) so that for power laws (J = p V2) the residual
/// agrees exactly with [`residual_power_law`] at beta = 3 - 2 alpha.
pub fn residual_general(f: &FunctionalSet, model: &ModelConfig, alpha: f64) -> f64 {
    normalized_residual(&general_terms(f, model, alpha))
}

/// Unnormalized left-hand side of the general identity; affine in alpha.
pub fn lhs_general(f: &FunctionalSet, model: &ModelConfig, alpha: f64) -> f64 {
    general_terms(f, model, alpha).iter().sum()
}

/// Normalized residual of the amplitude identity (field rescaling without
/// coordinate change):
///
/// -2 Pi1 - 4 Pi2 + 2 (omega^2 - m^2) V1 - 2 I2 - J = 0.
pub fn residual_amplitude(f: &FunctionalSet, model: &ModelConfig) -> f64 {
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    let terms = [
        -2.0 * f.kinetic,
        -4.0 * f.gauge_kinetic,
        2.0 * (omega2 - m2) * f.norm,
        -2.0 * f.coupling_quad,
        -f.potential_slope,
    ];
    normalized_residual(&terms)
}

/// Closed-form S(lambda) for a power-law potential, from one functional
/// evaluation of the unscaled profile:
///
/// S(l) = -l^(2a-1) Pi1 + l^(2b-1) Pi2 + l^(2a-3)(omega^2-m^2) V1
///        - l^(2a+b-3) I1 + l^(2a+2b-3) I2 - l^(p a-3) V2.
pub fn closed_form_action(
    f: &FunctionalSet,
    model: &ModelConfig,
    s: ScalingParams,
) -> Result<f64, VirialError> {
    let p = power_law_exponent(model)?;
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    let l = s.lambda;
    let (a, b) = (s.alpha, s.beta);
    Ok(-l.powf(2.0 * a - 1.0) * f.kinetic
        + l.powf(2.0 * b - 1.0) * f.gauge_kinetic
        + l.powf(2.0 * a - 3.0) * (omega2 - m2) * f.norm
        - l.powf(2.0 * a + b - 3.0) * f.coupling_linear
        + l.powf(2.0 * a + 2.0 * b - 3.0) * f.coupling_quad
        - l.powf(p * a - 3.0) * f.potential)
}

/// Direct action curve: for each scaling, rescales the profile, re-evaluates
/// every integral and assembles S. Valid for any potential; this is the
/// independent oracle for the closed-form identities, and its derivative at
/// lambda = 1 is the stationarity test dS/dlambda = 0 for true solutions.
pub fn scaling_curve(
    profile: &RadialProfile,
    scalings: &[ScalingParams],
) -> Result<Vec<(f64, f64)>, VirialError> {
    let mut out = Vec::with_capacity(scalings.len());
    for &s in scalings {
        let rescaled = rescale_profile(profile, s)?;
        out.push((s.lambda, action_value(&rescaled)?));
    }
    Ok(out)
}

/// Central-difference estimate of dS/dlambda at lambda = 1 for the given
/// (alpha, beta), with the stationarity scale max(|S(1)|, sum |terms at
/// lambda=1|) to normalize against.
pub fn stationarity_derivative(
    profile: &RadialProfile,
    alpha: f64,
    beta: f64,
    delta: f64,
) -> Result<(f64, f64), VirialError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(VirialError::InvalidScaling(format!(
            "stationarity step must lie in (0, 1), got {delta}"
        )));
    }
    let lo = rescale_profile(profile, ScalingParams::new(alpha, beta, 1.0 - delta)?)?;
    let hi = rescale_profile(profile, ScalingParams::new(alpha, beta, 1.0 + delta)?)?;
    let s_lo = action_value(&lo)?;
    let s_hi = action_value(&hi)?;
    let deriv = (s_hi - s_lo) / (2.0 * delta);
    let f = compute_functionals(profile)?;
    let model = profile.model();
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    let scale = action_from_functionals(&f, model).abs().max(
        f.kinetic.abs()
            + f.gauge_kinetic.abs()
            + ((omega2 - m2) * f.norm).abs()
            + f.coupling_linear.abs()
            + f.coupling_quad.abs()
            + f.potential.abs(),
    );
    Ok((deriv, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Potential;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Closed-form functionals of the logarithmic-model Gaussian
    /// phi = A exp(-g r^2 / 2) with A = exp((mu2 - omega^2 + 2g) / (2g)):
    /// V1 = A^2 (pi/g)^(3/2), Pi1 = (3g/2) V1,
    /// V2 = (mu2 - 2 g ln A + 3g/2) V1, J = 2 V2 - 2 g V1.
    fn gaussian_functionals(mu2: f64, g: f64, omega: f64) -> (FunctionalSet, f64) {
        let ln_a = (mu2 - omega * omega + 2.0 * g) / (2.0 * g);
        let amp = ln_a.exp();
        let v1 = amp * amp * (PI / g).powf(1.5);
        let v2 = (mu2 - 2.0 * g * ln_a + 1.5 * g) * v1;
        let f = FunctionalSet {
            norm: v1,
            kinetic: 1.5 * g * v1,
            gauge_kinetic: 0.0,
            coupling_linear: 0.0,
            coupling_quad: 0.0,
            potential: v2,
            potential_slope: 2.0 * v2 - 2.0 * g * v1,
        };
        (f, amp)
    }

    fn log_model(mu2: f64, g: f64, omega: f64) -> ModelConfig {
        ModelConfig::new(omega, 0.0, 0.0, Potential::logarithmic(mu2, g).unwrap()).unwrap()
    }

    fn gaussian_profile(n: usize, r_max: f64, mu2: f64, g: f64, omega: f64) -> RadialProfile {
        let model = log_model(mu2, g, omega);
        let h = r_max / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let amp = ((mu2 - omega * omega + 2.0 * g) / (2.0 * g)).exp();
        let phi: Vec<f64> = r.iter().map(|&ri| amp * (-0.5 * g * ri * ri).exp()).collect();
        RadialProfile::new(r, phi, vec![0.0; n], model, 0.0).unwrap()
    }

    #[test]
    fn zero_profile_yields_zero_functionals() {
        let model = log_model(1.0, 1.0, 1.0);
        let n = 128;
        let h = 10.0 / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let p = RadialProfile::new(r, vec![0.0; n], vec![0.0; n], model, 0.0).unwrap();
        let f = compute_functionals(&p).unwrap();
        assert_eq!(f, FunctionalSet::default());
        assert_eq!(action_value(&p).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_moments_match_closed_form() {
        let p = gaussian_profile(4097, 12.0, 1.0, 1.0, 1.0);
        let f = compute_functionals(&p).unwrap();
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let v1 = e2 * PI.powf(1.5);
        assert_relative_eq!(f.norm, v1, max_relative = 1e-10);
        assert_relative_eq!(f.kinetic, 1.5 * v1, max_relative = 1e-5);
        assert_eq!(f.gauge_kinetic, 0.0);
        assert_eq!(f.coupling_linear, 0.0);
        assert_eq!(f.coupling_quad, 0.0);
        let (exact, _) = gaussian_functionals(1.0, 1.0, 1.0);
        assert_relative_eq!(f.potential, exact.potential, max_relative = 1e-9);
        assert_relative_eq!(f.potential_slope, exact.potential_slope, max_relative = 1e-9);
    }

    #[test]
    fn analytic_gaussian_satisfies_identities() {
        for (mu2, g, omega) in [(1.0, 1.0, 1.0), (2.0, 0.7, 0.9), (1.0, 1.5, 0.3)] {
            let (f, _) = gaussian_functionals(mu2, g, omega);
            let model = log_model(mu2, g, omega);
            for alpha in [0.0, 0.5, 1.0, 1.5, 2.7] {
                let res = residual_general(&f, &model, alpha);
                assert!(res < 1e-12, "general identity residual {res} at alpha {alpha}");
            }
            let res = residual_amplitude(&f, &model);
            assert!(res < 1e-12, "amplitude identity residual {res}");
        }
    }

    #[test]
    fn quadrature_gaussian_identities_tight() {
        let p = gaussian_profile(4097, 12.0, 1.0, 1.0, 1.0);
        let f = compute_functionals(&p).unwrap();
        let model = p.model();
        for alpha in [0.0, 0.5, 1.0, 1.5] {
            let res = residual_general(&f, model, alpha);
            assert!(res < 2e-6, "residual {res} at alpha {alpha}");
        }
        assert!(residual_amplitude(&f, model) < 2e-6);
    }

    /// For power laws J = p V2, so the general identity at beta = 3 - 2 alpha
    /// must agree with the two-parameter identity to floating-point accuracy.
    #[test]
    fn general_reduces_to_power_law_route() {
        let model =
            ModelConfig::new(0.9, 0.4, 0.0, Potential::power_law(1.3, 4.0).unwrap()).unwrap();
        let n = 1025;
        let h = 12.0 / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let phi: Vec<f64> =
            r.iter().map(|&ri| 1.7 * (-0.5 * ri * ri).exp() * (1.0 + 0.3 * ri * ri)).collect();
        let p = RadialProfile::new(r, phi, vec![0.0; n], model.clone(), 0.0).unwrap();
        let f = compute_functionals(&p).unwrap();
        assert_relative_eq!(f.potential_slope, 4.0 * f.potential, max_relative = 1e-12);
        for alpha in [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
            let beta = 3.0 - 2.0 * alpha;
            let a = residual_general(&f, &model, alpha);
            let b = residual_power_law(&f, &model, alpha, beta).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn unnormalized_residual_affine_in_alpha_and_beta() {
        let model =
            ModelConfig::new(0.8, 0.2, 0.6, Potential::power_law(-0.9, 3.0).unwrap()).unwrap();
        let f = FunctionalSet {
            norm: 3.1,
            kinetic: 2.2,
            gauge_kinetic: 0.7,
            coupling_linear: -0.4,
            coupling_quad: 0.12,
            potential: -1.3,
            potential_slope: -3.9,
        };
        // Midpoint test in alpha at fixed beta.
        let at = |a: f64, b: f64| lhs_power_law(&f, &model, a, b).unwrap();
        let mid = (at(0.0, 1.0) + at(2.0, 1.0)) / 2.0;
        assert_relative_eq!(at(1.0, 1.0), mid, max_relative = 1e-12);
        // And in beta at fixed alpha.
        let mid = (at(0.7, -1.0) + at(0.7, 3.0)) / 2.0;
        assert_relative_eq!(at(0.7, 1.0), mid, max_relative = 1e-12);
        // The single-parameter route is affine in alpha as well.
        let g = |a: f64| lhs_general(&f, &model, a);
        assert_relative_eq!(g(1.0), (g(0.0) + g(2.0)) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_functionals_give_zero_residuals() {
        let model = log_model(1.0, 1.0, 1.0);
        let f = FunctionalSet::default();
        assert_eq!(residual_general(&f, &model, 1.0), 0.0);
        assert_eq!(residual_amplitude(&f, &model), 0.0);
    }

    #[test]
    fn action_consistency_at_unit_lambda() {
        let p = gaussian_profile(2049, 12.0, 1.0, 1.0, 1.0);
        let direct = action_value(&p).unwrap();
        let curve =
            scaling_curve(&p, &[ScalingParams::new(1.5, 0.0, 1.0).unwrap()]).unwrap();
        assert_relative_eq!(curve[0].1, direct, max_relative = 1e-13);
    }

    #[test]
    fn charge_of_gaussian() {
        // Q = 2 omega V1 for e = 0.
        let p = gaussian_profile(2049, 12.0, 1.0, 1.0, 1.0);
        let q = charge(&p).unwrap();
        let e2 = std::f64::consts::E * std::f64::consts::E;
        assert_relative_eq!(q, 2.0 * e2 * PI.powf(1.5), max_relative = 1e-9);
    }

    #[test]
    fn refuses_undecayed_profiles() {
        let model = log_model(1.0, 1.0, 1.0);
        let n = 64;
        let h = 2.0 / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        // Gaussian truncated at r = 2: far from decayed.
        let phi: Vec<f64> = r.iter().map(|&ri| (-0.5 * ri * ri).exp()).collect();
        let p = RadialProfile::new(r, phi, vec![0.0; n], model, 0.0).unwrap();
        assert!(matches!(
            compute_functionals(&p),
            Err(VirialError::Profile(ProfileError::DecayViolated(_)))
        ));
    }

    #[test]
    fn power_law_route_rejects_other_families() {
        let model = log_model(1.0, 1.0, 1.0);
        let f = FunctionalSet::default();
        assert!(residual_power_law(&f, &model, 1.0, 0.0).is_err());
        assert!(closed_form_action(&f, &model, ScalingParams::new(1.0, 0.0, 2.0).unwrap())
            .is_err());
    }
}
