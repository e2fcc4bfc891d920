//! Numerical toolkit for standing-wave solitons of the nonlinear
//! Klein-Gordon-Maxwell system and of ungauged Q-balls.
//!
//! The crate constructs radial soliton profiles (bisection shooting for the
//! ungauged field, damped Newton relaxation with gauge-coupling continuation
//! for the coupled system), evaluates the integral functionals of a profile,
//! verifies the scaling (virial) identities any genuine solution must satisfy,
//! and classifies potentials and parameters against a set of closed-form and
//! sampled non-existence conditions.
//!
//! Modules:
//! - [`potentials`]: potential families, model configuration, pointwise
//!   no-go expressions, the Coleman indicator.
//! - [`nogo`]: closed-form power-law classification and sampled inequality
//!   checking with three-valued verdicts.
//! - [`solver`]: radial profile construction and rescaling.
//! - [`virial`]: functionals, identity residuals and the direct action
//!   stationarity oracle.
//! - [`profile`]: the profile data model and its CSV/JSON formats.

pub mod nogo;
pub mod numerics;
pub mod potentials;
pub mod profile;
pub mod solver;
pub mod virial;

pub use nogo::{
    check_condition, classify_general, classify_power_law, GeneralClassification, NoGoVerdict,
    PhiRange, VerdictStatus,
};
pub use potentials::{
    coleman_indicator, condition_expr, ColemanIndicator, ConditionId, ModelConfig, ModelError,
    Potential,
};
pub use profile::{model_hash, ProfileError, ProfileRecord, RadialProfile};
pub use solver::{
    coulomb_tail_diagnostic, eom_residual, natural_width, rescale_profile, solve_gauged,
    solve_qball, suggest_r_max, EomResidual, GaugedOptions, ShootOptions, SolverError,
};
pub use virial::{
    action_from_functionals, action_value, charge, closed_form_action, compute_functionals,
    residual_amplitude, residual_general, residual_power_law, scaling_curve,
    stationarity_derivative, FunctionalSet, ScalingParams, VirialError,
};
