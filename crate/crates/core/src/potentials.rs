//! Scalar self-interaction potentials, the model configuration that fixes the
//! reduced action, and the pointwise expressions behind every no-go condition.
//!
//! All built-in families satisfy V(0) = 0, V'(0) = 0 and V(phi) = V(-phi).
//! Pointwise evaluations are total functions on f64 (non-finite inputs
//! propagate); the module entry points that the spec marks as fallible
//! validate their inputs and return [`ModelError`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from potential/model construction and validated evaluations.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid potential parameter: {0}")]
    InvalidPotential(String),
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("unknown condition id: {0}")]
    UnknownCondition(String),
}

/// One even monomial of a polynomial potential: `coeff * phi^power`.
pub type PolyTerm = (u32, f64);

/// A scalar self-interaction V(phi).
///
/// Serialized as a flat record tagged by `family`, e.g.
/// `{"family":"power_law","gamma":1.0,"p":4.0}`,
/// `{"family":"quartic","mu2":1.0,"g":1.0}`,
/// `{"family":"logarithmic","mu2":1.0,"g":1.0}`,
/// `{"family":"polynomial","coeffs":[[2,1.0],[4,-2.0],[6,1.0]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential {
    /// V = gamma * |phi|^p with p > 1.
    PowerLaw { gamma: f64, p: f64 },
    /// V = mu2 * phi^2 - g^2 * phi^4; `g` is stored and squared internally so
    /// the quartic coupling is never negative.
    Quartic { mu2: f64, g: f64 },
    /// V = mu2 * phi^2 - g * phi^2 * ln(phi^2), extended continuously by
    /// V(0) = 0, V'(0) = 0. `g` may take either sign.
    Logarithmic { mu2: f64, g: f64 },
    /// Sum of even monomials with powers >= 2.
    Polynomial { coeffs: Vec<PolyTerm> },
}

impl Potential {
    pub fn power_law(gamma: f64, p: f64) -> Result<Self, ModelError> {
        let v = Potential::PowerLaw { gamma, p };
        v.validate()?;
        Ok(v)
    }

    pub fn quartic(mu2: f64, g: f64) -> Result<Self, ModelError> {
        let v = Potential::Quartic { mu2, g: g.abs() };
        v.validate()?;
        Ok(v)
    }

    pub fn logarithmic(mu2: f64, g: f64) -> Result<Self, ModelError> {
        let v = Potential::Logarithmic { mu2, g };
        v.validate()?;
        Ok(v)
    }

    pub fn polynomial(coeffs: Vec<PolyTerm>) -> Result<Self, ModelError> {
        let v = Potential::Polynomial { coeffs };
        v.validate()?;
        Ok(v)
    }

    /// Checks the family invariants; deserialized values must pass through
    /// here before use (ModelConfig::new does so).
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Potential::PowerLaw { gamma, p } => {
                if !gamma.is_finite() || !p.is_finite() {
                    return Err(ModelError::NonFinite("power-law parameters".into()));
                }
                if *p <= 1.0 {
                    return Err(ModelError::InvalidPotential(format!(
                        "power-law exponent must satisfy p > 1, got p = {p}"
                    )));
                }
            }
            Potential::Quartic { mu2, g } => {
                if !mu2.is_finite() || !g.is_finite() {
                    return Err(ModelError::NonFinite("quartic parameters".into()));
                }
                if *mu2 < 0.0 {
                    return Err(ModelError::InvalidPotential(format!(
                        "quartic mass term must satisfy mu2 >= 0, got {mu2}"
                    )));
                }
                if *g < 0.0 {
                    return Err(ModelError::InvalidPotential(
                        "quartic coupling is stored as g >= 0 (it enters squared)".into(),
                    ));
                }
            }
            Potential::Logarithmic { mu2, g } => {
                if !mu2.is_finite() || !g.is_finite() {
                    return Err(ModelError::NonFinite("logarithmic parameters".into()));
                }
                if *mu2 < 0.0 {
                    return Err(ModelError::InvalidPotential(format!(
                        "logarithmic mass term must satisfy mu2 >= 0, got {mu2}"
                    )));
                }
            }
            Potential::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(ModelError::InvalidPotential(
                        "polynomial potential needs at least one term".into(),
                    ));
                }
                for (power, coeff) in coeffs {
                    if !coeff.is_finite() {
                        return Err(ModelError::NonFinite("polynomial coefficient".into()));
                    }
                    if *power < 2 || *power % 2 != 0 {
                        return Err(ModelError::InvalidPotential(format!(
                            "polynomial powers must be even and >= 2, got {power}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// V(phi). Exactly 0 at phi = 0 and even in phi for every family.
    pub fn value(&self, phi: f64) -> f64 {
        match self {
            Potential::PowerLaw { gamma, p } => gamma * phi.abs().powf(*p),
            Potential::Quartic { mu2, g } => {
                let p2 = phi * phi;
                mu2 * p2 - (g * g) * p2 * p2
            }
            Potential::Logarithmic { mu2, g } => {
                if phi == 0.0 {
                    return 0.0;
                }
                // ln(phi^2) as 2 ln|phi|: phi^2 underflows long before phi.
                let p2 = phi * phi;
                mu2 * p2 - g * p2 * (2.0 * phi.abs().ln())
            }
            Potential::Polynomial { coeffs } => {
                coeffs.iter().map(|(k, c)| c * phi.powi(*k as i32)).sum()
            }
        }
    }

    /// dV/dphi. Odd in phi and 0 at phi = 0; for a power law with 1 < p < 2
    /// this is the continuous branch gamma*p*|phi|^(p-1)*sign(phi).
    pub fn slope(&self, phi: f64) -> f64 {
        match self {
            Potential::PowerLaw { gamma, p } => {
                if phi == 0.0 {
                    return 0.0;
                }
                gamma * p * phi.abs().powf(p - 1.0) * phi.signum()
            }
            Potential::Quartic { mu2, g } => 2.0 * mu2 * phi - 4.0 * (g * g) * phi.powi(3),
            Potential::Logarithmic { mu2, g } => {
                if phi == 0.0 {
                    return 0.0;
                }
                2.0 * phi * (mu2 - g - g * (2.0 * phi.abs().ln()))
            }
            Potential::Polynomial { coeffs } => coeffs
                .iter()
                .map(|(k, c)| c * f64::from(*k) * phi.powi(*k as i32 - 1))
                .sum(),
        }
    }

    /// d2V/dphi2. Unbounded at phi = 0 for the logarithmic family and for
    /// power laws with p < 2 (the signed infinity of the limit is returned);
    /// callers doing Newton steps must not evaluate it at phi = 0 for those
    /// families.
    pub fn curvature(&self, phi: f64) -> f64 {
        match self {
            Potential::PowerLaw { gamma, p } => {
                if phi == 0.0 {
                    return match () {
                        _ if *p > 2.0 => 0.0,
                        _ if *p == 2.0 => 2.0 * gamma,
                        _ => gamma.signum() * f64::INFINITY,
                    };
                }
                gamma * p * (p - 1.0) * phi.abs().powf(p - 2.0)
            }
            Potential::Quartic { mu2, g } => 2.0 * mu2 - 12.0 * (g * g) * phi * phi,
            Potential::Logarithmic { mu2, g } => {
                if phi == 0.0 {
                    return if *g > 0.0 {
                        f64::INFINITY
                    } else if *g < 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        2.0 * mu2
                    };
                }
                2.0 * mu2 - 6.0 * g - 2.0 * g * (2.0 * phi.abs().ln())
            }
            Potential::Polynomial { coeffs } => coeffs
                .iter()
                .map(|(k, c)| {
                    let kf = f64::from(*k);
                    c * kf * (kf - 1.0) * phi.powi(*k as i32 - 2)
                })
                .sum(),
        }
    }

    /// V''(0) when finite, None when the curvature diverges at the origin
    /// (logarithmic family with g != 0, power laws with p < 2). Used for
    /// linearized decay-rate estimates.
    pub fn curvature_at_origin(&self) -> Option<f64> {
        let c = self.curvature(0.0);
        c.is_finite().then_some(c)
    }
}

/// Frequency, mass, gauge coupling and potential: everything that fixes the
/// reduced radial system.
///
/// omega is normalized to omega >= 0 at construction (omega -> -omega,
/// A0 -> -A0 is a symmetry of the action). e = 0 selects the pure Q-ball
/// sector, in which any admissible profile has A0 identically zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    omega: f64,
    m: f64,
    e: f64,
    potential: Potential,
}

impl ModelConfig {
    pub fn new(omega: f64, m: f64, e: f64, potential: Potential) -> Result<Self, ModelError> {
        if !omega.is_finite() || !m.is_finite() || !e.is_finite() {
            return Err(ModelError::NonFinite("model parameters".into()));
        }
        if m < 0.0 {
            return Err(ModelError::InvalidModel(format!("mass must satisfy m >= 0, got {m}")));
        }
        if e < 0.0 {
            return Err(ModelError::InvalidModel(format!(
                "gauge coupling must satisfy e >= 0, got {e}"
            )));
        }
        potential.validate()?;
        Ok(ModelConfig { omega: omega.abs(), m, e, potential })
    }

    /// Re-validates a deserialized configuration and applies the omega >= 0
    /// normalization.
    pub fn normalized(self) -> Result<Self, ModelError> {
        ModelConfig::new(self.omega, self.m, self.e, self.potential)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Same model with a different gauge coupling; used by the continuation
    /// solver.
    pub fn with_e(&self, e: f64) -> Result<Self, ModelError> {
        ModelConfig::new(self.omega, self.m, e, self.potential.clone())
    }

    /// Squared linearized decay rate of the field about phi = 0:
    /// kappa^2 = m^2 - omega^2 + V''(0)/2. None when V''(0) diverges
    /// (super-exponentially decaying families).
    pub fn decay_rate_sq(&self) -> Option<f64> {
        self.potential
            .curvature_at_origin()
            .map(|c| self.m * self.m - self.omega * self.omega + 0.5 * c)
    }
}

/// Identifies one of the pointwise no-go inequalities.
///
/// The first four are required to be `expr >= 0` over the field range; the
/// balance condition excludes only when the expression is strictly one-signed
/// away from phi = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// V'(phi)*phi - 2 V(phi) >= 0.
    Slope,
    /// 4 (m^2 - omega^2) phi^2 - (V'(phi)*phi - 6 V(phi)) >= 0, omega != 0.
    FrequencyBound,
    /// V(phi) - (omega^2 - m^2) phi^2 >= 0.
    EnergyDominance,
    /// V'(phi)*phi - 2 (omega^2 - m^2) phi^2 >= 0, from amplitude-only
    /// variations.
    Amplitude,
    /// 4 omega^2 phi^2 + V'(phi)*phi - 6 V(phi) strictly one-signed for
    /// phi != 0; Q-ball sector only (e = 0, m = 0).
    Balance,
}

impl ConditionId {
    pub const ALL: [ConditionId; 5] = [
        ConditionId::Slope,
        ConditionId::FrequencyBound,
        ConditionId::EnergyDominance,
        ConditionId::Amplitude,
        ConditionId::Balance,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ConditionId::Slope => "slope",
            ConditionId::FrequencyBound => "frequency_bound",
            ConditionId::EnergyDominance => "energy_dominance",
            ConditionId::Amplitude => "amplitude",
            ConditionId::Balance => "balance",
        }
    }
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ConditionId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slope" => Ok(ConditionId::Slope),
            "frequency_bound" => Ok(ConditionId::FrequencyBound),
            "energy_dominance" => Ok(ConditionId::EnergyDominance),
            "amplitude" => Ok(ConditionId::Amplitude),
            "balance" => Ok(ConditionId::Balance),
            other => Err(ModelError::UnknownCondition(other.into())),
        }
    }
}

/// Left-hand side of the inequality selected by `condition`, evaluated at
/// `phi`. Every expression is exactly 0 at phi = 0 and even in phi.
pub fn condition_expr(model: &ModelConfig, condition: ConditionId, phi: f64) -> f64 {
    let v = model.potential().value(phi);
    let sp = model.potential().slope(phi) * phi;
    let p2 = phi * phi;
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    match condition {
        ConditionId::Slope => sp - 2.0 * v,
        ConditionId::FrequencyBound => 4.0 * (m2 - omega2) * p2 - (sp - 6.0 * v),
        ConditionId::EnergyDominance => v - (omega2 - m2) * p2,
        ConditionId::Amplitude => sp - 2.0 * (omega2 - m2) * p2,
        ConditionId::Balance => 4.0 * omega2 * p2 + sp - 6.0 * v,
    }
}

/// Pointwise magnitude scale of the same expression: the sum of the absolute
/// values of its terms. Normalizing by this makes the checker's tolerance
/// band scale-free across models and field magnitudes.
pub fn condition_scale(model: &ModelConfig, condition: ConditionId, phi: f64) -> f64 {
    let v = model.potential().value(phi);
    let sp = model.potential().slope(phi) * phi;
    let p2 = phi * phi;
    let omega2 = model.omega() * model.omega();
    let m2 = model.m() * model.m();
    match condition {
        ConditionId::Slope => sp.abs() + 2.0 * v.abs(),
        ConditionId::FrequencyBound => {
            (4.0 * (m2 - omega2) * p2).abs() + sp.abs() + 6.0 * v.abs()
        }
        ConditionId::EnergyDominance => v.abs() + ((omega2 - m2) * p2).abs(),
        ConditionId::Amplitude => sp.abs() + (2.0 * (omega2 - m2) * p2).abs(),
        ConditionId::Balance => 4.0 * omega2 * p2 + sp.abs() + 6.0 * v.abs(),
    }
}

/// Result of sampling V(phi)/phi^2 over a positive field range.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ColemanIndicator {
    pub min_location: f64,
    pub min_value: f64,
    /// True when the minimizer lies strictly inside the sampled range; an
    /// interior minimum at phi != 0 is the classic hallmark of a potential
    /// that can support Q-balls.
    pub attained_interior: bool,
}

/// Samples V(phi)/phi^2 on `n` log-spaced points of [phi_lo, phi_hi] and
/// refines the minimum by golden-section search.
pub fn coleman_indicator(
    potential: &Potential,
    phi_lo: f64,
    phi_hi: f64,
    n: usize,
) -> Result<ColemanIndicator, ModelError> {
    if !(phi_lo.is_finite() && phi_hi.is_finite()) {
        return Err(ModelError::NonFinite("coleman range".into()));
    }
    if !(0.0 < phi_lo && phi_lo < phi_hi) {
        return Err(ModelError::InvalidRange(format!(
            "coleman range must satisfy 0 < lo < hi, got [{phi_lo}, {phi_hi}]"
        )));
    }
    if n < 3 {
        return Err(ModelError::InvalidRange("coleman sampling needs n >= 3".into()));
    }
    let ratio = |phi: f64| potential.value(phi) / (phi * phi);
    let log_lo = phi_lo.ln();
    let log_hi = phi_hi.ln();
    let xs: Vec<f64> = (0..n)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let mut best = 0;
    let mut best_val = ratio(xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let val = ratio(x);
        if val < best_val {
            best_val = val;
            best = i;
        }
    }
    if best == 0 || best == n - 1 {
        let loc = xs[best];
        return Ok(ColemanIndicator {
            min_location: loc,
            min_value: ratio(loc),
            attained_interior: false,
        });
    }
    let loc = crate::numerics::golden_min(ratio, xs[best - 1], xs[best + 1], 200);
    let interior = loc > phi_lo * (1.0 + 1e-9) && loc < phi_hi * (1.0 - 1e-9);
    Ok(ColemanIndicator {
        min_location: loc,
        min_value: ratio(loc),
        attained_interior: interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn builtins() -> Vec<Potential> {
        vec![
            Potential::power_law(1.0, 4.0).unwrap(),
            Potential::power_law(-0.7, 1.5).unwrap(),
            Potential::power_law(2.3, 6.0).unwrap(),
            Potential::quartic(1.0, 1.0).unwrap(),
            Potential::quartic(0.5, 2.0).unwrap(),
            Potential::logarithmic(1.0, 1.0).unwrap(),
            Potential::logarithmic(2.0, -0.5).unwrap(),
            Potential::polynomial(vec![(2, 1.0), (4, -2.0), (6, 1.0)]).unwrap(),
        ]
    }

    #[test]
    fn value_examples() {
        let pl = Potential::power_law(1.0, 4.0).unwrap();
        assert_eq!(pl.value(2.0), 16.0);
        let log = Potential::logarithmic(1.0, 1.0).unwrap();
        assert_eq!(log.value(0.0), 0.0);
        let q = Potential::quartic(1.0, 1.0).unwrap();
        assert_eq!(q.value(1.0), 0.0);
    }

    #[test]
    fn slope_examples() {
        let pl = Potential::power_law(1.0, 4.0).unwrap();
        assert_eq!(pl.slope(2.0), 32.0);
        // d/dphi of mu2 phi^2 - g phi^2 ln(phi^2) = 2 phi (mu2 - g - g ln phi^2).
        let log = Potential::logarithmic(1.0, 1.0).unwrap();
        assert_eq!(log.slope(1.0), 0.0);
        for v in builtins() {
            assert_eq!(v.slope(0.0), 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Potential::power_law(1.0, 1.0).is_err());
        assert!(Potential::power_law(1.0, 0.5).is_err());
        assert!(Potential::polynomial(vec![(3, 1.0)]).is_err());
        assert!(Potential::polynomial(vec![(0, 1.0)]).is_err());
        assert!(Potential::quartic(-1.0, 1.0).is_err());
        assert!(ModelConfig::new(1.0, -1.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).is_err());
        assert!(ModelConfig::new(1.0, 0.0, -0.5, Potential::quartic(1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn omega_normalized_to_nonnegative() {
        let m = ModelConfig::new(-2.0, 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(m.omega(), 2.0);
    }

    /// dV/dphi must match central finite differences of V with relative error
    /// <= 1e-6 over |phi| <= 1e6, step by the cube-root-of-epsilon rule; the
    /// logarithmic family gets an absolute bound below |phi| = 1e-8. Cancel-
    /// lation noise in the difference quotient (isolated zeros of V') is
    /// covered by the standard roundoff term eps * |V| / (2h).
    #[test]
    fn slope_matches_finite_differences() {
        let hstep = f64::EPSILON.cbrt();
        for pot in builtins() {
            for decade in -8..=6 {
                for mant in [1.0, 3.7] {
                    for sign in [1.0, -1.0] {
                        let phi = sign * mant * 10f64.powi(decade);
                        let h = hstep * phi.abs();
                        let vp = pot.value(phi + h);
                        let vm = pot.value(phi - h);
                        let fd = (vp - vm) / (2.0 * h);
                        let exact = pot.slope(phi);
                        let roundoff =
                            100.0 * f64::EPSILON * vp.abs().max(vm.abs()) / (2.0 * h);
                        let log_near_zero =
                            matches!(pot, Potential::Logarithmic { .. }) && phi.abs() < 1e-8;
                        // At isolated zeros of V' the sensible scale is the
                        // local derivative magnitude |phi V''|.
                        let curv_scale = (phi * pot.curvature(phi)).abs();
                        let scale = exact.abs().max(1e-3 * curv_scale);
                        let bound = if log_near_zero {
                            1e-6 + roundoff
                        } else {
                            1e-6 * scale + roundoff
                        };
                        assert!(
                            (fd - exact).abs() <= bound,
                            "{pot:?} at phi={phi}: fd={fd} exact={exact} bound={bound}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_matches_finite_differences_of_slope() {
        let hstep = f64::EPSILON.cbrt();
        for pot in builtins() {
            for phi in [0.3, 1.0, 4.2, 117.0] {
                let h = hstep * phi;
                let fd = (pot.slope(phi + h) - pot.slope(phi - h)) / (2.0 * h);
                let exact = pot.curvature(phi);
                assert_relative_eq!(fd, exact, max_relative = 1e-5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn curvature_at_origin_cases() {
        assert_eq!(
            Potential::quartic(1.5, 1.0).unwrap().curvature_at_origin(),
            Some(3.0)
        );
        assert_eq!(
            Potential::power_law(2.0, 2.0).unwrap().curvature_at_origin(),
            Some(4.0)
        );
        assert_eq!(
            Potential::power_law(2.0, 4.0).unwrap().curvature_at_origin(),
            Some(0.0)
        );
        assert_eq!(Potential::power_law(1.0, 1.5).unwrap().curvature_at_origin(), None);
        assert_eq!(Potential::logarithmic(1.0, 1.0).unwrap().curvature_at_origin(), None);
        assert_eq!(
            Potential::polynomial(vec![(2, 2.5), (4, 1.0)]).unwrap().curvature_at_origin(),
            Some(5.0)
        );
    }

    fn model(pot: Potential, omega: f64, m: f64, e: f64) -> ModelConfig {
        ModelConfig::new(omega, m, e, pot).unwrap()
    }

    #[test]
    fn condition_expr_examples() {
        // Slope condition on a power law is gamma (p-2) |phi|^p.
        let pl = model(Potential::power_law(1.3, 3.0).unwrap(), 1.0, 0.0, 0.0);
        for phi in [0.2, 1.0, 7.5] {
            assert_relative_eq!(
                condition_expr(&pl, ConditionId::Slope, phi),
                1.3 * (3.0 - 2.0) * phi.abs().powf(3.0),
                max_relative = 1e-12
            );
        }
        let p2 = model(Potential::power_law(0.9, 2.0).unwrap(), 1.0, 0.0, 0.0);
        for phi in [0.5, 2.0] {
            assert_eq!(condition_expr(&p2, ConditionId::Slope, phi), 0.0);
        }
        // Quartic: V' phi - 2V = -2 g^2 phi^4.
        let q = model(Potential::quartic(1.0, 1.0).unwrap(), 1.0, 0.0, 0.0);
        assert_abs_diff_eq!(condition_expr(&q, ConditionId::Slope, 1.0), -2.0, epsilon = 1e-14);
        // Logarithmic balance expression: (4 omega^2 - 4 mu2 - 2g) phi^2 + 4 g phi^2 ln phi^2.
        let lg = model(Potential::logarithmic(1.3, 0.7).unwrap(), 1.1, 0.0, 0.0);
        for phi in [0.4, 1.0, 3.3] {
            let expect = (4.0 * 1.1f64.powi(2) - 4.0 * 1.3 - 2.0 * 0.7) * phi * phi
                + 4.0 * 0.7 * phi * phi * (phi * phi).ln();
            assert_relative_eq!(
                condition_expr(&lg, ConditionId::Balance, phi),
                expect,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn condition_expr_vanishes_at_zero_and_is_even() {
        let models = vec![
            model(Potential::power_law(-1.0, 2.5).unwrap(), 0.8, 0.7, 0.3),
            model(Potential::quartic(1.0, 2.0).unwrap(), 1.2, 0.0, 0.0),
            model(Potential::logarithmic(1.0, 1.0).unwrap(), 1.0, 0.0, 0.0),
            model(
                Potential::polynomial(vec![(2, 1.0), (4, -2.0), (6, 1.0)]).unwrap(),
                0.5,
                0.2,
                1.0,
            ),
        ];
        for m in &models {
            for c in ConditionId::ALL {
                assert_eq!(condition_expr(m, c, 0.0), 0.0, "{c} at 0");
                for phi in [0.17, 1.0, 42.0] {
                    assert_eq!(
                        condition_expr(m, c, phi),
                        condition_expr(m, c, -phi),
                        "{c} evenness"
                    );
                }
            }
        }
    }

    #[test]
    fn condition_labels_round_trip() {
        for c in ConditionId::ALL {
            assert_eq!(c.label().parse::<ConditionId>().unwrap(), c);
        }
        assert!("nonsense".parse::<ConditionId>().is_err());
    }

    #[test]
    fn coleman_monotone_families_hit_endpoints() {
        // Quartic: V/phi^2 = mu2 - g^2 phi^2 is strictly decreasing.
        let q = Potential::quartic(1.0, 1.0).unwrap();
        let ind = coleman_indicator(&q, 0.1, 3.0, 64).unwrap();
        assert!(!ind.attained_interior);
        assert_relative_eq!(ind.min_location, 3.0, max_relative = 1e-12);
        // Power law p=4: V/phi^2 = phi^2 is increasing.
        let pl = Potential::power_law(1.0, 4.0).unwrap();
        let ind = coleman_indicator(&pl, 0.1, 3.0, 64).unwrap();
        assert!(!ind.attained_interior);
        assert_relative_eq!(ind.min_location, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn coleman_degenerate_vacuum_interior_minimum() {
        // V/phi^2 = (1 - phi^2)^2: interior minimum at phi = 1 with value 0.
        let poly = Potential::polynomial(vec![(2, 1.0), (4, -2.0), (6, 1.0)]).unwrap();
        let ind = coleman_indicator(&poly, 0.05, 10.0, 128).unwrap();
        assert!(ind.attained_interior);
        assert_relative_eq!(ind.min_location, 1.0, max_relative = 1e-6);
        assert_abs_diff_eq!(ind.min_value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coleman_rejects_bad_ranges() {
        let q = Potential::quartic(1.0, 1.0).unwrap();
        assert!(coleman_indicator(&q, 0.0, 1.0, 8).is_err());
        assert!(coleman_indicator(&q, 2.0, 1.0, 8).is_err());
        assert!(coleman_indicator(&q, 0.1, 1.0, 2).is_err());
    }

    proptest! {
        #[test]
        fn value_even_slope_odd(phi in -1e5f64..1e5) {
            for pot in builtins() {
                prop_assert_eq!(pot.value(phi), pot.value(-phi));
                prop_assert_eq!(pot.slope(phi), -pot.slope(-phi));
            }
        }

        #[test]
        fn power_law_slope_closed_form(
            gamma in -5.0f64..5.0,
            p in 1.01f64..7.0,
            phi in -1e3f64..1e3,
        ) {
            let pot = Potential::power_law(gamma, p).unwrap();
            let expect = if phi == 0.0 { 0.0 } else { gamma * p * phi.abs().powf(p - 1.0) * phi.signum() };
            let got = pot.slope(phi);
            let scale = expect.abs().max(1e-300);
            prop_assert!((got - expect).abs() / scale < 1e-12);
        }
    }
}
