//! Non-existence certification: the closed-form classifier for power-law
//! potentials and sampled sign-checking of the general pointwise inequalities.
//!
//! "For all phi" is not decidable numerically, so the checker samples a union
//! of linear and logarithmic grids, refines every sign change by bisection and
//! reports a three-valued verdict. A relative tolerance band (normalized by
//! the pointwise term scale of each expression) maps borderline cases to
//! `Inconclusive` instead of forcing a call. `NotExcluded` is never an
//! existence claim.

use serde::{Deserialize, Serialize};

use crate::numerics::bisect_root;
use crate::potentials::{condition_expr, condition_scale, ConditionId, ModelConfig, ModelError};

/// Default upper end of the sampled field range, in natural units.
pub const DEFAULT_PHI_MAX: f64 = 1e3;
/// Default number of sample points per condition.
pub const DEFAULT_SAMPLES: usize = 512;
/// Default relative tolerance band.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Normalized magnitudes at or below this level count as exact equality; the
/// paper's non-strict inequalities include the boundary, so an expression
/// that vanishes identically (up to floating-point noise) still excludes.
const EQUALITY_BAND: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Excluded,
    NotExcluded,
    Inconclusive,
}

/// Outcome of one non-existence check.
///
/// `condition` names the inequality or parameter-table case that produced an
/// exclusion. `witness` is a field value at which the tested inequality
/// demonstrably fails (for the one-signedness condition it is a sign-change
/// location, where both strict inequalities fail at once). `margin` is the
/// normalized magnitude of the extremum that sat inside the tolerance band
/// and blocked a definite verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoGoVerdict {
    pub status: VerdictStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl NoGoVerdict {
    pub fn excluded(condition: impl Into<String>) -> Self {
        NoGoVerdict {
            status: VerdictStatus::Excluded,
            condition: Some(condition.into()),
            witness: None,
            margin: None,
        }
    }

    pub fn not_excluded(witness: Option<f64>) -> Self {
        NoGoVerdict {
            status: VerdictStatus::NotExcluded,
            condition: None,
            witness,
            margin: None,
        }
    }

    pub fn inconclusive(condition: impl Into<String>, margin: f64) -> Self {
        NoGoVerdict {
            status: VerdictStatus::Inconclusive,
            condition: Some(condition.into()),
            witness: None,
            margin: Some(margin),
        }
    }

    pub fn is_excluded(&self) -> bool {
        self.status == VerdictStatus::Excluded
    }
}

/// Field range [lo, hi] over which the pointwise inequalities are tested.
/// The origin itself is never sampled: every condition expression vanishes
/// there identically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiRange {
    lo: f64,
    hi: f64,
}

impl PhiRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(ModelError::NonFinite("field range".into()));
        }
        if !(0.0 <= lo && lo < hi) {
            return Err(ModelError::InvalidRange(format!(
                "field range must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(PhiRange { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl Default for PhiRange {
    fn default() -> Self {
        PhiRange { lo: 0.0, hi: DEFAULT_PHI_MAX }
    }
}

/// Union of a linear and a logarithmic grid on the range, sorted, deduplicated
/// and excluding phi = 0. The log grid reaches six decades below the upper
/// end when the range starts at zero.
fn sample_grid(range: PhiRange, n: usize) -> Vec<f64> {
    let n_lin = n / 2;
    let n_log = n - n_lin;
    let mut pts = Vec::with_capacity(n + 1);
    if range.lo > 0.0 {
        pts.push(range.lo);
    }
    for i in 1..=n_lin {
        pts.push(range.lo + (range.hi - range.lo) * i as f64 / n_lin as f64);
    }
    let floor = if range.lo > 0.0 { range.lo } else { range.hi * 1e-6 };
    let ratio = range.hi / floor;
    for i in 0..n_log {
        pts.push(floor * ratio.powf(i as f64 / (n_log - 1) as f64));
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

struct Sampled {
    min_ratio: f64,
    min_at: f64,
    max_ratio: f64,
    max_at: f64,
    /// Bisection-refined locations where the expression changes sign.
    crossings: Vec<f64>,
}

fn sample_condition(model: &ModelConfig, condition: ConditionId, grid: &[f64]) -> Sampled {
    let ratio_at = |phi: f64| {
        let scale = condition_scale(model, condition, phi);
        if scale == 0.0 {
            0.0
        } else {
            condition_expr(model, condition, phi) / scale
        }
    };
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_at = grid[0];
    let mut max_at = grid[0];
    let mut prev: Option<(f64, f64)> = None;
    let mut crossings = Vec::new();
    for &phi in grid {
        let r = ratio_at(phi);
        if r < min_ratio {
            min_ratio = r;
            min_at = phi;
        }
        if r > max_ratio {
            max_ratio = r;
            max_at = phi;
        }
        if let Some((p_phi, p_r)) = prev {
            if p_r != 0.0 && r != 0.0 && (p_r < 0.0) != (r < 0.0) {
                let root = bisect_root(
                    |x| condition_expr(model, condition, x),
                    p_phi,
                    phi,
                    80,
                );
                crossings.push(root);
            }
        }
        prev = Some((phi, r));
    }
    Sampled { min_ratio, min_at, max_ratio, max_at, crossings }
}

/// Checks one pointwise inequality over the range by sampling `n` points and
/// refining sign changes.
///
/// The sign conditions exclude when the normalized expression stays above
/// `-EQUALITY_BAND` everywhere (the paper's inequalities are non-strict, so an
/// identically vanishing expression excludes). The one-signedness condition
/// excludes only when every sample clears the tolerance band on a single side,
/// exactly as strict inequalities demand. Extrema inside the band yield
/// `Inconclusive`.
pub fn check_condition(
    model: &ModelConfig,
    condition: ConditionId,
    range: PhiRange,
    n: usize,
    tol: f64,
) -> Result<NoGoVerdict, ModelError> {
    if n < 16 {
        return Err(ModelError::InvalidRange(format!(
            "condition sampling needs n >= 16, got {n}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ModelError::InvalidRange(format!("tolerance must be positive, got {tol}")));
    }
    match condition {
        ConditionId::FrequencyBound if model.omega() == 0.0 => {
            return Err(ModelError::InvalidModel(
                "the frequency-bound condition requires omega != 0".into(),
            ));
        }
        ConditionId::Balance if model.e() != 0.0 || model.m() != 0.0 => {
            return Err(ModelError::InvalidModel(
                "the balance condition applies to the Q-ball sector only (e = 0, m = 0)".into(),
            ));
        }
        _ => {}
    }
    let grid = sample_grid(range, n);
    let s = sample_condition(model, condition, &grid);
    let label = condition.label();
    let verdict = if condition == ConditionId::Balance {
        if s.min_ratio > tol {
            NoGoVerdict::excluded(label)
        } else if s.max_ratio < -tol {
            NoGoVerdict::excluded(label)
        } else if s.min_ratio < -tol && s.max_ratio > tol {
            let witness = s.crossings.first().copied().unwrap_or_else(|| {
                if s.min_ratio.abs() < s.max_ratio.abs() {
                    s.min_at
                } else {
                    s.max_at
                }
            });
            NoGoVerdict::not_excluded(Some(witness))
        } else {
            let margin = match (s.min_ratio.abs() <= tol, s.max_ratio.abs() <= tol) {
                (true, false) => s.min_ratio.abs(),
                (false, true) => s.max_ratio.abs(),
                _ => s.min_ratio.abs().min(s.max_ratio.abs()),
            };
            NoGoVerdict::inconclusive(label, margin)
        }
    } else if s.min_ratio >= -EQUALITY_BAND {
        NoGoVerdict::excluded(label)
    } else if s.min_ratio < -tol {
        NoGoVerdict::not_excluded(Some(s.min_at))
    } else {
        NoGoVerdict::inconclusive(label, s.min_ratio.abs())
    };
    Ok(verdict)
}

/// Closed-form non-existence table for V = gamma |phi|^p.
///
/// Returns `Excluded` with the matching case label when the parameters fall
/// in one of the five published regions; otherwise `NotExcluded` with no
/// witness (the table makes no existence claim). `m2` and `omega2` are the
/// squared mass and frequency.
pub fn classify_power_law(
    gamma: f64,
    p: f64,
    m2: f64,
    omega2: f64,
) -> Result<NoGoVerdict, ModelError> {
    if ![gamma, p, m2, omega2].iter().all(|x| x.is_finite()) {
        return Err(ModelError::NonFinite("power-law classification input".into()));
    }
    if p <= 1.0 {
        return Err(ModelError::InvalidPotential(format!(
            "power-law exponent must satisfy p > 1, got p = {p}"
        )));
    }
    if m2 < 0.0 || omega2 < 0.0 {
        return Err(ModelError::InvalidModel(
            "m2 and omega2 are squares and must be nonnegative".into(),
        ));
    }
    let verdict = if gamma == 0.0 {
        NoGoVerdict::excluded("gamma=0")
    } else if gamma > 0.0 {
        if p >= 2.0 {
            NoGoVerdict::excluded("gamma>0, p>=2")
        } else if m2 >= omega2 {
            NoGoVerdict::excluded("gamma>0, 1<p<2, m2>=omega2")
        } else {
            NoGoVerdict::not_excluded(None)
        }
    } else if p <= 2.0 {
        NoGoVerdict::excluded("gamma<0, 1<p<=2")
    } else if p >= 6.0 && m2 >= omega2 && omega2 > 0.0 {
        NoGoVerdict::excluded("gamma<0, p>=6, m2>=omega2>0")
    } else {
        NoGoVerdict::not_excluded(None)
    };
    Ok(verdict)
}

/// Per-condition verdict paired with its identifier.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: ConditionId,
    pub verdict: NoGoVerdict,
}

/// Verdicts for every applicable condition plus the aggregate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralClassification {
    pub per_condition: Vec<ConditionVerdict>,
    pub aggregate: NoGoVerdict,
}

/// Conditions applicable to the model's sector.
///
/// With a gauge coupling the full set applies (the frequency-bound condition
/// only when omega != 0, since its proof leans on the gauge-field equation at
/// nonzero frequency). Without one, the gauge-field equation carries no
/// information, so the frequency-bound condition drops out; the two-sided
/// balance condition replaces it when additionally m = 0.
pub fn applicable_conditions(model: &ModelConfig) -> Vec<ConditionId> {
    if model.e() > 0.0 {
        let mut v = vec![ConditionId::Slope];
        if model.omega() != 0.0 {
            v.push(ConditionId::FrequencyBound);
        }
        v.extend([ConditionId::EnergyDominance, ConditionId::Amplitude]);
        v
    } else if model.m() == 0.0 {
        vec![
            ConditionId::Slope,
            ConditionId::Balance,
            ConditionId::EnergyDominance,
            ConditionId::Amplitude,
        ]
    } else {
        vec![ConditionId::Slope, ConditionId::EnergyDominance, ConditionId::Amplitude]
    }
}

/// Runs every applicable condition and aggregates: `Excluded` if any condition
/// excludes, else `Inconclusive` if any is inconclusive, else `NotExcluded`
/// (carrying the first condition's witness).
pub fn classify_general(
    model: &ModelConfig,
    range: PhiRange,
    n: usize,
    tol: f64,
) -> Result<GeneralClassification, ModelError> {
    let mut per_condition = Vec::new();
    for condition in applicable_conditions(model) {
        let verdict = check_condition(model, condition, range, n, tol)?;
        per_condition.push(ConditionVerdict { condition, verdict });
    }
    let aggregate = if let Some(cv) =
        per_condition.iter().find(|cv| cv.verdict.status == VerdictStatus::Excluded)
    {
        cv.verdict.clone()
    } else if let Some(cv) = per_condition
        .iter()
        .filter(|cv| cv.verdict.status == VerdictStatus::Inconclusive)
        .min_by(|a, b| {
            let ma = a.verdict.margin.unwrap_or(f64::INFINITY);
            let mb = b.verdict.margin.unwrap_or(f64::INFINITY);
            ma.partial_cmp(&mb).unwrap()
        }) {
        cv.verdict.clone()
    } else {
        let witness = per_condition.iter().find_map(|cv| cv.verdict.witness);
        NoGoVerdict::not_excluded(witness)
    };
    Ok(GeneralClassification { per_condition, aggregate })
}
