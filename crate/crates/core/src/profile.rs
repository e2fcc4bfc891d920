//! Discretized radial field profiles and their on-disk formats.
//!
//! Profiles serialize to CSV (columns r, phi, a0, 17 significant digits) and
//! to JSON with the model and residual metadata attached. Both formats
//! round-trip bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::potentials::ModelConfig;

/// Relative level below the central value that the scalar field must reach at
/// the outer edge of the grid.
pub const DECAY_LEVEL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("invalid profile: {0}")]
    Invalid(String),
    #[error("decay invariant violated: {0}")]
    DecayViolated(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// A standing-wave profile phi(r), A0(r) on a finite radial grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    r: Vec<f64>,
    phi: Vec<f64>,
    a0: Vec<f64>,
    model: ModelConfig,
    ode_residual: f64,
}

impl RadialProfile {
    /// Builds a profile after checking the structural invariants: equal-length
    /// finite arrays, at least three points, a strictly increasing grid
    /// starting at r = 0, and A0 identically zero when e = 0.
    pub fn new(
        r: Vec<f64>,
        phi: Vec<f64>,
        a0: Vec<f64>,
        model: ModelConfig,
        ode_residual: f64,
    ) -> Result<Self, ProfileError> {
        if r.len() < 3 {
            return Err(ProfileError::Invalid("grid needs at least three points".into()));
        }
        if phi.len() != r.len() || a0.len() != r.len() {
            return Err(ProfileError::Invalid("field arrays must match the grid length".into()));
        }
        if r[0] != 0.0 {
            return Err(ProfileError::Invalid(format!("grid must start at r = 0, got {}", r[0])));
        }
        for w in r.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ProfileError::Invalid("grid must be strictly increasing".into()));
            }
        }
        for v in r.iter().chain(&phi).chain(&a0) {
            if !v.is_finite() {
                return Err(ProfileError::Invalid("non-finite value in profile".into()));
            }
        }
        if model.e() == 0.0 && a0.iter().any(|&v| v != 0.0) {
            return Err(ProfileError::Invalid(
                "A0 must vanish identically when e = 0".into(),
            ));
        }
        Ok(RadialProfile { r, phi, a0, model, ode_residual })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn ode_residual(&self) -> f64 {
        self.ode_residual
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Grid spacing, requiring uniformity to within a relative 1e-9 (the
    /// finite-difference and quadrature kernels assume it).
    pub fn spacing(&self) -> Result<f64, ProfileError> {
        let h = self.r[1] - self.r[0];
        for w in self.r.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(ProfileError::Invalid("grid is not uniform".into()));
            }
        }
        Ok(h)
    }

    /// Checks the localization invariants: |phi(R)| below `DECAY_LEVEL` times
    /// the central value and |A0(R)| below `DECAY_LEVEL` times max |A0|.
    /// Profiles built by the solvers always satisfy this; loaded ones may not.
    pub fn check_decay(&self) -> Result<(), ProfileError> {
        self.check_decay_with(DECAY_LEVEL, DECAY_LEVEL)
    }

    /// Decay gate with separate levels for the scalar and gauge fields.
    ///
    /// Quadrature only needs the scalar tail small; the gauge field of a
    /// rescaled gauged profile legitimately carries a screened-Coulomb
    /// leftover at the boundary (an integrable 1/r tail, not an uncontrolled
    /// one), so functional evaluation uses a looser gauge-field level.
    pub fn check_decay_with(&self, phi_level: f64, a0_level: f64) -> Result<(), ProfileError> {
        let phi0 = self.phi[0].abs();
        let phi_edge = self.phi.last().unwrap().abs();
        if phi0 > 0.0 && phi_edge >= phi_level * phi0 {
            return Err(ProfileError::DecayViolated(format!(
                "|phi(R)| = {phi_edge:e} vs {phi_level:e} * |phi(0)| = {:e}",
                phi_level * phi0
            )));
        }
        let a0_max = self.a0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let a0_edge = self.a0.last().unwrap().abs();
        if a0_max > 0.0 && a0_edge >= a0_level * a0_max {
            return Err(ProfileError::DecayViolated(format!(
                "|A0(R)| = {a0_edge:e} vs {a0_level:e} * max|A0| = {:e}",
                a0_level * a0_max
            )));
        }
        Ok(())
    }

    /// Number of strict sign changes of phi over the grid.
    pub fn node_count(&self) -> usize {
        count_nodes(&self.phi)
    }

    /// CSV rendering with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 64);
        out.push_str("r,phi,a0\n");
        for i in 0..self.len() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", self.r[i], self.phi[i], self.a0[i]);
        }
        out
    }

    /// Parses the CSV written by [`to_csv`]; the model and residual are not
    /// part of the CSV and must be supplied.
    pub fn from_csv(
        text: &str,
        model: ModelConfig,
        ode_residual: f64,
    ) -> Result<Self, ProfileError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "r,phi,a0" => {}
            other => {
                return Err(ProfileError::Parse(format!(
                    "expected header 'r,phi,a0', got {other:?}"
                )))
            }
        }
        let mut r = Vec::new();
        let mut phi = Vec::new();
        let mut a0 = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let mut field = |name: &str| -> Result<f64, ProfileError> {
                cols.next()
                    .ok_or_else(|| {
                        ProfileError::Parse(format!("row {}: missing {name}", idx + 2))
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| ProfileError::Parse(format!("row {}: {name}: {e}", idx + 2)))
            };
            r.push(field("r")?);
            phi.push(field("phi")?);
            a0.push(field("a0")?);
        }
        RadialProfile::new(r, phi, a0, model, ode_residual)
    }
}

/// Counts strict sign changes, skipping exact zeros.
pub fn count_nodes(values: &[f64]) -> usize {
    let mut nodes = 0;
    let mut prev = 0.0f64;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if prev != 0.0 && (prev < 0.0) != (v < 0.0) {
            nodes += 1;
        }
        prev = v;
    }
    nodes
}

/// Short hex digest of a value's canonical JSON form, used to fingerprint
/// models and configurations in reports.
pub fn canonical_hash<T: serde::Serialize>(value: &T) -> String {
    let canonical = serde_json::to_string(value).expect("serialization cannot fail");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Model fingerprint carried by profile files so that a verification run can
/// detect a model/profile mismatch.
pub fn model_hash(model: &ModelConfig) -> String {
    canonical_hash(model)
}

/// JSON profile record: the profile plus provenance and solver diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub model: ModelConfig,
    pub model_hash: String,
    pub ode_residual: f64,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub a0: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl ProfileRecord {
    pub fn from_profile(profile: &RadialProfile, diagnostics: BTreeMap<String, f64>) -> Self {
        ProfileRecord {
            model: profile.model().clone(),
            model_hash: model_hash(profile.model()),
            ode_residual: profile.ode_residual(),
            r: profile.r().to_vec(),
            phi: profile.phi().to_vec(),
            a0: profile.a0().to_vec(),
            diagnostics,
        }
    }

    pub fn into_profile(self) -> Result<RadialProfile, ProfileError> {
        let model = self.model.normalized().map_err(|e| ProfileError::Parse(e.to_string()))?;
        RadialProfile::new(self.r, self.phi, self.a0, model, self.ode_residual)
    }

    pub fn to_json(&self) -> Result<String, ProfileError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Potential;

    fn sample_profile() -> RadialProfile {
        let model =
            ModelConfig::new(1.0, 0.0, 0.0, Potential::logarithmic(1.0, 1.0).unwrap()).unwrap();
        let n = 64;
        let h = 8.0 / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let phi: Vec<f64> =
            r.iter().map(|&ri| std::f64::consts::E * (-0.5 * ri * ri).exp()).collect();
        let a0 = vec![0.0; n];
        RadialProfile::new(r, phi, a0, model, 1.234e-5).unwrap()
    }

    #[test]
    fn construction_validates() {
        let model =
            ModelConfig::new(1.0, 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![0.0; 2], vec![0.0; 2], model.clone(), 0.0)
            .is_err());
        assert!(RadialProfile::new(
            vec![0.5, 1.0, 2.0],
            vec![0.0; 3],
            vec![0.0; 3],
            model.clone(),
            0.0
        )
        .is_err());
        assert!(RadialProfile::new(
            vec![0.0, 1.0, 1.0],
            vec![0.0; 3],
            vec![0.0; 3],
            model.clone(),
            0.0
        )
        .is_err());
        // e = 0 demands A0 = 0.
        assert!(RadialProfile::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0; 3],
            vec![0.1, 0.0, 0.0],
            model,
            0.0
        )
        .is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let p = sample_profile();
        let text = p.to_csv();
        let q = RadialProfile::from_csv(&text, p.model().clone(), p.ode_residual()).unwrap();
        assert_eq!(p.phi(), q.phi());
        assert_eq!(p.r(), q.r());
        assert_eq!(p.a0(), q.a0());
        assert_eq!(text, q.to_csv());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = sample_profile();
        let rec = ProfileRecord::from_profile(&p, BTreeMap::new());
        let text = rec.to_json().unwrap();
        let back = ProfileRecord::from_json(&text).unwrap().into_profile().unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn model_hash_distinguishes_models() {
        let a = ModelConfig::new(1.0, 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
        let b = ModelConfig::new(1.1, 0.0, 0.0, Potential::quartic(1.0, 1.0).unwrap()).unwrap();
        assert_ne!(model_hash(&a), model_hash(&b));
        assert_eq!(model_hash(&a), model_hash(&a.clone()));
    }

    #[test]
    fn decay_check_and_nodes() {
        let p = sample_profile();
        assert!(p.check_decay().is_ok());
        assert_eq!(p.node_count(), 0);
        assert_eq!(count_nodes(&[1.0, 0.5, -0.2, -0.1, 0.0, 0.3]), 2);
        assert_eq!(count_nodes(&[1.0, 0.0, 1.0]), 0);
    }
}
