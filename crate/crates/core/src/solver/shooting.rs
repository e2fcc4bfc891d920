//! Bisection shooting for the ungauged field equation
//! phi'' + (2/r) phi' = (m^2 - omega^2) phi + V'(phi)/2.
//!
//! A shot integrates the initial-value problem outward from phi(0) = a,
//! phi'(0) = 0 by classical RK4, substepping each grid cell so that the local
//! oscillation phase advances by a bounded amount per substep (large
//! amplitudes oscillate far faster than the storage grid). The shot is
//! classified by its first decisive event: one zero crossing too many
//! (`Over`), or a turning point it is not entitled to / outright divergence
//! (`Under`). A profile with k nodes has exactly k interior extrema, one
//! after each crossing, so an extremum arriving before its crossing means the
//! field was captured away from zero. Bisection narrows the Under/Over
//! boundary to machine precision; the final trajectory is truncated where it
//! peels off and continued with the local exponential tail B e^(-kappa r)/r,
//! which solves the linearized radial equation exactly.

use crate::potentials::ModelConfig;
use crate::profile::RadialProfile;

use super::{fd_residuals, rhs_phi, ShootOptions, ShotClass, ShotRecord, SolverError};

/// Relative field level at which the tail is considered reached.
const GRAFT_FLOOR: f64 = 1e-7;
/// Extrema below this relative level are integration noise, not turns.
const TURN_FLOOR: f64 = 1e-13;
/// |phi| beyond this multiple of the central value counts as divergence.
const DIVERGE_FACTOR: f64 = 10.0;
/// Target phase advance per RK4 substep.
const PHASE_PER_STEP: f64 = 0.2;
/// Hard cap on substeps per grid cell; exceeding it counts as divergence.
const MAX_SUBSTEPS: f64 = 65536.0;

/// One RK4 step of (phi, psi) from radius r with step h; e = 0 sector.
fn rk4_step(model: &ModelConfig, r: f64, h: f64, phi: f64, psi: f64) -> (f64, f64) {
    let deriv = |rr: f64, ph: f64, ps: f64| -> (f64, f64) {
        let rhs = rhs_phi(model, ph, 0.0);
        let dpsi = if rr == 0.0 { rhs / 3.0 } else { rhs - 2.0 * ps / rr };
        (ps, dpsi)
    };
    let (k1p, k1s) = deriv(r, phi, psi);
    let (k2p, k2s) = deriv(r + 0.5 * h, phi + 0.5 * h * k1p, psi + 0.5 * h * k1s);
    let (k3p, k3s) = deriv(r + 0.5 * h, phi + 0.5 * h * k2p, psi + 0.5 * h * k2s);
    let (k4p, k4s) = deriv(r + h, phi + h * k3p, psi + h * k3s);
    (
        phi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        psi + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
    )
}

/// Local phase rate of the trajectory: curvature of the effective potential
/// plus the velocity scale relative to the shot amplitude.
fn phase_rate(model: &ModelConfig, phi: f64, psi: f64, amplitude: f64) -> f64 {
    let omega = model.omega();
    let mut curv = model.potential().curvature(phi);
    if !curv.is_finite() {
        curv = if curv.is_nan() { 0.0 } else { curv.signum() * 1e12 };
    }
    let freq_sq = (model.m() * model.m() - omega * omega + 0.5 * curv).abs();
    freq_sq.sqrt() + psi.abs() / amplitude
}

struct ShotOutcome {
    class: ShotClass,
    nodes: usize,
    /// Grid index at which each zero crossing completed.
    node_cells: Vec<usize>,
    /// Stored grid samples (when requested); valid through `last`.
    phi: Vec<f64>,
    psi: Vec<f64>,
    last: usize,
}

/// Integrates one shot, detecting nodes and extrema at substep resolution and
/// stopping at the first decisive event. Grid samples are stored on request.
fn run_shot(
    model: &ModelConfig,
    amplitude: f64,
    h: f64,
    n: usize,
    k: usize,
    store: bool,
) -> ShotOutcome {
    let mut out = ShotOutcome {
        class: ShotClass::Under,
        nodes: 0,
        node_cells: Vec::new(),
        phi: if store { vec![0.0; n] } else { Vec::new() },
        psi: if store { vec![0.0; n] } else { Vec::new() },
        last: 0,
    };
    if store {
        out.phi[0] = amplitude;
    }
    let mut phi = amplitude;
    let mut psi = 0.0f64;
    let mut prev_phi = phi;
    let mut prev_psi = 0.0f64;
    let mut extrema = 0usize;
    for i in 0..n - 1 {
        let r0 = i as f64 * h;
        let rate = phase_rate(model, phi, psi, amplitude);
        let substeps = (h * rate / PHASE_PER_STEP).ceil().clamp(1.0, MAX_SUBSTEPS);
        if substeps >= MAX_SUBSTEPS {
            out.class = ShotClass::Under;
            return out;
        }
        let m = substeps as usize;
        let hs = h / m as f64;
        for j in 0..m {
            let (p, s) = rk4_step(model, r0 + j as f64 * hs, hs, phi, psi);
            phi = p;
            psi = s;
            if !phi.is_finite() || !psi.is_finite() || phi.abs() > DIVERGE_FACTOR * amplitude {
                out.class = ShotClass::Under;
                return out;
            }
            if phi != 0.0 && prev_phi != 0.0 && (phi < 0.0) != (prev_phi < 0.0) {
                out.nodes += 1;
                out.node_cells.push(i + 1);
                if out.nodes > k {
                    out.class = ShotClass::Over;
                    if store {
                        out.phi[i + 1] = phi;
                        out.psi[i + 1] = psi;
                        out.last = i + 1;
                    }
                    return out;
                }
            }
            if psi != 0.0
                && prev_psi != 0.0
                && (psi < 0.0) != (prev_psi < 0.0)
                && phi.abs() > TURN_FLOOR * amplitude
            {
                extrema += 1;
                if extrema > out.nodes {
                    out.class = ShotClass::Under;
                    if store {
                        out.phi[i + 1] = phi;
                        out.psi[i + 1] = psi;
                        out.last = i + 1;
                    }
                    return out;
                }
            }
            if phi != 0.0 {
                prev_phi = phi;
            }
            if psi != 0.0 {
                prev_psi = psi;
            }
        }
        if store {
            out.phi[i + 1] = phi;
            out.psi[i + 1] = psi;
        }
        out.last = i + 1;
    }
    out.class = if out.nodes == k && phi.abs() < GRAFT_FLOOR * amplitude {
        ShotClass::Decayed
    } else {
        ShotClass::Under
    };
    out
}

/// Decay rate for the grafted tail, from the trajectory itself: the slope of
/// ln(r |phi|) over the decades just above the matching level. The decade
/// closest to the matching point is excluded when enough points exist above
/// it, since a hair-over shot plunges there at far more than the asymptotic
/// rate. Falls back to the local logarithmic derivative and then to the
/// model's linearized rate.
fn tail_rate(model: &ModelConfig, r: &[f64], phi: &[f64], psi: &[f64], t: usize) -> Option<f64> {
    let floor = phi[t].abs();
    let walk_back = |level: f64| -> usize {
        let mut i = t;
        while i > 1 && phi[i - 1].abs() <= level {
            i -= 1;
        }
        i
    };
    let from = walk_back(1e3 * floor);
    let mid = walk_back(10.0 * floor);
    let window = if mid > from + 5 { (from, mid) } else { (from, t + 1) };
    if window.1 > window.0 + 3 {
        if let Some((kappa, _)) =
            crate::numerics::fit_radial_exp_tail(r, phi, window.0, window.1)
        {
            return Some(kappa);
        }
    }
    if phi[t] != 0.0 && r[t] > 0.0 {
        let kappa = -(psi[t] / phi[t] + 1.0 / r[t]);
        if kappa > 0.0 && kappa.is_finite() {
            return Some(kappa);
        }
    }
    model.decay_rate_sq().filter(|&k2| k2 > 0.0).map(f64::sqrt)
}

/// Shooting solver for the pure Q-ball sector (e = 0).
///
/// Bisects the central value on the bracket until the solution has exactly
/// `opts.nodes` zero crossings and decays, then grafts the asymptotic tail
/// beyond the point of closest approach to zero. The potential admitting a
/// localized solution is not assumed: `NoSolution` with the bisection trace
/// is a valid outcome and is the expected one in parameter regions a no-go
/// verdict excludes.
pub fn solve_qball(model: &ModelConfig, opts: &ShootOptions) -> Result<RadialProfile, SolverError> {
    if model.e() != 0.0 {
        return Err(SolverError::InvalidInput(format!(
            "shooting solves the e = 0 sector, got e = {}",
            model.e()
        )));
    }
    if !(opts.r_max > 0.0) || !opts.r_max.is_finite() {
        return Err(SolverError::InvalidInput(format!(
            "r_max must be positive, got {}",
            opts.r_max
        )));
    }
    if opts.n < 32 {
        return Err(SolverError::InvalidInput(format!(
            "grid needs n >= 32 points, got {}",
            opts.n
        )));
    }
    let (lo0, hi0) = opts.bracket;
    if !(lo0 > 0.0 && hi0 > lo0 && hi0.is_finite()) {
        return Err(SolverError::InvalidInput(format!(
            "bracket must satisfy 0 < lo < hi, got ({lo0}, {hi0})"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(SolverError::InvalidInput("tol must be positive".into()));
    }
    let n = opts.n;
    let h = opts.r_max / (n - 1) as f64;
    let k = opts.nodes;
    let mut trace: Vec<ShotRecord> = Vec::new();
    let shoot = |a: f64, trace: &mut Vec<ShotRecord>| -> ShotClass {
        let c = run_shot(model, a, h, n, k, false);
        trace.push(ShotRecord { amplitude: a, class: c.class, nodes: c.nodes });
        c.class
    };

    let cl_lo = shoot(lo0, &mut trace);
    let cl_hi = shoot(hi0, &mut trace);
    let amplitude = if cl_lo == ShotClass::Decayed {
        lo0
    } else if cl_hi == ShotClass::Decayed {
        hi0
    } else if cl_lo == cl_hi {
        let reason = match cl_lo {
            ShotClass::Under => {
                "bracket exhausted: both endpoints undershoot or diverge".to_string()
            }
            _ => format!(
                "bracket exhausted: both endpoints exceed {k} node(s); no {k}-node boundary inside"
            ),
        };
        return Err(SolverError::NoSolution { reason, trace });
    } else {
        let mut lo = lo0;
        let mut hi = hi0;
        let mut found = None;
        for _ in 0..opts.max_bisections {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let c = shoot(mid, &mut trace);
            if c == ShotClass::Decayed {
                found = Some(mid);
                break;
            }
            if c == cl_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        found.unwrap_or(0.5 * (lo + hi))
    };

    validate_monotone_nodes(&trace, amplitude)?;

    // Final trajectory. The matching point t for the tail graft is the most
    // settled point after the k-th crossing: when the shot carries an extra
    // crossing (a hair over the boundary) the search stops just before it.
    let traj = run_shot(model, amplitude, h, n, k, true);
    let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    if traj.nodes < k {
        return Err(SolverError::NoSolution {
            reason: format!("final shot produced {} node(s), expected {k}", traj.nodes),
            trace,
        });
    }
    let search_from = if k == 0 { 1 } else { traj.node_cells[k - 1] + 1 }.min(traj.last);
    let search_to = if traj.nodes > k {
        // Stay strictly before the cell in which the extra crossing lands.
        traj.node_cells[k].saturating_sub(1)
    } else {
        traj.last
    };
    let mut t = search_from;
    let mut best = f64::INFINITY;
    for i in search_from..=search_to.max(search_from) {
        let score = traj.phi[i].abs() + h * traj.psi[i].abs();
        if score < best {
            best = score;
            t = i;
        }
    }
    if traj.phi[t].abs() >= crate::profile::DECAY_LEVEL * amplitude {
        return Err(SolverError::NoSolution {
            reason: format!(
                "field never decayed: min |phi| = {:e} at r = {:.3} (try a larger r_max \
                 or accept that no localized solution exists here)",
                traj.phi[t].abs(),
                r[t]
            ),
            trace,
        });
    }
    let mut phi = traj.phi;
    if t < n - 1 {
        let kappa = tail_rate(model, &r, &phi, &traj.psi, t).ok_or_else(|| {
            SolverError::NoSolution {
                reason: "cannot establish a decaying tail rate at the matching point".into(),
                trace: trace.clone(),
            }
        })?;
        // Cap the rate so the grafted exponential cannot underflow to zero
        // within the grid (a hair-over shot's plunge can overestimate it).
        let kappa = kappa.min(600.0 / (opts.r_max - r[t]));
        let (phi_t, r_t) = (phi[t], r[t]);
        for i in t + 1..n {
            phi[i] = phi_t * (r_t / r[i]) * (-kappa * (r[i] - r_t)).exp();
        }
    }
    if k == 0 && phi.iter().take(n - 1).any(|&v| v < 0.0) {
        return Err(SolverError::NoSolution {
            reason: "ground-state profile failed nodelessness (interior sign change)".into(),
            trace,
        });
    }

    let a0 = vec![0.0; n];
    let (res_phi, res_a0) = fd_residuals(model, &r, &phi, &a0, h);
    let residual = res_phi.iter().chain(&res_a0).fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > opts.tol {
        return Err(SolverError::NoSolution {
            reason: format!(
                "discretized equation residual {residual:e} exceeds tol {:e}; refine the grid",
                opts.tol
            ),
            trace,
        });
    }
    let profile = RadialProfile::new(r, phi, a0, model.clone(), residual)?;
    profile.check_decay()?;
    if profile.node_count() != k {
        return Err(SolverError::NoSolution {
            reason: format!("profile has {} node(s), expected {k}", profile.node_count()),
            trace,
        });
    }
    Ok(profile)
}

/// Node counts along the bracket must be monotone in the central value (the
/// premise behind bisection). Shots within the floating-point noise window of
/// the final boundary are exempt; there the unstable mode is below roundoff
/// and labels are not meaningful.
fn validate_monotone_nodes(trace: &[ShotRecord], boundary: f64) -> Result<(), SolverError> {
    let mut shots: Vec<&ShotRecord> = trace
        .iter()
        .filter(|s| (s.amplitude - boundary).abs() > 1e-12 * boundary)
        .collect();
    if shots.len() < 3 {
        return Ok(());
    }
    shots.sort_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).unwrap());
    let increasing = shots.first().unwrap().nodes <= shots.last().unwrap().nodes;
    for w in shots.windows(2) {
        let violated = if increasing {
            w[0].nodes > w[1].nodes
        } else {
            w[0].nodes < w[1].nodes
        };
        if violated {
            return Err(SolverError::NonMonotoneNodes {
                details: format!(
                    "node count jumps from {} (a = {:e}) to {} (a = {:e})",
                    w[0].nodes, w[0].amplitude, w[1].nodes, w[1].amplitude
                ),
                trace: trace.to_vec(),
            });
        }
    }
    Ok(())
}
