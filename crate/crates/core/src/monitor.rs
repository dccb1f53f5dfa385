//! Quantitative robustness monitoring.
//!
//! Atoms get a signed satisfaction margin from disk geometry; Boolean and
//! temporal operators lift through min/max. A trajectory satisfies a formula
//! iff the robustness at time 0 is strictly positive — zero counts as a
//! violation.
//!
//! Temporal windows are never clamped to the signal: each formula has a
//! syntactically computed required horizon, and evaluating at a time index
//! whose window would run past the last frame is an error.

use std::io::Write;

use crate::formula::{Formula, SpatialAtom};
use crate::scene::{SceneState, Trajectory};
use crate::Ident;

/// Robustness values of one formula along a trajectory, indexed by the
/// evaluation domain `0..=len-1-H(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessTrace {
    pub formula: Formula,
    pub values: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MonitorError {
    #[error("unknown identifier `{0}` in scene")]
    UnknownIdent(String),
    #[error("identifier `{0}` used for both arguments of a pairwise relation")]
    DuplicateIdent(String),
    #[error("object `{0}` has no heading, required by `oriented`")]
    MissingHeading(String),
    #[error("horizon error: evaluating at t={t} needs {needed} frames, trajectory has {len}")]
    Horizon { t: usize, needed: usize, len: usize },
    #[error("empty evaluation domain: formula horizon {horizon} >= trajectory length {len}")]
    EmptyDomain { horizon: usize, len: usize },
}

fn lookup<'a>(state: &'a SceneState, id: &Ident) -> Result<&'a crate::scene::DiskObject, MonitorError> {
    state
        .get(id)
        .ok_or_else(|| MonitorError::UnknownIdent(id.name().to_string()))
}

fn center_distance(state: &SceneState, i: &Ident, j: &Ident) -> Result<f64, MonitorError> {
    let oi = lookup(state, i)?;
    let oj = lookup(state, j)?;
    Ok(((oi.x - oj.x).powi(2) + (oi.y - oj.y).powi(2)).sqrt())
}

/// Signed clearance: center distance minus the sum of radii. Zero when the
/// disks exactly touch, negative when they overlap.
pub fn signed_clearance(state: &SceneState, i: &Ident, j: &Ident) -> Result<f64, MonitorError> {
    if i == j {
        return Err(MonitorError::DuplicateIdent(i.name().to_string()));
    }
    let oi = lookup(state, i)?;
    let oj = lookup(state, j)?;
    let d = ((oi.x - oj.x).powi(2) + (oi.y - oj.y).powi(2)).sqrt();
    Ok(d - (oi.radius + oj.radius))
}

fn heading(state: &SceneState, id: &Ident) -> Result<(f64, f64), MonitorError> {
    lookup(state, id)?
        .heading
        .ok_or_else(|| MonitorError::MissingHeading(id.name().to_string()))
}

/// Robustness of a single atom in a single scene.
pub fn rho_atom(state: &SceneState, atom: &SpatialAtom) -> Result<f64, MonitorError> {
    match atom {
        SpatialAtom::CloseTo { i, j, eps_c } => Ok(eps_c - center_distance(state, i, j)?),
        SpatialAtom::FarFrom { i, j, eps_f } => Ok(center_distance(state, i, j)? - eps_f),
        SpatialAtom::Touch { i, j, eps } => Ok(-signed_clearance(state, i, j)?.abs() + eps),
        SpatialAtom::Ovlp { i, j, tau } => {
            let oi = lookup(state, i)?;
            let oj = lookup(state, j)?;
            let d = center_distance(state, i, j)?;
            let upper = (oi.radius + oj.radius - tau) - d;
            let lower = d - ((oi.radius - oj.radius).abs() + tau);
            Ok(upper.min(lower))
        }
        SpatialAtom::PartOvlp { i, j, tau, rho } => {
            let ov = rho_atom(
                state,
                &SpatialAtom::Ovlp {
                    i: i.clone(),
                    j: j.clone(),
                    tau: *tau,
                },
            )?;
            let encl_ij = rho_atom(
                state,
                &SpatialAtom::EnclIn {
                    i: i.clone(),
                    j: j.clone(),
                    rho: *rho,
                },
            )?;
            let encl_ji = rho_atom(
                state,
                &SpatialAtom::EnclIn {
                    i: j.clone(),
                    j: i.clone(),
                    rho: *rho,
                },
            )?;
            Ok(ov.min(-encl_ij).min(-encl_ji))
        }
        SpatialAtom::EnclIn { i, j, rho } => {
            let oi = lookup(state, i)?;
            let oj = lookup(state, j)?;
            let d = center_distance(state, i, j)?;
            Ok((oj.radius - rho) - (d + oi.radius))
        }
        SpatialAtom::LeftOf { i, j, kappa } => {
            let oi = lookup(state, i)?;
            let oj = lookup(state, j)?;
            Ok((oj.x - oj.radius) - (oi.x + oi.radius + kappa))
        }
        SpatialAtom::RightOf { i, j, kappa } => {
            let oi = lookup(state, i)?;
            let oj = lookup(state, j)?;
            Ok((oi.x - oi.radius) - (oj.x + oj.radius + kappa))
        }
        SpatialAtom::Above { i, j, kappa } => {
            let oi = lookup(state, i)?;
            let oj = lookup(state, j)?;
            Ok((oi.y - oi.radius) - (oj.y + oj.radius + kappa))
        }
        SpatialAtom::Below { i, j, kappa } => {
            let oi = lookup(state, i)?;
            let oj = lookup(state, j)?;
            Ok((oj.y - oj.radius) - (oi.y + oi.radius + kappa))
        }
        SpatialAtom::BetweenPx { a, b, c, kappa } => {
            let oa = lookup(state, a)?;
            let ob = lookup(state, b)?;
            let oc = lookup(state, c)?;
            let left = (ob.x - ob.radius) - (oa.x + oa.radius + kappa);
            let right = (oc.x - oc.radius) - (ob.x + ob.radius + kappa);
            Ok(left.min(right))
        }
        SpatialAtom::BetweenPy { a, b, c, kappa } => {
            let oa = lookup(state, a)?;
            let ob = lookup(state, b)?;
            let oc = lookup(state, c)?;
            let low = (ob.y - ob.radius) - (oa.y + oa.radius + kappa);
            let high = (oc.y - oc.radius) - (ob.y + ob.radius + kappa);
            Ok(low.min(high))
        }
        SpatialAtom::Oriented { i, j, kappa } => {
            let (uix, uiy) = heading(state, i)?;
            let (ujx, ujy) = heading(state, j)?;
            let ecd = 0.5 * ((uix - ujx).powi(2) + (uiy - ujy).powi(2));
            Ok(kappa - ecd)
        }
    }
}

/// Number of future steps the formula's nested temporal windows demand beyond
/// the evaluation instant. Atoms need none; `G`/`F` add their upper bound;
/// `U[a,b]` adds `b` plus the larger operand horizon.
pub fn required_horizon(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) => 0,
        Formula::Not(g) => required_horizon(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(required_horizon).max().unwrap_or(0),
        Formula::Implies(l, r) => required_horizon(l).max(required_horizon(r)),
        Formula::Always(iv, g) | Formula::Eventually(iv, g) => iv.b + required_horizon(g),
        Formula::Until(iv, l, r) => iv.b + required_horizon(l).max(required_horizon(r)),
    }
}

/// Robustness of `f` on `traj` at time index `t`.
///
/// `t` must lie inside the evaluation domain `[0, len-1-H(f)]`; windows are
/// never clamped.
pub fn robustness_at(traj: &Trajectory, f: &Formula, t: usize) -> Result<f64, MonitorError> {
    let horizon = required_horizon(f);
    let needed = t + horizon + 1;
    if needed > traj.len() {
        return Err(MonitorError::Horizon {
            t,
            needed,
            len: traj.len(),
        });
    }
    eval(traj, f, t)
}

fn eval(traj: &Trajectory, f: &Formula, t: usize) -> Result<f64, MonitorError> {
    match f {
        Formula::Atom(atom) => rho_atom(traj.state(t).expect("t checked against horizon"), atom),
        Formula::Not(g) => Ok(-eval(traj, g, t)?),
        Formula::And(gs) => {
            let mut acc = f64::INFINITY;
            for g in gs {
                acc = acc.min(eval(traj, g, t)?);
            }
            Ok(acc)
        }
        Formula::Or(gs) => {
            let mut acc = f64::NEG_INFINITY;
            for g in gs {
                acc = acc.max(eval(traj, g, t)?);
            }
            Ok(acc)
        }
        Formula::Implies(l, r) => Ok((-eval(traj, l, t)?).max(eval(traj, r, t)?)),
        Formula::Always(iv, g) => {
            let mut acc = f64::INFINITY;
            for tp in t + iv.a..=t + iv.b {
                acc = acc.min(eval(traj, g, tp)?);
            }
            Ok(acc)
        }
        Formula::Eventually(iv, g) => {
            let mut acc = f64::NEG_INFINITY;
            for tp in t + iv.a..=t + iv.b {
                acc = acc.max(eval(traj, g, tp)?);
            }
            Ok(acc)
        }
        Formula::Until(iv, l, r) => {
            // max over t' in t+[a:b] of min(r(rhs, t'), min over u in [t:t'] of r(lhs, u)),
            // with the inner minimum inclusive of u = t'.
            let mut best = f64::NEG_INFINITY;
            for tp in t + iv.a..=t + iv.b {
                let rhs = eval(traj, r, tp)?;
                let mut lhs_min = f64::INFINITY;
                for u in t..=tp {
                    lhs_min = lhs_min.min(eval(traj, l, u)?);
                }
                best = best.max(rhs.min(lhs_min));
            }
            Ok(best)
        }
    }
}

/// Robustness values at every index of the evaluation domain.
pub fn robustness_trace(traj: &Trajectory, f: &Formula) -> Result<RobustnessTrace, MonitorError> {
    let horizon = required_horizon(f);
    if horizon >= traj.len() {
        return Err(MonitorError::EmptyDomain {
            horizon,
            len: traj.len(),
        });
    }
    let mut values = Vec::with_capacity(traj.len() - horizon);
    for t in 0..traj.len() - horizon {
        values.push((t, robustness_at(traj, f, t)?));
    }
    Ok(RobustnessTrace {
        formula: f.clone(),
        values,
    })
}

/// Strict satisfaction at time 0: robustness must be greater than zero.
pub fn satisfies(traj: &Trajectory, f: &Formula) -> Result<bool, MonitorError> {
    let horizon = required_horizon(f);
    if horizon >= traj.len() {
        return Err(MonitorError::EmptyDomain {
            horizon,
            len: traj.len(),
        });
    }
    Ok(robustness_at(traj, f, 0)? > 0.0)
}

/// Prints a robustness value with 12 significant digits.
pub fn format_robustness(value: f64) -> String {
    format!("{value:.11e}")
}

/// Writes a trace as CSV with header `t,robustness`.
pub fn write_trace_csv(trace: &RobustnessTrace, mut sink: impl Write) -> std::io::Result<()> {
    writeln!(sink, "t,robustness")?;
    for (t, value) in &trace.values {
        writeln!(sink, "{t},{}", format_robustness(*value))?;
    }
    Ok(())
}
