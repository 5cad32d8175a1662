//! The critical line in the `x`-`z` plane.
//!
//! Starting at the cusp, the line is the locus where the lower and upper
//! sheets carry equal satisfiable-formula weight. Its slope is
//!
//! ```text
//! dz/dx = ± [ln(1 - x/2 - u_u) - ln(1 - x/2 - u_l)] / [ln(1 - u_u^k) - ln(1 - u_l^k)]
//! ```
//!
//! and its end point at `x = 0` is `alpha_c`. The sign and the identity of
//! `u_l` are fixed by [`calibrate`], which keeps the configuration whose `k = 3`
//! trace joins the printed anchors `(0.145, 3.183)` and `(0, 4.396)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{self, find_cusp, z_derivs, CuspPoint};

pub const DEFAULT_STEP: f64 = 1e-4;

/// Anchor points for `k = 3` and the relative tolerance for passing them.
pub const ANCHOR_START: (f64, f64) = (0.145, 3.183);
pub const ANCHOR_END: (f64, f64) = (0.0, 4.396);
pub const ANCHOR_REL_TOL: f64 = 0.01;

/// `k` values of the printed threshold table.
pub const TABLE_KS: [u32; 5] = [3, 4, 5, 6, 7];
pub const PRINTED_ALPHA_C: [f64; 5] = [4.396, 10.077, 21.234, 43.45, 87.84];
/// Best known rigorous bounds, reference data for [`TABLE_KS`].
pub const BOUND_UPPER: [f64; 5] = [4.51, 10.23, 21.33, 43.51, 87.88];
pub const BOUND_LOWER: [f64; 5] = [3.52, 7.91, 18.79, 40.62, 84.82];
/// Spin-glass estimates, reference data for [`TABLE_KS`].
pub const SPIN_GLASS: [f64; 5] = [4.267, 9.931, 21.117, 43.37, 87.79];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    /// Lower and upper sheets of the surface; on `x = 0` the lower sheet is the
    /// trivial `u = 0` continuation.
    PairedRoots,
    /// `u_l = 0` everywhere.
    TrivialLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `dz/dx` equals the quotient.
    Forward,
    /// `dz/dx` equals minus the quotient (the line is walked in decreasing `i`).
    Reversed,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePolicy {
    pub branch: BranchPolicy,
    pub orientation: Orientation,
}

impl TracePolicy {
    /// The configuration that passes both `k = 3` anchors; see [`calibrate`].
    pub const CALIBRATED: TracePolicy = TracePolicy {
        branch: BranchPolicy::PairedRoots,
        orientation: Orientation::Reversed,
    };

    pub const ALL: [TracePolicy; 4] = [
        TracePolicy { branch: BranchPolicy::PairedRoots, orientation: Orientation::Forward },
        TracePolicy { branch: BranchPolicy::PairedRoots, orientation: Orientation::Reversed },
        TracePolicy { branch: BranchPolicy::TrivialLower, orientation: Orientation::Forward },
        TracePolicy { branch: BranchPolicy::TrivialLower, orientation: Orientation::Reversed },
    ];
}

impl Default for TracePolicy {
    fn default() -> Self {
        Self::CALIBRATED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub z: f64,
    pub u_lower: f64,
    pub u_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub k: u32,
    pub policy: TracePolicy,
    pub step: f64,
    pub cusp: CuspPoint,
    /// Starts at the cusp; `x` strictly decreases to 0.
    pub points: Vec<CurvePoint>,
    pub alpha_c: f64,
}

/// The unsigned slope quotient for distinct sheets `u_l < u_u`.
fn quotient(k: u32, x: f64, u_l: f64, u_u: f64) -> f64 {
    let num = (1.0 - 0.5 * x - u_u).ln() - (1.0 - 0.5 * x - u_l).ln();
    let den = (-u_u.powi(k as i32)).ln_1p() - (-u_l.powi(k as i32)).ln_1p();
    num / den
}

/// The 0/0 limit of the quotient when both sheets meet at `u`.
pub fn cusp_slope(k: u32, x: f64, u: f64) -> f64 {
    let kf = k as f64;
    (1.0 - u.powi(k as i32)) / (kf * u.powi(k as i32 - 1) * (1.0 - 0.5 * x - u))
}

/// `dz/dx` along the critical line given the two sheet values at `(x, z)`.
///
/// Coincident sheets are accepted only at a cusp (where `dz/du` and `d2z/du2`
/// both vanish), in which case the L'Hôpital limit is returned.
pub fn slope(k: u32, x: f64, u_l: f64, u_u: f64, orientation: Orientation) -> Result<f64> {
    if !(0.0..0.5).contains(&u_l) || !(u_u > 0.0 && u_u < 0.5) || u_l > u_u {
        return Err(Error::Domain(format!(
            "sheets must satisfy 0 <= u_l <= u_u < 1/2, got ({u_l}, {u_u})"
        )));
    }
    let s = orientation.sign();
    if (u_u - u_l).abs() <= 1e-9 * u_u {
        let d = z_derivs(k, x, u_u);
        let z = d[0].abs().max(1.0);
        if (d[1] * u_u / z).abs() < 1e-6 && (d[2] * u_u * u_u / z).abs() < 1e-6 {
            return Ok(s * cusp_slope(k, x, u_u));
        }
        return Err(Error::Degenerate(format!(
            "u_l = u_u = {u_u} at x = {x} is not a cusp (z_u = {:e}, z_uu = {:e})",
            d[1], d[2]
        )));
    }
    Ok(s * quotient(k, x, u_l, u_u))
}

/// Sheet selection with nearest-`u` continuation from the previous pair.
struct SheetTracker {
    k: u32,
    branch: BranchPolicy,
    cache: Vec<(f64, Vec<f64>)>,
}

impl SheetTracker {
    fn new(k: u32, branch: BranchPolicy) -> Self {
        Self { k, branch, cache: Vec::new() }
    }

    fn stationary(&mut self, x: f64) -> Result<Vec<f64>> {
        if let Some((_, s)) = self.cache.iter().find(|(cx, _)| *cx == x) {
            return Ok(s.clone());
        }
        let s = surface::stationary_us(self.k, x)?;
        if self.cache.len() >= 4 {
            self.cache.remove(0);
        }
        self.cache.push((x, s.clone()));
        Ok(s)
    }

    fn sheets(&mut self, x: f64, z: f64, prev: (f64, f64)) -> Result<(f64, f64)> {
        let fail = |reason: String| Error::TraceFailure { x, z, reason };
        let stationary = self.stationary(x)?;
        let mut cands = surface::roots_between(self.k, x, z, &stationary)?;
        let nearest = |c: &[f64], target: f64| {
            c.iter()
                .copied()
                .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())
        };
        match self.branch {
            BranchPolicy::TrivialLower => {
                let u_u = nearest(&cands, prev.1)
                    .ok_or_else(|| fail("no upper-sheet root".into()))?;
                Ok((0.0, u_u))
            }
            BranchPolicy::PairedRoots => {
                if x == 0.0 {
                    cands.insert(0, 0.0);
                }
                match cands.len() {
                    0 | 1 => Err(fail(format!("only {} root(s): {cands:?}", cands.len()))),
                    2 => {
                        let l = nearest(&cands, prev.0).unwrap();
                        let u = nearest(&cands, prev.1).unwrap();
                        if l >= u {
                            Err(fail(format!(
                                "sheets collapsed onto one root, candidates {cands:?}, previous {prev:?}"
                            )))
                        } else {
                            Ok((l, u))
                        }
                    }
                    _ => Ok((cands[0], *cands.last().unwrap())),
                }
            }
        }
    }
}

/// Integrates the critical line from the cusp to `x = 0` with classical RK4.
pub fn trace(k: u32, dx_step: f64, policy: TracePolicy) -> Result<ThresholdCurve> {
    if !(dx_step > 0.0 && dx_step <= 0.01) {
        return Err(Error::Domain(format!("dx_step must lie in (0, 0.01], got {dx_step}")));
    }
    let cusp = find_cusp(k)?;
    trace_from(&cusp, dx_step, policy)
}

pub fn trace_from(cusp: &CuspPoint, dx_step: f64, policy: TracePolicy) -> Result<ThresholdCurve> {
    let k = cusp.k;
    let sgn = policy.orientation.sign();
    let mut tracker = SheetTracker::new(k, policy.branch);
    let mut points = vec![CurvePoint {
        x: cusp.x0,
        z: cusp.z0,
        u_lower: cusp.u0,
        u_upper: cusp.u0,
    }];

    // One step off the cusp along the limiting slope.
    let mut x = cusp.x0 - dx_step;
    let mut z = cusp.z0 - dx_step * sgn * cusp_slope(k, cusp.x0, cusp.u0);
    if x <= 0.0 {
        return Err(Error::TraceFailure {
            x,
            z,
            reason: "cusp lies within one step of x = 0".into(),
        });
    }
    let seed = (cusp.u0, cusp.u0);
    let mut sheets = tracker.sheets(x, z, seed)?;
    if policy.branch == BranchPolicy::PairedRoots && sheets.0 == sheets.1 {
        return Err(Error::TraceFailure { x, z, reason: "no split after first step".into() });
    }
    points.push(CurvePoint { x, z, u_lower: sheets.0, u_upper: sheets.1 });

    while x > 0.0 {
        let h = if x - dx_step < 0.5 * dx_step { x } else { dx_step };
        let prev = sheets;
        let mut g = |xs: f64, zs: f64| -> Result<f64> {
            let (l, u) = tracker.sheets(xs, zs, prev)?;
            slope(k, xs, l, u, policy.orientation)
        };
        let x_mid = x - 0.5 * h;
        let x_new = if h == x { 0.0 } else { x - h };
        let k1 = g(x, z)?;
        let k2 = g(x_mid, z - 0.5 * h * k1)?;
        let k3 = g(x_mid, z - 0.5 * h * k2)?;
        let k4 = g(x_new, z - h * k3)?;
        let z_new = z - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !z_new.is_finite() {
            return Err(Error::TraceFailure { x, z, reason: format!("non-finite z at x = {x_new}") });
        }
        sheets = tracker.sheets(x_new, z_new, prev)?;
        x = x_new;
        z = z_new;
        points.push(CurvePoint { x, z, u_lower: sheets.0, u_upper: sheets.1 });
    }
    Ok(ThresholdCurve {
        k,
        policy,
        step: dx_step,
        cusp: *cusp,
        alpha_c: z,
        points,
    })
}

/// Threshold density at `x = 0` under the calibrated policy and default step.
pub fn alpha_c(k: u32) -> Result<f64> {
    trace(k, DEFAULT_STEP, TracePolicy::CALIBRATED).map(|c| c.alpha_c)
}

/// Outcome of one candidate policy against the `k = 3` anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub policy: TracePolicy,
    pub start: (f64, f64),
    /// `(x, z)` of the last traced point.
    pub end: Option<(f64, f64)>,
    pub error: Option<String>,
    /// Relative mismatch of the start anchor (max over x and z).
    pub start_mismatch: f64,
    /// Relative mismatch of the end anchor in z; infinite if the trace failed.
    pub end_mismatch: f64,
    pub passes: bool,
}

/// Machine-readable record of the anchor calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub k: u32,
    pub step: f64,
    pub anchor_start: (f64, f64),
    pub anchor_end: (f64, f64),
    pub rel_tol: f64,
    pub candidates: Vec<CandidateOutcome>,
    pub accepted: Option<TracePolicy>,
}

/// Traces `k = 3` under every policy and keeps the first one whose curve joins
/// both anchors within [`ANCHOR_REL_TOL`].
pub fn calibrate(dx_step: f64) -> Result<CalibrationReport> {
    let cusp = find_cusp(3)?;
    let start_mismatch = ((cusp.x0 - ANCHOR_START.0) / ANCHOR_START.0)
        .abs()
        .max(((cusp.z0 - ANCHOR_START.1) / ANCHOR_START.1).abs());
    let mut candidates = Vec::new();
    for policy in TracePolicy::ALL {
        let outcome = match trace_from(&cusp, dx_step, policy) {
            Ok(curve) => {
                let last = curve.points.last().unwrap();
                let end_mismatch = ((last.z - ANCHOR_END.1) / ANCHOR_END.1).abs();
                CandidateOutcome {
                    policy,
                    start: (cusp.x0, cusp.z0),
                    end: Some((last.x, last.z)),
                    error: None,
                    start_mismatch,
                    end_mismatch,
                    passes: last.x == 0.0
                        && start_mismatch <= ANCHOR_REL_TOL
                        && end_mismatch <= ANCHOR_REL_TOL,
                }
            }
            Err(e) => {
                let end = match &e {
                    Error::TraceFailure { x, z, .. } => Some((*x, *z)),
                    _ => None,
                };
                CandidateOutcome {
                    policy,
                    start: (cusp.x0, cusp.z0),
                    end,
                    error: Some(e.to_string()),
                    start_mismatch,
                    end_mismatch: f64::INFINITY,
                    passes: false,
                }
            }
        };
        candidates.push(outcome);
    }
    let accepted = candidates.iter().find(|c| c.passes).map(|c| c.policy);
    Ok(CalibrationReport {
        k: 3,
        step: dx_step,
        anchor_start: ANCHOR_START,
        anchor_end: ANCHOR_END,
        rel_tol: ANCHOR_REL_TOL,
        candidates,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_rejects_degenerate_off_cusp() {
        // a double root on the fold line, not the cusp
        let e = slope(3, 0.0, 0.3267, 0.3267, Orientation::Forward).unwrap_err();
        assert!(matches!(e, Error::Degenerate(_)));
    }

    #[test]
    fn slope_sign_follows_orientation() {
        let a = slope(3, 0.0, 0.232, 0.411, Orientation::Forward).unwrap();
        let b = slope(3, 0.0, 0.232, 0.411, Orientation::Reversed).unwrap();
        assert!(a > 0.0);
        assert_eq!(a, -b);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(trace(3, 0.0, TracePolicy::CALIBRATED).is_err());
        assert!(trace(3, 0.02, TracePolicy::CALIBRATED).is_err());
    }
}
