//! The K-SAT frozen-literal surface.
//!
//! For clause width `k`, frozen-prefix density `x` and clause density `z`, the
//! frozen-literal density `u` satisfies
//!
//! ```text
//! z = 2 (1 - u^k) / (k u^(k-1)) * ln((1 - u - x/2) / (1 - 2u))
//! ```
//!
//! with `u = x/2` at `z = 0`. This module evaluates the right-hand side and its
//! first three `u`-derivatives in closed form, inverts it for `u`, and locates
//! the fold lines, the cusp and the spinodal density at `x = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, log_grid};

/// Open search interval for `u`; the closed form is singular at both ends.
pub const U_MIN: f64 = 1e-12;
pub const U_MAX: f64 = 0.5 - 1e-12;

/// Points in the log-uniform sign-change scan.
pub const SCAN_POINTS: usize = 2048;

/// The printed spinodal row for `k = 3..=10`.
pub const PRINTED_ALPHA_D: [f64; 8] = [4.003, 8.360, 16.16, 30.51, 57.21, 107.21, 201.29, 379.01];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceQuery {
    pub k: u32,
    pub x: f64,
    pub z: f64,
}

impl SurfaceQuery {
    pub fn new(k: u32, x: f64, z: f64) -> Result<Self> {
        check_kx(k, x)?;
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("z must be finite and >= 0, got {z}")));
        }
        Ok(Self { k, x, z })
    }
}

/// Which sheet of the surface a root lies on, by ordering in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Unique,
    Lower,
    /// Unstable sheet between the two folds; only present inside the fold wedge.
    Middle,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub query: SurfaceQuery,
    pub u: f64,
    pub branch: Branch,
}

/// All nontrivial roots at a query, plus the flag for the trivial `u -> 0`
/// continuation (present on the line `x = 0`, where it is not a root of the
/// closed form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub points: Vec<SurfacePoint>,
    pub trivial_continuation: bool,
}

impl RootSet {
    pub fn us(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.u).collect()
    }

    pub fn lower(&self) -> Option<f64> {
        self.points.first().map(|p| p.u)
    }

    pub fn upper(&self) -> Option<f64> {
        self.points.last().map(|p| p.u)
    }
}

/// A point where `dz/du = 0` along a line of constant `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub u: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspPoint {
    pub k: u32,
    pub x0: f64,
    pub z0: f64,
    pub u0: f64,
    /// `dz/du` and `d2z/du2` at the solution.
    pub residuals: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSpinodal {
    pub k: u32,
    pub d_star: f64,
    pub z: f64,
}

fn check_kx(k: u32, x: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("clause width k must be >= 2, got {k}")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1), got {x}")));
    }
    Ok(())
}

fn check_u(x: f64, u: f64) -> Result<()> {
    if !(u > 0.0 && u < 0.5) {
        return Err(Error::Domain(format!("u must lie in (0, 1/2), got {u}")));
    }
    if !(1.0 - u - 0.5 * x > 0.0) {
        return Err(Error::Domain(format!(
            "log argument requires 1 - u - x/2 > 0, got {}",
            1.0 - u - 0.5 * x
        )));
    }
    Ok(())
}

/// `z` and its first three derivatives in `u`, unchecked.
pub(crate) fn z_derivs(k: u32, x: f64, u: f64) -> [f64; 4] {
    let kf = k as f64;
    let p = 1.0 - u - 0.5 * x;
    let q = 1.0 - 2.0 * u;
    let um = u.powi(-(k as i32));
    // prefactor A(u) = (2/k)(u^(1-k) - u)
    let a0 = (2.0 / kf) * (um * u - u);
    let a1 = (2.0 / kf) * ((1.0 - kf) * um - 1.0);
    let a2 = 2.0 * (kf - 1.0) * um / u;
    let a3 = -2.0 * (kf - 1.0) * (kf + 1.0) * um / (u * u);
    // log factor L(u) = ln((1 - u - x/2) / (1 - 2u))
    let l0 = ((u - 0.5 * x) / q).ln_1p();
    let l1 = -1.0 / p + 2.0 / q;
    let l2 = -1.0 / (p * p) + 4.0 / (q * q);
    let l3 = -2.0 / (p * p * p) + 16.0 / (q * q * q);
    [
        a0 * l0,
        a1 * l0 + a0 * l1,
        a2 * l0 + 2.0 * a1 * l1 + a0 * l2,
        a3 * l0 + 3.0 * a2 * l1 + 3.0 * a1 * l2 + a0 * l3,
    ]
}

/// Clause density on the surface at `(k, x, u)`.
pub fn eval_z(k: u32, x: f64, u: f64) -> Result<f64> {
    check_kx(k, x)?;
    check_u(x, u)?;
    Ok(z_derivs(k, x, u)[0])
}

/// `dz/du` at fixed `x`.
pub fn dz_du(k: u32, x: f64, u: f64) -> Result<f64> {
    check_kx(k, x)?;
    check_u(x, u)?;
    Ok(z_derivs(k, x, u)[1])
}

/// `d2z/du2` at fixed `x`.
pub fn d2z_du2(k: u32, x: f64, u: f64) -> Result<f64> {
    check_kx(k, x)?;
    check_u(x, u)?;
    Ok(z_derivs(k, x, u)[2])
}

/// Roots of derivative `order` of `z(u) - target` on the search interval.
///
/// Each level splits the interval at the roots of the next derivative, so
/// consecutive breakpoints bound a monotone piece holding at most one root.
/// This keeps nearly coincident roots apart near the cusp, where they merge.
fn roots_at_level(k: u32, x: f64, order: usize, target: f64) -> Result<Vec<f64>> {
    let grid = log_grid(U_MIN, U_MAX, SCAN_POINTS);
    let f = |u: f64| z_derivs(k, x, u)[order] - target;
    let mut nodes = grid;
    if order < 3 {
        nodes.extend(roots_at_level(k, x, order + 1, 0.0)?);
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup();
    }
    let vals: Vec<f64> = nodes.iter().map(|&u| f(u)).collect();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..nodes.len() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a.is_nan() || b.is_nan() {
            continue;
        }
        let root = if a == 0.0 {
            Some(nodes[i])
        } else if b != 0.0 && a.signum() != b.signum() {
            Some(bisect(f, nodes[i], nodes[i + 1], 200)?)
        } else {
            None
        };
        if let Some(r) = root {
            if roots.last().map_or(true, |&l| r > l) {
                roots.push(r);
            }
        }
    }
    if vals.last() == Some(&0.0) {
        roots.push(*nodes.last().unwrap());
    }
    Ok(roots)
}

/// `u`-locations where `dz/du = 0` on the whole search interval (both sheets).
pub(crate) fn stationary_us(k: u32, x: f64) -> Result<Vec<f64>> {
    roots_at_level(k, x, 1, 0.0)
}

/// Roots of `z(u) = target` using precomputed stationary points as the only
/// breakpoints. Cheaper than [`solve_u`] when the same `x` is reused.
pub(crate) fn roots_between(k: u32, x: f64, target: f64, stationary: &[f64]) -> Result<Vec<f64>> {
    let mut nodes = Vec::with_capacity(stationary.len() + 2);
    nodes.push(U_MIN);
    nodes.extend_from_slice(stationary);
    nodes.push(U_MAX);
    let f = |u: f64| z_derivs(k, x, u)[0] - target;
    let mut roots: Vec<f64> = Vec::new();
    for w in nodes.windows(2) {
        let (a, b) = (f(w[0]), f(w[1]));
        if a.is_nan() || b.is_nan() {
            continue;
        }
        if a == 0.0 || (b != 0.0 && a.signum() != b.signum()) {
            let r = if a == 0.0 { w[0] } else { bisect(f, w[0], w[1], 200)? };
            if roots.last().map_or(true, |&l| r > l) {
                roots.push(r);
            }
        }
    }
    if f(U_MAX) == 0.0 {
        roots.push(U_MAX);
    }
    Ok(roots)
}

/// All roots `u` in `(0, 1/2)` of `eval_z(k, x, u) = z`, labelled by order.
pub fn solve_u(query: &SurfaceQuery, tol: f64) -> Result<RootSet> {
    let SurfaceQuery { k, x, z } = *query;
    check_kx(k, x)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    let us = roots_at_level(k, x, 0, z)?;
    for &u in &us {
        let [zu, slope, ..] = z_derivs(k, x, u);
        let r = (zu - z).abs();
        // steep sheets cannot do better than one ulp of u
        let floor = 8.0 * f64::EPSILON * u * slope.abs();
        if r > tol * z.max(1.0) + floor {
            return Err(Error::Numeric(format!(
                "root u = {u} at (k = {k}, x = {x}, z = {z}) has residual {r:e} > {tol:e}"
            )));
        }
    }
    let labels: &[Branch] = match us.len() {
        0 => &[],
        1 => &[Branch::Unique],
        2 => &[Branch::Lower, Branch::Upper],
        3 => &[Branch::Lower, Branch::Middle, Branch::Upper],
        n => {
            return Err(Error::Numeric(format!(
                "{n} roots at (k = {k}, x = {x}, z = {z}): {us:?}"
            )))
        }
    };
    Ok(RootSet {
        points: us
            .iter()
            .zip(labels)
            .map(|(&u, &branch)| SurfacePoint {
                query: *query,
                u,
                branch,
            })
            .collect(),
        trivial_continuation: x == 0.0,
    })
}

/// Stationary points of `z(u; x)` on the physical sheet `u > x/2`, ordered in `u`.
///
/// Two points (a local maximum then a local minimum) inside the fold wedge, one
/// at `x = 0` for `k >= 3`, none past the cusp.
pub fn find_fold(k: u32, x: f64) -> Result<Vec<StationaryPoint>> {
    check_kx(k, x)?;
    Ok(roots_at_level(k, x, 1, 0.0)?
        .into_iter()
        .filter(|&u| u > 0.5 * x)
        .map(|u| StationaryPoint {
            u,
            z: z_derivs(k, x, u)[0],
        })
        .collect())
}

/// Spinodal density: the minimum of `z(u)` on the line `x = 0`.
pub fn alpha_d(k: u32) -> Result<f64> {
    if k < 3 {
        return Err(Error::Domain(format!("alpha_d needs k >= 3, got {k}")));
    }
    let folds = find_fold(k, 0.0)?;
    match folds.as_slice() {
        [p] => Ok(p.z),
        _ => Err(Error::NotFound(format!(
            "expected one stationary point at x = 0 for k = {k}, found {}",
            folds.len()
        ))),
    }
}

/// Locates the cusp where the two fold lines meet.
///
/// A bisection on `x` for the point where `find_fold` stops returning two
/// stationary points seeds a damped Newton iteration on `(z_u, z_uu) = 0`.
pub fn find_cusp(k: u32) -> Result<CuspPoint> {
    if k < 3 {
        return Err(Error::Domain(format!("cusp search needs k >= 3, got {k}")));
    }
    let two_folds = |x: f64| find_fold(k, x).map(|f| f.len() == 2);
    let mut last_two = None;
    let mut first_past = None;
    for i in 1..100 {
        let x = i as f64 * 0.01;
        if two_folds(x)? {
            last_two = Some(x);
        } else if last_two.is_some() {
            first_past = Some(x);
            break;
        }
    }
    let (mut lo, mut hi) = match (last_two, first_past) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Error::NotFound(format!(
                "no fold merge for k = {k} on x in (0, 1): last two-fold x = {last_two:?}"
            )))
        }
    };
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if two_folds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let seed = find_fold(k, lo)?;
    let mut u = 0.5 * (seed[0].u + seed[1].u);
    let mut x = lo;

    let residual = |u: f64, x: f64| {
        let d = z_derivs(k, x, u);
        [d[1], d[2]]
    };
    let mut r = residual(u, x);
    for _ in 0..100 {
        if r[0].abs() < 1e-12 && r[1].abs() < 1e-12 {
            break;
        }
        let hu = 1e-7 * u;
        let hx = 1e-7;
        let (ru_p, ru_m) = (residual(u + hu, x), residual(u - hu, x));
        let (rx_p, rx_m) = (residual(u, x + hx), residual(u, x - hx));
        let j = [
            [(ru_p[0] - ru_m[0]) / (2.0 * hu), (rx_p[0] - rx_m[0]) / (2.0 * hx)],
            [(ru_p[1] - ru_m[1]) / (2.0 * hu), (rx_p[1] - rx_m[1]) / (2.0 * hx)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numeric(format!("singular cusp Jacobian at u = {u}, x = {x}")));
        }
        let du = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dx = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
        let mut step = 1.0;
        loop {
            let (nu, nx) = (u - step * du, x - step * dx);
            if nu > 0.5 * nx && nu < 0.5 && (0.0..1.0).contains(&nx) {
                let nr = residual(nu, nx);
                if norm(nr) < norm(r) || step < 1e-6 {
                    u = nu;
                    x = nx;
                    r = nr;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-6 {
                return Err(Error::Numeric(format!(
                    "damped Newton stalled at u = {u}, x = {x}, residual {r:?}"
                )));
            }
        }
    }
    if r[0].abs() >= 1e-8 || r[1].abs() >= 1e-8 {
        return Err(Error::Numeric(format!(
            "cusp residuals {r:?} above 1e-8 at u = {u}, x = {x}"
        )));
    }
    Ok(CuspPoint {
        k,
        x0: x,
        z0: z_derivs(k, x, u)[0],
        u0: u,
        residuals: r,
    })
}

/// Large-`k` spinodal estimate `(2^k / k)(ln k + d*)` with
/// `d* = ln(ln(k)/2 + d*/2)`.
///
/// The fixed point only exists for `k >= 6`; smaller `k` drive the log
/// argument negative and return [`Error::Divergence`].
pub fn alpha_d_asymptotic(k: u32) -> Result<AsymptoticSpinodal> {
    if k < 2 {
        return Err(Error::Domain(format!("k must be >= 2, got {k}")));
    }
    let half_ln_k = 0.5 * (k as f64).ln();
    let damping = 0.5;
    let mut d = 0.0f64;
    for it in 0..100_000 {
        let arg = half_ln_k + 0.5 * d;
        if arg <= 0.0 {
            return Err(Error::Divergence { iterations: it, last: d });
        }
        let g = arg.ln();
        if (g - d).abs() < 1e-14 {
            d = g;
            break;
        }
        d = (1.0 - damping) * d + damping * g;
    }
    if (d - (half_ln_k + 0.5 * d).ln()).abs() >= 1e-12 {
        return Err(Error::Numeric(format!("fixed point did not settle (d = {d})")));
    }
    let z = 2f64.powi(k as i32) / k as f64 * ((k as f64).ln() + d);
    Ok(AsymptoticSpinodal { k, d_star: d, z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_errors_name_the_bound() {
        let e = eval_z(3, 0.0, 0.5).unwrap_err().to_string();
        assert!(e.contains("(0, 1/2)"), "{e}");
        assert!(eval_z(3, 0.0, 0.0).is_err());
        assert!(eval_z(1, 0.0, 0.2).is_err());
        assert!(eval_z(3, 1.0, 0.2).is_err());
        assert!(SurfaceQuery::new(3, 0.1, -1.0).is_err());
    }

    #[test]
    fn zero_at_initial_condition() {
        assert_eq!(eval_z(3, 0.2, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn k2_small_u_limit_is_one() {
        let z = eval_z(2, 0.0, 1e-9).unwrap();
        assert!((z - 1.0).abs() < 1e-8, "{z}");
    }

    #[test]
    fn derivatives_match_central_differences() {
        for &(k, x, u) in &[(3, 0.0, 0.3), (3, 0.1, 0.22), (5, 0.2, 0.4), (2, 0.05, 0.1)] {
            let d = z_derivs(k, x, u);
            for order in 0..3 {
                let h = 1e-5 * u;
                let fd = (z_derivs(k, x, u + h)[order] - z_derivs(k, x, u - h)[order]) / (2.0 * h);
                let an = d[order + 1];
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1.0),
                    "k={k} x={x} u={u} order {}: fd {fd} vs {an}",
                    order + 1
                );
            }
        }
    }

    #[test]
    fn solve_u_z_zero_is_unique_initial_condition() {
        let q = SurfaceQuery::new(3, 0.2, 0.0).unwrap();
        let r = solve_u(&q, 1e-10).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].branch, Branch::Unique);
        assert!((r.points[0].u - 0.1).abs() < 1e-14);
        assert!(!r.trivial_continuation);
    }

    #[test]
    fn solve_u_below_spinodal_is_empty() {
        let q = SurfaceQuery::new(3, 0.0, 3.0).unwrap();
        let r = solve_u(&q, 1e-10).unwrap();
        assert!(r.points.is_empty());
        assert!(r.trivial_continuation);
    }

    #[test]
    fn three_sheets_inside_fold_wedge() {
        let q = SurfaceQuery::new(3, 0.1, 3.6).unwrap();
        let r = solve_u(&q, 1e-10).unwrap();
        let b: Vec<Branch> = r.points.iter().map(|p| p.branch).collect();
        assert_eq!(b, vec![Branch::Lower, Branch::Middle, Branch::Upper]);
    }

    #[test]
    fn asymptotic_rejects_small_k() {
        assert!(matches!(alpha_d_asymptotic(3), Err(Error::Divergence { .. })));
        assert!(matches!(alpha_d_asymptotic(5), Err(Error::Divergence { .. })));
    }

    #[test]
    fn fold_past_cusp_is_empty() {
        assert!(find_fold(3, 0.2).unwrap().is_empty());
        assert_eq!(find_fold(3, 0.1).unwrap().len(), 2);
    }
}
