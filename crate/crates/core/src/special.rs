//! Closed forms for 2-SAT, (2+p)-SAT and 2-COL.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{linear_fit, log_grid, round_to, scan_roots, truncate_to, LinearFit};

/// `N` values of the printed 2-SAT 50%-point table.
pub const TABLE_NS: [u32; 6] = [50, 100, 200, 300, 400, 500];

/// The printed 50%-point row for [`TABLE_NS`].
pub const PRINTED_Y50: [f64; 6] = [1.45, 1.36, 1.29, 1.25, 1.23, 1.21];

/// Experimental 50%-points of Simon et al. (1986) for [`TABLE_NS`]; fixed
/// reference data.
pub const SIMON_Y50: [f64; 6] = [1.40, 1.40, 1.23, 1.22, 1.22, 1.18];

/// Default constant for the excluded `c_w N^(-1/2)` window around `y = 1`.
pub const DEFAULT_WINDOW_C: f64 = 1.0;

/// `3 (ln(2)/4)^(1/3)`, printed elsewhere as 1.67.
pub fn y50_coefficient() -> f64 {
    3.0 * (0.25 * std::f64::consts::LN_2).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSatQuery {
    pub n: u32,
    pub y: f64,
}

impl TwoSatQuery {
    pub fn new(n: u32, y: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::Domain(format!("y must be finite and >= 0, got {y}")));
        }
        Ok(Self { n, y })
    }

    /// True when `|y - 1| < c_w N^(-1/2)`.
    pub fn in_window(&self, window_c: f64) -> bool {
        (self.y - 1.0).abs() < window_c / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSatProb {
    pub pr: f64,
    /// The query sits inside the excluded window; `pr` comes from the `y > 1` branch.
    pub window_warning: bool,
}

/// Satisfiability probability of random 2-SAT at density `y`.
pub fn two_sat_prob(query: TwoSatQuery, window_c: f64) -> TwoSatProb {
    let TwoSatQuery { n, y } = query;
    let window_warning = query.in_window(window_c);
    let pr = if y < 1.0 {
        1.0
    } else {
        (-(n as f64) * (4.0 / 27.0) * (y - 1.0).powi(3)).exp()
    };
    TwoSatProb { pr, window_warning }
}

/// Density at which the 2-SAT satisfiability probability is one half.
pub fn two_sat_y50(n: u32) -> f64 {
    1.0 + y50_coefficient() * (n as f64).powf(-1.0 / 3.0)
}

/// 2-COL shares the 2-SAT transition.
pub fn two_col_y50(n: u32) -> f64 {
    two_sat_y50(n)
}

/// How table values are reduced to the printed precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableRounding {
    Full,
    /// Two decimals, toward zero.
    Truncate2,
    /// Two decimals, half away from zero. Reproduces the printed row.
    Round2,
}

impl TableRounding {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            TableRounding::Full => v,
            TableRounding::Truncate2 => truncate_to(v, 2),
            TableRounding::Round2 => round_to(v, 2),
        }
    }
}

pub fn two_sat_y50_table(ns: &[u32], rounding: TableRounding) -> Vec<f64> {
    ns.iter().map(|&n| rounding.apply(two_sat_y50(n))).collect()
}

/// Least squares of `y` against `N^(-1/3)`: intercept `C`, slope `X`.
pub fn fit_cube_root_law(ns: &[u32], ys: &[f64]) -> Result<LinearFit> {
    if ns.len() < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 table entries, got {}",
            ns.len()
        )));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-1.0 / 3.0)).collect();
    linear_fit(&xs, ys)
}

/// Regression of the closed-form 50%-points on `N^(-1/3)`.
pub fn two_sat_y50_regression(ns: &[u32], rounding: TableRounding) -> Result<LinearFit> {
    fit_cube_root_law(ns, &two_sat_y50_table(ns, rounding))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPlusPQuery {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
}

impl TwoPlusPQuery {
    /// Fraction of 3-clauses, `z / (y + z)`.
    pub fn p(&self) -> f64 {
        self.z / (self.y + self.z)
    }

    pub fn residual(&self) -> Result<f64> {
        two_p_sat_residual(self.x, self.y, self.z, self.u)
    }
}

/// Left minus right side of the mixed 2-/3-clause relation
/// `z 3u^2 / (2(1-u^3)) + y u / (1-u^2) = ln((1-u-x/2)/(1-2u))`.
pub fn two_p_sat_residual(x: f64, y: f64, z: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 0.5) {
        return Err(Error::Domain(format!("u must lie in (0, 1/2), got {u}")));
    }
    if !(0.0..1.0).contains(&x) || !(1.0 - u - 0.5 * x > 0.0) {
        return Err(Error::Domain(format!(
            "log argument 1 - u - x/2 must be > 0 (x = {x}, u = {u})"
        )));
    }
    let lhs = z * 3.0 * u * u / (2.0 * (1.0 - u.powi(3))) + y * u / (1.0 - u * u);
    let rhs = ((u - 0.5 * x) / (1.0 - 2.0 * u)).ln_1p();
    Ok(lhs - rhs)
}

/// 2-clause density that puts `(x = 0, z, u)` on the mixed surface.
pub fn two_p_sat_y_at(z: f64, u: f64) -> Result<f64> {
    // the residual is linear in y with coefficient u / (1 - u^2)
    let r0 = two_p_sat_residual(0.0, 0.0, z, u)?;
    Ok(-r0 * (1.0 - u * u) / u)
}

/// Smallest root `u` of the mixed relation at `(x, y, z)`, if any.
pub fn two_p_sat_u(x: f64, y: f64, z: f64) -> Result<Option<f64>> {
    let lo = (0.5 * x).max(0.0) + 1e-12;
    let grid = log_grid(lo, 0.5 - 1e-12, 4096);
    let roots = scan_roots(
        |u| two_p_sat_residual(x, y, z, u).unwrap_or(f64::NAN),
        &grid,
    )?;
    Ok(roots.first().copied())
}

/// One row of the small-`u` witness for the mixed critical point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeWitness {
    pub u: f64,
    pub z: f64,
    /// `y - 1` from the exact relation.
    pub measured: f64,
    /// `(1 - z) 3u/2`.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcResult {
    pub p_c: f64,
    pub y: f64,
    pub z: f64,
    pub witness: Vec<SlopeWitness>,
}

pub fn slope_witness(z: f64, u: f64) -> Result<SlopeWitness> {
    Ok(SlopeWitness {
        u,
        z,
        measured: two_p_sat_y_at(z, u)? - 1.0,
        predicted: (1.0 - z) * 1.5 * u,
    })
}

/// The mixed critical fraction: 2-clause and 3-clause densities are both 1
/// there, so `p_c = 1/2`. Returned with the small-`u` slope witness at `z = 1/2`.
pub fn two_p_sat_pc() -> Result<PcResult> {
    let witness = [1e-3, 1e-4]
        .iter()
        .map(|&u| slope_witness(0.5, u))
        .collect::<Result<Vec<_>>>()?;
    let (y, z) = (1.0, 1.0);
    Ok(PcResult {
        p_c: z / (y + z),
        y,
        z,
        witness,
    })
}

/// 2-clause density with satisfiability probability `pr` at 3-clause density `z < 1`.
pub fn two_p_sat_y50(n: u32, z: f64, pr: f64) -> Result<f64> {
    if !(z < 1.0) || z < 0.0 {
        return Err(Error::OutOfRegime(format!(
            "3-clause density must lie in [0, 1), got {z}"
        )));
    }
    if !(pr > 0.0 && pr < 1.0) {
        return Err(Error::Domain(format!("Pr must lie in (0, 1), got {pr}")));
    }
    if n == 0 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    let c = ((1.0 - z).powi(2) * 0.25 * (1.0 / pr).ln()).cbrt();
    Ok(1.0 + 3.0 * c * (n as f64).powf(-1.0 / 3.0))
}
