//! The 3-colour conservation-law system.
//!
//! With `u` the density of nodes frozen to one colour and `u2` the density
//! frozen to two colours, the log densities
//!
//! ```text
//! rho1 = ln(1 - 2u - u2 - x - 2y)
//! rho2 = ln(1 - 3u - 2u2 - y)
//! ```
//!
//! obey `d rho1/dz = df/dx`, `d rho2/dz = df/dy` with flux
//! `f = ln(1 - 3u^2 - 6uy) / 3`, starting from `u = x`, `u2 = y` at `z = 0`.
//!
//! The grid evolves `(rho1, rho2)` with central flux differences plus local
//! Lax-Friedrichs dissipation and recovers `(u, u2)` cellwise through the
//! linear inversion in [`invert_state`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CFL: f64 = 0.4;
pub const DEFAULT_LOG_FLOOR: f64 = 1e-6;
pub const DEFAULT_SPIKE: f64 = 50.0;
/// Cells this close to an edge are left out of convergence diagnostics.
pub const BOUNDARY_MARGIN: usize = 4;

const NEG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColState {
    pub u: f64,
    pub u2: f64,
}

/// The three log arguments; all must be positive.
fn log_args(u: f64, u2: f64, x: f64, y: f64) -> [f64; 3] {
    [
        1.0 - 2.0 * u - u2 - x - 2.0 * y,
        1.0 - 3.0 * u - 2.0 * u2 - y,
        1.0 - 3.0 * u * u - 6.0 * u * y,
    ]
}

pub fn rho_fields(state: &ColState, x: f64, y: f64) -> Result<(f64, f64)> {
    let [a1, a2, _] = log_args(state.u, state.u2, x, y);
    if !(a1 > 0.0) {
        return Err(Error::StateDomain {
            x,
            y,
            reason: format!("1 - 2u - u2 - x - 2y = {a1} <= 0"),
        });
    }
    if !(a2 > 0.0) {
        return Err(Error::StateDomain {
            x,
            y,
            reason: format!("1 - 3u - 2u2 - y = {a2} <= 0"),
        });
    }
    Ok((a1.ln(), a2.ln()))
}

/// Unchecked inverse: `2u + u2 = a`, `3u + 2u2 = b` has determinant 1.
fn invert_raw(rho1: f64, rho2: f64, x: f64, y: f64) -> (f64, f64) {
    let a = 1.0 - x - 2.0 * y - rho1.exp();
    let b = 1.0 - y - rho2.exp();
    (2.0 * a - b, 2.0 * b - 3.0 * a)
}

pub fn invert_state(rho1: f64, rho2: f64, x: f64, y: f64) -> Result<ColState> {
    let (u, u2) = invert_raw(rho1, rho2, x, y);
    if !(u >= -NEG_TOL) || !(u2 >= -NEG_TOL) {
        return Err(Error::StateDomain {
            x,
            y,
            reason: format!("inversion gives u = {u}, u2 = {u2}"),
        });
    }
    Ok(ColState { u, u2 })
}

pub fn flux_f(u: f64, y: f64) -> Result<f64> {
    let d = 1.0 - 3.0 * u * u - 6.0 * u * y;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("1 - 3u^2 - 6uy = {d} <= 0 at u = {u}, y = {y}")));
    }
    Ok(d.ln() / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub z: f64,
    pub dz: f64,
    /// Row-major in `x`: cell `(i, j)` sits at index `i * ny + j`.
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
    pub cells: Vec<ColState>,
    /// Mean discrete `(du/dx, du/dy)` over the grid at construction.
    pub initial_slopes: (f64, f64),
}

impl ColGrid {
    pub fn hx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / self.ny as f64
    }

    /// Cell-centre `x` of column `i`; `i` may run one past either edge.
    pub fn x(&self, i: isize) -> f64 {
        self.x_range.0 + (i as f64 + 0.5) * self.hx()
    }

    pub fn y(&self, j: isize) -> f64 {
        self.y_range.0 + (j as f64 + 0.5) * self.hy()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn state(&self, i: usize, j: usize) -> ColState {
        self.cells[self.idx(i, j)]
    }

    /// Largest `dz` satisfying `dz (a_x/hx + a_y/hy) <= cfl` over all cells,
    /// with `a_x = |df/d rho1|` and `a_y = |df/d rho2|`.
    pub fn cfl_dz(&self, cfl: f64) -> f64 {
        let (hx, hy) = (self.hx(), self.hy());
        let mut worst = 0.0f64;
        for i in 0..self.nx {
            for j in 0..self.ny {
                let k = self.idx(i, j);
                let (ax, ay) = wave_speeds(self.cells[k].u, self.y(j as isize), self.rho1[k], self.rho2[k]);
                worst = worst.max(ax / hx + ay / hy);
            }
        }
        if worst > 0.0 {
            cfl / worst
        } else {
            cfl * hx.min(hy)
        }
    }

    /// Mean central-difference `(du/dx, du/dy)` over interior cells.
    pub fn discrete_slopes(&self) -> (f64, f64) {
        discrete_slopes(self.nx, self.ny, self.hx(), self.hy(), &self.cells)
    }

    /// Smallest of the three log arguments over the grid.
    pub fn min_log_arg(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.nx {
            for j in 0..self.ny {
                let s = self.state(i, j);
                for a in log_args(s.u, s.u2, self.x(i as isize), self.y(j as isize)) {
                    m = m.min(a);
                }
            }
        }
        m
    }
}

fn discrete_slopes(nx: usize, ny: usize, hx: f64, hy: f64, cells: &[ColState]) -> (f64, f64) {
    if nx < 3 || ny < 3 {
        return (f64::NAN, f64::NAN);
    }
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            sx += (cells[(i + 1) * ny + j].u - cells[(i - 1) * ny + j].u) / (2.0 * hx);
            sy += (cells[i * ny + j + 1].u - cells[i * ny + j - 1].u) / (2.0 * hy);
            n += 1.0;
        }
    }
    (sx / n, sy / n)
}

/// `|df/d rho1|` and `|df/d rho2|` at a cell.
fn wave_speeds(u: f64, y: f64, rho1: f64, rho2: f64) -> (f64, f64) {
    let d = 1.0 - 3.0 * u * u - 6.0 * u * y;
    let f_u = -2.0 * (u + y) / d;
    // du/d rho1 = -2 e^rho1, du/d rho2 = e^rho2
    ((2.0 * f_u * rho1.exp()).abs(), (f_u * rho2.exp()).abs())
}

/// Grid at `z = 0` with `u = x`, `u2 = y` at every cell centre.
///
/// `dz = None` picks the step from [`DEFAULT_CFL`].
pub fn init_grid(
    nx: usize,
    ny: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    dz: Option<f64>,
) -> Result<ColGrid> {
    if nx < 3 || ny < 3 {
        return Err(Error::Invalid(format!("grid needs at least 3x3 cells, got {nx}x{ny}")));
    }
    if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) || x_range.0 < 0.0 || y_range.0 < 0.0 {
        return Err(Error::Invalid(format!(
            "ranges must be non-empty and non-negative: x {x_range:?}, y {y_range:?}"
        )));
    }
    let mut grid = ColGrid {
        nx,
        ny,
        x_range,
        y_range,
        z: 0.0,
        dz: 0.0,
        rho1: vec![0.0; nx * ny],
        rho2: vec![0.0; nx * ny],
        cells: vec![ColState { u: 0.0, u2: 0.0 }; nx * ny],
        initial_slopes: (0.0, 0.0),
    };
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = (grid.x(i as isize), grid.y(j as isize));
            let s = ColState { u: x, u2: y };
            let (r1, r2) = rho_fields(&s, x, y)?;
            flux_f(s.u, y).map_err(|e| Error::StateDomain { x, y, reason: e.to_string() })?;
            let k = grid.idx(i, j);
            grid.rho1[k] = r1;
            grid.rho2[k] = r2;
            grid.cells[k] = s;
        }
    }
    grid.initial_slopes = grid.discrete_slopes();
    grid.dz = match dz {
        Some(d) if d > 0.0 => d,
        Some(d) => return Err(Error::Invalid(format!("dz must be > 0, got {d}"))),
        None => grid.cfl_dz(DEFAULT_CFL),
    };
    Ok(grid)
}

/// Padded copy of a field with linearly extrapolated ghost cells.
fn pad(field: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    let (px, py) = (nx + 2, ny + 2);
    let mut out = vec![0.0; px * py];
    for i in 0..nx {
        for j in 0..ny {
            out[(i + 1) * py + j + 1] = field[i * ny + j];
        }
    }
    for j in 1..=ny {
        out[j] = 2.0 * out[py + j] - out[2 * py + j];
        out[(px - 1) * py + j] = 2.0 * out[(px - 2) * py + j] - out[(px - 3) * py + j];
    }
    for i in 1..=nx {
        out[i * py] = 2.0 * out[i * py + 1] - out[i * py + 2];
        out[i * py + py - 1] = 2.0 * out[i * py + py - 2] - out[i * py + py - 3];
    }
    out
}

/// Advances by the grid's own `dz`.
pub fn step(grid: &ColGrid) -> Result<ColGrid> {
    step_by(grid, grid.dz)
}

/// Advances `(rho1, rho2)` by `dz` and re-inverts every cell.
///
/// Rows are processed in parallel; each output cell depends only on the old
/// grid, so the result is identical to serial evaluation.
pub fn step_by(grid: &ColGrid, dz: f64) -> Result<ColGrid> {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx(), grid.hy());
    let py = ny + 2;
    let r1 = pad(&grid.rho1, nx, ny);
    let r2 = pad(&grid.rho2, nx, ny);

    // flux and wave speeds on the padded grid (corners unused)
    let mut f = vec![f64::NAN; r1.len()];
    let mut ax = vec![f64::NAN; r1.len()];
    let mut ay = vec![f64::NAN; r1.len()];
    for pi in 0..nx + 2 {
        for pj in 0..ny + 2 {
            let corner = (pi == 0 || pi == nx + 1) && (pj == 0 || pj == ny + 1);
            if corner {
                continue;
            }
            let k = pi * py + pj;
            let (x, y) = (grid.x(pi as isize - 1), grid.y(pj as isize - 1));
            let (u, _) = invert_raw(r1[k], r2[k], x, y);
            let d = 1.0 - 3.0 * u * u - 6.0 * u * y;
            if !(d > 0.0) {
                return Err(Error::StateDomain {
                    x,
                    y,
                    reason: format!("flux argument 1 - 3u^2 - 6uy = {d} <= 0"),
                });
            }
            f[k] = d.ln() / 3.0;
            let (sx, sy) = wave_speeds(u, y, r1[k], r2[k]);
            ax[k] = sx;
            ay[k] = sy;
        }
    }

    let rows: Vec<Result<Vec<(f64, f64, ColState)>>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let pi = i + 1;
            let mut row = Vec::with_capacity(ny);
            for j in 0..ny {
                let pj = j + 1;
                let c = pi * py + pj;
                let (e, w) = (c + py, c - py);
                let (n, s) = (c + 1, c - 1);
                // interface fluxes for rho1 in x
                let a_e = ax[c].max(ax[e]);
                let a_w = ax[c].max(ax[w]);
                let g_e = 0.5 * (f[c] + f[e]) + 0.5 * a_e * (r1[e] - r1[c]);
                let g_w = 0.5 * (f[w] + f[c]) + 0.5 * a_w * (r1[c] - r1[w]);
                // and for rho2 in y
                let a_n = ay[c].max(ay[n]);
                let a_s = ay[c].max(ay[s]);
                let g_n = 0.5 * (f[c] + f[n]) + 0.5 * a_n * (r2[n] - r2[c]);
                let g_s = 0.5 * (f[s] + f[c]) + 0.5 * a_s * (r2[c] - r2[s]);
                let nr1 = r1[c] + dz * (g_e - g_w) / hx;
                let nr2 = r2[c] + dz * (g_n - g_s) / hy;
                let (x, y) = (grid.x(i as isize), grid.y(j as isize));
                let st = invert_state(nr1, nr2, x, y)?;
                let args = log_args(st.u, st.u2, x, y);
                if let Some(bad) = args.iter().position(|a| !(*a > 0.0)) {
                    return Err(Error::StateDomain {
                        x,
                        y,
                        reason: format!("log argument {} = {} <= 0", bad + 1, args[bad]),
                    });
                }
                row.push((nr1, nr2, st));
            }
            Ok(row)
        })
        .collect();

    let mut next = grid.clone();
    next.z = grid.z + dz;
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (nr1, nr2, st)) in row?.into_iter().enumerate() {
            let k = i * ny + j;
            next.rho1[k] = nr1;
            next.rho2[k] = nr2;
            next.cells[k] = st;
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityReason {
    /// A log argument fell below the floor.
    LogFloor,
    /// A discrete `u` gradient exceeded the spike threshold.
    GradientSpike,
    /// The next step would leave the admissible region; evolution halted.
    DomainExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityEvent {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub reason: SingularityReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    /// First event per cell, in order of occurrence.
    pub events: Vec<SingularityEvent>,
    pub halted: bool,
    pub z_reached: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub log_floor: f64,
    pub spike: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            log_floor: DEFAULT_LOG_FLOOR,
            spike: DEFAULT_SPIKE,
        }
    }
}

pub fn evolve(grid: &ColGrid, z_end: f64) -> Result<(ColGrid, SingularityReport)> {
    evolve_with(grid, z_end, &EvolveConfig::default())
}

/// Steps until `z_end` (the last step is shortened to land on it), recording
/// candidate singular cells. A step that leaves the domain halts evolution and
/// returns the last admissible grid.
pub fn evolve_with(
    grid: &ColGrid,
    z_end: f64,
    config: &EvolveConfig,
) -> Result<(ColGrid, SingularityReport)> {
    if !(z_end > grid.z) {
        return Err(Error::Invalid(format!("z_end = {z_end} must exceed z = {}", grid.z)));
    }
    let mut flagged = vec![false; grid.nx * grid.ny];
    let mut events = Vec::new();
    let mut cur = grid.clone();
    let mut halted = false;
    while cur.z < z_end {
        let dz = cur.dz.min(z_end - cur.z);
        match step_by(&cur, dz) {
            Ok(mut next) => {
                if z_end - next.z < 1e-12 * z_end.max(1.0) {
                    next.z = z_end;
                }
                scan_singular(&next, config, &mut flagged, &mut events);
                cur = next;
            }
            Err(Error::StateDomain { x, y, .. }) => {
                events.push(SingularityEvent {
                    x,
                    y,
                    z: cur.z + dz,
                    reason: SingularityReason::DomainExit,
                });
                halted = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let z_reached = cur.z;
    Ok((
        cur,
        SingularityReport {
            events,
            halted,
            z_reached,
        },
    ))
}

fn scan_singular(
    grid: &ColGrid,
    config: &EvolveConfig,
    flagged: &mut [bool],
    events: &mut Vec<SingularityEvent>,
) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx(), grid.hy());
    for i in 0..nx {
        for j in 0..ny {
            let k = grid.idx(i, j);
            if flagged[k] {
                continue;
            }
            let (x, y) = (grid.x(i as isize), grid.y(j as isize));
            let s = grid.cells[k];
            let reason = if log_args(s.u, s.u2, x, y)
                .iter()
                .any(|&a| a < config.log_floor)
            {
                Some(SingularityReason::LogFloor)
            } else {
                let gx = if i > 0 && i + 1 < nx {
                    (grid.cells[k + ny].u - grid.cells[k - ny].u) / (2.0 * hx)
                } else {
                    0.0
                };
                let gy = if j > 0 && j + 1 < ny {
                    (grid.cells[k + 1].u - grid.cells[k - 1].u) / (2.0 * hy)
                } else {
                    0.0
                };
                (gx.abs() > config.spike || gy.abs() > config.spike)
                    .then_some(SingularityReason::GradientSpike)
            };
            if let Some(reason) = reason {
                flagged[k] = true;
                events.push(SingularityEvent { x, y, z: grid.z, reason });
            }
        }
    }
}

/// Max over interior cells (excluding `margin` cells at each edge) of
/// `|d rho/dz - D f|`, with `D` the centred difference of the old flux.
///
/// For a consistent scheme this is the dissipation term and shrinks with `h`.
pub fn pde_residual(before: &ColGrid, after: &ColGrid, margin: usize) -> (f64, f64) {
    let (nx, ny) = (before.nx, before.ny);
    let (hx, hy) = (before.hx(), before.hy());
    let dz = after.z - before.z;
    let f = |i: usize, j: usize| {
        let s = before.state(i, j);
        (1.0 - 3.0 * s.u * s.u - 6.0 * s.u * before.y(j as isize)).ln() / 3.0
    };
    let m = margin.max(1);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for i in m..nx.saturating_sub(m) {
        for j in m..ny.saturating_sub(m) {
            let k = before.idx(i, j);
            let fx = (f(i + 1, j) - f(i - 1, j)) / (2.0 * hx);
            let fy = (f(i, j + 1) - f(i, j - 1)) / (2.0 * hy);
            r1 = r1.max(((after.rho1[k] - before.rho1[k]) / dz - fx).abs());
            r2 = r2.max(((after.rho2[k] - before.rho2[k]) / dz - fy).abs());
        }
    }
    (r1, r2)
}

/// Bilinear sample of `(u, u2)` at a physical point inside the cell-centre hull.
pub fn sample(grid: &ColGrid, x: f64, y: f64) -> ColState {
    let fi = ((x - grid.x_range.0) / grid.hx() - 0.5).clamp(0.0, (grid.nx - 1) as f64);
    let fj = ((y - grid.y_range.0) / grid.hy() - 0.5).clamp(0.0, (grid.ny - 1) as f64);
    let (i0, j0) = (fi.floor() as usize, fj.floor() as usize);
    let (i1, j1) = ((i0 + 1).min(grid.nx - 1), (j0 + 1).min(grid.ny - 1));
    let (tx, ty) = (fi - i0 as f64, fj - j0 as f64);
    let lerp = |g: fn(&ColState) -> f64| {
        let v00 = g(&grid.state(i0, j0));
        let v10 = g(&grid.state(i1, j0));
        let v01 = g(&grid.state(i0, j1));
        let v11 = g(&grid.state(i1, j1));
        (1.0 - tx) * ((1.0 - ty) * v00 + ty * v01) + tx * ((1.0 - ty) * v10 + ty * v11)
    };
    ColState {
        u: lerp(|s| s.u),
        u2: lerp(|s| s.u2),
    }
}
