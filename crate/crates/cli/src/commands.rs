use ksat_phase::io::{num, parse_dimacs, parse_edge_list, Table};
use ksat_phase::kcol::{evolve, init_grid};
use ksat_phase::sim::{
    brw_exceedance, col_solve, dpll_sat, find_y50, measure_frozen, mc_prob, Branching, BrwSpec, DensityModel,
    InstanceModel, SolverKind, StepLaw, Y50Search, MAX_ENUM_VARS,
};
use ksat_phase::special::{
    self, two_p_sat_pc, two_p_sat_y50, two_sat_y50, two_sat_y50_regression, TableRounding, PRINTED_Y50, SIMON_Y50,
    TABLE_NS,
};
use ksat_phase::surface::{alpha_d, alpha_d_asymptotic, find_cusp, solve_u, PRINTED_ALPHA_D};
use ksat_phase::threshold::{
    calibrate, trace, TracePolicy, BOUND_LOWER, BOUND_UPPER, PRINTED_ALPHA_C, SPIN_GLASS, TABLE_KS,
};
use ksat_phase::{Error, Result, SurfaceQuery};
use serde_json::Value;

use crate::config::{Command, ModelArg, RunConfig, StepArg, DEFAULT_BISECT_TOL};

/// A named table produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub table: Table,
}

impl Artifact {
    fn new(name: &str, mut table: Table, cfg: &RunConfig, extra: Vec<(String, String)>) -> Self {
        let mut config = cfg.echo();
        config.extend(extra);
        table.config = config;
        Artifact { name: name.to_string(), table }
    }
}

fn s(v: impl Into<String>) -> Value {
    Value::String(v.into())
}

fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub const MC_CAVEAT: &str = "finite-size estimate: the 50% crossing drifts with n and at this scale cannot \
     resolve the asymptotic threshold or discriminate between nearby predictions";

pub fn dispatch(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    match cfg.command {
        Command::Surface => surface(cfg).map(|a| vec![a]),
        Command::Cusp => cusp(cfg).map(|a| vec![a]),
        Command::AlphaD => alpha_d_table(cfg).map(|a| vec![a]),
        Command::AlphaC => alpha_c_table(cfg),
        Command::Curve => curve(cfg).map(|a| vec![a]),
        Command::TwosatTable => twosat_table(cfg).map(|a| vec![a]),
        Command::Twopsat => twopsat(cfg).map(|a| vec![a]),
        Command::Kcol => kcol(cfg),
        Command::Mc => mc(cfg).map(|a| vec![a]),
        Command::Y50Search => y50_search(cfg).map(|a| vec![a]),
        Command::Brw => brw(cfg).map(|a| vec![a]),
        Command::Solve => solve(cfg).map(|a| vec![a]),
        Command::Tables => tables(cfg),
    }
}

fn surface(cfg: &RunConfig) -> Result<Artifact> {
    let k = cfg.k.unwrap_or(3);
    let x = cfg.x.unwrap_or(0.0);
    let zs: Vec<f64> = match cfg.z {
        Some(z) => vec![z],
        None => {
            let top = 1.5 * alpha_d(k.max(3))?;
            (0..cfg.grid).map(|i| top * i as f64 / (cfg.grid - 1) as f64).collect()
        }
    };
    let mut t = Table::new(["k", "x", "z", "u", "branch"]);
    for z in zs {
        let set = solve_u(&SurfaceQuery::new(k, x, z)?, cfg.tol())?;
        if set.trivial_continuation {
            t.push(vec![k.into(), num(x), num(z), num(0.0), s("trivial")])?;
        }
        for p in &set.points {
            t.push(vec![k.into(), num(x), num(z), num(p.u), s(format!("{:?}", p.branch).to_lowercase())])?;
        }
    }
    Ok(Artifact::new("surface", t, cfg, vec![]))
}

fn ks_or(cfg: &RunConfig, default: &[u32]) -> Vec<u32> {
    cfg.k.map_or_else(|| default.to_vec(), |k| vec![k])
}

fn cusp(cfg: &RunConfig) -> Result<Artifact> {
    let mut t = Table::new(["k", "x0", "z0", "u0", "residual_dz_du", "residual_d2z_du2"]);
    for k in ks_or(cfg, &TABLE_KS) {
        let c = find_cusp(k)?;
        t.push(vec![k.into(), num(c.x0), num(c.z0), num(c.u0), num(c.residuals[0]), num(c.residuals[1])])?;
    }
    Ok(Artifact::new("cusp", t, cfg, vec![]))
}

fn alpha_d_table(cfg: &RunConfig) -> Result<Artifact> {
    let mut t = Table::new(["k", "alpha_d", "printed", "asymptotic"]);
    for k in ks_or(cfg, &[3, 4, 5, 6, 7, 8, 9, 10]) {
        let printed = (3..=10).contains(&k).then(|| PRINTED_ALPHA_D[k as usize - 3]);
        let asym = alpha_d_asymptotic(k).ok().map(|a| a.z);
        t.push(vec![k.into(), num(alpha_d(k)?), opt_num(printed), opt_num(asym)])?;
    }
    Ok(Artifact::new("alpha_d", t, cfg, vec![]))
}

fn reference(k: u32) -> Option<usize> {
    TABLE_KS.iter().position(|&x| x == k)
}

fn alpha_c_table(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let report = calibrate(cfg.step)?;
    let mut cal = Table::new([
        "branch",
        "orientation",
        "start_x",
        "start_z",
        "end_x",
        "end_z",
        "start_mismatch",
        "end_mismatch",
        "passes",
        "error",
    ]);
    for c in &report.candidates {
        cal.push(vec![
            serde_json::to_value(c.policy.branch).unwrap_or(Value::Null),
            serde_json::to_value(c.policy.orientation).unwrap_or(Value::Null),
            num(c.start.0),
            num(c.start.1),
            opt_num(c.end.map(|e| e.0)),
            opt_num(c.end.map(|e| e.1)),
            num(c.start_mismatch),
            num(c.end_mismatch),
            c.passes.into(),
            c.error.clone().map_or(Value::Null, Value::String),
        ])?;
    }
    let policy = report.accepted.unwrap_or(TracePolicy::CALIBRATED);
    let status = match report.accepted {
        Some(p) => format!("accepted {:?}/{:?}", p.branch, p.orientation),
        None => "no policy joins both anchors; see calibration table".to_string(),
    };
    let mut t = Table::new([
        "k",
        "alpha_c",
        "x0",
        "z0",
        "printed",
        "rel_error",
        "lower_bound",
        "upper_bound",
        "spin_glass",
        "within_bounds",
    ]);
    for k in ks_or(cfg, &TABLE_KS) {
        let curve = trace(k, cfg.step, policy)?;
        let a = curve.alpha_c;
        let r = reference(k);
        let printed = r.map(|i| PRINTED_ALPHA_C[i]);
        t.push(vec![
            k.into(),
            num(a),
            num(curve.cusp.x0),
            num(curve.cusp.z0),
            opt_num(printed),
            opt_num(printed.map(|p| (a - p) / p)),
            opt_num(r.map(|i| BOUND_LOWER[i])),
            opt_num(r.map(|i| BOUND_UPPER[i])),
            opt_num(r.map(|i| SPIN_GLASS[i])),
            r.map_or(Value::Null, |i| (BOUND_LOWER[i] < a && a < BOUND_UPPER[i]).into()),
        ])?;
    }
    let extra = vec![kv("calibration", &status)];
    Ok(vec![
        Artifact::new("alpha_c", t, cfg, extra.clone()),
        Artifact::new("calibration", cal, cfg, extra),
    ])
}

fn curve(cfg: &RunConfig) -> Result<Artifact> {
    let k = cfg.k.unwrap_or(3);
    let c = trace(k, cfg.step, TracePolicy::CALIBRATED)?;
    let mut t = Table::new(["x", "z", "u_lower", "u_upper"]);
    for p in &c.points {
        t.push(vec![num(p.x), num(p.z), num(p.u_lower), num(p.u_upper)])?;
    }
    Ok(Artifact::new(&format!("curve_k{k}"), t, cfg, vec![kv("alpha_c", c.alpha_c)]))
}

fn twosat_table(cfg: &RunConfig) -> Result<Artifact> {
    let mut t = Table::new([
        "row", "n", "y50", "y50_round2", "y50_trunc2", "printed", "simon", "c", "x", "r_squared",
    ]);
    for (i, &n) in TABLE_NS.iter().enumerate() {
        let y = two_sat_y50(n);
        t.push(vec![
            s("table"),
            n.into(),
            num(y),
            num(TableRounding::Round2.apply(y)),
            num(TableRounding::Truncate2.apply(y)),
            num(PRINTED_Y50[i]),
            num(SIMON_Y50[i]),
            Value::Null,
            Value::Null,
            Value::Null,
        ])?;
    }
    let fits = [
        ("fit-round2", two_sat_y50_regression(&TABLE_NS, TableRounding::Round2)?),
        ("fit-trunc2", two_sat_y50_regression(&TABLE_NS, TableRounding::Truncate2)?),
        ("fit-full", two_sat_y50_regression(&TABLE_NS, TableRounding::Full)?),
        ("fit-simon", special::fit_cube_root_law(&TABLE_NS, &SIMON_Y50)?),
    ];
    for (name, f) in fits {
        let mut row = vec![s(name)];
        row.extend(std::iter::repeat(Value::Null).take(6));
        row.extend([num(f.intercept), num(f.slope), num(f.r_squared)]);
        t.push(row)?;
    }
    Ok(Artifact::new(
        "twosat_table",
        t,
        cfg,
        vec![kv("coefficient", special::y50_coefficient())],
    ))
}

fn twopsat(cfg: &RunConfig) -> Result<Artifact> {
    let n = cfg.n.unwrap_or(100);
    let z = cfg.z.unwrap_or(0.5);
    let pc = two_p_sat_pc()?;
    let mut t = Table::new(["row", "u", "z", "measured", "predicted", "p_c", "n", "y50"]);
    t.push(vec![s("p_c"), Value::Null, num(pc.z), Value::Null, Value::Null, num(pc.p_c), Value::Null, Value::Null])?;
    for w in &pc.witness {
        t.push(vec![s("witness"), num(w.u), num(w.z), num(w.measured), num(w.predicted), Value::Null, Value::Null, Value::Null])?;
    }
    let y = two_p_sat_y50(n, z, 0.5)?;
    t.push(vec![s("y50"), Value::Null, num(z), Value::Null, Value::Null, Value::Null, n.into(), num(y)])?;
    Ok(Artifact::new("twopsat", t, cfg, vec![]))
}

pub const KCOL_DOMAIN: [f64; 4] = [0.02, 0.06, 0.22, 0.26];

fn kcol(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let [x0, x1, y0, y1] = cfg.domain.unwrap_or(KCOL_DOMAIN);
    let z_end = cfg.z.unwrap_or(0.5);
    let g0 = init_grid(cfg.grid, cfg.grid, (x0, x1), (y0, y1), None)?;
    let (g, report) = if z_end > 0.0 {
        evolve(&g0, z_end)?
    } else {
        (g0.clone(), ksat_phase::SingularityReport { events: vec![], halted: false, z_reached: 0.0 })
    };
    let mut t = Table::new(["i", "j", "x", "y", "u", "u2"]);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let c = g.state(i, j);
            t.push(vec![i.into(), j.into(), num(g.x(i as isize)), num(g.y(j as isize)), num(c.u), num(c.u2)])?;
        }
    }
    let mut ev = Table::new(["x", "y", "z", "reason"]);
    for e in &report.events {
        ev.push(vec![num(e.x), num(e.y), num(e.z), serde_json::to_value(e.reason).unwrap_or(Value::Null)])?;
    }
    let extra = vec![
        kv("z_reached", report.z_reached),
        kv("halted", report.halted),
        kv("dz", g0.dz),
        kv("initial_slopes", format!("{} {}", g0.initial_slopes.0, g0.initial_slopes.1)),
    ];
    Ok(vec![
        Artifact::new("kcol_grid", t, cfg, extra.clone()),
        Artifact::new("kcol_events", ev, cfg, extra),
    ])
}

fn density_model(cfg: &RunConfig) -> Result<(DensityModel, SolverKind)> {
    match cfg.model {
        ModelArg::Ksat => {
            let k = cfg.k.unwrap_or(3) as usize;
            let solver = if k == 2 && cfg.frozen == 0 { SolverKind::TwoSat } else { SolverKind::Dpll { frozen: cfg.frozen } };
            Ok((DensityModel::KSat { k }, solver))
        }
        ModelArg::TwoPlusP => {
            let p = cfg.p.ok_or_else(|| Error::Invalid("--model two-plus-p needs --p".into()))?;
            Ok((DensityModel::TwoPlusP { p }, SolverKind::Dpll { frozen: cfg.frozen }))
        }
        ModelArg::Graph => Ok((DensityModel::Graph, SolverKind::Coloring { colors: cfg.colors.unwrap_or(3) })),
    }
}

fn default_densities(cfg: &RunConfig, model: &DensityModel) -> (f64, f64) {
    match *model {
        DensityModel::KSat { k: 2 } => (0.5, 2.0),
        DensityModel::KSat { k } => {
            let s = 2f64.powi(k as i32) * std::f64::consts::LN_2;
            (0.6 * s, 1.2 * s)
        }
        DensityModel::TwoPlusP { p } => (0.5, 1.5 + 3.0 * p),
        DensityModel::Graph => {
            let c = cfg.colors.unwrap_or(3) as f64;
            let s = 0.5 * c * c.ln();
            (0.5 * s, 2.0 * s)
        }
    }
}

fn mc(cfg: &RunConfig) -> Result<Artifact> {
    let n = cfg.n.unwrap_or(50);
    let (model, solver) = density_model(cfg)?;
    let densities: Vec<f64> = match (cfg.m, cfg.z) {
        (Some(m), _) => vec![m as f64 / n as f64],
        (None, Some(z)) => vec![z],
        (None, None) => {
            let (lo, hi) = default_densities(cfg, &model);
            (0..13).map(|i| lo + (hi - lo) * i as f64 / 12.0).collect()
        }
    };
    let mut t = Table::new(["row", "n", "m", "density", "trials", "successes", "p_hat", "ci_lo", "ci_hi", "seed"]);
    let mut points = Vec::new();
    for (i, &y) in densities.iter().enumerate() {
        let inst = match cfg.m {
            Some(m) => match model.at(n, 0.0) {
                InstanceModel::KSat { n, k, .. } => InstanceModel::KSat { n, m, k },
                InstanceModel::TwoPlusP { n, p, .. } => InstanceModel::TwoPlusP { n, m, p },
                InstanceModel::Graph { n, .. } => InstanceModel::Graph { n, m },
            },
            None => model.at(n, y),
        };
        let m = match inst {
            InstanceModel::KSat { m, .. } | InstanceModel::TwoPlusP { m, .. } | InstanceModel::Graph { m, .. } => m,
        };
        let seed = ksat_phase::numeric::mix_seed(cfg.seed, i as u64);
        let e = mc_prob(&inst, &solver, cfg.trials, seed)?;
        points.push((y, e.p_hat));
        t.push(vec![
            s("point"),
            n.into(),
            m.into(),
            num(y),
            e.trials.into(),
            e.successes.into(),
            num(e.p_hat),
            num(e.ci.0),
            num(e.ci.1),
            seed.into(),
        ])?;
    }
    let crossing = points.windows(2).find(|w| w[0].1 >= 0.5 && w[1].1 < 0.5).map(|w| {
        let ((y0, p0), (y1, p1)) = (w[0], w[1]);
        y0 + (p0 - 0.5) / (p0 - p1) * (y1 - y0)
    });
    t.push(vec![
        s("crossing"),
        n.into(),
        Value::Null,
        opt_num(crossing),
        Value::Null,
        Value::Null,
        num(0.5),
        Value::Null,
        Value::Null,
        Value::Null,
    ])?;
    Ok(Artifact::new(
        "mc",
        t,
        cfg,
        vec![kv("caveat", MC_CAVEAT), kv("solver", format!("{solver:?}"))],
    ))
}

fn y50_search(cfg: &RunConfig) -> Result<Artifact> {
    let n = cfg.n.unwrap_or(100);
    let (model, solver) = match cfg.model {
        ModelArg::Graph => (DensityModel::Graph, SolverKind::Coloring { colors: cfg.colors.unwrap_or(2) }),
        ModelArg::Ksat => density_model(&RunConfig { k: Some(cfg.k.unwrap_or(2)), ..cfg.clone() })?,
        ModelArg::TwoPlusP => density_model(cfg)?,
    };
    let bracket = match model {
        DensityModel::KSat { k: 2 } => (0.8, 2.5),
        _ => default_densities(cfg, &model),
    };
    let search = Y50Search {
        n,
        model,
        solver,
        trials: cfg.trials,
        tol: cfg.tol.unwrap_or(DEFAULT_BISECT_TOL),
        bracket,
        seed: cfg.seed,
        max_iter: 60,
    };
    let out = find_y50(&search)?;
    let mut t = Table::new(["row", "y", "p_hat", "ci_lo", "ci_hi", "trials"]);
    for (y, e) in &out.history {
        t.push(vec![s("point"), num(*y), num(e.p_hat), num(e.ci.0), num(e.ci.1), e.trials.into()])?;
    }
    t.push(vec![s("y50"), num(out.y), Value::Null, Value::Null, Value::Null, Value::Null])?;
    let mut extra = vec![kv("bracket", format!("{} {}", out.bracket.0, out.bracket.1))];
    if let DensityModel::KSat { k: 2 } = model {
        extra.push(kv("closed_form_y50", two_sat_y50(n)));
    }
    Ok(Artifact::new("y50_search", t, cfg, extra))
}

fn brw(cfg: &RunConfig) -> Result<Artifact> {
    let step = match cfg.law {
        StepArg::Gaussian => StepLaw::DiscreteGaussian { sigma: cfg.sigma },
        StepArg::TwoPoint => StepLaw::TwoPoint { size: cfg.sigma },
    };
    let spec = BrwSpec {
        branching: Branching::Constant { m: 2.0 },
        step,
        generations: cfg.generations,
        cap: cfg.cap,
        initial_population: 1,
        seed: cfg.seed,
    };
    let base = brw_exceedance(&spec, cfg.replicates, 0.5, None)?;
    let twin_spec = BrwSpec { branching: Branching::AffineDecay { base: 2.0, slope: cfg.slope }, ..spec };
    let twin = brw_exceedance(&twin_spec, cfg.replicates, 0.5, Some(base.lambdas.clone()))?;
    let mut t = Table::new(["lambda", "lambda_sq", "exceedance", "std_err", "twin_exceedance", "twin_std_err", "twin_within_2se"]);
    for i in 0..base.lambdas.len() {
        let se = base.std_err[i].hypot(twin.std_err[i]);
        t.push(vec![
            num(base.lambdas[i]),
            num(base.lambdas[i].powi(2)),
            num(base.exceedance[i]),
            num(base.std_err[i]),
            num(twin.exceedance[i]),
            num(twin.std_err[i]),
            (twin.exceedance[i] <= base.exceedance[i] + 2.0 * se).into(),
        ])?;
    }
    let mut extra = vec![kv("deviation_sd", base.deviation_sd), kv("twin_deviation_sd", twin.deviation_sd)];
    if let Some(f) = base.fit {
        extra.push(kv("fit_slope", f.slope));
        extra.push(kv("fit_intercept", f.intercept));
        extra.push(kv("fit_r_squared", f.r_squared));
    }
    extra.push(kv("extinct", format!("{} {}", base.extinct, twin.extinct)));
    Ok(Artifact::new("brw", t, cfg, extra))
}

fn solve(cfg: &RunConfig) -> Result<Artifact> {
    let path = cfg.input.as_ref().expect("validated");
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let is_cnf = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with('p') || l.starts_with('c'));
    let mut t = Table::new(["kind", "n", "m", "satisfiable", "frozen_density"]);
    if is_cnf {
        let f = parse_dimacs(&text)?;
        if cfg.frozen > f.n {
            return Err(Error::Invalid(format!("--frozen {} exceeds n = {}", cfg.frozen, f.n)));
        }
        let sat = dpll_sat(&f, cfg.frozen);
        let frozen = if f.n <= MAX_ENUM_VARS { measure_frozen(&f, cfg.frozen)? } else { None };
        t.push(vec![s("cnf"), f.n.into(), f.m().into(), sat.into(), opt_num(frozen)])?;
    } else {
        let g = parse_edge_list(&text)?;
        let colors = cfg.colors.unwrap_or(3);
        t.push(vec![s(format!("graph-{colors}col")), g.n.into(), g.edges.len().into(), col_solve(&g, colors).into(), Value::Null])?;
    }
    Ok(Artifact::new("solve", t, cfg, vec![]))
}

fn tables(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let mut out = Vec::new();
    let all = RunConfig { k: None, ..cfg.clone() };
    out.push(alpha_d_table(&RunConfig { command: Command::AlphaD, ..all.clone() })?);
    out.push(cusp(&RunConfig { command: Command::Cusp, ..all.clone() })?);
    out.extend(alpha_c_table(&RunConfig { command: Command::AlphaC, ..all.clone() })?);
    out.push(curve(&RunConfig { command: Command::Curve, k: Some(3), ..all.clone() })?);
    out.push(twosat_table(&RunConfig { command: Command::TwosatTable, ..all.clone() })?);
    out.push(twopsat(&RunConfig { command: Command::Twopsat, ..all })?);
    Ok(out)
}
