//! Seeded Monte Carlo estimates of satisfiability probabilities and the
//! empirical 50%-point search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{col_solve, dpll_sat, gen_graph, gen_ksat, gen_two_plus_p, two_sat_solve};
use crate::error::{Error, Result};
use crate::numeric::{mix_seed, wilson_interval, Z_95};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum InstanceModel {
    KSat { n: u32, m: usize, k: usize },
    TwoPlusP { n: u32, m: usize, p: f64 },
    Graph { n: u32, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "kebab-case")]
pub enum SolverKind {
    Dpll { frozen: u32 },
    TwoSat,
    Coloring { colors: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// Wilson 95% interval.
    pub ci: (f64, f64),
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        Self {
            trials,
            successes,
            p_hat: successes as f64 / trials as f64,
            ci: wilson_interval(successes, trials, Z_95),
            seed,
        }
    }

    pub fn brackets(&self, p: f64) -> bool {
        self.ci.0 <= p && p <= self.ci.1
    }
}

fn check_pair(model: &InstanceModel, solver: &SolverKind) -> Result<()> {
    match (model, solver) {
        (InstanceModel::Graph { .. }, SolverKind::Coloring { colors }) if *colors >= 1 => Ok(()),
        (InstanceModel::KSat { k, .. }, SolverKind::TwoSat) if *k <= 2 => Ok(()),
        (InstanceModel::TwoPlusP { p, .. }, SolverKind::TwoSat) if *p == 0.0 => Ok(()),
        (InstanceModel::KSat { n, .. } | InstanceModel::TwoPlusP { n, .. }, SolverKind::Dpll { frozen })
            if frozen <= n =>
        {
            Ok(())
        }
        _ => Err(Error::Invalid(format!(
            "solver {solver:?} cannot decide instances of {model:?}"
        ))),
    }
}

fn run_trial(model: &InstanceModel, solver: &SolverKind, seed: u64) -> Result<bool> {
    match *model {
        InstanceModel::Graph { n, m } => {
            let g = gen_graph(n, m, seed)?;
            let SolverKind::Coloring { colors } = *solver else { unreachable!() };
            Ok(col_solve(&g, colors))
        }
        InstanceModel::KSat { n, m, k } => decide(&gen_ksat(n, m, k, seed)?, solver),
        InstanceModel::TwoPlusP { n, m, p } => decide(&gen_two_plus_p(n, m, p, seed)?, solver),
    }
}

fn decide(f: &super::CnfFormula, solver: &SolverKind) -> Result<bool> {
    match *solver {
        SolverKind::Dpll { frozen } => Ok(dpll_sat(f, frozen)),
        SolverKind::TwoSat => two_sat_solve(f),
        SolverKind::Coloring { .. } => unreachable!(),
    }
}

/// Fraction of `trials` seeded instances the solver accepts.
///
/// Trial `t` uses seed `mix_seed(seed, t)`, so the result does not depend on
/// the thread schedule.
pub fn mc_prob(model: &InstanceModel, solver: &SolverKind, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be >= 1".into()));
    }
    check_pair(model, solver)?;
    let successes = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(model, solver, mix_seed(seed, t)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(McEstimate::from_counts(successes, trials, seed))
}

/// Family of instances indexed by density `y = m / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DensityModel {
    KSat { k: usize },
    TwoPlusP { p: f64 },
    Graph,
}

impl DensityModel {
    pub fn at(&self, n: u32, y: f64) -> InstanceModel {
        let m = (y * n as f64).round().max(0.0) as usize;
        match *self {
            DensityModel::KSat { k } => InstanceModel::KSat { n, m, k },
            DensityModel::TwoPlusP { p } => InstanceModel::TwoPlusP { n, m, p },
            DensityModel::Graph => InstanceModel::Graph { n, m },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Y50Search {
    pub n: u32,
    pub model: DensityModel,
    pub solver: SolverKind,
    pub trials: u64,
    pub tol: f64,
    /// Initial densities `(lo, hi)`; `p_hat(lo) > 1/2 > p_hat(hi)` is required.
    pub bracket: (f64, f64),
    pub seed: u64,
    pub max_iter: usize,
}

impl Y50Search {
    pub fn two_sat(n: u32, trials: u64, seed: u64) -> Self {
        Self {
            n,
            model: DensityModel::KSat { k: 2 },
            solver: SolverKind::TwoSat,
            trials,
            tol: 0.01,
            bracket: (0.8, 2.5),
            seed,
            max_iter: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Y50Outcome {
    pub y: f64,
    pub bracket: (f64, f64),
    /// Every evaluated density with its estimate, in evaluation order.
    pub history: Vec<(f64, McEstimate)>,
}

/// Stochastic bisection for the density where the acceptance probability is 1/2.
///
/// Stops when the Wilson interval at the midpoint contains 1/2 or the
/// bracket is narrower than `tol`.
pub fn find_y50(search: &Y50Search) -> Result<Y50Outcome> {
    let (mut lo, mut hi) = search.bracket;
    if !(lo < hi) || lo < 0.0 || !(search.tol > 0.0) {
        return Err(Error::Invalid(format!("bad bracket {:?} or tol {}", search.bracket, search.tol)));
    }
    let mut point = 0u64;
    let mut estimate = |y: f64| {
        let est = mc_prob(&search.model.at(search.n, y), &search.solver, search.trials, mix_seed(search.seed, point));
        point += 1;
        est
    };
    let mut history = Vec::new();
    let e_lo = estimate(lo)?;
    let e_hi = estimate(hi)?;
    history.push((lo, e_lo));
    history.push((hi, e_hi));
    if !(e_lo.p_hat > 0.5 && e_hi.p_hat < 0.5) {
        return Err(Error::NotFound(format!(
            "bracket ({lo}, {hi}) does not straddle 1/2: p_hat = {} and {}",
            e_lo.p_hat, e_hi.p_hat
        )));
    }
    for _ in 0..search.max_iter {
        let mid = 0.5 * (lo + hi);
        let e = estimate(mid)?;
        history.push((mid, e));
        if e.brackets(0.5) || hi - lo < search.tol {
            return Ok(Y50Outcome { y: mid, bracket: (lo, hi), history });
        }
        if e.p_hat > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Divergence {
        iterations: search.max_iter,
        last: 0.5 * (lo + hi),
    })
}
