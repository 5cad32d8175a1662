//! Monte Carlo laboratory: random instances, complete solvers, frozen-variable
//! measurement, satisfiability-probability estimation and branching random walks.

mod brw;
mod coloring;
mod dpll;
mod frozen;
mod generate;
mod mc;
mod twosat;

pub use brw::{
    brw_exceedance, brw_simulate, Branching, BrwRun, BrwSpec, ExceedanceStudy, GenerationSummary,
    StepLaw,
};
pub use coloring::col_solve;
pub use dpll::dpll_sat;
pub use frozen::{measure_frozen, MAX_ENUM_VARS};
pub use generate::{gen_graph, gen_ksat, gen_two_plus_p};
pub use mc::{
    find_y50, mc_prob, DensityModel, InstanceModel, McEstimate, SolverKind, Y50Outcome, Y50Search,
};
pub use twosat::two_sat_solve;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A CNF formula over variables `1..=n`; literals are signed 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub n: u32,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(n: u32, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (ci, c) in clauses.iter().enumerate() {
            for &l in c {
                if l == 0 || l.unsigned_abs() > n {
                    return Err(Error::Invalid(format!(
                        "clause {ci}: literal {l} outside 1..={n}"
                    )));
                }
            }
        }
        Ok(Self { n, clauses })
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `assignment[v - 1]` is the value of variable `v`.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }
}

/// A multigraph on vertices `1..=n` without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInstance {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
}

impl GraphInstance {
    pub fn new(n: u32, edges: Vec<(u32, u32)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) outside 1..={n}")));
            }
            if a == b {
                return Err(Error::Invalid(format!("self-loop at vertex {a}")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n as usize];
        for &(a, b) in &self.edges {
            d[a as usize - 1] += 1;
            d[b as usize - 1] += 1;
        }
        d
    }
}
