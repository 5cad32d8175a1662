use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CnfFormula, GraphInstance};
use crate::error::{Error, Result};

fn random_clause<R: Rng>(rng: &mut R, n: u32, k: usize) -> Vec<i32> {
    index::sample(rng, n as usize, k)
        .into_iter()
        .map(|v| {
            let lit = v as i32 + 1;
            if rng.random::<bool>() {
                -lit
            } else {
                lit
            }
        })
        .collect()
}

/// `m` clauses of `k` distinct variables each, signs uniform.
pub fn gen_ksat(n: u32, m: usize, k: usize, seed: u64) -> Result<CnfFormula> {
    if k == 0 || (n as usize) < k {
        return Err(Error::Invalid(format!("need n >= k >= 1, got n = {n}, k = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m).map(|_| random_clause(&mut rng, n, k)).collect();
    Ok(CnfFormula { n, clauses })
}

/// `round(p m)` 3-clauses and `m - round(p m)` 2-clauses in shuffled order.
pub fn gen_two_plus_p(n: u32, m: usize, p: f64, seed: u64) -> Result<CnfFormula> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("p must lie in [0, 1], got {p}")));
    }
    if n < 3 {
        return Err(Error::Invalid(format!("need n >= 3, got {n}")));
    }
    let m3 = (p * m as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses: Vec<Vec<i32>> = (0..m)
        .map(|i| random_clause(&mut rng, n, if i < m3 { 3 } else { 2 }))
        .collect();
    clauses.shuffle(&mut rng);
    Ok(CnfFormula { n, clauses })
}

/// `m` edges with uniformly drawn distinct endpoints; repeats allowed.
pub fn gen_graph(n: u32, m: usize, seed: u64) -> Result<GraphInstance> {
    if n < 2 {
        return Err(Error::Invalid(format!("need n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| {
            let a = rng.random_range(1..=n);
            let mut b = rng.random_range(1..n);
            if b >= a {
                b += 1;
            }
            (a.min(b), a.max(b))
        })
        .collect();
    Ok(GraphInstance { n, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(gen_ksat(50, 200, 3, 7).unwrap(), gen_ksat(50, 200, 3, 7).unwrap());
        assert_ne!(gen_ksat(50, 200, 3, 7).unwrap(), gen_ksat(50, 200, 3, 8).unwrap());
        assert_eq!(gen_graph(50, 100, 1).unwrap(), gen_graph(50, 100, 1).unwrap());
    }

    #[test]
    fn ksat_contract() {
        let f = gen_ksat(100, 430, 3, 11).unwrap();
        assert_eq!(f.m(), 430);
        for c in &f.clauses {
            assert_eq!(c.len(), 3);
            let mut vars: Vec<u32> = c.iter().map(|l| l.unsigned_abs()).collect();
            vars.sort_unstable();
            vars.dedup();
            assert_eq!(vars.len(), 3);
            assert!(vars.iter().all(|&v| (1..=100).contains(&v)));
        }
        assert!(gen_ksat(2, 1, 3, 0).is_err());
    }

    #[test]
    fn mixture_split() {
        let widths = |p| {
            let f = gen_two_plus_p(40, 100, p, 3).unwrap();
            let w3 = f.clauses.iter().filter(|c| c.len() == 3).count();
            (w3, f.m() - w3)
        };
        assert_eq!(widths(0.0), (0, 100));
        assert_eq!(widths(1.0), (100, 0));
        assert_eq!(widths(0.5), (50, 50));
        assert!(gen_two_plus_p(40, 10, 1.5, 0).is_err());
    }

    #[test]
    fn graph_contract() {
        let g = gen_graph(30, 500, 5).unwrap();
        assert_eq!(g.edges.len(), 500);
        assert!(g.edges.iter().all(|&(a, b)| a != b && a >= 1 && b <= 30));
    }
}
