//! 2-SAT by strongly connected components of the implication graph.

use super::CnfFormula;
use crate::error::{Error, Result};

/// Node of literal `l`: `2(v-1)` for `v`, `2(v-1)+1` for `-v`.
fn node(l: i32) -> usize {
    2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0)
}

/// Decides a formula whose clauses have width at most 2.
pub fn two_sat_solve(formula: &CnfFormula) -> Result<bool> {
    let n2 = 2 * formula.n as usize;
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * formula.m());
    for c in &formula.clauses {
        match c.as_slice() {
            [] => return Ok(false),
            [a] => edges.push((node(*a) ^ 1, node(*a))),
            [a, b] => {
                edges.push((node(*a) ^ 1, node(*b)));
                edges.push((node(*b) ^ 1, node(*a)));
            }
            _ => {
                return Err(Error::Invalid(format!(
                    "2-SAT solver got a clause of width {}",
                    c.len()
                )))
            }
        }
    }
    let comp = scc(n2, &edges);
    Ok((0..formula.n as usize).all(|v| comp[2 * v] != comp[2 * v + 1]))
}

fn csr(n: usize, edges: &[(usize, usize)], reverse: bool) -> (Vec<usize>, Vec<usize>) {
    let mut start = vec![0usize; n + 1];
    for &(a, b) in edges {
        start[if reverse { b } else { a } + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut adj = vec![0usize; edges.len()];
    for &(a, b) in edges {
        let (from, to) = if reverse { (b, a) } else { (a, b) };
        adj[fill[from]] = to;
        fill[from] += 1;
    }
    (start, adj)
}

/// Kosaraju with explicit stacks; returns a component id per node.
fn scc(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let (fs, fa) = csr(n, edges, false);
    let (rs, ra) = csr(n, edges, true);

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        stack.push((root, fs[root]));
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < fs[v + 1] {
                let w = fa[*next];
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, fs[w]));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut id = 0;
    let mut todo = Vec::new();
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = id;
        todo.push(root);
        while let Some(v) = todo.pop() {
            for &w in &ra[rs[v]..rs[v + 1]] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    todo.push(w);
                }
            }
        }
        id += 1;
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u32, c: &[&[i32]]) -> CnfFormula {
        CnfFormula::new(n, c.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn all_four_sign_patterns_unsat() {
        let g = f(2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
        assert!(!two_sat_solve(&g).unwrap());
    }

    #[test]
    fn implication_chain_sat() {
        assert!(two_sat_solve(&f(3, &[&[-1, 2], &[-2, 3]])).unwrap());
    }

    #[test]
    fn units_and_width_errors() {
        assert!(!two_sat_solve(&f(1, &[&[1], &[-1]])).unwrap());
        assert!(two_sat_solve(&f(2, &[&[1], &[-1, 2]])).unwrap());
        assert!(two_sat_solve(&f(3, &[&[1, 2, 3]])).is_err());
    }
}
