use super::CnfFormula;
use crate::error::{Error, Result};

pub const MAX_ENUM_VARS: u32 = 24;

/// Frozen-literal density by exhaustive enumeration.
///
/// With variables `1..=frozen_count` fixed to true, counts the variables that
/// take one value in every satisfying assignment and divides by the `2n`
/// literals. `None` if the restricted formula is unsatisfiable.
pub fn measure_frozen(formula: &CnfFormula, frozen_count: u32) -> Result<Option<f64>> {
    let n = formula.n;
    if n > MAX_ENUM_VARS {
        return Err(Error::Capacity(format!(
            "exhaustive enumeration supports n <= {MAX_ENUM_VARS}, got {n}"
        )));
    }
    if frozen_count > n {
        return Err(Error::Invalid(format!("frozen prefix {frozen_count} exceeds n = {n}")));
    }
    if n == 0 {
        return Ok(if formula.clauses.iter().any(Vec::is_empty) { None } else { Some(0.0) });
    }
    let masks: Vec<(u32, u32)> = formula
        .clauses
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, q), &l| {
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect();
    let prefix = if frozen_count == 0 { 0 } else { u32::MAX >> (32 - frozen_count) };
    let free = n - frozen_count;
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut all_one = full;
    let mut any_one = 0u32;
    let mut found = false;
    for rest in 0..(1u64 << free) {
        let a = prefix | ((rest as u32) << frozen_count);
        let na = !a;
        if masks.iter().all(|&(p, q)| a & p != 0 || na & q != 0) {
            found = true;
            all_one &= a;
            any_one |= a;
        }
    }
    if !found {
        return Ok(None);
    }
    let frozen = (all_one | (!any_one & full)).count_ones();
    Ok(Some(frozen as f64 / (2.0 * n as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_formula_prefix() {
        let f = CnfFormula::new(10, vec![]).unwrap();
        assert_eq!(measure_frozen(&f, 2).unwrap(), Some(0.1));
    }

    #[test]
    fn forced_units() {
        let f = CnfFormula::new(2, vec![vec![1], vec![2]]).unwrap();
        assert_eq!(measure_frozen(&f, 0).unwrap(), Some(0.5));
    }

    #[test]
    fn unsat_under_prefix() {
        let f = CnfFormula::new(2, vec![vec![-1]]).unwrap();
        assert_eq!(measure_frozen(&f, 1).unwrap(), None);
        assert_eq!(measure_frozen(&f, 0).unwrap(), Some(0.25));
    }

    #[test]
    fn capacity() {
        let f = CnfFormula::new(25, vec![]).unwrap();
        assert!(matches!(measure_frozen(&f, 0), Err(Error::Capacity(_))));
    }
}
