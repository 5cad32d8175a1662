//! Complete DPLL search with unit propagation and a shortest-clause branching rule.

use super::CnfFormula;

const UNSET: i8 = 0;

struct Solver<'a> {
    clauses: &'a [Vec<i32>],
    /// Clause indices per literal; index `2(v-1)` for `v`, `2(v-1)+1` for `-v`.
    occurs: Vec<Vec<usize>>,
    value: Vec<i8>,
    trail: Vec<i32>,
}

fn lit_index(l: i32) -> usize {
    2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0)
}

impl<'a> Solver<'a> {
    fn new(f: &'a CnfFormula) -> Self {
        let mut occurs = vec![Vec::new(); 2 * f.n as usize];
        for (ci, c) in f.clauses.iter().enumerate() {
            for &l in c {
                occurs[lit_index(l)].push(ci);
            }
        }
        Self {
            clauses: &f.clauses,
            occurs,
            value: vec![UNSET; f.n as usize + 1],
            trail: Vec::new(),
        }
    }

    fn lit_value(&self, l: i32) -> i8 {
        let v = self.value[l.unsigned_abs() as usize];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    fn assign(&mut self, l: i32) {
        self.value[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
        self.trail.push(l);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            self.value[l.unsigned_abs() as usize] = UNSET;
        }
    }

    /// Propagates from trail position `head`; false on conflict.
    fn propagate(&mut self, mut head: usize) -> bool {
        while head < self.trail.len() {
            let falsified = -self.trail[head];
            head += 1;
            for oi in 0..self.occurs[lit_index(falsified)].len() {
                let ci = self.occurs[lit_index(falsified)][oi];
                let mut unit = None;
                let mut open = 0;
                let mut sat = false;
                for &l in &self.clauses[ci] {
                    match self.lit_value(l) {
                        1 => {
                            sat = true;
                            break;
                        }
                        0 => {
                            if unit != Some(l) {
                                open += 1;
                            }
                            unit = Some(l);
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                match (open, unit) {
                    (0, _) => return false,
                    (1, Some(l)) => self.assign(l),
                    _ => {}
                }
            }
        }
        true
    }

    /// First open literal of an unsatisfied clause with the fewest open literals.
    fn pick(&self) -> Option<i32> {
        let mut best: Option<(usize, i32)> = None;
        for c in self.clauses {
            let mut open = 0;
            let mut first = 0;
            let mut sat = false;
            for &l in c {
                match self.lit_value(l) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => {
                        if open == 0 {
                            first = l;
                        }
                        open += 1;
                    }
                    _ => {}
                }
            }
            if !sat && open > 0 && best.map_or(true, |(b, _)| open < b) {
                best = Some((open, first));
                if open <= 2 {
                    break;
                }
            }
        }
        best.map(|(_, l)| l)
    }

    fn search(&mut self) -> bool {
        let Some(lit) = self.pick() else {
            return true;
        };
        for choice in [lit, -lit] {
            let mark = self.trail.len();
            self.assign(choice);
            if self.propagate(mark) && self.search() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// True iff `formula` is satisfiable with variables `1..=frozen_count` fixed to true.
pub fn dpll_sat(formula: &CnfFormula, frozen_count: u32) -> bool {
    assert!(frozen_count <= formula.n, "frozen prefix longer than the formula");
    if formula.clauses.iter().any(Vec::is_empty) {
        return false;
    }
    let mut s = Solver::new(formula);
    for v in 1..=frozen_count as i32 {
        s.assign(v);
    }
    // initial units
    for c in formula.clauses.iter() {
        let open: Vec<i32> = c.iter().copied().filter(|&l| s.lit_value(l) != -1).collect();
        if open.iter().any(|&l| s.lit_value(l) == 1) {
            continue;
        }
        match open.as_slice() {
            [] => return false,
            [l] => {
                if s.lit_value(*l) == 0 {
                    s.assign(*l);
                }
            }
            _ => {}
        }
    }
    if !s.propagate(0) {
        return false;
    }
    s.search()
}
