//! Propositional formulae, Tseitin clausification and a small DPLL solver.

/// Literal in DIMACS convention: `v + 1` for variable `v`, negated by sign.
pub type Lit = i32;
pub type Clause = Vec<Lit>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop {
    Const(bool),
    Var(u32),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            Prop::Const(b) => *b,
            Prop::Var(v) => assignment[*v as usize],
            Prop::Not(p) => !p.eval(assignment),
            Prop::And(ps) => ps.iter().all(|p| p.eval(assignment)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval(assignment)),
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Prop::Const(_) => None,
            Prop::Var(v) => Some(*v),
            Prop::Not(p) => p.max_var(),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().filter_map(Prop::max_var).max(),
        }
    }
}

pub fn lit(var: u32, positive: bool) -> Lit {
    let l = var as i32 + 1;
    if positive {
        l
    } else {
        -l
    }
}

fn var_of(l: Lit) -> usize {
    (l.unsigned_abs() - 1) as usize
}

/// Clausal form of `p` over `num_vars` original variables, with auxiliary
/// variables numbered from `num_vars` up. Returns the clauses and the total
/// variable count.
pub fn clausify(p: &Prop, num_vars: u32) -> (Vec<Clause>, u32) {
    let mut ts = Tseitin {
        next: num_vars,
        clauses: Vec::new(),
    };
    match p {
        // top-level conjunctions of disjunctions of literals stay as they are
        Prop::And(ps) => {
            for q in ps {
                ts.assert(q);
            }
        }
        q => ts.assert(q),
    }
    (ts.clauses, ts.next)
}

struct Tseitin {
    next: u32,
    clauses: Vec<Clause>,
}

impl Tseitin {
    fn fresh(&mut self) -> u32 {
        self.next += 1;
        self.next - 1
    }

    fn as_literal(p: &Prop) -> Option<Lit> {
        match p {
            Prop::Var(v) => Some(lit(*v, true)),
            Prop::Not(q) => match q.as_ref() {
                Prop::Var(v) => Some(lit(*v, false)),
                _ => None,
            },
            _ => None,
        }
    }

    fn assert(&mut self, p: &Prop) {
        match p {
            Prop::Const(true) => {}
            Prop::Const(false) => self.clauses.push(Vec::new()),
            Prop::And(ps) => ps.iter().for_each(|q| self.assert(q)),
            Prop::Or(ps) => {
                let clause = ps.iter().map(|q| self.encode(q)).collect();
                self.clauses.push(clause);
            }
            q => {
                let l = self.encode(q);
                self.clauses.push(vec![l]);
            }
        }
    }

    /// A literal equivalent to `p` under the emitted definitions.
    fn encode(&mut self, p: &Prop) -> Lit {
        if let Some(l) = Self::as_literal(p) {
            return l;
        }
        match p {
            Prop::Const(b) => {
                let v = self.fresh();
                self.clauses.push(vec![lit(v, *b)]);
                lit(v, true)
            }
            Prop::Not(q) => -self.encode(q),
            Prop::And(ps) | Prop::Or(ps) => {
                let is_and = matches!(p, Prop::And(_));
                let ls: Vec<Lit> = ps.iter().map(|q| self.encode(q)).collect();
                let x = lit(self.fresh(), true);
                if is_and {
                    // x -> l_i ; (l_1 & ... & l_n) -> x
                    for &l in &ls {
                        self.clauses.push(vec![-x, l]);
                    }
                    let mut c: Clause = ls.iter().map(|l| -l).collect();
                    c.push(x);
                    self.clauses.push(c);
                } else {
                    // l_i -> x ; x -> (l_1 | ... | l_n)
                    for &l in &ls {
                        self.clauses.push(vec![-l, x]);
                    }
                    let mut c = ls.clone();
                    c.push(-x);
                    self.clauses.push(c);
                }
                x
            }
            Prop::Var(_) => unreachable!(),
        }
    }
}

/// Decides a clause set over `num_vars` variables. Branches on the lowest
/// unassigned variable, trying `false` first; unassigned variables in the
/// returned model are `false`.
pub fn dpll(clauses: &[Clause], num_vars: u32) -> Option<Vec<bool>> {
    let mut assign: Vec<Option<bool>> = vec![None; num_vars as usize];
    if search(clauses, &mut assign) {
        Some(assign.into_iter().map(|v| v.unwrap_or(false)).collect())
    } else {
        None
    }
}

fn lit_value(l: Lit, assign: &[Option<bool>]) -> Option<bool> {
    assign[var_of(l)].map(|b| b == (l > 0))
}

/// Unit propagation to fixpoint; records assigned variables in `trail`.
/// Returns false on conflict.
fn propagate(clauses: &[Clause], assign: &mut [Option<bool>], trail: &mut Vec<usize>) -> bool {
    loop {
        let mut changed = false;
        for c in clauses {
            let mut unassigned = None;
            let mut open = 0;
            let mut satisfied = false;
            for &l in c {
                match lit_value(l, assign) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open += 1;
                        unassigned = Some(l);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match open {
                0 => return false,
                1 => {
                    let l = unassigned.unwrap();
                    assign[var_of(l)] = Some(l > 0);
                    trail.push(var_of(l));
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(clauses: &[Clause], assign: &mut [Option<bool>]) -> bool {
    let mut trail = Vec::new();
    if !propagate(clauses, assign, &mut trail) {
        undo(assign, &trail);
        return false;
    }
    // only variables that occur in some unsatisfied clause need a decision
    let next = clauses
        .iter()
        .filter(|c| !c.iter().any(|&l| lit_value(l, assign) == Some(true)))
        .flat_map(|c| c.iter().map(|&l| var_of(l)))
        .filter(|&v| assign[v].is_none())
        .min();
    let Some(v) = next else {
        return true;
    };
    for value in [false, true] {
        assign[v] = Some(value);
        if search(clauses, assign) {
            return true;
        }
        assign[v] = None;
    }
    undo(assign, &trail);
    false
}

fn undo(assign: &mut [Option<bool>], trail: &[usize]) {
    for &v in trail {
        assign[v] = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_clause_sets() {
        assert_eq!(dpll(&[vec![1], vec![-1]], 1), None);
        assert_eq!(dpll(&[], 0), Some(vec![]));
        assert_eq!(dpll(&[vec![1, 2], vec![-1]], 2), Some(vec![false, true]));
        assert_eq!(dpll(&[vec![]], 0), None);
    }

    #[test]
    fn clausified_formula_keeps_models() {
        // (x0 & !x1) | (x1 & x2)
        let p = Prop::Or(vec![
            Prop::And(vec![Prop::Var(0), Prop::Not(Box::new(Prop::Var(1)))]),
            Prop::And(vec![Prop::Var(1), Prop::Var(2)]),
        ]);
        let (clauses, n) = clausify(&p, 3);
        let model = dpll(&clauses, n).expect("satisfiable");
        assert!(p.eval(&model[..3]));
        let q = Prop::And(vec![p.clone(), Prop::Not(Box::new(p))]);
        let (clauses, n) = clausify(&q, 3);
        assert_eq!(dpll(&clauses, n), None);
    }
}
