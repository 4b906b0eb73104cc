//! Satisfiability of the base formula sets found at irreducible leaves.
//!
//! The built-in backend abstracts every atom to a propositional variable.
//! Distinct parameters denote distinct values, so syntactically distinct
//! atoms are independent and disequations between distinct parameters hold.

pub mod dpll;

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};

use crate::formula::Formula;
use crate::print::formula_to_string;
use crate::sig::Signature;
use crate::term::Term;
use dpll::Prop;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverResult {
    /// Truth values of the abstracted atoms, keyed by their printed form.
    Sat(BTreeMap<String, bool>),
    Unsat,
    Unsupported(String),
}

impl SolverResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolverResult::Sat(_))
    }
}

/// A decision procedure for sets of base formulae. Implementations keep no
/// state between calls.
pub trait BaseSolver: Send + Sync {
    fn name(&self) -> String;
    fn solve(&self, sig: &Signature, formulas: &[Formula]) -> SolverResult;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Builtin;

/// Assigns propositional variables to atoms in order of first occurrence.
#[derive(Default)]
struct Atoms {
    keys: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Atoms {
    fn var(&mut self, key: String) -> Prop {
        if let Some(v) = self.index.get(&key) {
            return Prop::Var(*v);
        }
        let v = self.keys.len() as u32;
        self.index.insert(key.clone(), v);
        self.keys.push(key);
        Prop::Var(v)
    }
}

fn is_value(sig: &Signature, t: &Term) -> bool {
    matches!(t, Term::Param(_)) || t.is_ground_constructor(sig)
}

fn abstract_formula(sig: &Signature, f: &Formula, atoms: &mut Atoms) -> Result<Prop, String> {
    Ok(match f {
        Formula::True => Prop::Const(true),
        Formula::False => Prop::Const(false),
        Formula::Pred {
            pred,
            args,
            positive,
        } => {
            let atom = Formula::pred(*pred, args.clone(), true);
            let v = atoms.var(formula_to_string(sig, &atom));
            if *positive {
                v
            } else {
                Prop::Not(Box::new(v))
            }
        }
        Formula::Eq(t, s) | Formula::Diseq(t, s) => {
            if !(is_value(sig, t) && is_value(sig, s)) {
                return Err(formula_to_string(sig, f));
            }
            // distinct values: only identical terms are equal
            let equal = t == s;
            Prop::Const(equal == matches!(f, Formula::Eq(..)))
        }
        Formula::Defined { .. } | Formula::Depth { .. } | Formula::Quant { .. } => {
            return Err(formula_to_string(sig, f));
        }
        Formula::And(cs) => Prop::And(
            cs.iter()
                .map(|c| abstract_formula(sig, c, atoms))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(cs) => Prop::Or(
            cs.iter()
                .map(|c| abstract_formula(sig, c, atoms))
                .collect::<Result<_, _>>()?,
        ),
    })
}

impl Builtin {
    /// Propositional abstraction of a formula set, with the atom keys.
    pub fn abstraction(
        &self,
        sig: &Signature,
        formulas: &[Formula],
    ) -> Result<(Prop, Vec<String>), String> {
        let mut atoms = Atoms::default();
        let parts = formulas
            .iter()
            .map(|f| abstract_formula(sig, f, &mut atoms))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Prop::And(parts), atoms.keys))
    }
}

impl BaseSolver for Builtin {
    fn name(&self) -> String {
        "builtin".into()
    }

    fn solve(&self, sig: &Signature, formulas: &[Formula]) -> SolverResult {
        let (prop, keys) = match self.abstraction(sig, formulas) {
            Ok(x) => x,
            Err(offending) => {
                return SolverResult::Unsupported(format!(
                    "built-in backend cannot decide `{offending}`"
                ))
            }
        };
        let n = keys.len() as u32;
        let (clauses, total) = dpll::clausify(&prop, n);
        match dpll::dpll(&clauses, total) {
            Some(model) => SolverResult::Sat(keys.into_iter().zip(model).collect()),
            None => SolverResult::Unsat,
        }
    }
}

/// External backend run as `sh -c CMD`. The problem is written to its
/// standard input as declarations followed by one `(assert F)` per formula;
/// the first output line must be `sat`, `unsat` or `unknown`.
#[derive(Clone, Debug)]
pub struct Bridge {
    pub command: String,
}

impl Bridge {
    pub fn new(command: impl Into<String>) -> Self {
        Bridge {
            command: command.into(),
        }
    }

    pub fn problem_text(sig: &Signature, formulas: &[Formula]) -> String {
        let mut text = crate::problem::declarations_to_string(sig);
        for f in formulas {
            text.push_str(&format!("(assert {})\n", formula_to_string(sig, f)));
        }
        text
    }
}

impl BaseSolver for Bridge {
    fn name(&self) -> String {
        format!("bridge:{}", self.command)
    }

    fn solve(&self, sig: &Signature, formulas: &[Formula]) -> SolverResult {
        let text = Self::problem_text(sig, formulas);
        let child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn();
        let mut child = match child {
            Ok(c) => c,
            Err(e) => return SolverResult::Unsupported(format!("cannot start backend: {e}")),
        };
        if let Some(mut stdin) = child.stdin.take() {
            // a backend may exit before reading everything; that is fine
            let _ = stdin.write_all(text.as_bytes());
        }
        let output = match child.wait_with_output() {
            Ok(o) => o,
            Err(e) => return SolverResult::Unsupported(format!("backend failed: {e}")),
        };
        let stdout = String::from_utf8_lossy(&output.stdout);
        match stdout.lines().next().map(str::trim) {
            Some("sat") => SolverResult::Sat(BTreeMap::new()),
            Some("unsat") => SolverResult::Unsat,
            Some("unknown") => SolverResult::Unsupported("backend answered unknown".into()),
            other => SolverResult::Unsupported(format!(
                "unexpected backend answer {:?}",
                other.unwrap_or("")
            )),
        }
    }
}

/// Parses a `--backend` value: `builtin` or `bridge:CMD`.
pub fn backend_from_spec(spec: &str) -> Option<Box<dyn BaseSolver>> {
    if spec == "builtin" {
        return Some(Box::new(Builtin));
    }
    spec.strip_prefix("bridge:")
        .filter(|c| !c.trim().is_empty())
        .map(|c| Box::new(Bridge::new(c)) as Box<dyn BaseSolver>)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{FunKind, BOOL, NAT};

    struct Fx {
        sig: Signature,
        p: crate::sig::FunId,
        a: Term,
        b: Term,
    }

    fn fx() -> Fx {
        let mut sig = Signature::new();
        let p = sig.add_fun("p", vec![NAT], BOOL, FunKind::Base).unwrap();
        let a = Term::Param(sig.add_param("A", NAT).unwrap());
        let b = Term::Param(sig.add_param("B", NAT).unwrap());
        Fx { sig, p, a, b }
    }

    #[test]
    fn complementary_literals() {
        let f = fx();
        let fs = [
            Formula::pred(f.p, vec![f.a.clone()], true),
            Formula::pred(f.p, vec![f.a.clone()], false),
        ];
        assert_eq!(Builtin.solve(&f.sig, &fs), SolverResult::Unsat);
    }

    #[test]
    fn ground_base_constant() {
        let mut sig = Signature::new();
        let elt = sig.add_sort("elt", false).unwrap();
        let b = sig.add_fun("b", vec![], elt, FunKind::Base).unwrap();
        let p = sig.add_fun("p", vec![elt], BOOL, FunKind::Base).unwrap();
        let fs = [
            Formula::pred(p, vec![Term::constant(b)], true),
            Formula::pred(p, vec![Term::constant(b)], false),
        ];
        assert_eq!(Builtin.solve(&sig, &fs), SolverResult::Unsat);
    }

    #[test]
    fn distinct_parameters_are_independent() {
        let f = fx();
        let fs = [
            Formula::pred(f.p, vec![f.a.clone()], true),
            Formula::pred(f.p, vec![f.b.clone()], false),
            Formula::diseq(f.a.clone(), f.b.clone()),
        ];
        let expected: BTreeMap<String, bool> =
            [("(p A)".to_string(), true), ("(p B)".to_string(), false)]
                .into_iter()
                .collect();
        assert_eq!(Builtin.solve(&f.sig, &fs), SolverResult::Sat(expected));
    }

    #[test]
    fn defined_atoms_are_unsupported() {
        let mut f = fx();
        let d = f.sig.add_def("d", NAT).unwrap();
        let fs = [Formula::defined(d, f.a.clone(), true)];
        assert!(matches!(
            Builtin.solve(&f.sig, &fs),
            SolverResult::Unsupported(m) if m.contains("(d A)")
        ));
    }

    #[test]
    fn bridge_reads_one_line() {
        let f = fx();
        let fs = [Formula::pred(f.p, vec![f.a.clone()], true)];
        let unsat = Bridge::new("cat > /dev/null; echo unsat");
        assert_eq!(unsat.solve(&f.sig, &fs), SolverResult::Unsat);
        let unknown = Bridge::new("cat > /dev/null; echo unknown");
        assert!(matches!(
            unknown.solve(&f.sig, &fs),
            SolverResult::Unsupported(_)
        ));
        // the backend sees the asserted formula
        let echo = Bridge::new("grep -q '(assert (p A))' && echo sat || echo unsat");
        assert!(echo.solve(&f.sig, &fs).is_sat());
    }

    #[test]
    fn backend_specs() {
        assert!(backend_from_spec("builtin").is_some());
        assert!(backend_from_spec("bridge:z3 -in").is_some());
        assert!(backend_from_spec("bridge:").is_none());
        assert!(backend_from_spec("z3").is_none());
    }
}
