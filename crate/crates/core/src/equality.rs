//! Decomposition of equations between constructor-headed terms.
//!
//! A [`DeltaTable`] maps a pair of constructors of the same sort to a
//! positive combination of equations between their arguments. Pairs that
//! are not listed behave like free constructors.

use std::collections::{BTreeMap, HashMap};

use crate::formula::Formula;
use crate::sig::{FunId, Signature, SortId, VarId};
use crate::term::Term;

/// Template for `f(x1..xn) = g(y1..ym)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaEntry {
    pub xs: Vec<VarId>,
    pub ys: Vec<VarId>,
    pub body: Formula,
    pub line: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaTable {
    entries: BTreeMap<(FunId, FunId), DeltaEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeltaError {
    #[error("constructors `{0}` and `{1}` have different sorts")]
    SortMismatch(String, String),
    #[error("constructor `{0}` expects {1} arguments, got {2}")]
    Arity(String, usize, usize),
    #[error("duplicate table entry for `{0}`/`{1}`")]
    Duplicate(String, String),
}

impl DeltaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        sig: &Signature,
        f: FunId,
        g: FunId,
        entry: DeltaEntry,
    ) -> Result<(), DeltaError> {
        if self.entries.contains_key(&(f, g)) || self.entries.contains_key(&(g, f)) {
            return Err(DeltaError::Duplicate(
                sig.fun(f).name.clone(),
                sig.fun(g).name.clone(),
            ));
        }
        self.entries.insert((f, g), entry);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (FunId, FunId, &DeltaEntry)> {
        self.entries.iter().map(|((f, g), e)| (*f, *g, e))
    }

    /// No table entry involves a constructor of `sort`.
    pub fn is_free_sort(&self, sig: &Signature, sort: SortId) -> bool {
        self.entries
            .keys()
            .all(|(f, g)| sig.fun(*f).result != sort && sig.fun(*g).result != sort)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Δ(f(s) = g(t))`.
    pub fn delta(
        &self,
        sig: &Signature,
        f: FunId,
        s: &[Term],
        g: FunId,
        t: &[Term],
    ) -> Result<Formula, DeltaError> {
        let (fd, gd) = (sig.fun(f), sig.fun(g));
        if fd.result != gd.result {
            return Err(DeltaError::SortMismatch(fd.name.clone(), gd.name.clone()));
        }
        if s.len() != fd.arity() {
            return Err(DeltaError::Arity(fd.name.clone(), fd.arity(), s.len()));
        }
        if t.len() != gd.arity() {
            return Err(DeltaError::Arity(gd.name.clone(), gd.arity(), t.len()));
        }
        let instantiate = |e: &DeltaEntry, xs: &[Term], ys: &[Term]| {
            let map: HashMap<VarId, Term> = e
                .xs
                .iter()
                .copied()
                .zip(xs.iter().cloned())
                .chain(e.ys.iter().copied().zip(ys.iter().cloned()))
                .collect();
            e.body.subst_vars(&map)
        };
        if let Some(e) = self.entries.get(&(f, g)) {
            return Ok(instantiate(e, s, t));
        }
        if let Some(e) = self.entries.get(&(g, f)) {
            // stored the other way round: x ranges over g's arguments
            return Ok(orient_like(&instantiate(e, t, s), s));
        }
        if f != g {
            return Ok(Formula::False);
        }
        Ok(Formula::and(
            s.iter()
                .zip(t)
                .map(|(a, b)| Formula::eq(a.clone(), b.clone())),
        ))
    }

    /// `NNF(¬Δ(f(s) = g(t)))`.
    pub fn negated_delta(
        &self,
        sig: &Signature,
        f: FunId,
        s: &[Term],
        g: FunId,
        t: &[Term],
    ) -> Result<Formula, DeltaError> {
        Ok(self.delta(sig, f, s, g, t)?.negate())
    }

    /// Truth of `u = v` for ground constructor terms, where non-inductive
    /// values are pairwise distinct constants.
    pub fn ground_equal(&self, sig: &Signature, u: &Term, v: &Term) -> bool {
        match (u, v) {
            (Term::App(f, s), Term::App(g, t)) if sig.fun(*f).kind == sig.fun(*g).kind => {
                if sig.fun(*f).kind != crate::sig::FunKind::Constructor {
                    return u == v;
                }
                match self.delta(sig, *f, s, *g, t) {
                    Ok(d) => self.eval_ground(sig, &d),
                    Err(_) => false,
                }
            }
            _ => u == v,
        }
    }

    fn eval_ground(&self, sig: &Signature, f: &Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => self.ground_equal(sig, a, b),
            Formula::Diseq(a, b) => !self.ground_equal(sig, a, b),
            Formula::And(cs) => cs.iter().all(|c| self.eval_ground(sig, c)),
            Formula::Or(cs) => cs.iter().any(|c| self.eval_ground(sig, c)),
            _ => false,
        }
    }
}

/// Equations of a swapped entry come out as `t_j = s_i`; flip them so the
/// left side always belongs to the first term, as for direct entries.
fn orient_like(f: &Formula, left: &[Term]) -> Formula {
    match f {
        Formula::Eq(a, b) if !left.contains(a) && left.contains(b) => {
            Formula::eq(b.clone(), a.clone())
        }
        Formula::And(cs) => Formula::and(cs.iter().map(|c| orient_like(c, left))),
        Formula::Or(cs) => Formula::or(cs.iter().map(|c| orient_like(c, left))),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{FunKind, NAT, SUCC, ZERO};

    fn params(sig: &mut Signature, names: &[&str]) -> Vec<Term> {
        names
            .iter()
            .map(|n| Term::Param(sig.add_param(n, NAT).unwrap()))
            .collect()
    }

    #[test]
    fn free_default() {
        let mut sig = Signature::new();
        let ps = params(&mut sig, &["B", "C"]);
        let table = DeltaTable::new();
        assert_eq!(
            table.delta(&sig, ZERO, &[], SUCC, &ps[..1]).unwrap(),
            Formula::False
        );
        assert_eq!(
            table.delta(&sig, SUCC, &ps[..1], SUCC, &ps[1..]).unwrap(),
            Formula::eq(ps[0].clone(), ps[1].clone())
        );
        assert_eq!(
            table
                .negated_delta(&sig, SUCC, &ps[..1], SUCC, &ps[1..])
                .unwrap(),
            Formula::diseq(ps[0].clone(), ps[1].clone())
        );
        assert_eq!(
            table.negated_delta(&sig, ZERO, &[], SUCC, &ps[..1]).unwrap(),
            Formula::True
        );
    }

    #[test]
    fn free_binary_negation_is_a_disjunction() {
        let mut sig = Signature::new();
        let f2 = sig
            .add_fun("f2", vec![NAT, NAT], NAT, FunKind::Constructor)
            .unwrap();
        let ps = params(&mut sig, &["B1", "B2", "C1", "C2"]);
        let table = DeltaTable::new();
        let got = table
            .negated_delta(&sig, f2, &ps[..2], f2, &ps[2..])
            .unwrap();
        assert_eq!(
            got,
            Formula::or([
                Formula::diseq(ps[0].clone(), ps[2].clone()),
                Formula::diseq(ps[1].clone(), ps[3].clone()),
            ])
        );
    }

    #[test]
    fn commutative_entry() {
        let mut sig = Signature::new();
        let g = sig
            .add_fun("g", vec![NAT, NAT], NAT, FunKind::Constructor)
            .unwrap();
        let x: Vec<VarId> = (1..=2).map(|i| sig.add_var(&format!("x{i}"), NAT)).collect();
        let y: Vec<VarId> = (1..=2).map(|i| sig.add_var(&format!("y{i}"), NAT)).collect();
        let v = |id: VarId| Term::Var(id);
        let body = Formula::or([
            Formula::and([Formula::eq(v(x[0]), v(y[0])), Formula::eq(v(x[1]), v(y[1]))]),
            Formula::and([Formula::eq(v(x[0]), v(y[1])), Formula::eq(v(x[1]), v(y[0]))]),
        ]);
        let mut table = DeltaTable::new();
        table
            .insert(
                &sig,
                g,
                g,
                DeltaEntry {
                    xs: x,
                    ys: y,
                    body,
                    line: None,
                },
            )
            .unwrap();
        let ps = params(&mut sig, &["B1", "B2", "C1", "C2"]);
        let got = table.delta(&sig, g, &ps[..2], g, &ps[2..]).unwrap();
        let e = |i: usize, j: usize| Formula::eq(ps[i].clone(), ps[j].clone());
        assert_eq!(
            got,
            Formula::or([
                Formula::and([e(0, 2), e(1, 3)]),
                Formula::and([e(0, 3), e(1, 2)]),
            ])
        );
        let zero = Term::constant(ZERO);
        let one = Term::app(SUCC, vec![zero.clone()]);
        let u = Term::app(g, vec![zero.clone(), one.clone()]);
        let w = Term::app(g, vec![one, zero]);
        assert!(table.ground_equal(&sig, &u, &w));
        assert!(!DeltaTable::new().ground_equal(&sig, &u, &w));
    }

    #[test]
    fn swapped_lookup() {
        let mut sig = Signature::new();
        let x = sig.add_var("x1", NAT);
        let mut table = DeltaTable::new();
        // Δ(s, 0) listed as true: s(x1) = 0 always holds in this theory
        table
            .insert(
                &sig,
                SUCC,
                ZERO,
                DeltaEntry {
                    xs: vec![x],
                    ys: vec![],
                    body: Formula::True,
                    line: None,
                },
            )
            .unwrap();
        let ps = params(&mut sig, &["B"]);
        assert_eq!(
            table.delta(&sig, ZERO, &[], SUCC, &ps).unwrap(),
            Formula::True
        );
    }
}
