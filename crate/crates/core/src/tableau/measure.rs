//! Termination measure of a node label.
//!
//! `weight` follows the usual size function on terms and literals, with
//! `s(t)` weighing `3 + a + weight(t)` for the maximal arity `a` and a
//! defined literal weighing one more than the heaviest of its unfoldings.
//! Defined atoms nested inside an unfolding count 2, which keeps the
//! definition well-founded for recursive rules.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::formula::{DepthRel, DepthRhs, Formula, NodeLabel};
use crate::sig::{DefId, Signature, SUCC};
use crate::term::Term;

use super::rules::{diseq_instances, param_pair, separable_pairs, solved_params, RuleContext};
use super::ProveError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    /// Weights of the formulae other than parameter (dis)equations,
    /// largest first.
    pub weights: Vec<usize>,
    pub separable: usize,
    pub diseq: usize,
    pub unsolved: usize,
}

/// Multiset extension of the order on naturals. For a total order this is
/// the lexicographic comparison of the descending sequences.
pub fn multiset_cmp(a: &[usize], b: &[usize]) -> Ordering {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    x.sort_unstable_by(|p, q| q.cmp(p));
    y.sort_unstable_by(|p, q| q.cmp(p));
    x.cmp(&y)
}

impl PartialOrd for Measure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Measure {
    fn cmp(&self, other: &Self) -> Ordering {
        multiset_cmp(&self.weights, &other.weights)
            .then(self.separable.cmp(&other.separable))
            .then(self.diseq.cmp(&other.diseq))
            .then(self.unsolved.cmp(&other.unsolved))
    }
}

pub struct Weigher<'a> {
    sig: &'a Signature,
    ctx: &'a RuleContext<'a>,
    arity: usize,
    defs: Mutex<HashMap<DefId, usize>>,
}

impl<'a> Weigher<'a> {
    pub fn new(sig: &'a Signature, ctx: &'a RuleContext<'a>) -> Self {
        Weigher {
            sig,
            ctx,
            arity: sig.max_arity(),
            defs: Mutex::new(HashMap::new()),
        }
    }

    fn term(&self, t: &Term, pattern: Option<&Term>) -> usize {
        if pattern == Some(t) {
            return 1;
        }
        match t {
            Term::Param(_) | Term::Var(_) => 1,
            Term::App(f, args) if *f == SUCC => 3 + self.arity + self.term(&args[0], pattern),
            Term::App(_, args) => 1 + args.iter().map(|a| self.term(a, pattern)).sum::<usize>(),
        }
    }

    fn rhs(&self, rhs: DepthRhs) -> usize {
        match rhs {
            DepthRhs::Zero | DepthRhs::N => 1,
            DepthRhs::SuccZero | DepthRhs::SuccN => 4 + self.arity,
        }
    }

    fn formula_with(&self, f: &Formula, pattern: Option<&Term>, nested: bool) -> usize {
        let neg = |positive: bool| usize::from(!positive);
        match f {
            Formula::True | Formula::False => 1,
            Formula::Pred { args, positive, .. } => {
                1 + args.iter().map(|a| self.term(a, pattern)).sum::<usize>() + neg(*positive)
            }
            Formula::Eq(t, s) => self.term(t, pattern) + self.term(s, pattern) + 1,
            Formula::Diseq(t, s) => self.term(t, pattern) + self.term(s, pattern) + 2,
            Formula::Defined { def, positive, .. } => {
                let w = if nested { 2 } else { self.defined(*def) };
                w + neg(*positive)
            }
            Formula::Depth { rel, rhs, .. } => {
                1 + self.rhs(*rhs) + if *rel == DepthRel::Le { 2 } else { 1 }
            }
            Formula::And(cs) | Formula::Or(cs) => {
                cs.len() - 1
                    + cs
                        .iter()
                        .map(|c| self.formula_with(c, pattern, nested))
                        .sum::<usize>()
            }
            Formula::Quant { body, .. } => 1 + self.formula_with(body, pattern, nested),
        }
    }

    /// `1 + max_f weight(ψ_f)` over the constructors of the index sort.
    fn defined(&self, def: DefId) -> usize {
        if let Some(w) = self.defs.lock().unwrap().get(&def) {
            return *w;
        }
        let sort = self.sig.def(def).sort;
        let mut best = 0;
        for ctor in self.sig.constructors_of(sort) {
            let Some(rule) = self.ctx.rules.get(def, ctor) else {
                continue;
            };
            let args: Vec<Term> = rule.formals.iter().map(|v| Term::Var(*v)).collect();
            if let Ok(body) = self.ctx.rules.normal_form(self.sig, def, ctor, &args) {
                let pattern = Term::app(ctor, args);
                best = best.max(self.formula_with(&body, Some(&pattern), true));
            }
        }
        let w = 1 + best;
        self.defs.lock().unwrap().insert(def, w);
        w
    }

    pub fn weight(&self, f: &Formula) -> usize {
        self.formula_with(f, None, false)
    }

    pub fn measure(&self, label: &NodeLabel) -> Result<Measure, ProveError> {
        let mut weights: Vec<usize> = label
            .iter()
            .filter(|f| param_pair(f).is_none())
            .map(|f| self.weight(f))
            .collect();
        weights.sort_unstable_by(|a, b| b.cmp(a));
        let solved = solved_params(label);
        Ok(Measure {
            weights,
            separable: separable_pairs(self.sig, label, self.ctx.n).len(),
            diseq: diseq_instances(self.ctx, self.sig, label)?
                .iter()
                .map(|i| match i {
                    super::rules::RuleInstance::DiseqDec { diseq, .. } => diseq.clone(),
                    _ => unreachable!(),
                })
                .collect::<std::collections::BTreeSet<_>>()
                .len(),
            unsolved: label.params().iter().filter(|p| !solved.contains(p)).count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equality::DeltaTable;
    use crate::rewrite::RewriteSystem;
    use crate::sig::NAT;

    #[test]
    fn depth_atom_weights() {
        let mut sig = Signature::new();
        let a = sig.add_param("A", NAT).unwrap();
        let n = sig.new_depth_param();
        let rules = RewriteSystem::new();
        let delta = DeltaTable::new();
        let ctx = RuleContext {
            rules: &rules,
            delta: &delta,
            n: Some(n),
            base_closure: false,
        };
        let w = Weigher::new(&sig, &ctx);
        let arity = sig.max_arity();
        assert_eq!(w.weight(&Formula::depth(a, DepthRel::Eq, DepthRhs::N)), 3);
        assert_eq!(w.weight(&Formula::depth(a, DepthRel::Lt, DepthRhs::N)), 3);
        assert_eq!(w.weight(&Formula::depth(a, DepthRel::Le, DepthRhs::N)), 4);
        assert_eq!(
            w.weight(&Formula::depth(a, DepthRel::Lt, DepthRhs::SuccN)),
            6 + arity
        );
    }

    #[test]
    fn multiset_order() {
        assert_eq!(multiset_cmp(&[5], &[4, 4, 4]), Ordering::Greater);
        assert_eq!(multiset_cmp(&[3, 1], &[3]), Ordering::Greater);
        assert_eq!(multiset_cmp(&[2, 2], &[2, 2]), Ordering::Equal);
    }
}
