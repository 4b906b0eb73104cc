//! Rewrite rules for defined symbols, normal forms and unfolding.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use crate::formula::Formula;
use crate::sig::{DefId, FunId, ParamId, Signature, VarId};
use crate::term::Term;

/// `d_{f(x1,...,xn)} -> body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub def: DefId,
    pub ctor: FunId,
    pub formals: Vec<VarId>,
    pub body: Formula,
    /// Source line, when the rule came from a problem file.
    pub line: Option<usize>,
}

impl RewriteRule {
    pub fn pattern(&self) -> Term {
        Term::app(self.ctor, self.formals.iter().map(|v| Term::Var(*v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("no rule for defined symbol `{0}` at constructor `{1}`")]
    MissingRule(String, String),
    #[error("head-recursive definitions of `{0}` do not terminate")]
    Cyclic(String),
    #[error("index `{0}` is not a ground constructor term")]
    NonGround(String),
    #[error("constructor `{0}` expects {1} arguments, got {2}")]
    Arity(String, usize, usize),
}

/// Rules are kept in input order (duplicates included, so validation can
/// report them); lookups use the first rule for a given pair.
#[derive(Debug, Default)]
pub struct RewriteSystem {
    rules: Vec<RewriteRule>,
    index: BTreeMap<(DefId, FunId), usize>,
    /// Normalized bodies over the rule's formal variables.
    memo: RwLock<HashMap<(DefId, FunId), Formula>>,
}

impl Clone for RewriteSystem {
    fn clone(&self) -> Self {
        RewriteSystem {
            rules: self.rules.clone(),
            index: self.index.clone(),
            memo: RwLock::new(self.memo.read().unwrap().clone()),
        }
    }
}

impl PartialEq for RewriteSystem {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl RewriteSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, rule: RewriteRule) {
        self.index
            .entry((rule.def, rule.ctor))
            .or_insert(self.rules.len());
        self.rules.push(rule);
        self.memo.write().unwrap().clear();
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn get(&self, def: DefId, ctor: FunId) -> Option<&RewriteRule> {
        self.index.get(&(def, ctor)).map(|&i| &self.rules[i])
    }

    fn missing(&self, sig: &Signature, def: DefId, ctor: FunId) -> RewriteError {
        RewriteError::MissingRule(sig.def(def).name.clone(), sig.fun(ctor).name.clone())
    }

    /// Body of `(def, ctor)` with every head-recursive occurrence
    /// `d'_{f(x)}` replaced by its own normalized body, over the formals.
    fn template(
        &self,
        sig: &Signature,
        def: DefId,
        ctor: FunId,
        stack: &mut Vec<DefId>,
    ) -> Result<Formula, RewriteError> {
        if let Some(f) = self.memo.read().unwrap().get(&(def, ctor)) {
            return Ok(f.clone());
        }
        if stack.contains(&def) {
            return Err(RewriteError::Cyclic(sig.def(def).name.clone()));
        }
        let rule = self.get(def, ctor).ok_or_else(|| self.missing(sig, def, ctor))?;
        let pattern = rule.pattern();
        stack.push(def);
        let body = self.expand_head(sig, &rule.body, &pattern, ctor, &rule.formals, stack)?;
        stack.pop();
        self.memo
            .write()
            .unwrap()
            .insert((def, ctor), body.clone());
        Ok(body)
    }

    fn expand_head(
        &self,
        sig: &Signature,
        f: &Formula,
        pattern: &Term,
        ctor: FunId,
        formals: &[VarId],
        stack: &mut Vec<DefId>,
    ) -> Result<Formula, RewriteError> {
        Ok(match f {
            Formula::Defined {
                def,
                index,
                positive,
            } if index == pattern => {
                let inner = self.template(sig, *def, ctor, stack)?;
                // the inner rule has its own formals; align them with ours
                let inner_rule = self.get(*def, ctor).unwrap();
                let map: HashMap<VarId, Term> = inner_rule
                    .formals
                    .iter()
                    .zip(formals)
                    .map(|(a, b)| (*a, Term::Var(*b)))
                    .collect();
                let inner = inner.subst_vars(&map);
                if *positive {
                    inner
                } else {
                    inner.negate()
                }
            }
            Formula::And(cs) => Formula::and(
                cs.iter()
                    .map(|c| self.expand_head(sig, c, pattern, ctor, formals, stack))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Formula::Or(cs) => Formula::or(
                cs.iter()
                    .map(|c| self.expand_head(sig, c, pattern, ctor, formals, stack))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            other => other.clone(),
        })
    }

    /// `d_{f(args)}` normalized: the rule body instantiated with `args`, with
    /// head-recursive defined atoms expanded until every remaining defined
    /// atom is indexed by one of `args`.
    pub fn normal_form(
        &self,
        sig: &Signature,
        def: DefId,
        ctor: FunId,
        args: &[Term],
    ) -> Result<Formula, RewriteError> {
        let arity = sig.fun(ctor).arity();
        if args.len() != arity {
            return Err(RewriteError::Arity(
                sig.fun(ctor).name.clone(),
                arity,
                args.len(),
            ));
        }
        let template = self.template(sig, def, ctor, &mut Vec::new())?;
        let rule = self.get(def, ctor).unwrap();
        let map: HashMap<VarId, Term> = rule.formals.iter().copied().zip(args.iter().cloned()).collect();
        Ok(template.subst_vars(&map))
    }

    /// The conclusion of Unfolding on `d_A` (or `¬d_A`) given `A = f(B)`:
    /// the normal form of `d_{f(B)}` with `f(B)` replaced by `A`.
    pub fn unfold(
        &self,
        sig: &Signature,
        def: DefId,
        param: ParamId,
        ctor: FunId,
        args: &[ParamId],
        positive: bool,
    ) -> Result<Formula, RewriteError> {
        let args: Vec<Term> = args.iter().map(|p| Term::Param(*p)).collect();
        let nf = self.normal_form(sig, def, ctor, &args)?;
        let pattern = Term::app(ctor, args);
        let psi = nf
            .replace_term(sig, &pattern, &Term::Param(param))
            .expect("unfolding pattern and parameter share a sort");
        Ok(if positive { psi } else { psi.negate() })
    }

    /// Fully unfolds `d_t` for a ground constructor term `t`.
    pub fn ground_unfold_atom(
        &self,
        sig: &Signature,
        def: DefId,
        index: &Term,
    ) -> Result<Formula, RewriteError> {
        if !index.is_ground_constructor(sig) {
            return Err(RewriteError::NonGround(crate::print::term_to_string(sig, index)));
        }
        let Term::App(ctor, args) = index else {
            return Err(RewriteError::NonGround(crate::print::term_to_string(sig, index)));
        };
        let nf = self.normal_form(sig, def, *ctor, args)?;
        self.ground_unfold(sig, &nf)
    }

    /// Eliminates every defined atom of a formula whose indices are ground.
    pub fn ground_unfold(&self, sig: &Signature, f: &Formula) -> Result<Formula, RewriteError> {
        Ok(match f {
            Formula::Defined {
                def,
                index,
                positive,
            } => {
                let g = self.ground_unfold_atom(sig, *def, index)?;
                if *positive {
                    g
                } else {
                    g.negate()
                }
            }
            Formula::And(cs) => Formula::and(
                cs.iter()
                    .map(|c| self.ground_unfold(sig, c))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Formula::Or(cs) => Formula::or(
                cs.iter()
                    .map(|c| self.ground_unfold(sig, c))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Formula::Quant { q, var, body } => {
                Formula::quant(*q, *var, self.ground_unfold(sig, body)?)
            }
            other => other.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{FunKind, BOOL, NAT, SUCC, ZERO};

    pub(crate) struct Chain {
        pub sig: Signature,
        pub rules: RewriteSystem,
        pub p: FunId,
        pub g: DefId,
        pub d: DefId,
        pub c: DefId,
    }

    /// g_0 -> p(0), g_{s(K)} -> g_K & (!p(K) | p(s(K))), d_0 -> true,
    /// d_{s(x)} -> d_x, c_0 -> !p(0), c_{s(x)} -> false.
    pub(crate) fn chain() -> Chain {
        let mut sig = Signature::new();
        let p = sig.add_fun("p", vec![NAT], BOOL, FunKind::Base).unwrap();
        let g = sig.add_def("g", NAT).unwrap();
        let d = sig.add_def("d", NAT).unwrap();
        let c = sig.add_def("c", NAT).unwrap();
        let k = sig.add_var("K", NAT);
        let zero = Term::constant(ZERO);
        let kv = Term::Var(k);
        let sk = Term::app(SUCC, vec![kv.clone()]);
        let mut rules = RewriteSystem::new();
        let mut add = |def, ctor, formals: Vec<VarId>, body| {
            rules.add(RewriteRule {
                def,
                ctor,
                formals,
                body,
                line: None,
            })
        };
        add(g, ZERO, vec![], Formula::pred(p, vec![zero.clone()], true));
        add(
            g,
            SUCC,
            vec![k],
            Formula::and([
                Formula::defined(g, kv.clone(), true),
                Formula::or([
                    Formula::pred(p, vec![kv.clone()], false),
                    Formula::pred(p, vec![sk.clone()], true),
                ]),
            ]),
        );
        add(d, ZERO, vec![], Formula::True);
        add(d, SUCC, vec![k], Formula::defined(d, kv.clone(), true));
        add(c, ZERO, vec![], Formula::pred(p, vec![zero], false));
        add(c, SUCC, vec![k], Formula::False);
        Chain {
            sig,
            rules,
            p,
            g,
            d,
            c,
        }
    }

    #[test]
    fn normal_forms() {
        let mut ch = chain();
        let b = ch.sig.add_param("B", NAT).unwrap();
        let bt = Term::Param(b);
        let sb = Term::app(SUCC, vec![bt.clone()]);
        let nf = ch.rules.normal_form(&ch.sig, ch.g, SUCC, &[bt.clone()]).unwrap();
        let expected = Formula::and([
            Formula::defined(ch.g, bt.clone(), true),
            Formula::or([
                Formula::pred(ch.p, vec![bt.clone()], false),
                Formula::pred(ch.p, vec![sb], true),
            ]),
        ]);
        assert_eq!(nf, expected);
        assert_eq!(
            ch.rules.normal_form(&ch.sig, ch.g, ZERO, &[]).unwrap(),
            Formula::pred(ch.p, vec![Term::constant(ZERO)], true)
        );
        assert_eq!(
            ch.rules.normal_form(&ch.sig, ch.d, ZERO, &[]).unwrap(),
            Formula::True
        );
    }

    #[test]
    fn unfolding_replaces_the_pattern() {
        let mut ch = chain();
        let a = ch.sig.add_param("A", NAT).unwrap();
        let b = ch.sig.add_param("B", NAT).unwrap();
        let (at, bt) = (Term::Param(a), Term::Param(b));
        let pos = ch.rules.unfold(&ch.sig, ch.g, a, SUCC, &[b], true).unwrap();
        let expected = Formula::and([
            Formula::defined(ch.g, bt.clone(), true),
            Formula::or([
                Formula::pred(ch.p, vec![bt.clone()], false),
                Formula::pred(ch.p, vec![at.clone()], true),
            ]),
        ]);
        assert_eq!(pos, expected);
        assert_eq!(
            ch.rules.unfold(&ch.sig, ch.g, a, ZERO, &[], true).unwrap(),
            Formula::pred(ch.p, vec![at.clone()], true)
        );
        let neg = ch.rules.unfold(&ch.sig, ch.g, a, SUCC, &[b], false).unwrap();
        let expected_neg = Formula::or([
            Formula::defined(ch.g, bt.clone(), false),
            Formula::and([
                Formula::pred(ch.p, vec![bt], true),
                Formula::pred(ch.p, vec![at], false),
            ]),
        ]);
        assert_eq!(neg, expected_neg);
    }

    #[test]
    fn ground_unfolding() {
        let ch = chain();
        let zero = Term::constant(ZERO);
        let one = Term::app(SUCC, vec![zero.clone()]);
        let got = ch.rules.ground_unfold_atom(&ch.sig, ch.g, &one).unwrap();
        let expected = Formula::and([
            Formula::pred(ch.p, vec![zero.clone()], true),
            Formula::or([
                Formula::pred(ch.p, vec![zero.clone()], false),
                Formula::pred(ch.p, vec![one.clone()], true),
            ]),
        ]);
        assert_eq!(got, expected);
        assert_eq!(
            ch.rules.ground_unfold_atom(&ch.sig, ch.d, &zero).unwrap(),
            Formula::True
        );
        assert_eq!(
            ch.rules.ground_unfold_atom(&ch.sig, ch.c, &one).unwrap(),
            Formula::False
        );
    }

    #[test]
    fn head_recursion_is_expanded() {
        // e_{s(x)} -> d_{s(x)} & p(x): the inner pattern occurrence is
        // rewritten by d's own rule.
        let mut ch = chain();
        let e = ch.sig.add_def("e", NAT).unwrap();
        let x = ch.sig.add_var("x", NAT);
        let xv = Term::Var(x);
        let sx = Term::app(SUCC, vec![xv.clone()]);
        ch.rules.add(RewriteRule {
            def: e,
            ctor: SUCC,
            formals: vec![x],
            body: Formula::and([
                Formula::defined(ch.d, sx, false),
                Formula::pred(ch.p, vec![xv], true),
            ]),
            line: None,
        });
        let b = ch.sig.add_param("B", NAT).unwrap();
        let bt = Term::Param(b);
        let nf = ch.rules.normal_form(&ch.sig, e, SUCC, &[bt.clone()]).unwrap();
        assert_eq!(
            nf,
            Formula::and([
                Formula::defined(ch.d, bt.clone(), false),
                Formula::pred(ch.p, vec![bt], true),
            ])
        );
    }

    #[test]
    fn cyclic_head_recursion_is_reported() {
        let mut sig = Signature::new();
        let d = sig.add_def("d", NAT).unwrap();
        let x = sig.add_var("x", NAT);
        let sx = Term::app(SUCC, vec![Term::Var(x)]);
        let mut rules = RewriteSystem::new();
        rules.add(RewriteRule {
            def: d,
            ctor: SUCC,
            formals: vec![x],
            body: Formula::defined(d, sx, true),
            line: None,
        });
        let b = sig.add_param("B", NAT).unwrap();
        assert!(matches!(
            rules.normal_form(&sig, d, SUCC, &[Term::Param(b)]),
            Err(RewriteError::Cyclic(_))
        ));
    }
}
