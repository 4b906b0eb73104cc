use std::collections::{BTreeSet, HashMap};

use crate::sig::{FunId, FunKind, ParamId, Signature, SortId, VarId};

/// A sorted first-order term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(VarId),
    Param(ParamId),
    App(FunId, Vec<Term>),
}

impl Term {
    pub fn constant(f: FunId) -> Term {
        Term::App(f, Vec::new())
    }

    pub fn app(f: FunId, args: Vec<Term>) -> Term {
        Term::App(f, args)
    }

    pub fn sort(&self, sig: &Signature) -> SortId {
        match self {
            Term::Var(v) => sig.var(*v).sort,
            Term::Param(p) => sig.param(*p).sort,
            Term::App(f, _) => sig.fun(*f).result,
        }
    }

    pub fn as_param(&self) -> Option<ParamId> {
        match self {
            Term::Param(p) => Some(*p),
            _ => None,
        }
    }

    pub fn head(&self) -> Option<FunId> {
        match self {
            Term::App(f, _) => Some(*f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    /// Constructor-headed term whose arguments are all parameters, i.e. the
    /// shape `f(B1,...,Bn)` produced by Explosion.
    pub fn is_flat_constructor(&self, sig: &Signature) -> bool {
        match self {
            Term::App(f, args) => {
                sig.fun(*f).kind == FunKind::Constructor
                    && args.iter().all(|a| matches!(a, Term::Param(_)))
            }
            _ => false,
        }
    }

    pub fn is_constructor_headed(&self, sig: &Signature) -> bool {
        matches!(self, Term::App(f, _) if sig.fun(*f).kind == FunKind::Constructor)
    }

    /// Ground term built only from constructors and parameters (the latter
    /// standing for non-inductive slot values).
    pub fn is_ground_constructor(&self, sig: &Signature) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Param(p) => !sig.is_inductive(sig.param(*p).sort),
            Term::App(f, args) => {
                sig.fun(*f).kind == FunKind::Constructor
                    && args.iter().all(|a| a.is_ground_constructor(sig))
            }
        }
    }

    pub fn collect_params(&self, out: &mut BTreeSet<ParamId>) {
        match self {
            Term::Var(_) => {}
            Term::Param(p) => {
                out.insert(*p);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_params(out)),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Param(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains_param(&self, p: ParamId) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Param(q) => *q == p,
            Term::App(_, args) => args.iter().any(|a| a.contains_param(p)),
        }
    }

    pub fn contains(&self, pattern: &Term) -> bool {
        self == pattern || self.args().iter().any(|a| a.contains(pattern))
    }

    /// Replaces occurrences of `pattern`, outermost first; the replacement is
    /// not searched again.
    pub fn replace(&self, pattern: &Term, replacement: &Term) -> Term {
        if self == pattern {
            return replacement.clone();
        }
        match self {
            Term::App(f, args) => Term::App(
                *f,
                args.iter().map(|a| a.replace(pattern, replacement)).collect(),
            ),
            other => other.clone(),
        }
    }

    pub fn subst_vars(&self, map: &HashMap<VarId, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Param(_) => self.clone(),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.subst_vars(map)).collect()),
        }
    }

    pub fn map_params(&self, f: &mut impl FnMut(ParamId) -> Term) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Param(p) => f(*p),
            Term::App(g, args) => Term::App(*g, args.iter().map(|a| a.map_params(f)).collect()),
        }
    }

    /// Depth of a ground constructor term: constants have depth 1, values of
    /// non-inductive sorts depth 0.
    pub fn constructor_depth(&self, sig: &Signature) -> usize {
        match self {
            Term::App(f, args) if sig.is_inductive(sig.fun(*f).result) => {
                1 + args
                    .iter()
                    .map(|a| a.constructor_depth(sig))
                    .max()
                    .unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// All subterms, including `self`.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let t = out[i];
            out.extend(t.args().iter());
            i += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{NAT, SUCC, ZERO};

    #[test]
    fn replace_is_outermost_first() {
        let mut sig = Signature::new();
        let a = Term::Param(sig.add_param("A", NAT).unwrap());
        let b = Term::Param(sig.add_param("B", NAT).unwrap());
        let sb = Term::app(SUCC, vec![b.clone()]);
        let ssb = Term::app(SUCC, vec![sb.clone()]);
        assert_eq!(ssb.replace(&sb, &a), Term::app(SUCC, vec![a.clone()]));
        // the replacement itself is not revisited
        assert_eq!(sb.replace(&b, &sb), Term::app(SUCC, vec![sb.clone()]));
    }

    #[test]
    fn depth_of_numerals() {
        let sig = Signature::new();
        let zero = Term::constant(ZERO);
        let two = Term::app(SUCC, vec![Term::app(SUCC, vec![zero.clone()])]);
        assert_eq!(zero.constructor_depth(&sig), 1);
        assert_eq!(two.constructor_depth(&sig), 3);
        assert!(two.is_ground_constructor(&sig));
    }
}
