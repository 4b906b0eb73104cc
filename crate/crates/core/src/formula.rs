//! Formulae in negation normal form, and the structural operations the
//! calculus is built from: substitution, renaming, term replacement and the
//! `max` shorthand for depth constraints.
//!
//! Conjunctions and disjunctions are kept flat, deduplicated and sorted, and
//! trivial units are folded away, so two formulae are equal exactly when they
//! are syntactically identical after canonicalization. Labels rely on this
//! for set membership.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::sig::{DefId, FunId, ParamId, Signature, VarId, SUCC, ZERO};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DepthRel {
    Eq,
    Lt,
    Le,
}

/// Right-hand side of a depth atom. `Zero` only shows up transiently, inside
/// the expansion of `max(E) = 0` produced when `N` was instantiated by `s(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DepthRhs {
    Zero,
    N,
    SuccZero,
    SuccN,
}

impl DepthRhs {
    /// `s(self)`, when still representable.
    pub fn succ(self) -> Option<DepthRhs> {
        match self {
            DepthRhs::Zero => Some(DepthRhs::SuccZero),
            DepthRhs::N => Some(DepthRhs::SuccN),
            _ => None,
        }
    }

    /// The `t` of a right-hand side `s(t)`.
    pub fn pred(self) -> Option<DepthRhs> {
        match self {
            DepthRhs::SuccZero => Some(DepthRhs::Zero),
            DepthRhs::SuccN => Some(DepthRhs::N),
            _ => None,
        }
    }

    pub fn mentions_n(self) -> bool {
        matches!(self, DepthRhs::N | DepthRhs::SuccN)
    }

    /// Reads a right-hand side back from a nat term over the depth parameter.
    pub fn from_term(t: &Term, n: ParamId) -> Option<DepthRhs> {
        match t {
            Term::Param(p) if *p == n => Some(DepthRhs::N),
            Term::App(f, args) if *f == ZERO && args.is_empty() => Some(DepthRhs::Zero),
            Term::App(f, args) if *f == SUCC && args.len() == 1 => {
                DepthRhs::from_term(&args[0], n)?.succ()
            }
            _ => None,
        }
    }

    pub fn to_term(self, n: ParamId) -> Term {
        let zero = Term::constant(ZERO);
        let np = Term::Param(n);
        match self {
            DepthRhs::Zero => zero,
            DepthRhs::N => np,
            DepthRhs::SuccZero => Term::app(SUCC, vec![zero]),
            DepthRhs::SuccN => Term::app(SUCC, vec![np]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    /// Predicate literal `p(t1,...,tn)` or its negation.
    Pred {
        pred: FunId,
        args: Vec<Term>,
        positive: bool,
    },
    Eq(Term, Term),
    Diseq(Term, Term),
    /// Defined literal `d_t` or its negation.
    Defined {
        def: DefId,
        index: Term,
        positive: bool,
    },
    /// `depth(A) rel rhs`.
    Depth {
        param: ParamId,
        rel: DepthRel,
        rhs: DepthRhs,
    },
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Quant {
        q: Quantifier,
        var: VarId,
        body: Box<Formula>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("sort mismatch: cannot replace a term of sort `{0}` by one of sort `{1}`")]
    SortMismatch(String, String),
    #[error("depth atom parameter can only be replaced by a parameter")]
    DepthParam,
    #[error("depth right-hand side not representable after substitution")]
    DepthRhs,
    #[error("renaming maps `{0}` to a parameter of another sort")]
    RenamingSort(String),
    #[error("renaming must map the depth parameter to itself")]
    RenamingDepth,
}

/// Placeholder parameter used when comparing formula shapes.
const ANY_PARAM: ParamId = ParamId(u32::MAX);

fn sort_children(children: &mut Vec<Formula>) {
    children.sort_by_cached_key(|c| (c.skeleton(), c.clone()));
    children.dedup();
}

impl Formula {
    pub fn pred(pred: FunId, args: Vec<Term>, positive: bool) -> Formula {
        Formula::Pred {
            pred,
            args,
            positive,
        }
    }

    pub fn defined(def: DefId, index: Term, positive: bool) -> Formula {
        Formula::Defined {
            def,
            index,
            positive,
        }
    }

    pub fn depth(param: ParamId, rel: DepthRel, rhs: DepthRhs) -> Formula {
        Formula::Depth { param, rel, rhs }
    }

    /// `t = s`; reflexive equations fold to true.
    pub fn eq(t: Term, s: Term) -> Formula {
        if t == s {
            Formula::True
        } else {
            Formula::Eq(t, s)
        }
    }

    /// `t != s`; reflexive disequations fold to false. Disequations are
    /// symmetric, so the smaller side goes first.
    pub fn diseq(t: Term, s: Term) -> Formula {
        match t.cmp(&s) {
            std::cmp::Ordering::Equal => Formula::False,
            std::cmp::Ordering::Less => Formula::Diseq(t, s),
            std::cmp::Ordering::Greater => Formula::Diseq(s, t),
        }
    }

    pub fn and(children: impl IntoIterator<Item = Formula>) -> Formula {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(cs) => flat.extend(cs),
                other => flat.push(other),
            }
        }
        sort_children(&mut flat);
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    pub fn or(children: impl IntoIterator<Item = Formula>) -> Formula {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(cs) => flat.extend(cs),
                other => flat.push(other),
            }
        }
        sort_children(&mut flat);
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn quant(q: Quantifier, var: VarId, body: Formula) -> Formula {
        match body {
            Formula::True | Formula::False => body,
            body => Formula::Quant {
                q,
                var,
                body: Box::new(body),
            },
        }
    }

    /// Rebuilds a compound node so its canonical invariants hold again.
    fn rebuild(&self, children: Vec<Formula>) -> Formula {
        match self {
            Formula::And(_) => Formula::and(children),
            Formula::Or(_) => Formula::or(children),
            _ => unreachable!("rebuild on a non-connective"),
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(
            self,
            Formula::And(_) | Formula::Or(_) | Formula::Quant { .. }
        )
    }

    /// Negation pushed to the atoms. Depth atoms never occur under a
    /// negation: they are only produced by the calculus itself.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Pred {
                pred,
                args,
                positive,
            } => Formula::pred(*pred, args.clone(), !positive),
            Formula::Eq(t, s) => Formula::diseq(t.clone(), s.clone()),
            Formula::Diseq(t, s) => Formula::eq(t.clone(), s.clone()),
            Formula::Defined {
                def,
                index,
                positive,
            } => Formula::defined(*def, index.clone(), !positive),
            Formula::Depth { .. } => panic!("depth atoms cannot be negated"),
            Formula::And(cs) => Formula::or(cs.iter().map(Formula::negate)),
            Formula::Or(cs) => Formula::and(cs.iter().map(Formula::negate)),
            Formula::Quant { q, var, body } => Formula::quant(q.dual(), *var, body.negate()),
        }
    }

    /// Applies `tf` to every term position and rebuilds canonically. Depth
    /// atoms are passed to `df`.
    fn map_terms<E>(
        &self,
        tf: &mut impl FnMut(&Term) -> Result<Term, E>,
        df: &mut impl FnMut(ParamId, DepthRel, DepthRhs) -> Result<Formula, E>,
    ) -> Result<Formula, E> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Pred {
                pred,
                args,
                positive,
            } => Formula::pred(
                *pred,
                args.iter().map(&mut *tf).collect::<Result<_, _>>()?,
                *positive,
            ),
            Formula::Eq(t, s) => Formula::eq(tf(t)?, tf(s)?),
            Formula::Diseq(t, s) => Formula::diseq(tf(t)?, tf(s)?),
            Formula::Defined {
                def,
                index,
                positive,
            } => Formula::defined(*def, tf(index)?, *positive),
            Formula::Depth { param, rel, rhs } => df(*param, *rel, *rhs)?,
            Formula::And(cs) | Formula::Or(cs) => {
                let children = cs
                    .iter()
                    .map(|c| c.map_terms(tf, df))
                    .collect::<Result<Vec<_>, _>>()?;
                self.rebuild(children)
            }
            Formula::Quant { q, var, body } => {
                Formula::quant(*q, *var, body.map_terms(tf, df)?)
            }
        })
    }

    /// Replaces every occurrence of `pattern` by `replacement`.
    pub fn replace_term(
        &self,
        sig: &Signature,
        pattern: &Term,
        replacement: &Term,
    ) -> Result<Formula, FormulaError> {
        let (ps, rs) = (pattern.sort(sig), replacement.sort(sig));
        if ps != rs {
            return Err(FormulaError::SortMismatch(
                sig.sort_name(ps).to_string(),
                sig.sort_name(rs).to_string(),
            ));
        }
        let pattern_param = pattern.as_param();
        self.map_terms(
            &mut |t| Ok(t.replace(pattern, replacement)),
            &mut |param, rel, rhs| {
                if pattern_param == Some(param) {
                    match replacement {
                        Term::Param(q) => Ok(Formula::depth(*q, rel, rhs)),
                        _ => Err(FormulaError::DepthParam),
                    }
                } else {
                    Ok(Formula::depth(param, rel, rhs))
                }
            },
        )
    }

    /// Substitutes parameter `from` by `to`. When `from` is the depth
    /// parameter `n`, depth right-hand sides are rewritten as well.
    pub fn substitute_param(
        &self,
        sig: &Signature,
        from: ParamId,
        to: &Term,
        n: Option<ParamId>,
    ) -> Result<Formula, FormulaError> {
        let (fs, ts) = (sig.param(from).sort, to.sort(sig));
        if fs != ts {
            return Err(FormulaError::SortMismatch(
                sig.sort_name(fs).to_string(),
                sig.sort_name(ts).to_string(),
            ));
        }
        let from_is_n = n == Some(from);
        self.map_terms(
            &mut |t| Ok(t.map_params(&mut |p| if p == from { to.clone() } else { Term::Param(p) })),
            &mut |param, rel, rhs| {
                let param = if param == from {
                    to.as_param().ok_or(FormulaError::DepthParam)?
                } else {
                    param
                };
                let rhs = if from_is_n && rhs.mentions_n() {
                    let base = DepthRhs::from_term(to, from).ok_or(FormulaError::DepthRhs)?;
                    match rhs {
                        DepthRhs::N => base,
                        _ => base.succ().ok_or(FormulaError::DepthRhs)?,
                    }
                } else {
                    rhs
                };
                Ok(Formula::depth(param, rel, rhs))
            },
        )
    }

    /// Parameter-to-parameter map, applied everywhere including depth atoms.
    pub fn rename(&self, map: &impl Fn(ParamId) -> ParamId) -> Formula {
        self.map_terms::<std::convert::Infallible>(
            &mut |t| Ok(t.map_params(&mut |p| Term::Param(map(p)))),
            &mut |param, rel, rhs| Ok(Formula::depth(map(param), rel, rhs)),
        )
        .unwrap_or_else(|e| match e {})
    }

    pub fn subst_vars(&self, map: &HashMap<VarId, Term>) -> Formula {
        self.map_terms::<std::convert::Infallible>(
            &mut |t| Ok(t.subst_vars(map)),
            &mut |param, rel, rhs| Ok(Formula::depth(param, rel, rhs)),
        )
        .unwrap_or_else(|e| match e {})
    }

    /// Shape of the formula with every parameter identity erased.
    pub fn skeleton(&self) -> Formula {
        self.map_terms::<std::convert::Infallible>(
            &mut |t| Ok(t.map_params(&mut |_| Term::Param(ANY_PARAM))),
            &mut |_, rel, rhs| Ok(Formula::depth(ANY_PARAM, rel, rhs)),
        )
        .unwrap_or_else(|e| match e {})
    }

    pub fn for_each_term(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::True | Formula::False | Formula::Depth { .. } => {}
            Formula::Pred { args, .. } => args.iter().for_each(f),
            Formula::Eq(t, s) | Formula::Diseq(t, s) => {
                f(t);
                f(s);
            }
            Formula::Defined { index, .. } => f(index),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.for_each_term(f)),
            Formula::Quant { body, .. } => body.for_each_term(f),
        }
    }

    /// Visits every subformula, outermost first.
    pub fn for_each_subformula<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::And(cs) | Formula::Or(cs) => {
                cs.iter().for_each(|c| c.for_each_subformula(f))
            }
            Formula::Quant { body, .. } => body.for_each_subformula(f),
            _ => {}
        }
    }

    pub fn collect_params(&self, out: &mut BTreeSet<ParamId>) {
        self.for_each_subformula(&mut |g| {
            if let Formula::Depth { param, .. } = g {
                out.insert(*param);
            }
        });
        self.for_each_term(&mut |t| t.collect_params(out));
    }

    pub fn params(&self) -> BTreeSet<ParamId> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    pub fn contains_param(&self, p: ParamId) -> bool {
        let mut found = false;
        self.for_each_subformula(&mut |g| {
            if matches!(g, Formula::Depth { param, .. } if *param == p) {
                found = true;
            }
        });
        if !found {
            self.for_each_term(&mut |t| found |= t.contains_param(p));
        }
        found
    }

    pub fn has_defined(&self) -> bool {
        let mut found = false;
        self.for_each_subformula(&mut |g| found |= matches!(g, Formula::Defined { .. }));
        found
    }

    pub fn has_depth(&self) -> bool {
        let mut found = false;
        self.for_each_subformula(&mut |g| found |= matches!(g, Formula::Depth { .. }));
        found
    }

    pub fn has_quantifier(&self) -> bool {
        let mut found = false;
        self.for_each_subformula(&mut |g| found |= matches!(g, Formula::Quant { .. }));
        found
    }

    /// Number of logical connectives and atoms, a rough size used in limits.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.for_each_subformula(&mut |_| n += 1);
        n
    }
}

/// The parameters syntactically occurring in a collection of formulae.
pub fn params_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<ParamId> {
    let mut out = BTreeSet::new();
    for f in formulas {
        f.collect_params(&mut out);
    }
    out
}

/// Expansion of the shorthand `max(E) = rhs`: every member is at most `rhs`
/// and one of them equals it; `0 = rhs` when `E` is empty.
pub fn expand_max(members: &[ParamId], rhs: DepthRhs, n: ParamId) -> Formula {
    if members.is_empty() {
        return Formula::eq(Term::constant(ZERO), rhs.to_term(n));
    }
    let bounds = members
        .iter()
        .map(|&a| Formula::depth(a, DepthRel::Le, rhs));
    let reached = members
        .iter()
        .map(|&a| Formula::depth(a, DepthRel::Eq, rhs));
    Formula::and([Formula::and(bounds), Formula::or(reached)])
}

/// Surface formula as written in a problem file: negation and implication
/// may occur anywhere. [`nnf`] turns it into a [`Formula`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawFormula {
    True,
    False,
    /// A positive atom (predicate, equation or defined atom).
    Atom(Formula),
    Not(Box<RawFormula>),
    And(Vec<RawFormula>),
    Or(Vec<RawFormula>),
    Implies(Box<RawFormula>, Box<RawFormula>),
    Quant(Quantifier, VarId, Box<RawFormula>),
}

impl RawFormula {
    pub fn not(f: RawFormula) -> RawFormula {
        RawFormula::Not(Box::new(f))
    }

    /// Embeds an NNF formula; negative literals become `Not` of an atom.
    pub fn from_nnf(f: &Formula) -> RawFormula {
        match f {
            Formula::True => RawFormula::True,
            Formula::False => RawFormula::False,
            Formula::Pred {
                pred,
                args,
                positive,
            } => {
                let atom = RawFormula::Atom(Formula::pred(*pred, args.clone(), true));
                if *positive {
                    atom
                } else {
                    RawFormula::not(atom)
                }
            }
            Formula::Eq(..) => RawFormula::Atom(f.clone()),
            Formula::Diseq(t, s) => {
                RawFormula::not(RawFormula::Atom(Formula::Eq(t.clone(), s.clone())))
            }
            Formula::Defined {
                def,
                index,
                positive,
            } => {
                let atom = RawFormula::Atom(Formula::defined(*def, index.clone(), true));
                if *positive {
                    atom
                } else {
                    RawFormula::not(atom)
                }
            }
            Formula::Depth { .. } => RawFormula::Atom(f.clone()),
            Formula::And(cs) => RawFormula::And(cs.iter().map(RawFormula::from_nnf).collect()),
            Formula::Or(cs) => RawFormula::Or(cs.iter().map(RawFormula::from_nnf).collect()),
            Formula::Quant { q, var, body } => {
                RawFormula::Quant(*q, *var, Box::new(RawFormula::from_nnf(body)))
            }
        }
    }
}

/// Negation normal form: implications are expanded and negations pushed to
/// the atoms, flipping equations and quantifiers on the way.
pub fn nnf(f: &RawFormula) -> Formula {
    nnf_polarity(f, true)
}

fn nnf_polarity(f: &RawFormula, positive: bool) -> Formula {
    match f {
        RawFormula::True => {
            if positive {
                Formula::True
            } else {
                Formula::False
            }
        }
        RawFormula::False => {
            if positive {
                Formula::False
            } else {
                Formula::True
            }
        }
        RawFormula::Atom(a) => {
            // re-canonicalize reflexive equations written in source
            let a = match a {
                Formula::Eq(t, s) => Formula::eq(t.clone(), s.clone()),
                other => other.clone(),
            };
            if positive {
                a
            } else {
                a.negate()
            }
        }
        RawFormula::Not(g) => nnf_polarity(g, !positive),
        RawFormula::And(cs) => {
            let it = cs.iter().map(|c| nnf_polarity(c, positive));
            if positive {
                Formula::and(it)
            } else {
                Formula::or(it)
            }
        }
        RawFormula::Or(cs) => {
            let it = cs.iter().map(|c| nnf_polarity(c, positive));
            if positive {
                Formula::or(it)
            } else {
                Formula::and(it)
            }
        }
        RawFormula::Implies(a, b) => {
            // a => b  ==  !a | b
            let na = nnf_polarity(a, !positive);
            let pb = nnf_polarity(b, positive);
            if positive {
                Formula::or([na, pb])
            } else {
                Formula::and([na, pb])
            }
        }
        RawFormula::Quant(q, v, body) => {
            let q = if positive { *q } else { q.dual() };
            Formula::quant(q, *v, nnf_polarity(body, positive))
        }
    }
}

/// A sort-preserving map on parameters fixing the depth parameter; the
/// identity outside its explicit entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Renaming {
    map: BTreeMap<ParamId, ParamId>,
}

impl Renaming {
    pub fn identity() -> Self {
        Renaming::default()
    }

    pub fn new(
        sig: &Signature,
        entries: impl IntoIterator<Item = (ParamId, ParamId)>,
        n: Option<ParamId>,
    ) -> Result<Self, FormulaError> {
        let mut map = BTreeMap::new();
        for (from, to) in entries {
            if Some(from) == n && from != to {
                return Err(FormulaError::RenamingDepth);
            }
            if sig.param(from).sort != sig.param(to).sort {
                return Err(FormulaError::RenamingSort(sig.param(from).name.clone()));
            }
            if from != to {
                map.insert(from, to);
            }
        }
        Ok(Renaming { map })
    }

    pub(crate) fn from_map_unchecked(map: BTreeMap<ParamId, ParamId>) -> Self {
        Renaming {
            map: map.into_iter().filter(|(a, b)| a != b).collect(),
        }
    }

    pub fn get(&self, p: ParamId) -> ParamId {
        self.map.get(&p).copied().unwrap_or(p)
    }

    pub fn entries(&self) -> impl Iterator<Item = (ParamId, ParamId)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Renaming) -> Renaming {
        let mut map = BTreeMap::new();
        for p in self.map.keys().chain(inner.map.keys()) {
            let img = self.get(inner.get(*p));
            if img != *p {
                map.insert(*p, img);
            }
        }
        Renaming { map }
    }

    pub fn apply(&self, f: &Formula) -> Formula {
        f.rename(&|p| self.get(p))
    }

    pub fn apply_label(&self, label: &NodeLabel) -> NodeLabel {
        label.iter().map(|f| self.apply(f)).collect()
    }
}

/// A finite set of formulae labelling a tableau node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeLabel(BTreeSet<Formula>);

impl NodeLabel {
    pub fn new() -> Self {
        NodeLabel(BTreeSet::new())
    }

    /// Inserts a formula; `true` is dropped, and `false` collapses the label.
    pub fn insert(&mut self, f: Formula) {
        match f {
            Formula::True => {}
            Formula::False => {
                self.0.clear();
                self.0.insert(Formula::False);
            }
            f => {
                if !self.is_closed() {
                    self.0.insert(f);
                }
            }
        }
    }

    pub fn remove(&mut self, f: &Formula) -> bool {
        self.0.remove(f)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.0.contains(f)
    }

    pub fn is_closed(&self) -> bool {
        self.0.contains(&Formula::False)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn params(&self) -> BTreeSet<ParamId> {
        params_of(self.iter())
    }

    pub fn is_subset(&self, other: &NodeLabel) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn substitute_param(
        &self,
        sig: &Signature,
        from: ParamId,
        to: &Term,
        n: Option<ParamId>,
    ) -> Result<NodeLabel, FormulaError> {
        let mut out = NodeLabel::new();
        for f in self.iter() {
            out.insert(f.substitute_param(sig, from, to, n)?);
        }
        Ok(out)
    }
}

impl FromIterator<Formula> for NodeLabel {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        let mut label = NodeLabel::new();
        for f in iter {
            label.insert(f);
        }
        label
    }
}

impl<'a> IntoIterator for &'a NodeLabel {
    type Item = &'a Formula;
    type IntoIter = std::collections::btree_set::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Reorients `N = t` to `t = N`; the depth parameter never sits on the left.
pub fn orient_depth_param(f: Formula, n: ParamId) -> Formula {
    match f {
        Formula::Eq(Term::Param(p), t) if p == n && t != Term::Param(n) => {
            Formula::Eq(t, Term::Param(p))
        }
        Formula::Diseq(Term::Param(p), t) if p == n && t != Term::Param(n) => {
            Formula::Diseq(t, Term::Param(p))
        }
        Formula::And(cs) => Formula::and(cs.into_iter().map(|c| orient_depth_param(c, n))),
        Formula::Or(cs) => Formula::or(cs.into_iter().map(|c| orient_depth_param(c, n))),
        other => other,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{FunKind, BOOL, NAT};

    struct Fx {
        sig: Signature,
        p: FunId,
        q: FunId,
        g: DefId,
        d: DefId,
        a: ParamId,
        b: ParamId,
        c: ParamId,
    }

    fn fx() -> Fx {
        let mut sig = Signature::new();
        let p = sig.add_fun("p", vec![NAT], BOOL, FunKind::Base).unwrap();
        let q = sig.add_fun("q", vec![NAT], BOOL, FunKind::Base).unwrap();
        let g = sig.add_def("g", NAT).unwrap();
        let d = sig.add_def("d", NAT).unwrap();
        let a = sig.add_param("A", NAT).unwrap();
        let b = sig.add_param("B", NAT).unwrap();
        let c = sig.add_param("C", NAT).unwrap();
        Fx {
            sig,
            p,
            q,
            g,
            d,
            a,
            b,
            c,
        }
    }

    fn atom_p(fx: &Fx, t: Term, pos: bool) -> Formula {
        Formula::pred(fx.p, vec![t], pos)
    }

    #[test]
    fn nnf_de_morgan() {
        let fx = fx();
        let a = Term::Param(fx.a);
        // !(p(A) & !q(A))
        let raw = RawFormula::not(RawFormula::And(vec![
            RawFormula::Atom(atom_p(&fx, a.clone(), true)),
            RawFormula::not(RawFormula::Atom(Formula::pred(fx.q, vec![a.clone()], true))),
        ]));
        let expected = Formula::or([
            atom_p(&fx, a.clone(), false),
            Formula::pred(fx.q, vec![a], true),
        ]);
        assert_eq!(nnf(&raw), expected);
    }

    #[test]
    fn nnf_flips_equations_and_defined_atoms() {
        let fx = fx();
        let (a, b) = (Term::Param(fx.a), Term::Param(fx.b));
        let raw = RawFormula::not(RawFormula::Or(vec![
            RawFormula::Atom(Formula::eq(a.clone(), b.clone())),
            RawFormula::Atom(Formula::defined(fx.d, a.clone(), true)),
        ]));
        let expected = Formula::and([
            Formula::diseq(a.clone(), b),
            Formula::defined(fx.d, a, false),
        ]);
        assert_eq!(nnf(&raw), expected);
    }

    #[test]
    fn nnf_of_negated_unfolding_body() {
        let fx = fx();
        let (a, b) = (Term::Param(fx.a), Term::Param(fx.b));
        // !(d_B & (!p(B) | p(A)))
        let body = Formula::and([
            Formula::defined(fx.d, b.clone(), true),
            Formula::or([atom_p(&fx, b.clone(), false), atom_p(&fx, a.clone(), true)]),
        ]);
        let expected = Formula::or([
            Formula::defined(fx.d, b.clone(), false),
            Formula::and([atom_p(&fx, b, true), atom_p(&fx, a, false)]),
        ]);
        assert_eq!(nnf(&RawFormula::not(RawFormula::from_nnf(&body))), expected);
        assert_eq!(body.negate(), expected);
    }

    #[test]
    fn replace_term_examples() {
        let fx = fx();
        let sig = &fx.sig;
        let (a, b) = (Term::Param(fx.a), Term::Param(fx.b));
        let zero = Term::constant(ZERO);
        let p0 = atom_p(&fx, zero.clone(), true);
        assert_eq!(
            p0.replace_term(sig, &zero, &a).unwrap(),
            atom_p(&fx, a.clone(), true)
        );

        let sb = Term::app(SUCC, vec![b.clone()]);
        let body = Formula::and([
            Formula::defined(fx.d, b.clone(), true),
            Formula::or([atom_p(&fx, b.clone(), false), atom_p(&fx, sb.clone(), true)]),
        ]);
        let expected = Formula::and([
            Formula::defined(fx.d, b.clone(), true),
            Formula::or([atom_p(&fx, b, false), atom_p(&fx, a.clone(), true)]),
        ]);
        assert_eq!(body.replace_term(sig, &sb, &a).unwrap(), expected);

        let qa = Formula::pred(fx.q, vec![a.clone()], true);
        assert_eq!(qa.replace_term(sig, &zero, &a).unwrap(), qa);
    }

    #[test]
    fn replace_term_rejects_sort_mismatch() {
        let mut fx = fx();
        let elt = fx.sig.add_sort("elt", false).unwrap();
        let e = fx.sig.add_param("E", elt).unwrap();
        let f = atom_p(&fx, Term::Param(fx.a), true);
        assert!(matches!(
            f.replace_term(&fx.sig, &Term::Param(fx.a), &Term::Param(e)),
            Err(FormulaError::SortMismatch(..))
        ));
    }

    #[test]
    fn substitute_param_examples() {
        let mut fx = fx();
        let n = fx.sig.new_depth_param();
        let sig = &fx.sig;
        let (a, b) = (Term::Param(fx.a), Term::Param(fx.b));
        let label: NodeLabel = [atom_p(&fx, a.clone(), true), Formula::eq(a.clone(), b.clone())]
            .into_iter()
            .collect();
        let out = label.substitute_param(sig, fx.a, &b, Some(n)).unwrap();
        // B = B folds to true and disappears
        let expected: NodeLabel = [atom_p(&fx, b.clone(), true)].into_iter().collect();
        assert_eq!(out, expected);

        let atom = Formula::depth(fx.a, DepthRel::Eq, DepthRhs::N);
        let sn = Term::app(SUCC, vec![Term::Param(n)]);
        let s0 = Term::app(SUCC, vec![Term::constant(ZERO)]);
        assert_eq!(
            atom.substitute_param(sig, n, &sn, Some(n)).unwrap(),
            Formula::depth(fx.a, DepthRel::Eq, DepthRhs::SuccN)
        );
        assert_eq!(
            atom.substitute_param(sig, n, &s0, Some(n)).unwrap(),
            Formula::depth(fx.a, DepthRel::Eq, DepthRhs::SuccZero)
        );
    }

    #[test]
    fn renaming_examples() {
        let mut fx = fx();
        let n = fx.sig.new_depth_param();
        let sig = &fx.sig;
        let label: NodeLabel = [
            Formula::defined(fx.d, Term::Param(fx.a), true),
            Formula::depth(fx.a, DepthRel::Eq, DepthRhs::N),
        ]
        .into_iter()
        .collect();
        assert_eq!(Renaming::identity().apply_label(&label), label);

        let rho = Renaming::new(sig, [(fx.a, fx.b)], Some(n)).unwrap();
        let expected: NodeLabel = [
            Formula::defined(fx.d, Term::Param(fx.b), true),
            Formula::depth(fx.b, DepthRel::Eq, DepthRhs::N),
        ]
        .into_iter()
        .collect();
        assert_eq!(rho.apply_label(&label), expected);

        let collapse = Renaming::new(sig, [(fx.a, fx.c), (fx.b, fx.c)], Some(n)).unwrap();
        let pab: NodeLabel = [
            atom_p(&fx, Term::Param(fx.a), true),
            atom_p(&fx, Term::Param(fx.b), true),
        ]
        .into_iter()
        .collect();
        assert_eq!(collapse.apply_label(&pab).len(), 1);

        assert_eq!(
            Renaming::new(sig, [(n, fx.a)], Some(n)),
            Err(FormulaError::RenamingDepth)
        );
    }

    #[test]
    fn params_of_examples() {
        let mut fx = fx();
        let n = fx.sig.new_depth_param();
        let f = Formula::and([
            atom_p(&fx, Term::Param(fx.a), true),
            Formula::defined(fx.d, Term::Param(fx.b), true),
        ]);
        assert_eq!(f.params(), [fx.a, fx.b].into_iter().collect());
        assert!(Formula::True.params().is_empty());
        let depth = Formula::eq(Term::Param(fx.a), Term::Param(n));
        assert_eq!(depth.params(), [fx.a, n].into_iter().collect());
        let _ = fx.g;
    }

    #[test]
    fn expand_max_examples() {
        let mut fx = fx();
        let n = fx.sig.new_depth_param();
        assert_eq!(
            expand_max(&[fx.a], DepthRhs::N, n),
            Formula::and([
                Formula::depth(fx.a, DepthRel::Le, DepthRhs::N),
                Formula::depth(fx.a, DepthRel::Eq, DepthRhs::N),
            ])
        );
        assert_eq!(expand_max(&[], DepthRhs::Zero, n), Formula::True);
        assert_eq!(
            expand_max(&[], DepthRhs::N, n),
            Formula::Eq(Term::constant(ZERO), Term::Param(n))
        );
        let two = expand_max(&[fx.b, fx.c], DepthRhs::N, n);
        let expected = Formula::and([
            Formula::depth(fx.b, DepthRel::Le, DepthRhs::N),
            Formula::depth(fx.c, DepthRel::Le, DepthRhs::N),
            Formula::or([
                Formula::depth(fx.b, DepthRel::Eq, DepthRhs::N),
                Formula::depth(fx.c, DepthRel::Eq, DepthRhs::N),
            ]),
        ]);
        assert_eq!(two, expected);
    }

    #[test]
    fn canonical_connectives() {
        let fx = fx();
        let pa = atom_p(&fx, Term::Param(fx.a), true);
        assert_eq!(Formula::and([pa.clone(), Formula::True]), pa);
        assert_eq!(Formula::and([pa.clone(), Formula::False]), Formula::False);
        assert_eq!(Formula::or([pa.clone(), pa.clone()]), pa);
        assert_eq!(
            Formula::or([Formula::False, Formula::or([pa.clone(), Formula::False])]),
            pa
        );
    }
}
