//! Selection and application of expansion rules.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::equality::DeltaTable;
use crate::formula::{expand_max, DepthRel, DepthRhs, Formula, NodeLabel, Renaming};
use crate::print::formula_to_string;
use crate::rewrite::RewriteSystem;
use crate::sig::{DefId, FunId, ParamId, Signature, SUCC, ZERO};
use crate::term::Term;

use super::history::BranchHistory;
use super::ProveError;

pub type NodeId = usize;

/// A rule together with the premises it was selected on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleInstance {
    /// `φ, ¬φ`.
    Closure { pos: Formula, neg: Formula },
    /// `0 = s(t)` in either orientation.
    NClosure { eq: Formula },
    /// A depth atom bounding an inductive term by zero, or two depth atoms
    /// on one parameter with no common solution.
    DepthClosure { atoms: Vec<Formula> },
    /// Equations over free constructors forming a cycle.
    OccursClosure { cycle: Vec<Formula> },
    AndDec { formula: Formula },
    OrDec { formula: Formula },
    /// `A = B` rewrites `A` to `B` in every other formula.
    Replacement { eq: Formula, from: ParamId, to: ParamId },
    Unfolding {
        literal: Formula,
        eq: Formula,
        def: DefId,
        param: ParamId,
        ctor: FunId,
        args: Vec<ParamId>,
        positive: bool,
    },
    EqDec { keep: Formula, drop: Formula },
    DiseqDec {
        diseq: Formula,
        left: Formula,
        right: Formula,
        added: Formula,
    },
    Strictness { atom: Formula },
    LessDec { atom: Formula },
    LessSeparation { a: ParamId, b: ParamId },
    Separation { a: ParamId, b: ParamId },
    Explosion { atom: Formula, param: ParamId, rhs: DepthRhs },
    NExplosion,
    Loop { target: NodeId, renaming: Renaming },
}

/// Rule names as shown in exported trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleTag {
    Start,
    Closure,
    NClosure,
    DepthClosure,
    OccursClosure,
    AndDec,
    OrDec,
    Replacement,
    Unfolding,
    EqDec,
    DiseqDec,
    Strictness,
    LessDec,
    LessSeparation,
    Separation,
    Explosion,
    NExplosion,
    Loop,
}

impl RuleTag {
    pub fn name(self) -> &'static str {
        match self {
            RuleTag::Start => "Start",
            RuleTag::Closure => "Closure",
            RuleTag::NClosure => "N-Closure",
            RuleTag::DepthClosure => "Depth-Closure",
            RuleTag::OccursClosure => "Occurs-Closure",
            RuleTag::AndDec => "And-Decomposition",
            RuleTag::OrDec => "Or-Decomposition",
            RuleTag::Replacement => "Replacement",
            RuleTag::Unfolding => "Unfolding",
            RuleTag::EqDec => "Eq-Decomposition",
            RuleTag::DiseqDec => "Diseq-Decomposition",
            RuleTag::Strictness => "Strictness",
            RuleTag::LessDec => "Less-Decomposition",
            RuleTag::LessSeparation => "Less-Separation",
            RuleTag::Separation => "Separation",
            RuleTag::Explosion => "Explosion",
            RuleTag::NExplosion => "N-Explosion",
            RuleTag::Loop => "Loop",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleTag> {
        ALL_TAGS.iter().copied().find(|t| t.name() == s)
    }

    /// Rules whose children are reached without choice or new content.
    pub fn is_decomposition_or_closure(self) -> bool {
        matches!(
            self,
            RuleTag::Closure
                | RuleTag::NClosure
                | RuleTag::DepthClosure
                | RuleTag::OccursClosure
                | RuleTag::AndDec
                | RuleTag::OrDec
        )
    }
}

const ALL_TAGS: [RuleTag; 18] = [
    RuleTag::Start,
    RuleTag::Closure,
    RuleTag::NClosure,
    RuleTag::DepthClosure,
    RuleTag::OccursClosure,
    RuleTag::AndDec,
    RuleTag::OrDec,
    RuleTag::Replacement,
    RuleTag::Unfolding,
    RuleTag::EqDec,
    RuleTag::DiseqDec,
    RuleTag::Strictness,
    RuleTag::LessDec,
    RuleTag::LessSeparation,
    RuleTag::Separation,
    RuleTag::Explosion,
    RuleTag::NExplosion,
    RuleTag::Loop,
];

impl RuleInstance {
    pub fn tag(&self) -> RuleTag {
        match self {
            RuleInstance::Closure { .. } => RuleTag::Closure,
            RuleInstance::NClosure { .. } => RuleTag::NClosure,
            RuleInstance::DepthClosure { .. } => RuleTag::DepthClosure,
            RuleInstance::OccursClosure { .. } => RuleTag::OccursClosure,
            RuleInstance::AndDec { .. } => RuleTag::AndDec,
            RuleInstance::OrDec { .. } => RuleTag::OrDec,
            RuleInstance::Replacement { .. } => RuleTag::Replacement,
            RuleInstance::Unfolding { .. } => RuleTag::Unfolding,
            RuleInstance::EqDec { .. } => RuleTag::EqDec,
            RuleInstance::DiseqDec { .. } => RuleTag::DiseqDec,
            RuleInstance::Strictness { .. } => RuleTag::Strictness,
            RuleInstance::LessDec { .. } => RuleTag::LessDec,
            RuleInstance::LessSeparation { .. } => RuleTag::LessSeparation,
            RuleInstance::Separation { .. } => RuleTag::Separation,
            RuleInstance::Explosion { .. } => RuleTag::Explosion,
            RuleInstance::NExplosion => RuleTag::NExplosion,
            RuleInstance::Loop { .. } => RuleTag::Loop,
        }
    }
}

/// An equation or disequation is equational when it relates two
/// parameters or two terms of an inductive sort; otherwise it is a literal
/// of the base language.
pub fn is_equational(sig: &Signature, f: &Formula) -> bool {
    match f {
        Formula::Eq(t, s) | Formula::Diseq(t, s) => {
            (matches!(t, Term::Param(_)) && matches!(s, Term::Param(_)))
                || sig.is_inductive(t.sort(sig))
        }
        _ => false,
    }
}

/// No defined atoms, depth atoms or equational literals anywhere.
pub fn is_base(sig: &Signature, f: &Formula) -> bool {
    let mut ok = true;
    f.for_each_subformula(&mut |g| match g {
        Formula::Defined { .. } | Formula::Depth { .. } => ok = false,
        Formula::Eq(..) | Formula::Diseq(..) if is_equational(sig, g) => ok = false,
        _ => {}
    });
    ok
}

pub fn param_pair(f: &Formula) -> Option<(ParamId, ParamId)> {
    match f {
        Formula::Eq(Term::Param(a), Term::Param(b)) | Formula::Diseq(Term::Param(a), Term::Param(b)) => {
            Some((*a, *b))
        }
        _ => None,
    }
}

/// The label without its equational equations.
pub fn noneq(sig: &Signature, label: &NodeLabel) -> NodeLabel {
    label
        .iter()
        .filter(|f| !(matches!(f, Formula::Eq(..)) && is_equational(sig, f)))
        .cloned()
        .collect()
}

/// Parameters whose only occurrence is the left side of `A = B`.
pub fn solved_params(label: &NodeLabel) -> BTreeSet<ParamId> {
    let mut occurrences: BTreeMap<ParamId, Vec<&Formula>> = BTreeMap::new();
    for f in label {
        for p in f.params() {
            occurrences.entry(p).or_default().push(f);
        }
    }
    occurrences
        .into_iter()
        .filter(|(p, fs)| {
            fs.len() == 1
                && matches!(fs[0], Formula::Eq(Term::Param(a), Term::Param(b)) if a == p && b != p)
        })
        .map(|(p, _)| p)
        .collect()
}

/// Unordered parameter pairs related by an equation or a disequation.
fn related_pairs(label: &NodeLabel) -> BTreeSet<(ParamId, ParamId)> {
    label
        .iter()
        .filter_map(param_pair)
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect()
}

/// Pairs on which Separation applies: unsolved parameters other than `N`,
/// of the same sort, both occurring outside equations, with neither an
/// equation nor a disequation between them.
pub fn separable_pairs(sig: &Signature, label: &NodeLabel, n: Option<ParamId>) -> Vec<(ParamId, ParamId)> {
    let solved = solved_params(label);
    let candidates: Vec<ParamId> = noneq(sig, label)
        .params()
        .into_iter()
        .filter(|p| Some(*p) != n && !solved.contains(p))
        .collect();
    let related = related_pairs(label);
    let mut out = Vec::new();
    for (i, &a) in candidates.iter().enumerate() {
        for &b in &candidates[i + 1..] {
            if sig.param(a).sort == sig.param(b).sort && !related.contains(&(a, b)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Read-only data shared by every node of one run.
pub struct RuleContext<'a> {
    pub rules: &'a RewriteSystem,
    pub delta: &'a DeltaTable,
    pub n: Option<ParamId>,
    /// Close on complementary base literals instead of leaving them to
    /// the backend.
    pub base_closure: bool,
}

fn flat_eq(sig: &Signature, f: &Formula) -> Option<(ParamId, FunId, Vec<ParamId>)> {
    match f {
        Formula::Eq(Term::Param(a), t) if t.is_flat_constructor(sig) => Some((
            *a,
            t.head().unwrap(),
            t.args().iter().map(|x| x.as_param().unwrap()).collect(),
        )),
        _ => None,
    }
}

fn is_zero(t: &Term) -> bool {
    matches!(t, Term::App(f, a) if *f == ZERO && a.is_empty())
}

fn is_succ(t: &Term) -> bool {
    matches!(t, Term::App(f, a) if *f == SUCC && a.len() == 1)
}

/// Equations `A = f(B)` whose parameter graph has a cycle. A constructor
/// term never equals one of its proper subterms when the constructors of
/// its sort are free, so only such sorts are considered.
fn occurs_cycle(ctx: &RuleContext, sig: &Signature, label: &NodeLabel) -> Option<Vec<Formula>> {
    let mut edges: BTreeMap<ParamId, Vec<(ParamId, &Formula)>> = BTreeMap::new();
    for f in label {
        let Some((a, ctor, args)) = flat_eq(sig, f) else {
            continue;
        };
        if !ctx.delta.is_free_sort(sig, sig.fun(ctor).result) {
            continue;
        }
        for b in args {
            if sig.is_inductive(sig.param(b).sort) {
                edges.entry(a).or_default().push((b, f));
            }
        }
    }
    // iterative depth-first search keeping the equations on the path
    let mut done: BTreeSet<ParamId> = BTreeSet::new();
    for &root in edges.keys() {
        if done.contains(&root) {
            continue;
        }
        let mut on_path: Vec<ParamId> = vec![root];
        let mut path_eqs: Vec<&Formula> = Vec::new();
        let mut stack: Vec<usize> = vec![0];
        while let Some(next) = stack.last_mut() {
            let node = *on_path.last().unwrap();
            let out = edges.get(&node).map(Vec::as_slice).unwrap_or(&[]);
            if *next == out.len() {
                done.insert(node);
                stack.pop();
                on_path.pop();
                path_eqs.pop();
                continue;
            }
            let (b, f) = out[*next];
            *next += 1;
            if let Some(i) = on_path.iter().position(|p| *p == b) {
                let mut cycle: Vec<Formula> = path_eqs[i..].iter().map(|g| (*g).clone()).collect();
                cycle.push(f.clone());
                cycle.sort();
                cycle.dedup();
                return Some(cycle);
            }
            if !done.contains(&b) {
                on_path.push(b);
                path_eqs.push(f);
                stack.push(0);
            }
        }
    }
    None
}

/// Bounds `[lo, hi]` on `depth(p) - N` implied by a depth atom, when its
/// right side mentions `N`.
fn depth_bounds(rel: DepthRel, rhs: DepthRhs) -> Option<(i64, i64)> {
    let k = match rhs {
        DepthRhs::N => 0,
        DepthRhs::SuccN => 1,
        DepthRhs::Zero | DepthRhs::SuccZero => return None,
    };
    Some(match rel {
        DepthRel::Eq => (k, k),
        DepthRel::Le => (i64::MIN, k),
        DepthRel::Lt => (i64::MIN, k - 1),
    })
}

/// Interval of `depth(p) - N` allowed by the depth atoms on `p`, together
/// with the atoms it was computed from.
fn depth_interval(label: &NodeLabel, p: ParamId) -> Option<((i64, i64), Vec<&Formula>)> {
    let mut range = (i64::MIN, i64::MAX);
    let mut atoms = Vec::new();
    for f in label {
        if let Formula::Depth { param, rel, rhs } = f {
            if *param == p {
                if let Some((lo, hi)) = depth_bounds(*rel, *rhs) {
                    range = (range.0.max(lo), range.1.min(hi));
                    atoms.push(f);
                }
            }
        }
    }
    (!atoms.is_empty()).then_some((range, atoms))
}

/// Two depth atoms on the same parameter that cannot hold together.
fn depth_conflict(label: &NodeLabel) -> Option<Vec<Formula>> {
    let params: BTreeSet<ParamId> = label
        .iter()
        .filter_map(|f| match f {
            Formula::Depth { param, .. } => Some(*param),
            _ => None,
        })
        .collect();
    for p in params {
        let Some((_, atoms)) = depth_interval(label, p) else {
            continue;
        };
        for (i, f) in atoms.iter().enumerate() {
            for g in &atoms[i + 1..] {
                let (Formula::Depth { rel: r1, rhs: h1, .. }, Formula::Depth { rel: r2, rhs: h2, .. }) = (f, g) else {
                    continue;
                };
                let (a, b) = (depth_bounds(*r1, *h1)?, depth_bounds(*r2, *h2)?);
                if a.0.max(b.0) > a.1.min(b.1) {
                    return Some(vec![(*f).clone(), (*g).clone()]);
                }
            }
        }
    }
    None
}

fn closure(ctx: &RuleContext, sig: &Signature, label: &NodeLabel) -> Option<RuleInstance> {
    for f in label {
        match f {
            Formula::Eq(t, s) if (is_zero(t) && is_succ(s)) || (is_succ(t) && is_zero(s)) => {
                return Some(RuleInstance::NClosure { eq: f.clone() });
            }
            Formula::Depth { rhs: DepthRhs::Zero, .. } => {
                return Some(RuleInstance::DepthClosure { atoms: vec![f.clone()] });
            }
            _ => {}
        }
    }
    if let Some(atoms) = depth_conflict(label) {
        return Some(RuleInstance::DepthClosure { atoms });
    }
    if let Some(cycle) = occurs_cycle(ctx, sig, label) {
        return Some(RuleInstance::OccursClosure { cycle });
    }
    // Complementary base literals are left to the backend at leaves but
    // prune branches that still carry defined atoms.
    let base_closure = ctx.base_closure || label.iter().any(|f| matches!(f, Formula::Defined { .. }));
    for f in label {
        let complementary = match f {
            Formula::Pred { positive: true, .. } if base_closure => vec![f.negate()],
            Formula::Defined { positive: true, .. } => vec![f.negate()],
            Formula::Eq(t, s) if base_closure || is_equational(sig, f) => vec![
                Formula::diseq(t.clone(), s.clone()),
                Formula::diseq(s.clone(), t.clone()),
            ],
            _ => vec![],
        };
        if let Some(neg) = complementary.into_iter().find(|g| label.contains(g)) {
            return Some(RuleInstance::Closure {
                pos: f.clone(),
                neg,
            });
        }
    }
    None
}

fn decomposition(label: &NodeLabel) -> Option<RuleInstance> {
    label
        .iter()
        .find(|f| matches!(f, Formula::And(_)))
        .map(|f| RuleInstance::AndDec { formula: f.clone() })
        .or_else(|| {
            label
                .iter()
                .find(|f| matches!(f, Formula::Or(_)))
                .map(|f| RuleInstance::OrDec { formula: f.clone() })
        })
}

fn replacement(label: &NodeLabel, n: Option<ParamId>) -> Option<RuleInstance> {
    for f in label {
        if let Formula::Eq(Term::Param(a), Term::Param(b)) = f {
            if Some(*a) == n || a == b {
                continue;
            }
            if label.iter().any(|g| g != f && g.contains_param(*a)) {
                return Some(RuleInstance::Replacement {
                    eq: f.clone(),
                    from: *a,
                    to: *b,
                });
            }
        }
    }
    None
}

fn unfolding(sig: &Signature, label: &NodeLabel, history: &BranchHistory) -> Option<RuleInstance> {
    let eqs: Vec<(&Formula, ParamId, FunId, Vec<ParamId>)> = label
        .iter()
        .filter_map(|f| flat_eq(sig, f).map(|(a, c, args)| (f, a, c, args)))
        .collect();
    for f in label {
        if let Formula::Defined {
            def,
            index: Term::Param(a),
            positive,
        } = f
        {
            for (eq, b, ctor, args) in &eqs {
                if b != a {
                    continue;
                }
                let inst = RuleInstance::Unfolding {
                    literal: f.clone(),
                    eq: (*eq).clone(),
                    def: *def,
                    param: *a,
                    ctor: *ctor,
                    args: args.clone(),
                    positive: *positive,
                };
                if !history.was_applied(&inst) {
                    return Some(inst);
                }
            }
        }
    }
    None
}

fn eq_dec(sig: &Signature, label: &NodeLabel) -> Option<RuleInstance> {
    let eqs: Vec<(&Formula, ParamId)> = label
        .iter()
        .filter_map(|f| flat_eq(sig, f).map(|(a, _, _)| (f, a)))
        .collect();
    for (i, (f, a)) in eqs.iter().enumerate() {
        if let Some((g, _)) = eqs[i + 1..].iter().find(|(_, b)| b == a) {
            // label order is ascending, so `f` is the smaller equation
            return Some(RuleInstance::EqDec {
                keep: (*f).clone(),
                drop: (*g).clone(),
            });
        }
    }
    None
}

/// Every ≠-Decomposition instance whose conclusion is not yet present.
pub fn diseq_instances(
    ctx: &RuleContext,
    sig: &Signature,
    label: &NodeLabel,
) -> Result<Vec<RuleInstance>, ProveError> {
    let mut eqs: BTreeMap<ParamId, Vec<&Formula>> = BTreeMap::new();
    for f in label {
        if let Some((a, _, _)) = flat_eq(sig, f) {
            eqs.entry(a).or_default().push(f);
        }
    }
    let mut out = Vec::new();
    for d in label {
        let Formula::Diseq(Term::Param(a), Term::Param(b)) = d else {
            continue;
        };
        let (Some(las), Some(lbs)) = (eqs.get(a), eqs.get(b)) else {
            continue;
        };
        if ctx.delta.is_free_sort(sig, sig.param(*a).sort)
            && (is_proper_subterm(sig, &eqs, *a, *b) || is_proper_subterm(sig, &eqs, *b, *a))
        {
            // a term never equals one of its proper subterms
            continue;
        }
        for l in las {
            for r in lbs {
                let (Formula::Eq(_, lt), Formula::Eq(_, rt)) = (l, r) else {
                    unreachable!()
                };
                let added = ctx
                    .delta
                    .negated_delta(sig, lt.head().unwrap(), lt.args(), rt.head().unwrap(), rt.args())
                    .map_err(|e| ProveError::Internal(e.to_string()))?;
                if added == Formula::True || label.contains(&added) {
                    continue;
                }
                if let Formula::Or(ds) = &added {
                    if ds.iter().any(|x| label.contains(x)) {
                        continue;
                    }
                }
                out.push(RuleInstance::DiseqDec {
                    diseq: d.clone(),
                    left: (*l).clone(),
                    right: (*r).clone(),
                    added,
                });
            }
        }
    }
    Ok(out)
}

/// Whether `inner` occurs below `outer` in the equations `A = f(B)`.
fn is_proper_subterm(
    sig: &Signature,
    eqs: &BTreeMap<ParamId, Vec<&Formula>>,
    outer: ParamId,
    inner: ParamId,
) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = vec![outer];
    while let Some(p) = todo.pop() {
        for f in eqs.get(&p).into_iter().flatten() {
            let Some((_, _, args)) = flat_eq(sig, f) else {
                continue;
            };
            for b in args {
                if b == inner {
                    return true;
                }
                if seen.insert(b) {
                    todo.push(b);
                }
            }
        }
    }
    false
}

fn diseq_dec(
    ctx: &RuleContext,
    sig: &Signature,
    label: &NodeLabel,
    history: &BranchHistory,
) -> Result<Option<RuleInstance>, ProveError> {
    Ok(diseq_instances(ctx, sig, label)?
        .into_iter()
        .find(|i| !history.was_applied(i)))
}

fn depth_rules(label: &NodeLabel) -> Option<RuleInstance> {
    for f in label {
        if let Formula::Depth {
            rel: DepthRel::Le,
            rhs: DepthRhs::N,
            ..
        } = f
        {
            return Some(RuleInstance::Strictness { atom: f.clone() });
        }
    }
    for f in label {
        if let Formula::Depth {
            rel: DepthRel::Lt,
            rhs: DepthRhs::SuccN | DepthRhs::SuccZero,
            ..
        } = f
        {
            return Some(RuleInstance::LessDec { atom: f.clone() });
        }
    }
    let below: Vec<ParamId> = label
        .iter()
        .filter_map(|f| match f {
            Formula::Depth {
                param,
                rel: DepthRel::Lt,
                rhs: DepthRhs::N,
            } => Some(*param),
            _ => None,
        })
        .collect();
    let at: Vec<ParamId> = label
        .iter()
        .filter_map(|f| match f {
            Formula::Depth {
                param,
                rel: DepthRel::Eq,
                rhs: DepthRhs::N,
            } => Some(*param),
            _ => None,
        })
        .collect();
    for &a in &below {
        for &b in &at {
            // a parameter both below and at N closes via `A != A`
            if !label.contains(&Formula::diseq(Term::Param(a), Term::Param(b))) {
                return Some(RuleInstance::LessSeparation { a, b });
            }
        }
    }
    None
}

/// `a` was instantiated while `b` is still bounded by `N`. An instantiated
/// parameter had depth s(N) when it was exploded and N only decreases
/// afterwards, so `a` is strictly deeper than `b` and the two differ.
fn depth_ordered(sig: &Signature, label: &NodeLabel, a: ParamId, b: ParamId) -> bool {
    if let (Some(((lo1, hi1), _)), Some(((lo2, hi2), _))) = (depth_interval(label, a), depth_interval(label, b)) {
        if lo1.max(lo2) > hi1.min(hi2) {
            return true;
        }
    }
    let instantiated = label
        .iter()
        .any(|f| matches!(flat_eq(sig, f), Some((p, _, _)) if p == a));
    instantiated
        && label.iter().any(|f| {
            matches!(f, Formula::Depth {
                param,
                rel: DepthRel::Eq | DepthRel::Lt,
                rhs: DepthRhs::N,
            } if *param == b)
        })
}

fn explosion(label: &NodeLabel) -> Option<RuleInstance> {
    label.iter().find_map(|f| match f {
        Formula::Depth {
            param,
            rel: DepthRel::Eq,
            rhs: rhs @ (DepthRhs::SuccN | DepthRhs::SuccZero),
        } => Some(RuleInstance::Explosion {
            atom: f.clone(),
            param: *param,
            rhs: *rhs,
        }),
        _ => None,
    })
}

/// The first applicable rule other than Loop and N-Explosion, in priority
/// order; `None` means the label is a layer.
pub fn applicable_rule(
    ctx: &RuleContext,
    sig: &Signature,
    label: &NodeLabel,
    history: &BranchHistory,
) -> Result<Option<RuleInstance>, ProveError> {
    if label.is_closed() {
        return Ok(None);
    }
    if let Some(r) = closure(ctx, sig, label) {
        return Ok(Some(r));
    }
    if let Some(r) = decomposition(label) {
        return Ok(Some(r));
    }
    if let Some(r) = replacement(label, ctx.n) {
        return Ok(Some(r));
    }
    if let Some(r) = unfolding(sig, label, history) {
        return Ok(Some(r));
    }
    if let Some(r) = eq_dec(sig, label) {
        return Ok(Some(r));
    }
    if let Some(r) = diseq_dec(ctx, sig, label, history)? {
        return Ok(Some(r));
    }
    if let Some(r) = depth_rules(label) {
        return Ok(Some(r));
    }
    let pairs = separable_pairs(sig, label, ctx.n);
    // pairs already known to differ are settled before any branching
    if let Some(&(a, b)) = pairs
        .iter()
        .find(|(a, b)| depth_ordered(sig, label, *a, *b) || depth_ordered(sig, label, *b, *a))
    {
        return Ok(Some(RuleInstance::LessSeparation { a, b }));
    }
    if let Some(&(a, b)) = pairs.first() {
        return Ok(Some(RuleInstance::Separation { a, b }));
    }
    Ok(explosion(label))
}

fn stale(sig: &Signature, f: &Formula) -> ProveError {
    ProveError::Internal(format!(
        "stale rule instance: `{}` is not in the label",
        formula_to_string(sig, f)
    ))
}

fn without(sig: &Signature, label: &NodeLabel, fs: &[&Formula]) -> Result<NodeLabel, ProveError> {
    let mut out = label.clone();
    for f in fs {
        if !out.remove(f) {
            return Err(stale(sig, f));
        }
    }
    Ok(out)
}

fn require(sig: &Signature, label: &NodeLabel, fs: &[&Formula]) -> Result<(), ProveError> {
    match fs.iter().find(|f| !label.contains(f)) {
        Some(f) => Err(stale(sig, f)),
        None => Ok(()),
    }
}

fn closed() -> NodeLabel {
    std::iter::once(Formula::False).collect()
}

/// Children labels of `inst` applied to `label`. Explosion allocates its
/// fresh parameters in `sig`.
pub fn apply_rule(
    ctx: &RuleContext,
    sig: &mut Signature,
    label: &NodeLabel,
    inst: &RuleInstance,
) -> Result<Vec<NodeLabel>, ProveError> {
    let map_err = |e: crate::formula::FormulaError| ProveError::Internal(e.to_string());
    Ok(match inst {
        RuleInstance::Closure { pos, neg } => {
            require(sig, label, &[pos, neg])?;
            vec![closed()]
        }
        RuleInstance::NClosure { eq: f } => {
            require(sig, label, &[f])?;
            vec![closed()]
        }
        RuleInstance::DepthClosure { atoms: fs } | RuleInstance::OccursClosure { cycle: fs } => {
            require(sig, label, &fs.iter().collect::<Vec<_>>())?;
            vec![closed()]
        }
        RuleInstance::Loop { .. } => vec![closed()],
        RuleInstance::AndDec { formula } => {
            let mut out = without(sig, label, &[formula])?;
            if let Formula::And(cs) = formula {
                for c in cs {
                    out.insert(c.clone());
                }
            }
            vec![out]
        }
        RuleInstance::OrDec { formula } => {
            let base = without(sig, label, &[formula])?;
            let Formula::Or(cs) = formula else {
                return Err(ProveError::Internal("disjunction expected".into()));
            };
            cs.iter()
                .map(|c| {
                    let mut l = base.clone();
                    l.insert(c.clone());
                    l
                })
                .collect()
        }
        RuleInstance::Replacement { eq, from, to } => {
            let rest = without(sig, label, &[eq])?;
            let mut out = rest
                .substitute_param(sig, *from, &Term::Param(*to), ctx.n)
                .map_err(map_err)?;
            out.insert(eq.clone());
            vec![out]
        }
        RuleInstance::Unfolding {
            literal,
            eq,
            def,
            param,
            ctor,
            args,
            positive,
        } => {
            require(sig, label, &[eq])?;
            let mut out = without(sig, label, &[literal])?;
            let psi = ctx
                .rules
                .unfold(sig, *def, *param, *ctor, args, *positive)
                .map_err(|e| ProveError::Internal(e.to_string()))?;
            out.insert(psi);
            vec![out]
        }
        RuleInstance::EqDec { keep, drop } => {
            require(sig, label, &[keep])?;
            let mut out = without(sig, label, &[drop])?;
            let (Formula::Eq(_, s), Formula::Eq(_, t)) = (keep, drop) else {
                return Err(ProveError::Internal("equations expected".into()));
            };
            let d = ctx
                .delta
                .delta(sig, s.head().unwrap(), s.args(), t.head().unwrap(), t.args())
                .map_err(|e| ProveError::Internal(e.to_string()))?;
            out.insert(d);
            vec![out]
        }
        RuleInstance::DiseqDec {
            diseq,
            left,
            right,
            added,
        } => {
            require(sig, label, &[diseq, left, right])?;
            let mut out = label.clone();
            out.insert(added.clone());
            vec![out]
        }
        RuleInstance::Strictness { atom } => {
            let mut out = without(sig, label, &[atom])?;
            let Formula::Depth { param, .. } = atom else {
                unreachable!()
            };
            out.insert(Formula::or([
                Formula::depth(*param, DepthRel::Eq, DepthRhs::N),
                Formula::depth(*param, DepthRel::Lt, DepthRhs::N),
            ]));
            vec![out]
        }
        RuleInstance::LessDec { atom } => {
            let mut out = without(sig, label, &[atom])?;
            let Formula::Depth { param, rhs, .. } = atom else {
                unreachable!()
            };
            out.insert(Formula::depth(*param, DepthRel::Le, rhs.pred().unwrap()));
            vec![out]
        }
        RuleInstance::LessSeparation { a, b } => {
            let mut out = label.clone();
            out.insert(Formula::diseq(Term::Param(*a), Term::Param(*b)));
            vec![out]
        }
        RuleInstance::Separation { a, b } => {
            let (ta, tb) = (Term::Param(*a), Term::Param(*b));
            let mut out = label.clone();
            out.insert(Formula::or([
                Formula::eq(ta.clone(), tb.clone()),
                Formula::diseq(ta, tb),
            ]));
            vec![out]
        }
        RuleInstance::Explosion { atom, param, rhs } => {
            let mut out = without(sig, label, &[atom])?;
            let n = ctx
                .n
                .ok_or_else(|| ProveError::Internal("explosion without a depth parameter".into()))?;
            let t = rhs.pred().unwrap();
            let sort = sig.param(*param).sort;
            let base = sig.param(*param).name.clone();
            let mut cases = Vec::new();
            for ctor in sig.constructors_of(sort) {
                let slots = sig.fun(ctor).args.clone();
                let fresh: Vec<ParamId> = slots.iter().map(|s| sig.fresh_param(&base, *s)).collect();
                let members: Vec<ParamId> = fresh
                    .iter()
                    .copied()
                    .filter(|p| sig.is_inductive(sig.param(*p).sort))
                    .collect();
                cases.push(Formula::and([
                    expand_max(&members, t, n),
                    Formula::eq(
                        Term::Param(*param),
                        Term::app(ctor, fresh.iter().map(|p| Term::Param(*p)).collect()),
                    ),
                ]));
            }
            out.insert(Formula::or(cases));
            vec![out]
        }
        RuleInstance::NExplosion => {
            let n = ctx
                .n
                .ok_or_else(|| ProveError::Internal("no depth parameter".into()))?;
            let zero = Term::constant(ZERO);
            let np = Term::Param(n);
            [Term::app(SUCC, vec![zero]), Term::app(SUCC, vec![np])]
                .iter()
                .map(|t| label.substitute_param(sig, n, t, Some(n)).map_err(map_err))
                .collect::<Result<_, _>>()?
        }
    })
}
