//! Static checks run before proof search: well-formed signatures, rewrite
//! systems of the supported shape, admissible conjectures and well-formed
//! decomposition tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::equality::{DeltaEntry, DeltaTable};
use crate::formula::Formula;
use crate::print::{formula_to_string, term_to_string};
use crate::problem::Problem;
use crate::rewrite::{RewriteRule, RewriteSystem};
use crate::sig::{DefId, FunKind, Signature, SortId, VarId, BOOL, NAT, SUCC, ZERO};
use crate::term::Term;

/// Which requirement a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Signature shape: constructors, predicates, defined symbols.
    Signature,
    /// Rule bodies only mention the pattern variables.
    RuleVariables,
    /// Inductive terms in rule bodies are pattern variables or the pattern.
    RuleTerms,
    /// Head-recursive occurrences follow a strict order on defined symbols.
    RuleOrder,
    /// One rule per defined symbol and constructor of its sort.
    RuleCoverage,
    /// Patterns are linear and pairwise distinct.
    RuleOrthogonality,
    /// No constructor and no inductive variable in the conjecture.
    NoConstructors,
    /// Atoms mention no defined symbol and at most one parameter.
    OneParameter,
    /// Rule bodies stay admissible once inductive terms become parameters.
    AbstractedBodies,
    /// Beyond what the selected base backend can decide.
    Backend,
    /// Decomposition template shape.
    DeltaShape,
    /// Decomposition templates link every argument across the equation.
    DeltaCoverage,
}

impl Condition {
    pub fn code(self) -> &'static str {
        match self {
            Condition::Signature => "S1",
            Condition::RuleVariables => "R1",
            Condition::RuleTerms => "R2",
            Condition::RuleOrder => "R3",
            Condition::RuleCoverage => "R4",
            Condition::RuleOrthogonality => "R5",
            Condition::NoConstructors => "A2",
            Condition::OneParameter => "A3",
            Condition::AbstractedBodies => "A4",
            Condition::Backend => "B1",
            Condition::DeltaShape => "D1",
            Condition::DeltaCoverage => "D2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {}",
            self.condition.code(),
            self.location,
            self.message
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when the only complaints are about backend capabilities.
    pub fn admissible(&self) -> bool {
        self.violations
            .iter()
            .all(|v| v.condition == Condition::Backend)
    }

    pub fn has(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }

    fn push(&mut self, condition: Condition, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            condition,
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_signature(sig: &Signature) -> ValidationReport {
    let mut r = ValidationReport::default();
    let loc = "signature";
    if !sig.is_inductive(NAT) || sig.constructors_of(NAT) != vec![ZERO, SUCC] {
        r.push(
            Condition::Signature,
            loc,
            "`nat` must be inductive with exactly the constructors `0` and `s`",
        );
    }
    if sig.is_inductive(BOOL) {
        r.push(Condition::Signature, loc, "`bool` cannot be inductive");
    }
    for f in sig.fun_ids() {
        let d = sig.fun(f);
        if d.args.contains(&BOOL) {
            r.push(
                Condition::Signature,
                loc,
                format!("`{}` takes an argument of sort `bool`", d.name),
            );
        }
        match d.kind {
            FunKind::Constructor if !sig.is_inductive(d.result) => r.push(
                Condition::Signature,
                loc,
                format!(
                    "constructor `{}` has non-inductive result sort `{}`",
                    d.name,
                    sig.sort_name(d.result)
                ),
            ),
            FunKind::Base if sig.is_inductive(d.result) => r.push(
                Condition::Signature,
                loc,
                format!(
                    "`{}` has inductive result sort `{}` but is not a constructor",
                    d.name,
                    sig.sort_name(d.result)
                ),
            ),
            _ => {}
        }
    }
    for d in sig.def_ids() {
        let dd = sig.def(d);
        if !sig.is_inductive(dd.sort) {
            r.push(
                Condition::Signature,
                loc,
                format!(
                    "defined symbol `{}` is indexed by non-inductive sort `{}`",
                    dd.name,
                    sig.sort_name(dd.sort)
                ),
            );
        }
    }
    for p in sig.param_ids() {
        if sig.param(p).sort == BOOL {
            r.push(
                Condition::Signature,
                loc,
                format!("parameter `{}` has sort `bool`", sig.param(p).name),
            );
        }
    }
    // every inductive sort needs a finite constructor term
    let mut inhabited: BTreeSet<SortId> = sig.sort_ids().filter(|s| !sig.is_inductive(*s)).collect();
    loop {
        let before = inhabited.len();
        for f in sig.fun_ids() {
            let d = sig.fun(f);
            if d.kind == FunKind::Constructor && d.args.iter().all(|a| inhabited.contains(a)) {
                inhabited.insert(d.result);
            }
        }
        if inhabited.len() == before {
            break;
        }
    }
    for s in sig.sort_ids() {
        if sig.is_inductive(s) && !inhabited.contains(&s) {
            r.push(
                Condition::Signature,
                loc,
                format!("inductive sort `{}` has no finite constructor term", sig.sort_name(s)),
            );
        }
    }
    r
}

fn rule_location(sig: &Signature, rule: &RewriteRule) -> String {
    let mut s = format!(
        "rule ({} {})",
        sig.def(rule.def).name,
        term_to_string(sig, &rule.pattern())
    );
    if let Some(l) = rule.line {
        s.push_str(&format!(" at line {l}"));
    }
    s
}

fn free_vars(f: &Formula, bound: &mut Vec<VarId>, out: &mut BTreeSet<VarId>) {
    match f {
        Formula::Quant { var, body, .. } => {
            bound.push(*var);
            free_vars(body, bound, out);
            bound.pop();
        }
        Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| free_vars(c, bound, out)),
        other => other.for_each_term(&mut |t| {
            let mut vs = BTreeSet::new();
            t.collect_vars(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        }),
    }
}

/// Inductive-sort terms that are neither a pattern variable nor the pattern.
fn foreign_inductive_terms(sig: &Signature, t: &Term, rule: &RewriteRule, pattern: &Term, out: &mut Vec<Term>) {
    if sig.is_inductive(t.sort(sig)) {
        let ok = t == pattern || matches!(t, Term::Var(v) if rule.formals.contains(v));
        if !ok {
            out.push(t.clone());
        }
        return;
    }
    for a in t.args() {
        foreign_inductive_terms(sig, a, rule, pattern, out);
    }
}

fn head_recursive_defs(f: &Formula, pattern: &Term, out: &mut BTreeSet<DefId>) {
    f.for_each_subformula(&mut |g| {
        if let Formula::Defined { def, index, .. } = g {
            if index == pattern {
                out.insert(*def);
            }
        }
    });
}

pub fn validate_rewrite_system(rules: &RewriteSystem, sig: &Signature) -> ValidationReport {
    let mut r = ValidationReport::default();
    let mut seen: BTreeMap<(DefId, crate::sig::FunId), usize> = BTreeMap::new();
    let mut graph: BTreeMap<DefId, BTreeSet<DefId>> = BTreeMap::new();
    for rule in rules.rules() {
        let loc = rule_location(sig, rule);
        let pattern = rule.pattern();
        *seen.entry((rule.def, rule.ctor)).or_default() += 1;
        if sig.fun(rule.ctor).result != sig.def(rule.def).sort {
            r.push(
                Condition::RuleCoverage,
                &loc,
                format!(
                    "constructor `{}` is not of the index sort of `{}`",
                    sig.fun(rule.ctor).name,
                    sig.def(rule.def).name
                ),
            );
        }
        let distinct: BTreeSet<_> = rule.formals.iter().collect();
        if distinct.len() != rule.formals.len() {
            r.push(Condition::RuleOrthogonality, &loc, "pattern is not linear");
        }

        let mut fv = BTreeSet::new();
        free_vars(&rule.body, &mut Vec::new(), &mut fv);
        for v in fv.iter().filter(|v| !rule.formals.contains(v)) {
            r.push(
                Condition::RuleVariables,
                &loc,
                format!("variable `{}` is not bound by the pattern", sig.var(*v).name),
            );
        }

        let mut foreign = Vec::new();
        rule.body
            .for_each_term(&mut |t| foreign_inductive_terms(sig, t, rule, &pattern, &mut foreign));
        for t in foreign {
            r.push(
                Condition::RuleTerms,
                &loc,
                format!(
                    "inductive term `{}` is neither a pattern variable nor the pattern",
                    term_to_string(sig, &t)
                ),
            );
        }
        rule.body.for_each_subformula(&mut |g| {
            if let Formula::Quant { var, .. } = g {
                if sig.is_inductive(sig.var(*var).sort) {
                    r.push(
                        Condition::RuleTerms,
                        &loc,
                        format!("quantified variable `{}` has inductive sort", sig.var(*var).name),
                    );
                }
            }
        });

        let mut heads = BTreeSet::new();
        head_recursive_defs(&rule.body, &pattern, &mut heads);
        graph.entry(rule.def).or_default().extend(heads);
    }

    for d in sig.def_ids() {
        let sort = sig.def(d).sort;
        if !sig.is_inductive(sort) {
            continue;
        }
        for c in sig.constructors_of(sort) {
            match seen.get(&(d, c)).copied().unwrap_or(0) {
                1 => {}
                0 => r.push(
                    Condition::RuleCoverage,
                    format!("defined symbol `{}`", sig.def(d).name),
                    format!("no rule for constructor `{}`", sig.fun(c).name),
                ),
                n => r.push(
                    Condition::RuleCoverage,
                    format!("defined symbol `{}`", sig.def(d).name),
                    format!("{n} rules for constructor `{}`", sig.fun(c).name),
                ),
            }
        }
    }

    if let Some(cycle) = find_cycle(&graph) {
        let names: Vec<&str> = cycle.iter().map(|d| sig.def(*d).name.as_str()).collect();
        r.push(
            Condition::RuleOrder,
            format!("defined symbol `{}`", names[0]),
            format!(
                "head-recursive occurrences form a cycle: {}",
                names.join(" -> ")
            ),
        );
    }
    r
}

/// A cycle of the graph, as a path that returns to its first node.
fn find_cycle(graph: &BTreeMap<DefId, BTreeSet<DefId>>) -> Option<Vec<DefId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit(
        d: DefId,
        graph: &BTreeMap<DefId, BTreeSet<DefId>>,
        marks: &mut HashMap<DefId, Mark>,
        path: &mut Vec<DefId>,
    ) -> Option<Vec<DefId>> {
        match marks.get(&d) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = path.iter().position(|x| *x == d).unwrap();
                let mut cycle = path[start..].to_vec();
                cycle.push(d);
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(d, Mark::Active);
        path.push(d);
        for next in graph.get(&d).into_iter().flatten() {
            if let Some(c) = visit(*next, graph, marks, path) {
                return Some(c);
            }
        }
        path.pop();
        marks.insert(d, Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for d in graph.keys() {
        if let Some(c) = visit(*d, graph, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

/// An order on defined symbols compatible with head recursion: each symbol
/// comes after every symbol its rules expand at the pattern.
pub fn definition_order(rules: &RewriteSystem, sig: &Signature) -> Option<Vec<DefId>> {
    let mut graph: BTreeMap<DefId, BTreeSet<DefId>> = BTreeMap::new();
    for rule in rules.rules() {
        let mut heads = BTreeSet::new();
        head_recursive_defs(&rule.body, &rule.pattern(), &mut heads);
        graph.entry(rule.def).or_default().extend(heads);
    }
    if find_cycle(&graph).is_some() {
        return None;
    }
    let mut order = Vec::new();
    let mut placed = BTreeSet::new();
    while order.len() < sig.def_ids().count() {
        let next = sig.def_ids().find(|d| {
            !placed.contains(d) && graph.get(d).is_none_or(|s| s.iter().all(|x| placed.contains(x)))
        })?;
        placed.insert(next);
        order.push(next);
    }
    Some(order)
}

fn check_formula(
    sig: &Signature,
    f: &Formula,
    loc: &str,
    builtin: bool,
    r: &mut ValidationReport,
    constructor_condition: Condition,
    param_condition: Condition,
) {
    // constructors and inductive variables
    let mut ctors = BTreeSet::new();
    f.for_each_term(&mut |t| {
        for s in t.subterms() {
            match s {
                Term::App(g, _) if sig.fun(*g).kind == FunKind::Constructor => {
                    ctors.insert(sig.fun(*g).name.clone());
                }
                Term::Var(v) if sig.is_inductive(sig.var(*v).sort) => {
                    ctors.insert(sig.var(*v).name.clone());
                }
                _ => {}
            }
        }
    });
    for c in ctors {
        r.push(
            constructor_condition,
            loc,
            format!(
                "`{c}` is a constructor or inductive variable; ground cases belong in rule bodies, \
                 e.g. write `(rule (g 0) (p 0))` and assert `(g A)` instead of `(p 0)`"
            ),
        );
    }
    check_atoms(sig, f, loc, builtin, r, param_condition);
}

fn check_atoms(
    sig: &Signature,
    f: &Formula,
    loc: &str,
    builtin: bool,
    r: &mut ValidationReport,
    param_condition: Condition,
) {
    match f {
        Formula::And(cs) | Formula::Or(cs) => {
            cs.iter().for_each(|c| check_atoms(sig, c, loc, builtin, r, param_condition))
        }
        Formula::Defined { .. } | Formula::True | Formula::False => {}
        other => {
            let shown = formula_to_string(sig, other);
            if other.has_defined() {
                r.push(
                    param_condition,
                    loc,
                    format!("`{shown}` has a defined symbol below a quantifier"),
                );
            }
            if other.params().len() > 1 {
                r.push(
                    param_condition,
                    loc,
                    format!("`{shown}` mentions more than one parameter"),
                );
            }
            if builtin {
                match other {
                    Formula::Quant { .. } => r.push(
                        Condition::Backend,
                        loc,
                        format!("quantified formula `{shown}` needs an external backend"),
                    ),
                    Formula::Eq(t, s) | Formula::Diseq(t, s)
                        if !(matches!(t, Term::Param(_)) && matches!(s, Term::Param(_))) =>
                    {
                        r.push(
                            Condition::Backend,
                            loc,
                            format!("equation `{shown}` between non-parameter terms needs an external backend"),
                        )
                    }
                    _ => {}
                }
            }
        }
    }
}

/// Checks the conjecture. With `builtin` set, also flags what the built-in
/// base backend cannot decide.
pub fn validate_conjecture(f: &Formula, sig: &Signature, builtin: bool) -> ValidationReport {
    let mut r = ValidationReport::default();
    check_formula(
        sig,
        f,
        "conjecture",
        builtin,
        &mut r,
        Condition::NoConstructors,
        Condition::OneParameter,
    );
    r
}

/// Rule bodies with every pattern variable and the pattern itself replaced
/// by distinct fresh parameters must again be admissible.
pub fn validate_abstracted_bodies(rules: &RewriteSystem, sig: &Signature, builtin: bool) -> ValidationReport {
    let mut r = ValidationReport::default();
    for rule in rules.rules() {
        let mut tmp = sig.clone();
        let mut map: HashMap<VarId, Term> = HashMap::new();
        for v in &rule.formals {
            let name = format!("{}#", sig.var(*v).name);
            let p = tmp.fresh_param(&name, sig.var(*v).sort);
            map.insert(*v, Term::Param(p));
        }
        let pat = tmp.fresh_param("pattern#", sig.fun(rule.ctor).result);
        let body = rule
            .body
            .replace_term(&tmp, &rule.pattern(), &Term::Param(pat))
            .unwrap_or_else(|_| rule.body.clone())
            .subst_vars(&map);
        let mut sub = ValidationReport::default();
        check_formula(
            &tmp,
            &body,
            &rule_location(sig, rule),
            builtin,
            &mut sub,
            Condition::AbstractedBodies,
            Condition::AbstractedBodies,
        );
        // translate the temporary parameter names back for the message
        for v in &mut sub.violations {
            if v.condition == Condition::AbstractedBodies {
                v.message = format!("after abstraction, {}", v.message);
            }
        }
        r.merge(sub);
    }
    r
}

fn delta_location(sig: &Signature, f: crate::sig::FunId, g: crate::sig::FunId, e: &DeltaEntry) -> String {
    let mut s = format!("delta ({} {})", sig.fun(f).name, sig.fun(g).name);
    if let Some(l) = e.line {
        s.push_str(&format!(" at line {l}"));
    }
    s
}

/// Disjunctive normal form of a positive combination of equations.
fn dnf(f: &Formula) -> Vec<Vec<(Term, Term)>> {
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Eq(a, b) => vec![vec![(a.clone(), b.clone())]],
        Formula::Or(cs) => cs.iter().flat_map(dnf).collect(),
        Formula::And(cs) => cs.iter().fold(vec![vec![]], |acc, c| {
            let d = dnf(c);
            acc.iter()
                .flat_map(|x| {
                    d.iter().map(move |y| {
                        let mut z = x.clone();
                        z.extend(y.iter().cloned());
                        z
                    })
                })
                .collect()
        }),
        _ => vec![],
    }
}

fn template_shape_ok(f: &Formula, vars: &BTreeSet<VarId>) -> bool {
    match f {
        Formula::True | Formula::False => true,
        Formula::Eq(a, b) => [a, b]
            .iter()
            .all(|t| matches!(t, Term::Var(v) if vars.contains(v))),
        Formula::And(cs) | Formula::Or(cs) => cs.iter().all(|c| template_shape_ok(c, vars)),
        _ => false,
    }
}

pub fn validate_delta_table(table: &DeltaTable, sig: &Signature) -> ValidationReport {
    let mut r = ValidationReport::default();
    for (f, g, e) in table.entries() {
        let loc = delta_location(sig, f, g, e);
        if sig.fun(f).result != sig.fun(g).result {
            r.push(Condition::DeltaShape, &loc, "constructors of different sorts");
            continue;
        }
        let vars: BTreeSet<VarId> = e.xs.iter().chain(&e.ys).copied().collect();
        if !template_shape_ok(&e.body, &vars) {
            r.push(
                Condition::DeltaShape,
                &loc,
                "template must be built from and, or and equations between argument variables",
            );
            continue;
        }
        for disjunct in dnf(&e.body) {
            // union-find over the argument variables
            let mut parent: HashMap<VarId, VarId> = vars.iter().map(|v| (*v, *v)).collect();
            fn root(p: &mut HashMap<VarId, VarId>, v: VarId) -> VarId {
                let mut r = v;
                while p[&r] != r {
                    r = p[&r];
                }
                p.insert(v, r);
                r
            }
            for (a, b) in &disjunct {
                if let (Term::Var(a), Term::Var(b)) = (a, b) {
                    let (ra, rb) = (root(&mut parent, *a), root(&mut parent, *b));
                    parent.insert(ra, rb);
                }
            }
            let roots: HashMap<VarId, VarId> =
                vars.iter().map(|v| (*v, root(&mut parent, *v))).collect();
            let linked = |x: &VarId, others: &[VarId]| others.iter().any(|y| roots[y] == roots[x]);
            let unlinked: Vec<&str> = e
                .xs
                .iter()
                .filter(|x| !linked(x, &e.ys))
                .chain(e.ys.iter().filter(|y| !linked(y, &e.xs)))
                .map(|v| sig.var(*v).name.as_str())
                .collect();
            if !unlinked.is_empty() {
                r.push(
                    Condition::DeltaCoverage,
                    &loc,
                    format!(
                        "a case of the template leaves {} unrelated to the other side",
                        unlinked.join(", ")
                    ),
                );
                break;
            }
        }
    }
    r
}

/// Every check for a parsed problem.
pub fn validate_problem(problem: &Problem, builtin: bool) -> ValidationReport {
    let sig = &problem.sig;
    let mut r = validate_signature(sig);
    r.merge(validate_rewrite_system(&problem.rules, sig));
    r.merge(validate_abstracted_bodies(&problem.rules, sig, builtin));
    r.merge(validate_delta_table(&problem.delta, sig));
    for (i, a) in problem.asserts.iter().enumerate() {
        let mut sub = validate_conjecture(a, sig, builtin);
        if let Some(l) = problem.assert_lines.get(i) {
            for v in &mut sub.violations {
                v.location = format!("assert at line {l}");
            }
        }
        r.merge(sub);
    }
    r
}
