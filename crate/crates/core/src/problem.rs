//! Problem files: an S-expression syntax for signatures, rewrite rules,
//! decomposition tables and conjectures.
//!
//! ```text
//! (sort elt)
//! (function p (nat) bool)
//! (parameter A nat)
//! (defined g nat)
//! (rule (g 0) (p 0))
//! (rule (g (s K)) (and (g K) (or (not (p K)) (p (s K)))))
//! (assert (and (not (p A)) (g A)))
//! ```

use std::fmt;

use crate::equality::{DeltaEntry, DeltaTable};
use crate::formula::{nnf, Formula, Quantifier, RawFormula};
use crate::print::{formula_to_string, write_formula};
use crate::rewrite::{RewriteRule, RewriteSystem};
use crate::sig::{FunKind, Signature, SignatureError, SortId, Symbol, VarId, BOOL, NAT, SUCC, ZERO};
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<Sexp>, line: usize, col: usize },
}

impl Sexp {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom { line, col, .. } | Sexp::List { line, col, .. } => (*line, *col),
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn err_at(s: &Sexp, message: impl Into<String>) -> ParseError {
    let (line, col) = s.pos();
    ParseError {
        line,
        col,
        message: message.into(),
    }
}

/// Reads every top-level S-expression of `text`.
pub fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), l0, c0));
            }
            ')' => {
                chars.next();
                col += 1;
                let Some((items, l, c)) = stack.pop() else {
                    return Err(ParseError {
                        line: l0,
                        col: c0,
                        message: "unbalanced `)`".into(),
                    });
                };
                let list = Sexp::List {
                    items,
                    line: l,
                    col: c,
                };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    chars.next();
                    col += 1;
                }
                let atom = Sexp::Atom {
                    text,
                    line: l0,
                    col: c0,
                };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.pop() {
        return Err(ParseError {
            line: l,
            col: c,
            message: "unclosed `(`".into(),
        });
    }
    Ok(top)
}

/// A parsed problem: vocabulary, definitions and the conjecture.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub sig: Signature,
    pub rules: RewriteSystem,
    pub delta: DeltaTable,
    pub asserts: Vec<Formula>,
    pub assert_lines: Vec<usize>,
}

impl Problem {
    pub fn new(sig: Signature) -> Self {
        Problem {
            sig,
            rules: RewriteSystem::new(),
            delta: DeltaTable::new(),
            asserts: Vec::new(),
            assert_lines: Vec::new(),
        }
    }

    /// Conjunction of all assertions.
    pub fn conjecture(&self) -> Formula {
        Formula::and(self.asserts.iter().cloned())
    }
}

struct Parser {
    sig: Signature,
    scope: Vec<(String, VarId)>,
}

impl Parser {
    fn sig_err(&self, at: &Sexp, e: SignatureError) -> ParseError {
        err_at(at, e.to_string())
    }

    fn name<'a>(&self, s: &'a Sexp, what: &str) -> Result<&'a str, ParseError> {
        s.atom().ok_or_else(|| err_at(s, format!("expected {what}")))
    }

    fn sort(&self, s: &Sexp) -> Result<SortId, ParseError> {
        let n = self.name(s, "a sort name")?;
        self.sig.sort_by_name(n).map_err(|e| self.sig_err(s, e))
    }

    fn sorts(&self, s: &Sexp) -> Result<Vec<SortId>, ParseError> {
        s.list()
            .ok_or_else(|| err_at(s, "expected a list of sorts"))?
            .iter()
            .map(|x| self.sort(x))
            .collect()
    }

    fn expect_len(s: &Sexp, items: &[Sexp], n: usize, form: &str) -> Result<(), ParseError> {
        if items.len() != n {
            return Err(err_at(s, format!("`{form}` expects {} arguments", n - 1)));
        }
        Ok(())
    }

    fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Atom { text, .. } => {
                if let Some((_, v)) = self.scope.iter().rev().find(|(n, _)| n == text) {
                    return Ok(Term::Var(*v));
                }
                match self.sig.lookup(text) {
                    Some(Symbol::Param(p)) => Ok(Term::Param(p)),
                    Some(Symbol::Fun(f)) if !self.sig.fun(f).is_predicate() => {
                        if self.sig.fun(f).arity() != 0 {
                            return Err(err_at(
                                s,
                                format!("`{text}` expects {} arguments", self.sig.fun(f).arity()),
                            ));
                        }
                        Ok(Term::constant(f))
                    }
                    Some(_) => Err(err_at(s, format!("`{text}` is not a term"))),
                    None => Err(err_at(s, format!("unknown symbol `{text}`"))),
                }
            }
            Sexp::List { items, .. } => {
                let Some(head) = items.first() else {
                    return Err(err_at(s, "empty term"));
                };
                let h = self.name(head, "a function symbol")?;
                let f = match self.sig.lookup(h) {
                    Some(Symbol::Fun(f)) if !self.sig.fun(f).is_predicate() => f,
                    Some(_) => return Err(err_at(head, format!("`{h}` is not a function"))),
                    None => return Err(err_at(head, format!("unknown symbol `{h}`"))),
                };
                let args = self.args(s, h, &self.sig.fun(f).args.clone(), &items[1..])?;
                Ok(Term::app(f, args))
            }
        }
    }

    fn args(
        &self,
        at: &Sexp,
        name: &str,
        profile: &[SortId],
        items: &[Sexp],
    ) -> Result<Vec<Term>, ParseError> {
        if items.len() != profile.len() {
            return Err(err_at(
                at,
                format!(
                    "`{name}` expects {} arguments, got {}",
                    profile.len(),
                    items.len()
                ),
            ));
        }
        items
            .iter()
            .zip(profile)
            .map(|(x, &sort)| {
                let t = self.term(x)?;
                let got = t.sort(&self.sig);
                if got != sort {
                    return Err(err_at(
                        x,
                        format!(
                            "argument of `{name}` has sort `{}`, expected `{}`",
                            self.sig.sort_name(got),
                            self.sig.sort_name(sort)
                        ),
                    ));
                }
                Ok(t)
            })
            .collect()
    }

    fn formula(&mut self, s: &Sexp) -> Result<RawFormula, ParseError> {
        match s {
            Sexp::Atom { text, .. } => match text.as_str() {
                "true" => Ok(RawFormula::True),
                "false" => Ok(RawFormula::False),
                _ => match self.sig.lookup(text) {
                    Some(Symbol::Fun(f))
                        if self.sig.fun(f).is_predicate() && self.sig.fun(f).arity() == 0 =>
                    {
                        Ok(RawFormula::Atom(Formula::pred(f, vec![], true)))
                    }
                    _ => Err(err_at(s, format!("`{text}` is not a formula"))),
                },
            },
            Sexp::List { items, .. } => {
                let Some(head) = items.first() else {
                    return Err(err_at(s, "empty formula"));
                };
                let h = self.name(head, "a connective or predicate")?;
                let rest = &items[1..];
                match h {
                    "and" | "or" => {
                        let cs = rest
                            .iter()
                            .map(|x| self.formula(x))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(if h == "and" {
                            RawFormula::And(cs)
                        } else {
                            RawFormula::Or(cs)
                        })
                    }
                    "not" => {
                        Self::expect_len(s, items, 2, h)?;
                        Ok(RawFormula::not(self.formula(&rest[0])?))
                    }
                    "=>" => {
                        Self::expect_len(s, items, 3, h)?;
                        let a = self.formula(&rest[0])?;
                        let b = self.formula(&rest[1])?;
                        Ok(RawFormula::Implies(Box::new(a), Box::new(b)))
                    }
                    "=" | "/=" => {
                        Self::expect_len(s, items, 3, h)?;
                        let t = self.term(&rest[0])?;
                        let u = self.term(&rest[1])?;
                        let (st, su) = (t.sort(&self.sig), u.sort(&self.sig));
                        if st != su {
                            return Err(err_at(
                                s,
                                format!(
                                    "equation between sorts `{}` and `{}`",
                                    self.sig.sort_name(st),
                                    self.sig.sort_name(su)
                                ),
                            ));
                        }
                        let eq = RawFormula::Atom(Formula::Eq(t, u));
                        Ok(if h == "=" { eq } else { RawFormula::not(eq) })
                    }
                    "forall" | "exists" => {
                        Self::expect_len(s, items, 3, h)?;
                        let q = if h == "forall" {
                            Quantifier::Forall
                        } else {
                            Quantifier::Exists
                        };
                        let binders = rest[0]
                            .list()
                            .ok_or_else(|| err_at(&rest[0], "expected a binder list"))?;
                        let mut vars = Vec::new();
                        for b in binders {
                            let pair = b
                                .list()
                                .filter(|p| p.len() == 2)
                                .ok_or_else(|| err_at(b, "expected `(VAR SORT)`"))?;
                            let name = self.name(&pair[0], "a variable name")?.to_string();
                            let sort = self.sort(&pair[1])?;
                            let v = self.sig.add_var(&name, sort);
                            vars.push((name, v));
                        }
                        let depth = self.scope.len();
                        self.scope.extend(vars.iter().cloned());
                        let body = self.formula(&rest[1]);
                        self.scope.truncate(depth);
                        let mut body = body?;
                        for (_, v) in vars.into_iter().rev() {
                            body = RawFormula::Quant(q, v, Box::new(body));
                        }
                        Ok(body)
                    }
                    _ => match self.sig.lookup(h) {
                        Some(Symbol::Fun(f)) if self.sig.fun(f).is_predicate() => {
                            let profile = self.sig.fun(f).args.clone();
                            let args = self.args(s, h, &profile, rest)?;
                            Ok(RawFormula::Atom(Formula::pred(f, args, true)))
                        }
                        Some(Symbol::Def(d)) => {
                            let sort = self.sig.def(d).sort;
                            let mut args = self.args(s, h, &[sort], rest)?;
                            Ok(RawFormula::Atom(Formula::defined(d, args.remove(0), true)))
                        }
                        Some(_) => Err(err_at(head, format!("`{h}` is not a predicate"))),
                        None => Err(err_at(head, format!("unknown symbol `{h}`"))),
                    },
                }
            }
        }
    }

    fn decl(&mut self, s: &Sexp, problem: &mut ProblemParts) -> Result<(), ParseError> {
        let items = s
            .list()
            .ok_or_else(|| err_at(s, "expected a declaration"))?;
        let Some(head) = items.first() else {
            return Err(err_at(s, "empty declaration"));
        };
        let kw = self.name(head, "a declaration keyword")?;
        let line = s.pos().0;
        match kw {
            "sort" => {
                let inductive = match items.len() {
                    2 => false,
                    3 if items[2].atom() == Some(":inductive") => true,
                    _ => return Err(err_at(s, "expected `(sort NAME [:inductive])`")),
                };
                let name = self.name(&items[1], "a sort name")?;
                self.sig
                    .add_sort(name, inductive)
                    .map_err(|e| self.sig_err(&items[1], e))?;
            }
            "constructor" | "function" => {
                Self::expect_len(s, items, 4, kw)?;
                let name = self.name(&items[1], "a symbol name")?;
                let args = self.sorts(&items[2])?;
                let result = self.sort(&items[3])?;
                let kind = if kw == "constructor" {
                    FunKind::Constructor
                } else {
                    FunKind::Base
                };
                self.sig
                    .add_fun(name, args, result, kind)
                    .map_err(|e| self.sig_err(&items[1], e))?;
            }
            "parameter" | "defined" => {
                Self::expect_len(s, items, 3, kw)?;
                let name = self.name(&items[1], "a symbol name")?;
                let sort = self.sort(&items[2])?;
                let r = if kw == "parameter" {
                    self.sig.add_param(name, sort).map(|_| ())
                } else {
                    self.sig.add_def(name, sort).map(|_| ())
                };
                r.map_err(|e| self.sig_err(&items[1], e))?;
            }
            "rule" => {
                Self::expect_len(s, items, 3, kw)?;
                let lhs = items[1]
                    .list()
                    .filter(|l| l.len() == 2)
                    .ok_or_else(|| err_at(&items[1], "expected `(DEF (CONSTRUCTOR VAR*))`"))?;
                let dname = self.name(&lhs[0], "a defined symbol")?;
                let def = match self.sig.lookup(dname) {
                    Some(Symbol::Def(d)) => d,
                    _ => return Err(err_at(&lhs[0], format!("`{dname}` is not a defined symbol"))),
                };
                let (cname, var_items): (&str, &[Sexp]) = match &lhs[1] {
                    Sexp::Atom { text, .. } => (text, &[]),
                    Sexp::List { items, .. } if !items.is_empty() => {
                        (self.name(&items[0], "a constructor")?, &items[1..])
                    }
                    other => return Err(err_at(other, "expected a constructor pattern")),
                };
                let ctor = match self.sig.lookup(cname) {
                    Some(Symbol::Fun(f)) if self.sig.fun(f).kind == FunKind::Constructor => f,
                    _ => return Err(err_at(&lhs[1], format!("`{cname}` is not a constructor"))),
                };
                let profile = self.sig.fun(ctor).args.clone();
                if profile.len() != var_items.len() {
                    return Err(err_at(
                        &lhs[1],
                        format!(
                            "`{cname}` expects {} arguments, got {}",
                            profile.len(),
                            var_items.len()
                        ),
                    ));
                }
                let mut formals = Vec::new();
                for (v, &sort) in var_items.iter().zip(&profile) {
                    let name = self.name(v, "a variable")?.to_string();
                    if formals.iter().any(|(n, _)| *n == name) {
                        return Err(err_at(v, format!("variable `{name}` repeated in pattern")));
                    }
                    formals.push((name.clone(), self.sig.add_var(&name, sort)));
                }
                self.scope = formals.clone();
                let body = self.formula(&items[2]);
                self.scope.clear();
                problem.rules.push(RewriteRule {
                    def,
                    ctor,
                    formals: formals.into_iter().map(|(_, v)| v).collect(),
                    body: nnf(&body?),
                    line: Some(line),
                });
            }
            "delta" => {
                Self::expect_len(s, items, 3, kw)?;
                let pair = items[1]
                    .list()
                    .filter(|l| l.len() == 2)
                    .ok_or_else(|| err_at(&items[1], "expected `(F G)`"))?;
                let mut ctors = Vec::new();
                for c in pair {
                    let n = self.name(c, "a constructor")?;
                    match self.sig.lookup(n) {
                        Some(Symbol::Fun(f)) if self.sig.fun(f).kind == FunKind::Constructor => {
                            ctors.push(f)
                        }
                        _ => return Err(err_at(c, format!("`{n}` is not a constructor"))),
                    }
                }
                let (f, g) = (ctors[0], ctors[1]);
                let mut scope = Vec::new();
                let mut mk = |prefix: &str, sorts: &[SortId], sig: &mut Signature| {
                    sorts
                        .iter()
                        .enumerate()
                        .map(|(i, &s)| {
                            let name = format!("{prefix}{}", i + 1);
                            let v = sig.add_var(&name, s);
                            scope.push((name, v));
                            v
                        })
                        .collect::<Vec<_>>()
                };
                let fargs = self.sig.fun(f).args.clone();
                let gargs = self.sig.fun(g).args.clone();
                let xs = mk("x", &fargs, &mut self.sig);
                let ys = mk("y", &gargs, &mut self.sig);
                self.scope = scope;
                let body = self.formula(&items[2]);
                self.scope.clear();
                problem.deltas.push((
                    f,
                    g,
                    DeltaEntry {
                        xs,
                        ys,
                        body: nnf(&body?),
                        line: Some(line),
                    },
                    s.pos(),
                ));
            }
            "assert" => {
                Self::expect_len(s, items, 2, kw)?;
                let f = self.formula(&items[1])?;
                problem.asserts.push((nnf(&f), line));
            }
            other => return Err(err_at(head, format!("unknown declaration `{other}`"))),
        }
        Ok(())
    }
}

#[derive(Default)]
struct ProblemParts {
    rules: Vec<RewriteRule>,
    deltas: Vec<(
        crate::sig::FunId,
        crate::sig::FunId,
        DeltaEntry,
        (usize, usize),
    )>,
    asserts: Vec<(Formula, usize)>,
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let sexps = read_sexps(text)?;
    let mut parser = Parser {
        sig: Signature::new(),
        scope: Vec::new(),
    };
    let mut parts = ProblemParts::default();
    for s in &sexps {
        parser.decl(s, &mut parts)?;
    }
    let mut problem = Problem::new(parser.sig);
    for r in parts.rules {
        problem.rules.add(r);
    }
    for (f, g, entry, (line, col)) in parts.deltas {
        problem
            .delta
            .insert(&problem.sig, f, g, entry)
            .map_err(|e| ParseError {
                line,
                col,
                message: e.to_string(),
            })?;
    }
    for (f, line) in parts.asserts {
        problem.asserts.push(f);
        problem.assert_lines.push(line);
    }
    Ok(problem)
}

fn is_builtin_sort(s: SortId) -> bool {
    s == NAT || s == BOOL
}

/// Sort, function, parameter and defined-symbol declarations, one per line,
/// leaving out the predeclared `nat`, `bool`, `0` and `s`.
pub fn declarations_to_string(sig: &Signature) -> String {
    let mut out = String::new();
    for s in sig.sort_ids().filter(|s| !is_builtin_sort(*s)) {
        out.push_str(&format!("{}\n", sig.sort(s)));
    }
    for f in sig.fun_ids().filter(|f| *f != ZERO && *f != SUCC) {
        let d = sig.fun(f);
        let kw = match d.kind {
            FunKind::Constructor => "constructor",
            FunKind::Base => "function",
        };
        let args: Vec<&str> = d.args.iter().map(|s| sig.sort_name(*s)).collect();
        out.push_str(&format!(
            "({kw} {} ({}) {})\n",
            d.name,
            args.join(" "),
            sig.sort_name(d.result)
        ));
    }
    for p in sig.param_ids() {
        let d = sig.param(p);
        out.push_str(&format!("(parameter {} {})\n", d.name, sig.sort_name(d.sort)));
    }
    for d in sig.def_ids() {
        let dd = sig.def(d);
        out.push_str(&format!("(defined {} {})\n", dd.name, sig.sort_name(dd.sort)));
    }
    out
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = &self.sig;
        f.write_str(&declarations_to_string(sig))?;
        for r in self.rules.rules() {
            let mut pat = String::new();
            crate::print::write_term(sig, &r.pattern(), &mut pat);
            let mut body = String::new();
            write_formula(sig, &r.body, &mut body);
            writeln!(f, "(rule ({} {pat}) {body})", sig.def(r.def).name)?;
        }
        for (g, h, e) in self.delta.entries() {
            writeln!(
                f,
                "(delta ({} {}) {})",
                sig.fun(g).name,
                sig.fun(h).name,
                formula_to_string(sig, &e.body)
            )?;
        }
        for a in &self.asserts {
            writeln!(f, "(assert {})", formula_to_string(sig, a))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "
; the chain schema
(function p (nat) bool)
(parameter A nat)
(defined g nat)
(rule (g 0) (p 0))
(rule (g (s K)) (and (g K) (or (not (p K)) (p (s K)))))
(assert (and (not (p A)) (g A)))
";

    #[test]
    fn parses_the_chain_problem() {
        let p = parse_problem(CHAIN).unwrap();
        let inductive = p.sig.sort_ids().filter(|s| p.sig.is_inductive(*s)).count();
        assert_eq!(inductive, 1);
        assert_eq!(p.sig.constructors_of(NAT).len(), 2);
        let preds = p
            .sig
            .fun_ids()
            .filter(|f| p.sig.fun(*f).is_predicate())
            .count();
        assert_eq!(preds, 1);
        assert_eq!(p.sig.def_ids().count(), 1);
        assert_eq!(p.asserts.len(), 1);
        let r = &p.rules.rules()[1];
        assert_eq!(p.sig.fun(r.ctor).name, "s");
        assert_eq!(p.sig.var(r.formals[0]).name, "K");
        assert_eq!(
            formula_to_string(&p.sig, &r.body),
            "(and (g K) (or (not (p K)) (p (s K))))"
        );
        assert_eq!(r.line, Some(7));
    }

    #[test]
    fn print_then_parse_is_stable() {
        let p = parse_problem(CHAIN).unwrap();
        let printed = p.to_string();
        let again = parse_problem(&printed).unwrap();
        assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn implication_and_quantifiers() {
        let text = "
(sort elt)
(function q (elt) bool)
(parameter E elt)
(assert (=> (forall ((x elt)) (q x)) (q E)))
";
        let p = parse_problem(text).unwrap();
        assert_eq!(
            formula_to_string(&p.sig, &p.asserts[0]),
            "(or (q E) (exists ((x elt)) (not (q x))))"
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_problem("(parameter A nat)\n(assert (p A))").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
        assert!(e.message.contains("unknown symbol `p`"));
        let e = parse_problem("(function p (nat) bool)\n(assert (p))").unwrap_err();
        assert!(e.message.contains("expects 1 arguments"));
        let e = parse_problem("(sort t)\n(sort t)").unwrap_err();
        assert!(e.message.contains("duplicate"));
        let e = parse_problem("(assert true").unwrap_err();
        assert!(e.message.contains("unclosed"));
        let e = parse_problem("(parameter A nat)\n(sort e)\n(parameter B e)\n(assert (= A B))")
            .unwrap_err();
        assert!(e.message.contains("between sorts"));
    }
}
