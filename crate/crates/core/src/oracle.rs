//! Bounded-instantiation oracle.
//!
//! Every inductive parameter of the conjecture is replaced by a ground
//! constructor term of bounded depth, defined atoms are unfolded away and
//! the resulting base formula is decided by the built-in solver. Slots of a
//! non-inductive sort are filled with one fresh constant per constructor
//! argument position; distinct constants denote distinct values. The oracle
//! is one-sided: a satisfiable grounding proves satisfiability, while the
//! absence of one says nothing about larger depths.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::basesolver::{BaseSolver, Builtin, SolverResult};
use crate::equality::DeltaTable;
use crate::formula::Formula;
use crate::print::term_to_string;
use crate::problem::Problem;
use crate::rewrite::{RewriteError, RewriteSystem};
use crate::sig::{FunId, FunKind, ParamId, Signature, SortId};
use crate::tableau::{ProofRun, Verdict};
use crate::term::Term;

/// Ground terms for the inductive parameters of a conjecture.
pub type GroundAssignment = BTreeMap<ParamId, Term>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("sort `{0}` is not inductive")]
    NotInductive(String),
    #[error("parameter `{0}` has no ground value")]
    Uncovered(String),
    #[error("grounding budget of {budget} exhausted after {tried} groundings")]
    Budget { budget: usize, tried: usize },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("built-in backend cannot decide a grounding: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    /// A satisfiable grounding; `depth` is the largest term depth used.
    SatAtDepth {
        assignment: GroundAssignment,
        depth: usize,
    },
    /// No grounding with terms of depth at most `depth` is satisfiable.
    UnsatUpTo { depth: usize, groundings: usize },
}

/// Depth of a ground constructor term: constants have depth 1 and
/// non-inductive values count 0.
pub fn term_depth(sig: &Signature, t: &Term) -> usize {
    match t {
        Term::App(_, args) => {
            1 + args
                .iter()
                .filter(|a| sig.is_inductive(a.sort(sig)))
                .map(|a| term_depth(sig, a))
                .max()
                .unwrap_or(0)
        }
        _ => 0,
    }
}

/// Replaces the parameters of `f` by their ground values, unfolds every
/// defined atom and evaluates the resulting equations between inductive
/// terms.
pub fn ground_unfold(
    sig: &Signature,
    rules: &RewriteSystem,
    delta: &DeltaTable,
    f: &Formula,
    assignment: &GroundAssignment,
) -> Result<Formula, OracleError> {
    for p in f.params() {
        if sig.is_inductive(sig.param(p).sort) && !assignment.contains_key(&p) {
            return Err(OracleError::Uncovered(sig.param(p).name.clone()));
        }
    }
    let mut g = f.clone();
    for (p, t) in assignment {
        g = g
            .substitute_param(sig, *p, t, None)
            .map_err(|e| OracleError::Unsupported(e.to_string()))?;
    }
    let g = rules.ground_unfold(sig, &g)?;
    Ok(evaluate_equations(sig, delta, &g))
}

fn evaluate_equations(sig: &Signature, delta: &DeltaTable, f: &Formula) -> Formula {
    match f {
        Formula::Eq(t, s) | Formula::Diseq(t, s)
            if sig.is_inductive(t.sort(sig))
                && t.is_ground_constructor(sig)
                && s.is_ground_constructor(sig) =>
        {
            let equal = delta.ground_equal(sig, t, s);
            if equal == matches!(f, Formula::Eq(..)) {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::And(cs) => Formula::and(cs.iter().map(|c| evaluate_equations(sig, delta, c))),
        Formula::Or(cs) => Formula::or(cs.iter().map(|c| evaluate_equations(sig, delta, c))),
        Formula::Quant { q, var, body } => {
            Formula::quant(*q, *var, evaluate_equations(sig, delta, body))
        }
        other => other.clone(),
    }
}

pub fn format_assignment(sig: &Signature, a: &GroundAssignment) -> String {
    a.iter()
        .map(|(p, t)| format!("{} = {}", sig.param(*p).name, term_to_string(sig, t)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub struct Oracle<'a> {
    problem: &'a Problem,
    /// The problem signature extended with the slot constants.
    sig: Signature,
    slots: HashMap<(FunId, usize), ParamId>,
    pub budget: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        let mut sig = problem.sig.clone();
        let mut slots = HashMap::new();
        let ctors: Vec<FunId> = sig
            .fun_ids()
            .filter(|f| sig.fun(*f).kind == FunKind::Constructor)
            .collect();
        for f in ctors {
            let args = sig.fun(f).args.clone();
            for (i, s) in args.into_iter().enumerate() {
                if !sig.is_inductive(s) {
                    let name = sig.sort_name(s).to_string();
                    slots.insert((f, i), sig.fresh_param(&name, s));
                }
            }
        }
        Oracle {
            problem,
            sig,
            slots,
            budget: 2_000_000,
        }
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    /// All constructor terms of `sort` of depth at most `max_depth`,
    /// ordered by depth and then by term order.
    pub fn enumerate_constructor_terms(&self, sort: SortId, max_depth: usize) -> Result<Vec<Term>, OracleError> {
        if !self.sig.is_inductive(sort) {
            return Err(OracleError::NotInductive(self.sig.sort_name(sort).to_string()));
        }
        let by_sort = self.terms_up_to(max_depth);
        let mut out = by_sort.get(&sort).cloned().unwrap_or_default();
        out.sort_by_cached_key(|t| (term_depth(&self.sig, t), t.clone()));
        Ok(out)
    }

    /// Terms of depth at most `k` for every inductive sort.
    fn terms_up_to(&self, k: usize) -> HashMap<SortId, Vec<Term>> {
        let sig = &self.sig;
        let inductive: Vec<SortId> = sig.sort_ids().filter(|s| sig.is_inductive(*s)).collect();
        let mut level: HashMap<SortId, Vec<Term>> = inductive.iter().map(|s| (*s, Vec::new())).collect();
        for _ in 0..k {
            let mut next: HashMap<SortId, Vec<Term>> = HashMap::new();
            for &s in &inductive {
                let mut terms = Vec::new();
                for f in sig.constructors_of(s) {
                    let slots = &sig.fun(f).args;
                    let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
                    for (i, slot) in slots.iter().enumerate() {
                        let choices: Vec<Term> = if sig.is_inductive(*slot) {
                            level[slot].clone()
                        } else {
                            vec![Term::Param(self.slots[&(f, i)])]
                        };
                        combos = combos
                            .into_iter()
                            .flat_map(|c| {
                                choices.iter().map(move |t| {
                                    let mut c = c.clone();
                                    c.push(t.clone());
                                    c
                                })
                            })
                            .collect();
                    }
                    terms.extend(combos.into_iter().map(|args| Term::app(f, args)));
                }
                next.insert(s, terms);
            }
            level = next;
        }
        level
    }

    /// Inductive parameters of the conjecture, in id order.
    pub fn parameters(&self) -> Vec<ParamId> {
        self.problem
            .conjecture()
            .params()
            .into_iter()
            .filter(|p| self.sig.is_inductive(self.sig.param(*p).sort))
            .collect()
    }

    /// Decides one grounding of the conjecture.
    pub fn evaluate(&self, assignment: &GroundAssignment) -> Result<bool, OracleError> {
        let f = ground_unfold(
            &self.sig,
            &self.problem.rules,
            &self.problem.delta,
            &self.problem.conjecture(),
            assignment,
        )?;
        match Builtin.solve(&self.sig, &[f]) {
            SolverResult::Sat(_) => Ok(true),
            SolverResult::Unsat => Ok(false),
            SolverResult::Unsupported(m) => Err(OracleError::Unsupported(m)),
        }
    }

    /// Groundings are visited by total depth, then by the vector of
    /// per-parameter depths, then by term order.
    pub fn check(&self, max_depth: usize) -> Result<OracleResult, OracleError> {
        let params = self.parameters();
        let mut buckets: Vec<BTreeMap<usize, Vec<Term>>> = Vec::new();
        for p in &params {
            let mut b: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
            for t in self.enumerate_constructor_terms(self.sig.param(*p).sort, max_depth)? {
                b.entry(term_depth(&self.sig, &t)).or_default().push(t);
            }
            buckets.push(b);
        }
        if params.is_empty() {
            let sat = self.evaluate(&GroundAssignment::new())?;
            return Ok(if sat {
                OracleResult::SatAtDepth {
                    assignment: GroundAssignment::new(),
                    depth: 0,
                }
            } else {
                OracleResult::UnsatUpTo {
                    depth: max_depth,
                    groundings: 1,
                }
            });
        }
        let mut tried = 0usize;
        let k = params.len();
        for total in k..=k * max_depth {
            for depths in depth_vectors(k, total, max_depth) {
                let lists: Vec<&Vec<Term>> = match depths
                    .iter()
                    .zip(&buckets)
                    .map(|(d, b)| b.get(d))
                    .collect::<Option<Vec<_>>>()
                {
                    Some(l) => l,
                    None => continue,
                };
                let mut idx = vec![0usize; k];
                'product: loop {
                    tried += 1;
                    if tried > self.budget {
                        return Err(OracleError::Budget {
                            budget: self.budget,
                            tried: tried - 1,
                        });
                    }
                    let assignment: GroundAssignment = params
                        .iter()
                        .zip(&idx)
                        .zip(&lists)
                        .map(|((p, i), l)| (*p, l[*i].clone()))
                        .collect();
                    if self.evaluate(&assignment)? {
                        return Ok(OracleResult::SatAtDepth {
                            depth: *depths.iter().max().unwrap(),
                            assignment,
                        });
                    }
                    // odometer over the product, last position fastest
                    for pos in (0..k).rev() {
                        idx[pos] += 1;
                        if idx[pos] < lists[pos].len() {
                            continue 'product;
                        }
                        idx[pos] = 0;
                    }
                    break;
                }
            }
        }
        Ok(OracleResult::UnsatUpTo {
            depth: max_depth,
            groundings: tried,
        })
    }
}

/// Vectors of `k` depths in `1..=max` summing to `total`, in lexicographic
/// order.
fn depth_vectors(k: usize, total: usize, max: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, total: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for d in 1..=max.min(total) {
            if total - d < k - 1 || total - d > (k - 1) * max {
                continue;
            }
            prefix.push(d);
            go(k - 1, total - d, max, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(k, total, max, &mut Vec::new(), &mut out);
    out
}

/// Ground values read off the equations of a satisfiable leaf: `A = f(B)`
/// maps `A` to `f` applied to the values of `B`, and a solved `A = B` gives
/// `A` the value of `B`. Non-inductive parameters denote themselves.
/// `None` when some inductive parameter of the conjecture has no value.
pub fn witness(run: &ProofRun, problem: &Problem) -> Option<GroundAssignment> {
    let Verdict::Sat { leaf, .. } = run.verdict else {
        return None;
    };
    let sig = &run.tree.sig;
    let mut eqs: BTreeMap<ParamId, &Term> = BTreeMap::new();
    for f in &run.tree.nodes[leaf].label {
        if let Formula::Eq(Term::Param(a), t) = f {
            if t.is_flat_constructor(sig) || matches!(t, Term::Param(_)) {
                eqs.entry(*a).or_insert(t);
            }
        }
    }
    fn resolve(
        sig: &Signature,
        eqs: &BTreeMap<ParamId, &Term>,
        p: ParamId,
        visiting: &mut Vec<ParamId>,
    ) -> Option<Term> {
        if !sig.is_inductive(sig.param(p).sort) {
            return Some(Term::Param(p));
        }
        if visiting.contains(&p) {
            return None;
        }
        visiting.push(p);
        let out = match eqs.get(&p)? {
            Term::Param(q) => resolve(sig, eqs, *q, visiting),
            Term::App(f, args) => Some(Term::app(
                *f,
                args.iter()
                    .map(|a| resolve(sig, eqs, a.as_param()?, visiting))
                    .collect::<Option<Vec<_>>>()?,
            )),
            Term::Var(_) => None,
        };
        visiting.pop();
        out
    }
    let conj = problem.conjecture();
    conj.params()
        .into_iter()
        .filter(|p| sig.is_inductive(sig.param(*p).sort))
        .map(|p| resolve(sig, &eqs, p, &mut Vec::new()).map(|t| (p, t)))
        .collect()
}

/// Whether a witness satisfies the conjecture under the built-in reading.
pub fn witness_holds(run: &ProofRun, problem: &Problem, w: &GroundAssignment) -> Result<bool, OracleError> {
    let sig = &run.tree.sig;
    let f = ground_unfold(sig, &problem.rules, &problem.delta, &problem.conjecture(), w)?;
    match Builtin.solve(sig, &[f]) {
        SolverResult::Sat(_) => Ok(true),
        SolverResult::Unsat => Ok(false),
        SolverResult::Unsupported(m) => Err(OracleError::Unsupported(m)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Contradiction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffReport {
    pub status: Consistency,
    pub summary: String,
    /// A grounding refuting the prover, when one is known.
    pub counterexample: Option<GroundAssignment>,
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Consistency::Consistent => "CONSISTENT",
            Consistency::Contradiction => "CONTRADICTION",
        };
        write!(f, "{tag}: {}", self.summary)
    }
}

/// Prover evidence as seen by the differential check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProverEvidence {
    Unsat,
    /// `witness` is the ground model read off the satisfiable leaf, if any,
    /// and `holds` whether it was confirmed by ground evaluation.
    Sat {
        witness: Option<GroundAssignment>,
        holds: Option<bool>,
        depth: Option<usize>,
    },
    Unknown,
}

pub fn evidence(run: &ProofRun, problem: &Problem) -> Result<ProverEvidence, OracleError> {
    Ok(match run.verdict {
        Verdict::Unsat => ProverEvidence::Unsat,
        Verdict::ResourceLimit { .. } => ProverEvidence::Unknown,
        Verdict::Sat { .. } => {
            let w = witness(run, problem);
            let (holds, depth) = match &w {
                Some(w) => (
                    Some(witness_holds(run, problem, w)?),
                    Some(
                        w.values()
                            .map(|t| term_depth(&run.tree.sig, t))
                            .max()
                            .unwrap_or(0),
                    ),
                ),
                None => (None, None),
            };
            ProverEvidence::Sat {
                witness: w,
                holds,
                depth,
            }
        }
    })
}

/// Compares the prover's verdict with the oracle on the two implications
/// the oracle can check.
pub fn differential_check(prover: &ProverEvidence, oracle: &OracleResult, sig: &Signature) -> DiffReport {
    use Consistency::*;
    let (status, summary, counterexample) = match (prover, oracle) {
        (ProverEvidence::Unsat, OracleResult::SatAtDepth { assignment, depth }) => (
            Contradiction,
            format!(
                "prover says unsat but the grounding {} of depth {depth} is satisfiable",
                format_assignment(sig, assignment)
            ),
            Some(assignment.clone()),
        ),
        (ProverEvidence::Unsat, OracleResult::UnsatUpTo { depth, groundings }) => (
            Consistent,
            format!("unsat; no model among {groundings} groundings up to depth {depth}"),
            None,
        ),
        (
            ProverEvidence::Sat {
                holds: Some(false), ..
            },
            _,
        ) => (
            Contradiction,
            "prover says sat but its witness falsifies the conjecture".to_string(),
            None,
        ),
        (
            ProverEvidence::Sat {
                depth: Some(d), ..
            },
            OracleResult::UnsatUpTo { depth, .. },
        ) if d <= depth => (
            Contradiction,
            format!("prover witness has depth {d} but no grounding up to depth {depth} is satisfiable"),
            None,
        ),
        (ProverEvidence::Sat { depth, .. }, OracleResult::SatAtDepth { assignment, depth: od }) => (
            Consistent,
            format!(
                "sat; oracle model {} at depth {od}{}",
                format_assignment(sig, assignment),
                depth.map(|d| format!(", prover witness depth {d}")).unwrap_or_default()
            ),
            None,
        ),
        (ProverEvidence::Sat { depth, .. }, OracleResult::UnsatUpTo { depth: k, .. }) => (
            Consistent,
            format!(
                "sat beyond the bound: prover witness depth {}, oracle bound {k}",
                depth.map(|d| d.to_string()).unwrap_or_else(|| "unknown".into())
            ),
            None,
        ),
        (ProverEvidence::Unknown, _) => (
            Consistent,
            "prover gave no verdict; nothing to compare".to_string(),
            None,
        ),
    };
    DiffReport {
        status,
        summary,
        counterexample,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_problem;
    use crate::print::formula_to_string;
    use crate::sig::NAT;

    const CHAIN: &str = "
(function p (nat) bool)
(parameter A nat)
(defined g nat)
(rule (g 0) (p 0))
(rule (g (s K)) (and (g K) (or (not (p K)) (p (s K)))))
(assert (and (not (p A)) (g A)))
";

    fn nat(k: usize) -> Term {
        (0..k).fold(Term::constant(crate::sig::ZERO), |t, _| {
            Term::app(crate::sig::SUCC, vec![t])
        })
    }

    #[test]
    fn nat_terms() {
        let p = parse_problem(CHAIN).unwrap();
        let o = Oracle::new(&p);
        assert_eq!(o.enumerate_constructor_terms(NAT, 1).unwrap(), vec![nat(0)]);
        assert_eq!(
            o.enumerate_constructor_terms(NAT, 2).unwrap(),
            vec![nat(0), nat(1)]
        );
    }

    #[test]
    fn chain_grounding() {
        let p = parse_problem(CHAIN).unwrap();
        let a = match p.sig.lookup("A") {
            Some(crate::sig::Symbol::Param(a)) => a,
            _ => unreachable!(),
        };
        let g: GroundAssignment = [(a, nat(1))].into_iter().collect();
        let f = ground_unfold(&p.sig, &p.rules, &p.delta, &p.conjecture(), &g).unwrap();
        assert_eq!(
            formula_to_string(&p.sig, &f),
            "(and (p 0) (not (p (s 0))) (or (not (p 0)) (p (s 0))))"
        );
        assert_eq!(
            Oracle::new(&p).check(5).unwrap(),
            OracleResult::UnsatUpTo {
                depth: 5,
                groundings: 5
            }
        );
    }

    #[test]
    fn depth_vector_order() {
        assert_eq!(depth_vectors(2, 3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert!(depth_vectors(2, 5, 2).is_empty());
    }

    #[test]
    fn unsat_against_a_model_is_a_contradiction() {
        let sig = Signature::new();
        let model = OracleResult::SatAtDepth {
            assignment: GroundAssignment::new(),
            depth: 1,
        };
        let r = differential_check(&ProverEvidence::Unsat, &model, &sig);
        assert_eq!(r.status, Consistency::Contradiction);
        let none = OracleResult::UnsatUpTo {
            depth: 4,
            groundings: 4,
        };
        assert_eq!(
            differential_check(&ProverEvidence::Unsat, &none, &sig).status,
            Consistency::Consistent
        );
    }
}
