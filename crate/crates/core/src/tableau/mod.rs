//! Proof-tree construction.
//!
//! The root holds the conjecture together with `max(depth(A_i)) = N` over
//! its inductive parameters. Rules are tried in a fixed priority order:
//! closures, then decomposition, then the equality, unfolding and depth
//! rules, then Explosion. A node where none of these apply is a layer; it
//! is closed by Loop when an earlier layer on the branch subsumes it up to
//! renaming, split by N-Explosion when `N` still occurs, and otherwise
//! handed to the base solver.

pub mod history;
pub mod measure;
pub mod rules;
pub mod subsume;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::basesolver::{BaseSolver, SolverResult};
use crate::formula::{expand_max, DepthRel, DepthRhs, Formula, NodeLabel, Renaming};
use crate::print::formula_to_string;
use crate::problem::Problem;
use crate::sig::{ParamId, Signature};
use crate::term::Term;

use history::{BranchHistory, LayerEntry};
pub use measure::{Measure, Weigher};
pub use rules::{NodeId, RuleInstance, RuleTag};
use rules::{applicable_rule, apply_rule, is_base, is_equational, noneq, separable_pairs, RuleContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    /// Not expanded (search stopped first).
    Unexpanded,
    /// Expanded by a rule.
    Inner,
    /// Contains `false`.
    Closed,
    /// Irreducible leaf refuted by the base solver.
    BaseUnsat,
    /// Irreducible leaf accepted by the base solver.
    BaseSat,
}

#[derive(Clone, Debug)]
pub struct ProofNode {
    pub id: NodeId,
    pub label: NodeLabel,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// The rule that produced this node.
    pub rule: RuleTag,
    /// The rule applied to this node, when expanded.
    pub expanded_by: Option<RuleInstance>,
    pub status: NodeStatus,
    pub layer: bool,
    /// N-Explosions between the root and this node.
    pub nexp: usize,
    /// For a node closed by Loop: the subsuming ancestor layer.
    pub loop_target: Option<NodeId>,
}

impl ProofNode {
    pub fn closed(&self) -> bool {
        self.status == NodeStatus::Closed
    }
}

#[derive(Clone, Debug)]
pub struct ProofTree {
    /// The signature extended with every parameter created during search.
    pub sig: Signature,
    pub nodes: Vec<ProofNode>,
    pub depth_param: Option<ParamId>,
}

impl ProofTree {
    pub fn root(&self) -> &ProofNode {
        &self.nodes[0]
    }

    pub fn count(&self, tag: RuleTag) -> usize {
        self.nodes.iter().filter(|n| n.rule == tag).count()
    }

    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat {
        leaf: NodeId,
        model: BTreeMap<String, bool>,
    },
    Unsat,
    ResourceLimit {
        nodes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProveError {
    #[error("backend cannot decide leaf {leaf} {{{}}}: {reason}", formulas.join(", "))]
    Unsupported {
        leaf: NodeId,
        formulas: Vec<String>,
        reason: String,
    },
    #[error("irreducible leaf {leaf} still contains {}", formulas.join(", "))]
    ImpureLeaf { leaf: NodeId, formulas: Vec<String> },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug)]
pub struct ProverConfig {
    pub max_nodes: usize,
    /// Close branches on complementary base literals instead of leaving
    /// them to the backend.
    pub base_closure: bool,
    /// Check layer shape, separation and Loop targets while searching.
    pub check_invariants: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            max_nodes: 500_000,
            base_closure: false,
            check_invariants: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProofRun {
    pub verdict: Verdict,
    pub tree: ProofTree,
    /// Invariant violations found while searching.
    pub violations: Vec<String>,
}

/// Root label for a conjecture; the depth parameter is created in `sig`
/// only when the conjecture has inductive parameters.
pub fn start(phi: &Formula, sig: &mut Signature) -> NodeLabel {
    let inductive: Vec<ParamId> = phi
        .params()
        .into_iter()
        .filter(|p| sig.is_inductive(sig.param(*p).sort))
        .collect();
    let mut label = NodeLabel::new();
    label.insert(phi.clone());
    if !inductive.is_empty() {
        let n = sig.new_depth_param();
        label.insert(expand_max(&inductive, DepthRhs::N, n));
    }
    label
}

/// A label on which only Loop and N-Explosion may apply.
pub fn is_layer(
    sig: &Signature,
    label: &NodeLabel,
    ctx: &RuleContext,
) -> Result<bool, ProveError> {
    Ok(!label.is_closed() && applicable_rule(ctx, sig, label, &BranchHistory::default())?.is_none())
}

/// A renaming showing that some earlier layer subsumes `label`.
pub fn find_loop<'a>(
    sig: &Signature,
    label: &NodeLabel,
    ancestors: impl IntoIterator<Item = &'a NodeLabel>,
    n: Option<ParamId>,
) -> Option<(usize, Renaming)> {
    let phi = noneq(sig, label);
    ancestors
        .into_iter()
        .enumerate()
        .find_map(|(i, psi)| subsume::subsumes(sig, &phi, psi, n).map(|r| (i, r)))
}

fn layer_shape_violations(sig: &Signature, label: &NodeLabel, n: Option<ParamId>) -> Vec<String> {
    let mut out = Vec::new();
    for f in label {
        let ok = match f {
            Formula::Depth { rel, rhs, .. } => {
                matches!(rel, DepthRel::Eq | DepthRel::Lt) && *rhs == DepthRhs::N
            }
            Formula::Defined {
                index: Term::Param(_),
                ..
            } => true,
            Formula::Diseq(Term::Param(_), Term::Param(_)) => true,
            Formula::Eq(..) if is_equational(sig, f) => true,
            g => is_base(sig, g),
        };
        if !ok {
            out.push(format!("layer formula `{}` has an unexpected shape", formula_to_string(sig, f)));
        }
    }
    for (a, b) in separable_pairs(sig, label, n) {
        out.push(format!(
            "layer leaves `{}` and `{}` unseparated",
            sig.param(a).name,
            sig.param(b).name
        ));
    }
    out
}

/// Whether `N` occurs, as a term or as a depth right-hand side.
pub fn mentions_depth_param(label: &NodeLabel, n: ParamId) -> bool {
    label.iter().any(|f| {
        let mut found = f.contains_param(n);
        f.for_each_subformula(&mut |g| {
            if let Formula::Depth { rhs, .. } = g {
                found |= rhs.mentions_n();
            }
        });
        found
    })
}

struct Search<'a> {
    ctx: RuleContext<'a>,
    sig: Signature,
    nodes: Vec<ProofNode>,
    config: &'a ProverConfig,
    violations: Vec<String>,
}

impl Search<'_> {
    fn add_child(&mut self, parent: NodeId, label: NodeLabel, rule: RuleTag, nexp: usize) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(ProofNode {
            id,
            label,
            parent: Some(parent),
            children: Vec::new(),
            rule,
            expanded_by: None,
            status: NodeStatus::Unexpanded,
            layer: false,
            nexp,
            loop_target: None,
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn printed(&self, fs: impl IntoIterator<Item = Formula>) -> Vec<String> {
        fs.into_iter().map(|f| formula_to_string(&self.sig, &f)).collect()
    }

    /// Closes `id` by Loop when an ancestor layer subsumes it; returns the
    /// closed child.
    fn try_loop(&mut self, id: NodeId, label: &NodeLabel, history: &BranchHistory) -> Option<NodeId> {
        let nexp = self.nodes[id].nexp;
        let ancestors: Vec<&NodeLabel> = history.layers().iter().map(|e| &e.noneq).collect();
        let (i, renaming) = find_loop(&self.sig, label, ancestors, self.ctx.n)?;
        let target = history.layers()[i].node;
        if self.config.check_invariants && self.nodes[target].nexp >= nexp {
            self.violations
                .push(format!("node {id}: Loop target {target} has no smaller N-Explosion count"));
        }
        self.nodes[id].expanded_by = Some(RuleInstance::Loop { target, renaming });
        self.nodes[id].status = NodeStatus::Inner;
        let mut closed = NodeLabel::new();
        closed.insert(Formula::False);
        let c = self.add_child(id, closed, RuleTag::Loop, nexp);
        self.nodes[c].loop_target = Some(target);
        Some(c)
    }

    /// Expands one node; returns the children to explore with their
    /// histories, or a verdict when a satisfiable leaf is found.
    fn expand(
        &mut self,
        id: NodeId,
        mut history: BranchHistory,
        solver: &dyn BaseSolver,
    ) -> Result<(Vec<(NodeId, BranchHistory)>, Option<Verdict>), ProveError> {
        let label = self.nodes[id].label.clone();
        let nexp = self.nodes[id].nexp;
        if label.is_closed() {
            self.nodes[id].status = NodeStatus::Closed;
            return Ok((Vec::new(), None));
        }
        let rule = applicable_rule(&self.ctx, &self.sig, &label, &history)?;
        // Before branching on parameters, try closing against an earlier
        // layer; only the subsuming node has to be a layer.
        if matches!(
            rule,
            Some(RuleInstance::Separation { .. } | RuleInstance::Explosion { .. })
        ) {
            if let Some(c) = self.try_loop(id, &label, &history) {
                return Ok((vec![(c, history)], None));
            }
        }
        if let Some(inst) = rule {
            history.record(&inst);
            let children = apply_rule(&self.ctx, &mut self.sig, &label, &inst)?;
            let tag = inst.tag();
            self.nodes[id].expanded_by = Some(inst);
            self.nodes[id].status = NodeStatus::Inner;
            let ids: Vec<NodeId> = children
                .into_iter()
                .map(|c| self.add_child(id, c, tag, nexp))
                .collect();
            return Ok((ids.into_iter().map(|c| (c, history.clone())).collect(), None));
        }
        // a layer
        self.nodes[id].layer = true;
        let n = self.ctx.n;
        if self.config.check_invariants {
            for v in layer_shape_violations(&self.sig, &label, n) {
                self.violations.push(format!("node {id}: {v}"));
            }
        }
        if let Some(c) = self.try_loop(id, &label, &history) {
            return Ok((vec![(c, history)], None));
        }
        if n.is_some_and(|n| mentions_depth_param(&label, n)) {
            history.push_layer(LayerEntry {
                node: id,
                noneq: noneq(&self.sig, &label),
                nexp,
            });
            let inst = RuleInstance::NExplosion;
            let children = apply_rule(&self.ctx, &mut self.sig, &label, &inst)?;
            self.nodes[id].expanded_by = Some(inst);
            self.nodes[id].status = NodeStatus::Inner;
            let ids: Vec<NodeId> = children
                .into_iter()
                .map(|c| self.add_child(id, c, RuleTag::NExplosion, nexp + 1))
                .collect();
            return Ok((ids.into_iter().map(|c| (c, history.clone())).collect(), None));
        }
        // irreducible leaf
        let rest = noneq(&self.sig, &label);
        let impure: Vec<Formula> = rest
            .iter()
            .filter(|f| f.has_defined() || f.has_depth())
            .cloned()
            .collect();
        if !impure.is_empty() {
            return Err(ProveError::ImpureLeaf {
                leaf: id,
                formulas: self.printed(impure),
            });
        }
        let formulas: Vec<Formula> = rest.iter().cloned().collect();
        match solver.solve(&self.sig, &formulas) {
            SolverResult::Sat(model) => {
                self.nodes[id].status = NodeStatus::BaseSat;
                Ok((Vec::new(), Some(Verdict::Sat { leaf: id, model })))
            }
            SolverResult::Unsat => {
                self.nodes[id].status = NodeStatus::BaseUnsat;
                Ok((Vec::new(), None))
            }
            SolverResult::Unsupported(reason) => Err(ProveError::Unsupported {
                leaf: id,
                formulas: self.printed(formulas),
                reason,
            }),
        }
    }
}

/// Builds the proof tree for the conjunction of the problem's assertions.
/// Search is depth-first and stops at the first satisfiable leaf.
pub fn prove(
    problem: &Problem,
    solver: &dyn BaseSolver,
    config: &ProverConfig,
) -> Result<ProofRun, ProveError> {
    let mut sig = problem.sig.clone();
    let root = start(&problem.conjecture(), &mut sig);
    let n = sig.depth_param();
    let mut search = Search {
        ctx: RuleContext {
            rules: &problem.rules,
            delta: &problem.delta,
            n,
            base_closure: config.base_closure,
        },
        sig,
        nodes: vec![ProofNode {
            id: 0,
            label: root,
            parent: None,
            children: Vec::new(),
            rule: RuleTag::Start,
            expanded_by: None,
            status: NodeStatus::Unexpanded,
            layer: false,
            nexp: 0,
            loop_target: None,
        }],
        config,
        violations: Vec::new(),
    };
    let mut stack = vec![(0usize, BranchHistory::default())];
    let mut verdict = Verdict::Unsat;
    while let Some((id, history)) = stack.pop() {
        if search.nodes.len() > config.max_nodes {
            verdict = Verdict::ResourceLimit {
                nodes: search.nodes.len(),
            };
            break;
        }
        let (children, found) = search.expand(id, history, solver)?;
        if let Some(v) = found {
            verdict = v;
            break;
        }
        stack.extend(children.into_iter().rev());
    }
    Ok(ProofRun {
        verdict,
        tree: ProofTree {
            sig: search.sig,
            nodes: search.nodes,
            depth_param: n,
        },
        violations: search.violations,
    })
}

/// A rule application after which no node reachable by decomposition and
/// closure steps has a smaller measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureViolation {
    pub parent: NodeId,
    pub child: NodeId,
    pub rule: RuleTag,
}

/// Checks that every rule other than N-Explosion, Unfolding and Loop
/// decreases the measure once the forced decomposition steps are done.
pub fn check_measure(run: &ProofRun, problem: &Problem, base_closure: bool) -> Result<Vec<MeasureViolation>, ProveError> {
    let tree = &run.tree;
    let ctx = RuleContext {
        rules: &problem.rules,
        delta: &problem.delta,
        n: tree.depth_param,
        base_closure,
    };
    let weigher = Weigher::new(&tree.sig, &ctx);
    let mut cache: Vec<Option<Measure>> = vec![None; tree.nodes.len()];
    let mut measure_of = |id: NodeId| -> Result<Measure, ProveError> {
        if cache[id].is_none() {
            cache[id] = Some(weigher.measure(&tree.nodes[id].label)?);
        }
        Ok(cache[id].clone().unwrap())
    };
    let mut out = Vec::new();
    for beta in &tree.nodes {
        for &alpha in &beta.children {
            let tag = tree.nodes[alpha].rule;
            if matches!(tag, RuleTag::NExplosion | RuleTag::Unfolding | RuleTag::Loop) {
                continue;
            }
            let before = measure_of(beta.id)?;
            let mut queue = VecDeque::from([alpha]);
            let mut decreased = false;
            let mut inconclusive = false;
            while let Some(x) = queue.pop_front() {
                let node = &tree.nodes[x];
                if node.closed() || measure_of(x)? < before {
                    decreased = true;
                    break;
                }
                if node.status == NodeStatus::Unexpanded {
                    inconclusive = true;
                }
                for &c in &node.children {
                    if tree.nodes[c].rule.is_decomposition_or_closure() {
                        queue.push_back(c);
                    }
                }
            }
            if !decreased && !inconclusive {
                out.push(MeasureViolation {
                    parent: beta.id,
                    child: alpha,
                    rule: tag,
                });
            }
        }
    }
    Ok(out)
}
