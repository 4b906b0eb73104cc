//! Subsumption up to renaming: find `ρ` with `ρ(Ψ) ⊆ Φ` and `ρ(N) = N`.

use std::collections::{BTreeMap, HashMap};

use crate::formula::{Formula, NodeLabel, Renaming};
use crate::sig::{ParamId, Signature};
use crate::term::Term;

/// Parameters of a formula in a fixed traversal order; two formulae with
/// the same skeleton yield sequences of the same length.
fn param_sequence(f: &Formula, out: &mut Vec<ParamId>) {
    fn term(t: &Term, out: &mut Vec<ParamId>) {
        match t {
            Term::Param(p) => out.push(*p),
            Term::Var(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
        }
    }
    match f {
        Formula::True | Formula::False => {}
        Formula::Pred { args, .. } => args.iter().for_each(|a| term(a, out)),
        Formula::Eq(t, s) | Formula::Diseq(t, s) => {
            term(t, out);
            term(s, out);
        }
        Formula::Defined { index, .. } => term(index, out),
        Formula::Depth { param, .. } => out.push(*param),
        Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| param_sequence(c, out)),
        Formula::Quant { body, .. } => param_sequence(body, out),
    }
}

struct Matcher<'a> {
    sig: &'a Signature,
    n: Option<ParamId>,
    pattern: Vec<Vec<ParamId>>,
    candidates: Vec<Vec<Vec<ParamId>>>,
    steps: std::cell::Cell<usize>,
}

/// Search nodes explored before a match attempt gives up. Giving up only
/// means a Loop is not taken, so the prover stays sound.
const STEP_BUDGET: usize = 2_000;

impl Matcher<'_> {
    fn admissible(&self, map: &BTreeMap<ParamId, ParamId>, from: &[ParamId], to: &[ParamId]) -> bool {
        let mut local: Vec<(ParamId, ParamId)> = Vec::new();
        for (&a, &b) in from.iter().zip(to) {
            let bound = map
                .get(&a)
                .copied()
                .or_else(|| local.iter().find(|(x, _)| *x == a).map(|(_, y)| *y));
            match bound {
                Some(c) if c != b => return false,
                Some(_) => {}
                None => {
                    let fixed = Some(a) == self.n || Some(b) == self.n;
                    if (fixed && a != b) || self.sig.param(a).sort != self.sig.param(b).sort {
                        return false;
                    }
                    local.push((a, b));
                }
            }
        }
        true
    }

    /// Depth-first search choosing, at every step, the pattern formula
    /// with the fewest candidates compatible with the current map.
    fn search(
        &self,
        remaining: &mut Vec<usize>,
        map: &mut BTreeMap<ParamId, ParamId>,
        found: &mut dyn FnMut(&BTreeMap<ParamId, ParamId>) -> bool,
    ) -> bool {
        if remaining.is_empty() {
            return found(map);
        }
        self.steps.set(self.steps.get() + 1);
        if self.steps.get() > STEP_BUDGET {
            return false;
        }
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (k, &i) in remaining.iter().enumerate() {
            let ok: Vec<usize> = (0..self.candidates[i].len())
                .filter(|&c| self.admissible(map, &self.pattern[i], &self.candidates[i][c]))
                .collect();
            if ok.is_empty() {
                return false;
            }
            if best.as_ref().is_none_or(|(_, b)| ok.len() < b.len()) {
                best = Some((k, ok));
            }
        }
        let (k, ok) = best.unwrap();
        let i = remaining.swap_remove(k);
        for c in ok {
            let mut added = Vec::new();
            for (&a, &b) in self.pattern[i].iter().zip(&self.candidates[i][c]) {
                if let std::collections::btree_map::Entry::Vacant(e) = map.entry(a) {
                    e.insert(b);
                    added.push(a);
                }
            }
            if self.search(remaining, map, found) {
                return true;
            }
            for a in added {
                map.remove(&a);
            }
        }
        remaining.push(i);
        let last = remaining.len() - 1;
        remaining.swap(k, last);
        false
    }
}

/// A renaming `ρ` fixing `n` with `ρ(psi) ⊆ phi`, if one exists. The map
/// may identify parameters; no parameter other than `n` is sent to `n`.
pub fn subsumes(sig: &Signature, phi: &NodeLabel, psi: &NodeLabel, n: Option<ParamId>) -> Option<Renaming> {
    let mut by_skeleton: HashMap<Formula, Vec<&Formula>> = HashMap::new();
    for f in phi {
        by_skeleton.entry(f.skeleton()).or_default().push(f);
    }
    let mut pattern = Vec::new();
    let mut candidates = Vec::new();
    for g in psi {
        let mut seq = Vec::new();
        param_sequence(g, &mut seq);
        let cands: Vec<Vec<ParamId>> = by_skeleton
            .get(&g.skeleton())
            .map(|fs| {
                let mut out = Vec::new();
                for f in fs {
                    let mut s = Vec::new();
                    param_sequence(f, &mut s);
                    if s.len() != seq.len() {
                        continue;
                    }
                    // sides of (dis)equations are stored in canonical order,
                    // which a renaming need not preserve
                    if let Formula::Eq(t, u) | Formula::Diseq(t, u) = f {
                        let mut swapped = Vec::new();
                        param_sequence(&Formula::Eq(u.clone(), t.clone()), &mut swapped);
                        if swapped != s {
                            out.push(swapped);
                        }
                    }
                    out.push(s);
                }
                out
            })
            .unwrap_or_default();
        if cands.is_empty() {
            return None;
        }
        pattern.push(seq);
        candidates.push(cands);
    }
    let matcher = Matcher {
        sig,
        n,
        pattern,
        candidates,
        steps: std::cell::Cell::new(0),
    };
    let mut result = None;
    let mut remaining: Vec<usize> = (0..matcher.pattern.len()).collect();
    matcher.search(&mut remaining, &mut BTreeMap::new(), &mut |map| {
        // canonical ordering inside connectives can defeat positional
        // matching, so every candidate is verified on the whole set
        let r = Renaming::from_map_unchecked(map.clone());
        if psi.iter().all(|g| phi.contains(&r.apply(g))) {
            result = Some(r);
            true
        } else {
            false
        }
    });
    result
}
