//! Per-branch record of consumed rule instances and earlier layers.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::formula::{Formula, NodeLabel};
use crate::sig::{DefId, FunId, ParamId};

use super::rules::{NodeId, RuleInstance};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Unfold(DefId, ParamId, FunId, Vec<ParamId>, bool),
    Diseq(Formula, Formula, Formula),
}

/// A layer on which N-Explosion was applied, kept for Loop.
#[derive(Clone, Debug)]
pub struct LayerEntry {
    pub node: NodeId,
    pub noneq: NodeLabel,
    pub nexp: usize,
}

/// Copied when a branch splits; only grows along a branch.
#[derive(Clone, Debug, Default)]
pub struct BranchHistory {
    applied: BTreeSet<Key>,
    layers: Arc<Vec<LayerEntry>>,
}

fn key(inst: &RuleInstance) -> Option<Key> {
    match inst {
        RuleInstance::Unfolding {
            def,
            param,
            ctor,
            args,
            positive,
            ..
        } => Some(Key::Unfold(*def, *param, *ctor, args.clone(), *positive)),
        RuleInstance::DiseqDec {
            diseq, left, right, ..
        } => Some(Key::Diseq(diseq.clone(), left.clone(), right.clone())),
        _ => None,
    }
}

impl BranchHistory {
    pub fn was_applied(&self, inst: &RuleInstance) -> bool {
        key(inst).is_some_and(|k| self.applied.contains(&k))
    }

    pub fn record(&mut self, inst: &RuleInstance) {
        if let Some(k) = key(inst) {
            self.applied.insert(k);
        }
    }

    pub fn push_layer(&mut self, entry: LayerEntry) {
        Arc::make_mut(&mut self.layers).push(entry);
    }

    pub fn layers(&self) -> &[LayerEntry] {
        &self.layers
    }
}
