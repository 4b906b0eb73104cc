//! Problem vocabulary: sorts, function symbols, parameters, defined symbols
//! and bound variables.
//!
//! Every symbol lives in a table owned by [`Signature`] and is referred to by a
//! small copyable id. The `nat` sort with its constructors `0` and `s` is
//! always present, as is the pseudo-sort `bool` used as the result sort of
//! predicates.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(SortId);
id_type!(FunId);
id_type!(
    /// A parameter: a 0-ary symbol standing for an unknown value of its sort.
    ParamId
);
id_type!(DefId);
id_type!(VarId);

pub const NAT: SortId = SortId(0);
pub const BOOL: SortId = SortId(1);
pub const ZERO: FunId = FunId(0);
pub const SUCC: FunId = FunId(1);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub inductive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunKind {
    Constructor,
    /// Non-constructor function, or a predicate when the result sort is `bool`.
    Base,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub result: SortId,
    pub kind: FunKind,
}

impl FunDecl {
    pub fn is_predicate(&self) -> bool {
        self.result == BOOL
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub sort: SortId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefDecl {
    pub name: String,
    pub sort: SortId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub sort: SortId,
}

/// Kind of symbol bound to a name in the global namespace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    Sort(SortId),
    Fun(FunId),
    Param(ParamId),
    Def(DefId),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("`{0}` cannot be used here: {1}")]
    Misuse(String, &'static str),
}

/// The vocabulary of a problem. Parameters created during proof search
/// (fresh parameters of Explosion, the depth parameter) are appended to the
/// same table, so a prover run works on its own clone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<SortDecl>,
    funs: Vec<FunDecl>,
    params: Vec<ParamDecl>,
    defs: Vec<DefDecl>,
    vars: Vec<VarDecl>,
    names: HashMap<String, Symbol>,
    /// Number of parameters declared by the problem itself.
    declared_params: usize,
    /// The depth parameter, once proof search has introduced it.
    depth_param: Option<ParamId>,
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    pub fn new() -> Self {
        let mut sig = Signature {
            sorts: Vec::new(),
            funs: Vec::new(),
            params: Vec::new(),
            defs: Vec::new(),
            vars: Vec::new(),
            names: HashMap::new(),
            declared_params: 0,
            depth_param: None,
        };
        sig.add_sort("nat", true).unwrap();
        sig.add_sort("bool", false).unwrap();
        sig.add_fun("0", vec![], NAT, FunKind::Constructor).unwrap();
        sig.add_fun("s", vec![NAT], NAT, FunKind::Constructor).unwrap();
        sig
    }

    fn bind(&mut self, name: &str, sym: Symbol) -> Result<(), SignatureError> {
        if self.names.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.names.insert(name.to_string(), sym);
        Ok(())
    }

    pub fn add_sort(&mut self, name: &str, inductive: bool) -> Result<SortId, SignatureError> {
        let id = SortId(self.sorts.len() as u32);
        self.bind(name, Symbol::Sort(id))?;
        self.sorts.push(SortDecl {
            name: name.to_string(),
            inductive,
        });
        Ok(id)
    }

    pub fn add_fun(
        &mut self,
        name: &str,
        args: Vec<SortId>,
        result: SortId,
        kind: FunKind,
    ) -> Result<FunId, SignatureError> {
        let id = FunId(self.funs.len() as u32);
        self.bind(name, Symbol::Fun(id))?;
        self.funs.push(FunDecl {
            name: name.to_string(),
            args,
            result,
            kind,
        });
        Ok(id)
    }

    pub fn add_param(&mut self, name: &str, sort: SortId) -> Result<ParamId, SignatureError> {
        let id = ParamId(self.params.len() as u32);
        self.bind(name, Symbol::Param(id))?;
        self.params.push(ParamDecl {
            name: name.to_string(),
            sort,
        });
        self.declared_params = self.params.len();
        Ok(id)
    }

    /// Creates a parameter whose name is derived from `base` and is not yet
    /// bound. Fresh parameters are not counted as declared.
    pub fn fresh_param(&mut self, base: &str, sort: SortId) -> ParamId {
        let root = base.split('_').next().unwrap_or(base);
        let root = if root.is_empty() { "P" } else { root };
        let mut k = self.params.len();
        let name = loop {
            let candidate = format!("{root}_{k}");
            if !self.names.contains_key(&candidate) {
                break candidate;
            }
            k += 1;
        };
        let id = ParamId(self.params.len() as u32);
        self.names.insert(name.clone(), Symbol::Param(id));
        self.params.push(ParamDecl { name, sort });
        id
    }

    /// Creates a parameter named exactly `preferred` when free, otherwise
    /// `preferred` followed by primes.
    pub fn fresh_named_param(&mut self, preferred: &str, sort: SortId) -> ParamId {
        let mut name = preferred.to_string();
        while self.names.contains_key(&name) {
            name.push('\'');
        }
        let id = ParamId(self.params.len() as u32);
        self.names.insert(name.clone(), Symbol::Param(id));
        self.params.push(ParamDecl { name, sort });
        id
    }

    pub fn add_def(&mut self, name: &str, sort: SortId) -> Result<DefId, SignatureError> {
        let id = DefId(self.defs.len() as u32);
        self.bind(name, Symbol::Def(id))?;
        self.defs.push(DefDecl {
            name: name.to_string(),
            sort,
        });
        Ok(id)
    }

    /// Bound variables live in their own namespace; names may repeat.
    pub fn add_var(&mut self, name: &str, sort: SortId) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarDecl {
            name: name.to_string(),
            sort,
        });
        id
    }

    /// Introduces the depth parameter `N` (primed if the name is taken).
    pub fn new_depth_param(&mut self) -> ParamId {
        let n = self.fresh_named_param("N", NAT);
        self.depth_param = Some(n);
        n
    }

    pub fn depth_param(&self) -> Option<ParamId> {
        self.depth_param
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.names.get(name).copied()
    }

    pub fn sort_by_name(&self, name: &str) -> Result<SortId, SignatureError> {
        match self.lookup(name) {
            Some(Symbol::Sort(s)) => Ok(s),
            _ => Err(SignatureError::UnknownSort(name.to_string())),
        }
    }

    pub fn sort(&self, id: SortId) -> &SortDecl {
        &self.sorts[id.index()]
    }

    pub fn fun(&self, id: FunId) -> &FunDecl {
        &self.funs[id.index()]
    }

    pub fn param(&self, id: ParamId) -> &ParamDecl {
        &self.params[id.index()]
    }

    pub fn def(&self, id: DefId) -> &DefDecl {
        &self.defs[id.index()]
    }

    pub fn var(&self, id: VarId) -> &VarDecl {
        &self.vars[id.index()]
    }

    pub fn is_inductive(&self, sort: SortId) -> bool {
        self.sort(sort).inductive
    }

    pub fn sort_ids(&self) -> impl Iterator<Item = SortId> + '_ {
        (0..self.sorts.len()).map(|i| SortId(i as u32))
    }

    pub fn fun_ids(&self) -> impl Iterator<Item = FunId> + '_ {
        (0..self.funs.len()).map(|i| FunId(i as u32))
    }

    pub fn param_ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        (0..self.params.len()).map(|i| ParamId(i as u32))
    }

    pub fn declared_param_ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        (0..self.declared_params).map(|i| ParamId(i as u32))
    }

    pub fn def_ids(&self) -> impl Iterator<Item = DefId> + '_ {
        (0..self.defs.len()).map(|i| DefId(i as u32))
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Constructors of `sort`, in declaration order.
    pub fn constructors_of(&self, sort: SortId) -> Vec<FunId> {
        self.fun_ids()
            .filter(|&f| {
                let d = self.fun(f);
                d.kind == FunKind::Constructor && d.result == sort
            })
            .collect()
    }

    /// Largest arity among function symbols (the `a` of the weight function).
    pub fn max_arity(&self) -> usize {
        self.funs.iter().map(FunDecl::arity).max().unwrap_or(0)
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sort(id).name
    }
}

impl fmt::Display for SortDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inductive {
            write!(f, "(sort {} :inductive)", self.name)
        } else {
            write!(f, "(sort {})", self.name)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nat_is_predeclared() {
        let sig = Signature::new();
        assert!(sig.is_inductive(NAT));
        assert_eq!(sig.constructors_of(NAT), vec![ZERO, SUCC]);
        assert_eq!(sig.fun(SUCC).args, vec![NAT]);
        assert_eq!(sig.lookup("bool"), Some(Symbol::Sort(BOOL)));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut sig = Signature::new();
        sig.add_param("A", NAT).unwrap();
        assert_eq!(
            sig.add_def("A", NAT),
            Err(SignatureError::Duplicate("A".into()))
        );
    }

    #[test]
    fn fresh_params_avoid_clashes() {
        let mut sig = Signature::new();
        let a = sig.add_param("A", NAT).unwrap();
        let b = sig.fresh_param("A", NAT);
        let c = sig.fresh_param(&sig.param(b).name.clone(), NAT);
        assert_ne!(sig.param(a).name, sig.param(b).name);
        assert!(sig.param(c).name.starts_with("A_"));
        assert_eq!(sig.declared_param_ids().count(), 1);
        let n = sig.fresh_named_param("A", NAT);
        assert_eq!(sig.param(n).name, "A'");
    }
}
