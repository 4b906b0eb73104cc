//! Satisfiability of iterated schemata: formulae with monadic defined symbols
//! whose meaning is given by rewrite rules over inductive sorts.
//!
//! The [`tableau`] prover reduces a schema to finitely many sets of base
//! formulae, closing branches that repeat an earlier state up to renaming.
//! The [`oracle`] grounds parameters up to a depth bound and is used to
//! cross-check verdicts.

pub mod admissibility;
pub mod basesolver;
pub mod equality;
pub mod formula;
pub mod oracle;
pub mod print;
pub mod problem;
pub mod render;
pub mod rewrite;
pub mod sig;
pub mod tableau;
pub mod term;

pub use formula::{Formula, NodeLabel, RawFormula, Renaming};
pub use problem::{parse_problem, Problem};
pub use sig::Signature;
pub use term::Term;
