//! Realizability of set-theoretic formulas by naturals.
//!
//! Formulas are closed by substituting set trees for their free variables,
//! then checked clause by clause against the universe. Checks that would need
//! every natural or every set are answered from samples and come back
//! `Unknown` unless a sample is a counterexample.

mod check;
mod formula;
mod lpo;

pub use check::{Analysis, Realizer, SearchPhase, SearchResult};
pub use formula::{Env, Formula, FormulaError, Term};
pub use lpo::{
    build_disjunction_family, lpo_code, lpo_formula, lpo_transform, run_lpo, tag_code, Branch,
    DisjunctionFamily, LpoError, LpoInstance, LpoReport, PredParseError, PredSpec,
};
