//! Evaluator for recursion in the type-2 functional E.
//!
//! Codes are prime-power tuples whose head selects one of the computation
//! clauses: initial functions, composition, the universal function, and the
//! functional `E`, which returns one plus the least zero of `p -> {b}(p, m..)`, or
//! 0 when no zero exists. A 0 answer needs a registered
//! [`TotalityCertificate`], because it quantifies over every `p`.

mod builder;
mod code;
mod machine;

pub use builder::{close_over, constant_unary_value, fix, fix_overhead, smn, table, Expr};
pub use code::{
    cases_code, compose, const_code, declared_arity, decode, efun, prim, proj, smn_clause,
    succ_code, univ, Code, DecodeError, Head, PrimOp,
};
pub use machine::{
    CertificateError, Machine, Outcome, StuckReason, TotalityCertificate, TraceEvent, UnknownCause,
    TAIL_SPOT_CHECKS,
};

/// Default fuel for a single evaluation.
pub const DEFAULT_FUEL: u64 = 10_000;

/// `{b}(p, x) = 0` iff `p = 2`, built from the cases clause.
pub fn zero_at(target: u64) -> crate::nat::Nat {
    compose(
        2,
        cases_code(0),
        vec![
            const_code(2, 0u64),
            const_code(2, 1u64),
            proj(2, 0),
            const_code(2, target),
        ],
    )
}
