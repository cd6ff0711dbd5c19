//! Type codes, their elements and non-elements, and well-founded set trees.

mod check;
mod sets;
mod types;

pub use check::{lookup, Bounds, Elements, Universe};
pub use sets::{
    gl_code, hf_to_v, identity, mkset, numeral_code, omega, restriction_index, vnat_host, Hf,
    HfParseError,
};
pub use types::{bar, fin, nat_type, pi, pl, sigma, sup, tilde_code, view, TypeView};

use crate::kernel::{Machine, Outcome};
use crate::nat::Nat;

/// `{gl}(a, b)`: the type of realizers of `a = b`.
pub fn gl(machine: &Machine, a: &Nat, b: &Nat, fuel: u64) -> Outcome {
    machine.apply(&gl_code(), &[a.clone(), b.clone()], fuel)
}

/// The `n`-th von Neumann numeral as computed by `{d}(n)`.
pub fn vnat(machine: &Machine, n: u64, fuel: u64) -> Outcome {
    machine.apply(&numeral_code(), &[Nat::from(n)], fuel)
}

/// `{tilde a}(k)`, the `k`-th subtree of a tree code.
pub fn subtree(machine: &Machine, a: &Nat, k: &Nat, fuel: u64) -> Option<Outcome> {
    let e = tilde_code(a)?;
    Some(machine.apply(&e, std::slice::from_ref(k), fuel))
}
