//! Random codes and arguments.

use erec_core::kernel::{
    cases_code, compose, const_code, efun, fix, prim, proj, smn, succ_code, univ, zero_at, PrimOp,
};
use erec_core::Nat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn small(r: &mut Rand) -> Nat {
    match r.gen_range(0..10) {
        0 => Nat::pair(
            &Nat::from(r.gen_range(0..4u64)),
            &Nat::from(r.gen_range(0..4u64)),
        ),
        _ => Nat::from(r.gen_range(0..12u64)),
    }
}

pub fn args(r: &mut Rand, n: usize) -> Vec<Nat> {
    (0..n).map(|_| small(r)).collect()
}

/// A code meant to take `arity` arguments, occasionally malformed.
pub fn code(r: &mut Rand, arity: usize, depth: u32) -> Nat {
    let leaf = depth == 0;
    let pick = if leaf {
        r.gen_range(0..5)
    } else {
        r.gen_range(0..14)
    };
    match pick {
        0 => const_code(arity, small(r)),
        1 if arity > 0 => proj(arity, r.gen_range(0..arity)),
        2 if arity > 0 => succ_code(arity, r.gen_range(0..arity)),
        3 => match arity {
            1 => prim([PrimOp::Fst, PrimOp::Snd, PrimOp::Pred][r.gen_range(0..3)]),
            2 => prim(PrimOp::Pair),
            _ => const_code(arity, 0u64),
        },
        4 if r.gen_bool(0.05) => Nat::from(r.gen_range(0..300u64)),
        4 if arity >= 4 => cases_code(arity - 4),
        4 | 1 | 2 => const_code(arity, 1u64),
        5..=7 => {
            let k = r.gen_range(1..=3);
            let outer = code(r, k, depth - 1);
            let inner = (0..k).map(|_| code(r, arity, depth - 1)).collect();
            compose(arity, outer, inner)
        }
        8 if arity >= 2 => {
            let ifeq = cases_code(arity - 2);
            let mut inner = vec![code(r, arity, depth - 1), code(r, arity, depth - 1)];
            inner.extend((0..arity).map(|i| proj(arity, i)));
            compose(arity, ifeq, inner)
        }
        8 | 9 => {
            // {c}(m0) through the universal function
            let c = code(r, 1, depth - 1);
            let first = if arity > 0 {
                proj(arity, 0)
            } else {
                const_code(0, 0u64)
            };
            compose(arity, univ(2), vec![const_code(arity, c), first])
        }
        10 if arity == 1 => efun(1, zero_at(r.gen_range(0..6))),
        10 | 11 => efun(arity, code(r, arity + 1, depth - 1)),
        12 => smn(&code(r, arity + 1, depth - 1), &small(r)),
        _ => fix(&code(r, arity + 1, depth - 1)),
    }
}
