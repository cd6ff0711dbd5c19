//! Least fixed points of monotone operators on finite carriers.
//!
//! Atoms are indices `0..carrier()`. [`iterate`] runs the stages
//! `X0 = {}`, `X(i+1) = step(Xi)` until they stop growing.

mod comp;
mod types;

pub use comp::{CompCarrier, CompComparison, CompOperator, Query};
pub use types::{TypeAtom, TypeCarrier, TypeComparison, TypeOperator};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A positive inductive definition over a finite set of atoms.
pub trait MonotoneOperator {
    /// Number of atoms.
    fn carrier(&self) -> usize;

    /// Atoms derivable by one rule application from premises in `x`.
    fn step(&self, x: &FixedBitSet) -> FixedBitSet;

    fn describe(&self, atom: usize) -> String {
        atom.to_string()
    }
}

/// Operator given by a closure.
pub struct FnOperator<F> {
    bound: usize,
    f: F,
}

impl<F: Fn(&FixedBitSet) -> FixedBitSet> FnOperator<F> {
    pub fn new(bound: usize, f: F) -> Self {
        FnOperator { bound, f }
    }
}

impl<F: Fn(&FixedBitSet) -> FixedBitSet> MonotoneOperator for FnOperator<F> {
    fn carrier(&self) -> usize {
        self.bound
    }

    fn step(&self, x: &FixedBitSet) -> FixedBitSet {
        let mut out = (self.f)(x);
        out.grow(self.bound);
        out
    }
}

#[derive(Debug, Clone)]
pub struct FixpointResult {
    /// `stages[0]` is empty; the last stage is the fixed point.
    pub stages: Vec<FixedBitSet>,
    pub lfp: FixedBitSet,
    /// First stage equal to its successor.
    pub closure_stage: usize,
}

impl FixpointResult {
    /// Stage at which `atom` first appears.
    pub fn stage_of(&self, atom: usize) -> Option<usize> {
        self.stages.iter().position(|s| s.contains(atom))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfpError {
    #[error("operator is not monotone: atom {atom} lost at stage {stage}")]
    NonMonotoneDetected { stage: usize, atom: usize },
    #[error("no fixed point after {stages} stages")]
    NoClosure { stages: usize },
}

pub fn iterate<O: MonotoneOperator + ?Sized>(op: &O) -> Result<FixpointResult, LfpError> {
    let n = op.carrier();
    let mut stages = vec![FixedBitSet::with_capacity(n)];
    // a monotone operator closes within n + 1 stages
    for i in 0..=n {
        let cur = &stages[i];
        let mut next = op.step(cur);
        next.grow(n);
        if let Some(atom) = cur.difference(&next).next() {
            return Err(LfpError::NonMonotoneDetected { stage: i + 1, atom });
        }
        if &next == cur {
            let lfp = next;
            return Ok(FixpointResult {
                stages,
                lfp,
                closure_stage: i,
            });
        }
        stages.push(next);
    }
    Err(LfpError::NoClosure { stages: n + 1 })
}

/// Random pairs `X <= Y`, checking `step(X) <= step(Y)`.
pub fn probe_monotone<O: MonotoneOperator + ?Sized>(
    op: &O,
    samples: usize,
    seed: u64,
) -> Result<(), LfpError> {
    let mut all = FixedBitSet::with_capacity(op.carrier());
    all.insert_range(..);
    probe(op, &all, 0.1, samples, seed)
}

/// Like [`probe_monotone`], with `X <= Y <= within` of any density.
///
/// Subsets of a fixed point keep composition premises small on large carriers.
pub fn probe_monotone_within<O: MonotoneOperator + ?Sized>(
    op: &O,
    within: &FixedBitSet,
    samples: usize,
    seed: u64,
) -> Result<(), LfpError> {
    probe(op, within, 1.0, samples, seed)
}

fn probe<O: MonotoneOperator + ?Sized>(
    op: &O,
    within: &FixedBitSet,
    max_density: f64,
    samples: usize,
    seed: u64,
) -> Result<(), LfpError> {
    let n = op.carrier();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let p: f64 = rng.gen_range(0.0..max_density);
        let mut x = FixedBitSet::with_capacity(n);
        let mut y = FixedBitSet::with_capacity(n);
        for i in within.ones().filter(|&i| i < n) {
            if rng.gen_bool(p) {
                x.insert(i);
                y.insert(i);
            } else if rng.gen_bool(p) {
                y.insert(i);
            }
        }
        let (sx, sy) = (op.step(&x), op.step(&y));
        if let Some(atom) = sx.difference(&sy).next() {
            return Err(LfpError::NonMonotoneDetected { stage: s, atom });
        }
    }
    Ok(())
}

/// `step(f) <= f`.
pub fn is_closed<O: MonotoneOperator + ?Sized>(op: &O, f: &FixedBitSet) -> bool {
    op.step(f).is_subset(f)
}

/// Every atom of `set` is derivable in one step from `set`.
pub fn is_supported<O: MonotoneOperator + ?Sized>(op: &O, set: &FixedBitSet) -> bool {
    set.is_subset(&op.step(set))
}
