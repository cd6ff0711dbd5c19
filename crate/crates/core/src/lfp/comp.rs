//! The computation relation restricted to a finite family of codes.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::MonotoneOperator;
use crate::kernel::{
    cases_code, compose, const_code, decode, efun, prim, proj, smn, succ_code, univ, zero_at, Head,
    Machine, Outcome, PrimOp,
};
use crate::nat::{Nat, PairError};

/// Largest arity of a code in the carrier.
const MAX_ARITY: usize = 4;

/// Codes and small naturals over which triples `(code, args, value)` range.
#[derive(Debug, Clone)]
pub struct CompCarrier {
    /// Closed under subcodes.
    pub codes: Vec<Nat>,
    /// Arguments and values include the naturals below this bound.
    pub bound: u64,
}

impl CompCarrier {
    /// Close `codes` under subcodes, dropping those of arity above four.
    pub fn new(bound: u64, codes: impl IntoIterator<Item = Nat>) -> CompCarrier {
        let mut out: Vec<Nat> = Vec::new();
        let mut stack: Vec<Nat> = codes.into_iter().collect();
        stack.reverse();
        while let Some(c) = stack.pop() {
            if out.contains(&c) {
                continue;
            }
            let Ok(h) = decode(&c) else { continue };
            if h.declared_arity() > MAX_ARITY {
                continue;
            }
            match &h {
                Head::Compose { outer, inner, .. } => {
                    stack.extend(inner.iter().rev().cloned());
                    stack.push(outer.clone());
                }
                Head::Efun { body, .. } => stack.push(body.clone()),
                _ => {}
            }
            out.push(c);
        }
        CompCarrier { codes: out, bound }
    }

    /// Initial functions, then `depth` rounds of unary compositions and
    /// searches over what is already present, at most `max_codes` codes.
    pub fn generated(bound: u64, depth: usize, max_codes: usize) -> CompCarrier {
        let mut codes = vec![
            const_code(1, 0u64),
            const_code(1, 1u64),
            const_code(2, 1u64),
            proj(1, 0),
            proj(2, 0),
            proj(2, 1),
            succ_code(1, 0),
            succ_code(2, 1),
            prim(PrimOp::Pred),
            cases_code(0),
            univ(2),
        ];
        codes.extend((0..bound).map(zero_at));
        for _ in 0..depth {
            let unary: Vec<Nat> = codes.iter().filter(|c| arity(c) == 1).cloned().collect();
            let binary: Vec<Nat> = codes.iter().filter(|c| arity(c) == 2).cloned().collect();
            let mut next = Vec::new();
            for b in &binary {
                next.push(efun(1, b.clone()));
                next.push(smn(b, &Nat::one()));
            }
            for f in &unary {
                for g in unary.iter().chain(&binary) {
                    next.push(compose(arity(g), f.clone(), vec![g.clone()]));
                }
            }
            for c in next {
                if codes.len() >= max_codes {
                    break;
                }
                if !codes.contains(&c) {
                    codes.push(c);
                }
            }
        }
        CompCarrier::new(bound, codes)
    }
}

fn arity(c: &Nat) -> usize {
    crate::kernel::declared_arity(c)
}

/// A code applied to arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Query {
    pub code: Nat,
    pub args: Vec<Nat>,
}

/// One step of the computation clauses on the carrier's triples.
///
/// The search clause's zero answer quantifies over every natural, so it is
/// only applied when the machine holds a certificate for the body.
pub struct CompOperator<'m> {
    machine: &'m Machine,
    nats: u64,
    codes: Vec<Nat>,
    heads: Vec<Head>,
    code_index: HashMap<Nat, usize>,
    values: Vec<Nat>,
    value_index: HashMap<Nat, usize>,
    queries: Vec<(usize, Vec<Nat>)>,
    query_index: HashMap<(usize, Vec<Nat>), usize>,
}

fn tuples(base: &[Nat], len: usize) -> Vec<Vec<Nat>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                base.iter().map(move |b| {
                    let mut t = t.clone();
                    t.push(b.clone());
                    t
                })
            })
            .collect();
    }
    out
}

impl<'m> CompOperator<'m> {
    pub fn new(machine: &'m Machine, carrier: &CompCarrier) -> Self {
        let nats: Vec<Nat> = (0..carrier.bound).map(Nat::from).collect();
        let heads: Vec<Head> = carrier.codes.iter().map(|c| decode(c).unwrap()).collect();
        let code_index: HashMap<Nat, usize> = carrier
            .codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let mut values = nats.clone();
        for c in &carrier.codes {
            if !values.contains(c) {
                values.push(c.clone());
            }
        }
        let value_index = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut queries = Vec::new();
        for (ci, h) in heads.iter().enumerate() {
            let k = h.declared_arity();
            match h {
                Head::Univ { .. } => {
                    for (bi, b) in carrier.codes.iter().enumerate() {
                        if heads[bi].declared_arity() + 1 != k {
                            continue;
                        }
                        for rest in tuples(&nats, k - 1) {
                            let mut args = vec![b.clone()];
                            args.extend(rest);
                            queries.push((ci, args));
                        }
                    }
                }
                Head::Smn { .. } => {
                    for b in &carrier.codes {
                        for rest in tuples(&nats, k.saturating_sub(1)) {
                            let mut args = vec![b.clone()];
                            args.extend(rest);
                            queries.push((ci, args));
                        }
                    }
                }
                _ => queries.extend(tuples(&nats, k).into_iter().map(|a| (ci, a))),
            }
        }
        let query_index = queries
            .iter()
            .enumerate()
            .map(|(i, q)| (q.clone(), i))
            .collect();
        CompOperator {
            machine,
            nats: carrier.bound,
            codes: carrier.codes.clone(),
            heads,
            code_index,
            values,
            value_index,
            queries,
            query_index,
        }
    }

    pub fn queries(&self) -> usize {
        self.queries.len()
    }

    pub fn query(&self, q: usize) -> Query {
        let (c, args) = &self.queries[q];
        Query {
            code: self.codes[*c].clone(),
            args: args.clone(),
        }
    }

    /// The atom `(code, args, value)`, if it lies in the carrier.
    pub fn atom(&self, code: &Nat, args: &[Nat], value: &Nat) -> Option<usize> {
        let c = *self.code_index.get(code)?;
        let q = *self.query_index.get(&(c, args.to_vec()))?;
        let v = *self.value_index.get(value)?;
        Some(q * self.values.len() + v)
    }

    /// `(query, value)` of an atom.
    pub fn decode_atom(&self, atom: usize) -> (Query, Nat) {
        let nv = self.values.len();
        (self.query(atom / nv), self.values[atom % nv].clone())
    }

    fn values_of(&self, x: &FixedBitSet, code: &Nat, args: &[Nat]) -> Vec<usize> {
        let Some(&c) = self.code_index.get(code) else {
            return vec![];
        };
        self.values_at(x, c, args)
    }

    fn values_at(&self, x: &FixedBitSet, c: usize, args: &[Nat]) -> Vec<usize> {
        let Some(&q) = self.query_index.get(&(c, args.to_vec())) else {
            return vec![];
        };
        let nv = self.values.len();
        (0..nv).filter(|v| x.contains(q * nv + v)).collect()
    }

    fn index(&self, v: &Nat) -> Option<usize> {
        self.value_index.get(v).copied()
    }

    fn has_positive(&self, x: &FixedBitSet, body: &Nat, args: &[Nat]) -> bool {
        self.values_of(x, body, args)
            .into_iter()
            .any(|v| !self.values[v].is_zero())
    }

    fn derive(&self, x: &FixedBitSet, c: usize, args: &[Nat]) -> Vec<usize> {
        match &self.heads[c] {
            Head::Const { value, .. } => self.index(value).into_iter().collect(),
            Head::Proj { index, .. } => self.index(&args[*index]).into_iter().collect(),
            Head::Succ { index, .. } => args[*index]
                .succ()
                .ok()
                .and_then(|v| self.index(&v))
                .into_iter()
                .collect(),
            Head::Cases { .. } => {
                let pick = if args[2] == args[3] {
                    &args[0]
                } else {
                    &args[1]
                };
                self.index(pick).into_iter().collect()
            }
            Head::Smn { .. } => self.index(&smn(&args[0], &args[1])).into_iter().collect(),
            Head::Prim { op, .. } => prim_value(*op, args)
                .and_then(|v| self.index(&v))
                .into_iter()
                .collect(),
            Head::Compose { outer, inner, .. } => {
                let mut combos: Vec<Vec<Nat>> = vec![Vec::new()];
                for ci in inner {
                    let vs = self.values_of(x, ci, args);
                    combos = combos
                        .into_iter()
                        .flat_map(|t| {
                            vs.iter().map(move |&v| {
                                let mut t = t.clone();
                                t.push(self.values[v].clone());
                                t
                            })
                        })
                        .collect();
                }
                let mut out: Vec<usize> = combos
                    .iter()
                    .flat_map(|ys| self.values_of(x, outer, ys))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
            Head::Univ { .. } => self.values_of(x, &args[0], &args[1..]),
            Head::Efun { body, .. } => {
                let at = |p: u64| {
                    let mut a = vec![Nat::from(p)];
                    a.extend_from_slice(args);
                    a
                };
                let mut out = Vec::new();
                for n in 0..self.nats {
                    let zero = self.values_of(x, body, &at(n)).contains(&0);
                    if zero && (0..n).all(|p| self.has_positive(x, body, &at(p))) {
                        out.extend(self.index(&Nat::from(n + 1)));
                    }
                }
                if let Some(cert) = self.machine.certificate(body, 0, args) {
                    if (0..cert.tail_from).all(|p| self.has_positive(x, body, &at(p))) {
                        out.push(0);
                    }
                }
                out
            }
        }
    }

    /// Compare the fixed point with the machine.
    ///
    /// A triple in the fixed point must be what the machine computes. A
    /// converging evaluation whose every step stays in the carrier must be in
    /// the fixed point.
    pub fn compare(&self, lfp: &FixedBitSet, fuel: u64) -> CompComparison {
        let mut report = CompComparison::default();
        let nv = self.values.len();
        for q in 0..self.queries.len() {
            let Query { code, args } = self.query(q);
            let found: Vec<usize> = (0..nv).filter(|v| lfp.contains(q * nv + v)).collect();
            if found.len() > 1 {
                report
                    .multivalued
                    .push(format!("{} on {:?}", code.brief(40), args));
            }
            if !found.is_empty() {
                let out = self.machine.apply(&code, &args, fuel);
                for v in found {
                    report.atoms += 1;
                    match &out {
                        Outcome::Converged(w) if *w == self.values[v] => report.agreed += 1,
                        o => report.conflicts.push(format!(
                            "{} on {:?}: fixed point has {}, machine gives {o}",
                            code.brief(40),
                            args,
                            self.values[v]
                        )),
                    }
                }
                continue;
            }
            // untraced first: most misses diverge and would fill a trace
            if !self.machine.apply(&code, &args, fuel).is_converged() {
                continue;
            }
            let (out, trace) = self.machine.apply_traced(&code, &args, fuel);
            if let Outcome::Converged(w) = out {
                let inside = trace.iter().all(|ev| {
                    ev.result
                        .as_ref()
                        .is_some_and(|r| self.atom(&ev.code, &ev.args, r).is_some())
                });
                if inside {
                    report
                        .missing
                        .push(format!("{} on {:?} = {}", code.brief(40), args, w));
                } else {
                    report.outside += 1;
                }
            }
        }
        report
    }
}

fn prim_value(op: PrimOp, args: &[Nat]) -> Option<Nat> {
    let part = |r: Result<Nat, PairError>| match r {
        Ok(v) => Some(v),
        Err(PairError::NotAPair) => Some(Nat::zero()),
        Err(PairError::Opaque(_)) => None,
    };
    match op {
        PrimOp::Pair => Some(Nat::pair(&args[0], &args[1])),
        PrimOp::Fst => part(args[0].fst()),
        PrimOp::Snd => part(args[0].snd()),
        PrimOp::Pred => args[0].pred().ok(),
    }
}

impl MonotoneOperator for CompOperator<'_> {
    fn carrier(&self) -> usize {
        self.queries.len() * self.values.len()
    }

    fn step(&self, x: &FixedBitSet) -> FixedBitSet {
        let nv = self.values.len();
        let mut out = FixedBitSet::with_capacity(self.carrier());
        for (q, (c, args)) in self.queries.iter().enumerate() {
            for v in self.derive(x, *c, args) {
                out.insert(q * nv + v);
            }
        }
        out
    }

    fn describe(&self, atom: usize) -> String {
        let (q, v) = self.decode_atom(atom);
        format!("{} on {:?} = {}", q.code.brief(40), q.args, v.brief(40))
    }
}

/// Outcome of [`CompOperator::compare`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct CompComparison {
    /// Triples in the fixed point.
    pub atoms: usize,
    /// Triples the machine reproduces.
    pub agreed: usize,
    /// Triples the machine contradicts.
    pub conflicts: Vec<String>,
    /// Machine results derivable in the carrier but absent from the fixed point.
    pub missing: Vec<String>,
    /// Queries with more than one value in the fixed point.
    pub multivalued: Vec<String>,
    /// Converging queries whose evaluation leaves the carrier.
    pub outside: usize,
}

impl CompComparison {
    pub fn is_consistent(&self) -> bool {
        self.conflicts.is_empty() && self.missing.is_empty() && self.multivalued.is_empty()
    }
}
