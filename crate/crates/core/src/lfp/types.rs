//! The simultaneous definition of types, elements, non-elements and trees,
//! with universal premises restricted to a finite set of naturals.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::MonotoneOperator;
use crate::kernel::{const_code, proj, table, Machine, Outcome};
use crate::nat::{Nat, PairError};
use crate::universe::{fin, hf_to_v, nat_type, pi, pl, sigma, view, Hf, TypeView, Universe};
use crate::verdict::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TypeAtom {
    /// `codes[t]` is a type.
    U(usize),
    /// `codes[t]` is a well-founded tree.
    V(usize),
    /// `elements[k] E codes[t]`
    E(usize, usize),
    /// `elements[k] NE codes[t]`
    NE(usize, usize),
}

/// Codes and candidate elements for the restricted definition.
#[derive(Debug, Clone)]
pub struct TypeCarrier {
    pub codes: Vec<Nat>,
    /// The naturals below `bound`, then the extra elements and their pair
    /// components.
    pub elements: Vec<Nat>,
    pub bound: u64,
}

impl TypeCarrier {
    pub fn new(bound: u64, codes: Vec<Nat>, extra_elements: Vec<Nat>) -> TypeCarrier {
        let mut elements: Vec<Nat> = (0..bound).map(Nat::from).collect();
        // components of pairs are elements too
        let mut todo = extra_elements;
        todo.reverse();
        while let Some(e) = todo.pop() {
            if elements.contains(&e) {
                continue;
            }
            if let Ok((a, b)) = e.unpair() {
                todo.push(b);
                todo.push(a);
            }
            elements.push(e);
        }
        TypeCarrier {
            codes,
            elements,
            bound,
        }
    }

    /// A mix of finite, dependent and infinite-based types, a few set trees,
    /// and function codes as candidate elements.
    pub fn standard(bound: u64) -> TypeCarrier {
        let (f0, f1, f2, f3) = (fin(0u64), fin(1u64), fin(2u64), fin(3u64));
        let fam = table(&[f1.clone(), f3.clone()], f2.clone());
        let codes = vec![
            f0.clone(),
            f1.clone(),
            f2.clone(),
            f3.clone(),
            nat_type(),
            pl(&f1, &f2),
            pl(&f0, &nat_type()),
            sigma(&f2, &fam),
            sigma(&f3, &fam),
            pi(&f2, &const_code(1, f2.clone())),
            pi(&f2, &fam),
            pi(&f0, &const_code(1, f0.clone())),
            pi(&f1, &const_code(1, f0.clone())),
            pi(&f2, &const_code(1, pl(&f1, &f2))),
            sigma(&nat_type(), &const_code(1, f1.clone())),
            pi(&nat_type(), &const_code(1, f2.clone())),
            hf_to_v(&Hf::empty()),
            hf_to_v(&Hf::von_neumann(2)),
            hf_to_v(&Hf::parse("{{{}},{{}}}").unwrap()),
            Nat::zero(),
        ];
        let extra = vec![
            const_code(1, 0u64),
            const_code(1, 1u64),
            const_code(1, 2u64),
            proj(1, 0),
            table(&[Nat::zero(), Nat::from(2u64)], Nat::one()),
            table(&[Nat::one(), Nat::from(9u64)], Nat::zero()),
            Nat::from(210u64),
        ];
        TypeCarrier::new(bound, codes, extra)
    }
}

/// One step of the type clauses over a [`TypeCarrier`].
pub struct TypeOperator {
    codes: Vec<Nat>,
    views: Vec<TypeView>,
    code_index: HashMap<Nat, usize>,
    elements: Vec<Nat>,
    elem_index: HashMap<Nat, usize>,
    bound: u64,
    /// `{e}(k)` for families `e` and functions in the carrier, `k` an element.
    apps: HashMap<(Nat, usize), Outcome>,
}

const CODE_CAP: usize = 256;

impl TypeOperator {
    /// Closes the carrier's codes under components and family values, then
    /// evaluates every family on every element.
    pub fn new(machine: &Machine, carrier: &TypeCarrier, fuel: u64) -> TypeOperator {
        let elements = carrier.elements.clone();
        let elem_index: HashMap<Nat, usize> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut apps = HashMap::new();
        let mut apply = |code: &Nat, k: usize| -> Outcome {
            apps.entry((code.clone(), k))
                .or_insert_with(|| machine.apply(code, std::slice::from_ref(&elements[k]), fuel))
                .clone()
        };
        let mut codes: Vec<Nat> = Vec::new();
        let mut todo: Vec<Nat> = carrier.codes.clone();
        todo.reverse();
        while let Some(t) = todo.pop() {
            if codes.contains(&t) || codes.len() >= CODE_CAP {
                continue;
            }
            match view(&t) {
                TypeView::Pl(a, b) => {
                    todo.push(b);
                    todo.push(a);
                }
                TypeView::Sigma(n, e) | TypeView::Pi(n, e) | TypeView::Sup(n, e) => {
                    todo.push(n);
                    for k in 0..elements.len() {
                        if let Outcome::Converged(x) = apply(&e, k) {
                            if !matches!(view(&x), TypeView::Foreign | TypeView::Opaque) {
                                todo.push(x);
                            }
                        }
                    }
                }
                _ => {}
            }
            codes.push(t);
        }
        for d in &elements {
            for k in 0..elements.len() {
                apply(d, k);
            }
        }
        let views = codes.iter().map(view).collect();
        let code_index = codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        TypeOperator {
            codes,
            views,
            code_index,
            elements,
            elem_index,
            bound: carrier.bound,
            apps,
        }
    }

    pub fn codes(&self) -> &[Nat] {
        &self.codes
    }

    pub fn elements(&self) -> &[Nat] {
        &self.elements
    }

    fn nt(&self) -> usize {
        self.codes.len()
    }

    fn nk(&self) -> usize {
        self.elements.len()
    }

    pub fn index(&self, a: TypeAtom) -> usize {
        let (nt, nk) = (self.nt(), self.nk());
        match a {
            TypeAtom::U(t) => t,
            TypeAtom::V(t) => nt + t,
            TypeAtom::E(k, t) => 2 * nt + t * nk + k,
            TypeAtom::NE(k, t) => 2 * nt + nt * nk + t * nk + k,
        }
    }

    pub fn atom(&self, i: usize) -> TypeAtom {
        let (nt, nk) = (self.nt(), self.nk());
        if i < nt {
            TypeAtom::U(i)
        } else if i < 2 * nt {
            TypeAtom::V(i - nt)
        } else if i < 2 * nt + nt * nk {
            let j = i - 2 * nt;
            TypeAtom::E(j % nk, j / nk)
        } else {
            let j = i - 2 * nt - nt * nk;
            TypeAtom::NE(j % nk, j / nk)
        }
    }

    pub fn code_of(&self, t: &Nat) -> Option<usize> {
        self.code_index.get(t).copied()
    }

    pub fn element_of(&self, k: &Nat) -> Option<usize> {
        self.elem_index.get(k).copied()
    }

    fn app(&self, code: &Nat, k: usize) -> Option<&Outcome> {
        self.apps.get(&(code.clone(), k))
    }

    /// Index of the type `{e}(k)` when it converges into the carrier.
    fn family_at(&self, e: &Nat, k: usize) -> Option<usize> {
        match self.app(e, k)? {
            Outcome::Converged(x) => self.code_of(x),
            _ => None,
        }
    }

    fn has(&self, x: &FixedBitSet, a: TypeAtom) -> bool {
        x.contains(self.index(a))
    }

    /// `k NE n` or the family value at `k` satisfies `ok`, for every element `k`.
    fn family_ok(&self, x: &FixedBitSet, n: &Nat, e: &Nat, ok: impl Fn(usize) -> bool) -> bool {
        let Some(ni) = self.code_of(n) else {
            return false;
        };
        self.has(x, TypeAtom::U(ni))
            && (0..self.nk())
                .all(|k| self.has(x, TypeAtom::NE(k, ni)) || self.family_at(e, k).is_some_and(&ok))
    }

    fn derive_u(&self, x: &FixedBitSet, t: usize) -> bool {
        match &self.views[t] {
            TypeView::Fin(_) | TypeView::Nat => true,
            TypeView::Pl(a, b) => [a, b]
                .iter()
                .all(|c| self.code_of(c).is_some_and(|i| self.has(x, TypeAtom::U(i)))),
            TypeView::Sigma(n, e) | TypeView::Pi(n, e) => {
                self.family_ok(x, n, e, |i| self.has(x, TypeAtom::U(i)))
            }
            _ => false,
        }
    }

    fn derive_v(&self, x: &FixedBitSet, t: usize) -> bool {
        match &self.views[t] {
            TypeView::Sup(n, e) => self.family_ok(x, n, e, |i| self.has(x, TypeAtom::V(i))),
            _ => false,
        }
    }

    /// `(E, NE)` derivable for `elements[k]` against `codes[t]`.
    fn derive_member(&self, x: &FixedBitSet, k: usize, t: usize) -> (bool, bool) {
        let el = &self.elements[k];
        let is_type = self.has(x, TypeAtom::U(t));
        let sub = |y: &Nat, c: &Nat| -> (bool, bool) {
            match (self.element_of(y), self.code_of(c)) {
                (Some(yi), Some(ci)) => (
                    self.has(x, TypeAtom::E(yi, ci)),
                    self.has(x, TypeAtom::NE(yi, ci)),
                ),
                _ => (false, false),
            }
        };
        match &self.views[t] {
            TypeView::Fin(n) => match el.num_cmp(n) {
                Ok(std::cmp::Ordering::Less) => (true, false),
                Ok(_) => (false, true),
                Err(_) => (false, false),
            },
            TypeView::Nat => (true, false),
            TypeView::Pl(a, b) if is_type => match el.unpair() {
                Ok((tag, y)) if tag.is_zero() => sub(&y, a),
                Ok((tag, y)) if tag == Nat::one() => sub(&y, b),
                Ok(_) | Err(PairError::NotAPair) => (false, true),
                Err(PairError::Opaque(_)) => (false, false),
            },
            TypeView::Sigma(n, e) if is_type => match el.unpair() {
                Ok((a, u)) => {
                    let (ae, ane) = sub(&a, n);
                    let (ue, une) = match self.element_of(&a).and_then(|ai| self.app(e, ai)) {
                        Some(Outcome::Converged(s)) => sub(&u, s),
                        _ => (false, false),
                    };
                    (ae && ue, ane || une)
                }
                Err(PairError::NotAPair) => (false, true),
                Err(PairError::Opaque(_)) => (false, false),
            },
            TypeView::Pi(n, e) if is_type => {
                let Some(ni) = self.code_of(n) else {
                    return (false, false);
                };
                let mut yes = true;
                let mut no = false;
                for j in 0..self.nk() {
                    let j_in = self.has(x, TypeAtom::E(j, ni));
                    let j_out = self.has(x, TypeAtom::NE(j, ni));
                    let fiber = self.app(e, j);
                    let value = self.app(el, j);
                    let (ye, yne) = match (fiber, value) {
                        (Some(Outcome::Converged(s)), Some(Outcome::Converged(z))) => sub(z, s),
                        _ => (false, false),
                    };
                    yes &= j_out || ye;
                    if j_in && (yne || matches!(value, Some(Outcome::Stuck(_)))) {
                        no = true;
                    }
                }
                (yes, no)
            }
            _ => (false, false),
        }
    }

    /// Whether every premise about `codes[t]` ranges over listed elements only.
    fn internal(&self, t: usize, memo: &mut HashMap<usize, bool>, depth: usize) -> bool {
        if let Some(&b) = memo.get(&t) {
            return b;
        }
        if depth == 0 {
            return false;
        }
        let rec = |c: &Nat, memo: &mut HashMap<usize, bool>| {
            self.code_of(c)
                .is_some_and(|i| self.internal(i, memo, depth - 1))
        };
        let b = match &self.views[t] {
            TypeView::Fin(n) => n.to_u64().is_some_and(|n| n <= self.bound),
            TypeView::Nat => false,
            TypeView::Pl(a, b) => rec(a, memo) && rec(b, memo),
            TypeView::Sigma(n, e) | TypeView::Pi(n, e) | TypeView::Sup(n, e) => {
                let base = n.clone();
                rec(&base, memo)
                    && match &self.views[self.code_of(n).unwrap()] {
                        TypeView::Fin(size) => {
                            (0..size.to_u64().unwrap_or(0)).all(|k| match self.app(e, k as usize) {
                                Some(Outcome::Converged(s)) => rec(&s.clone(), memo),
                                _ => false,
                            })
                        }
                        _ => false,
                    }
            }
            _ => true,
        };
        memo.insert(t, b);
        b
    }

    /// Compare the fixed point with the bounded checker on every carrier pair.
    pub fn compare(&self, lfp: &FixedBitSet, u: &Universe<'_>) -> TypeComparison {
        let mut r = TypeComparison::default();
        let mut memo = HashMap::new();
        for t in 0..self.nt() {
            let code = &self.codes[t];
            let internal = self.internal(t, &mut memo, 16);
            let mut judge = |label: String, fixed: bool, other_fixed: bool, v: Verdict| {
                r.checked += 1;
                match (fixed, other_fixed, &v) {
                    (true, true, _) => r.conflicts.push(format!("{label}: both derived")),
                    (true, _, Verdict::No(_)) | (false, true, Verdict::Yes(_)) if internal => r
                        .conflicts
                        .push(format!("{label}: fixed point {fixed}, checker {v}")),
                    (true, _, Verdict::No(_)) | (false, true, Verdict::Yes(_)) => {
                        r.relativized += 1
                    }
                    (false, false, Verdict::Yes(_) | Verdict::No(_)) if internal => {
                        r.missing.push(format!("{label}: checker {v}"))
                    }
                    (true, _, Verdict::Yes(_)) | (false, true, Verdict::No(_)) => r.agreed += 1,
                    (true, _, Verdict::Unknown(_)) | (false, true, Verdict::Unknown(_)) => {
                        r.unresolved += 1
                    }
                    _ => {}
                }
            };
            let name = code.brief(32);
            // U and V have no negative atoms; a missing U is a non-derivation
            let fixed_u = lfp.contains(self.index(TypeAtom::U(t)));
            let iu = u.in_universe(code);
            judge(format!("U({name})"), fixed_u, !fixed_u && internal, iu);
            let fixed_v = lfp.contains(self.index(TypeAtom::V(t)));
            let iv = u.in_v(code);
            judge(format!("V({name})"), fixed_v, !fixed_v && internal, iv);
            if !fixed_u {
                continue;
            }
            for k in 0..self.nk() {
                let e = lfp.contains(self.index(TypeAtom::E(k, t)));
                let ne = lfp.contains(self.index(TypeAtom::NE(k, t)));
                let v = u.member(&self.elements[k], code);
                judge(format!("{} E {name}", self.elements[k].brief(24)), e, ne, v);
            }
        }
        r
    }
}

impl MonotoneOperator for TypeOperator {
    fn carrier(&self) -> usize {
        2 * self.nt() + 2 * self.nt() * self.nk()
    }

    fn step(&self, x: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.carrier());
        for t in 0..self.nt() {
            if self.derive_u(x, t) {
                out.insert(self.index(TypeAtom::U(t)));
            }
            if self.derive_v(x, t) {
                out.insert(self.index(TypeAtom::V(t)));
            }
            for k in 0..self.nk() {
                let (e, ne) = self.derive_member(x, k, t);
                if e {
                    out.insert(self.index(TypeAtom::E(k, t)));
                }
                if ne {
                    out.insert(self.index(TypeAtom::NE(k, t)));
                }
            }
        }
        out
    }

    fn describe(&self, atom: usize) -> String {
        let c = |t: usize| self.codes[t].brief(32);
        let k = |k: usize| self.elements[k].brief(24);
        match self.atom(atom) {
            TypeAtom::U(t) => format!("U({})", c(t)),
            TypeAtom::V(t) => format!("V({})", c(t)),
            TypeAtom::E(i, t) => format!("{} E {}", k(i), c(t)),
            TypeAtom::NE(i, t) => format!("{} NE {}", k(i), c(t)),
        }
    }
}

/// Outcome of [`TypeOperator::compare`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct TypeComparison {
    pub checked: usize,
    pub agreed: usize,
    /// Contradictions on types whose premises stay inside the carrier, or an
    /// element derived both in and out.
    pub conflicts: Vec<String>,
    /// Checker answers with no matching derivation, on internal types.
    pub missing: Vec<String>,
    /// Fixed-point answers the checker leaves open.
    pub unresolved: usize,
    /// Disagreements caused by restricting a universal premise to the carrier.
    pub relativized: usize,
}

impl TypeComparison {
    pub fn is_consistent(&self) -> bool {
        self.conflicts.is_empty() && self.missing.is_empty()
    }
}
