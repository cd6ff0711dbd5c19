//! Bounded search for derivations of `T in U`, `x E T`, `x NE T` and `a in V`.

use std::collections::HashMap;

use parking_lot::Mutex;
use serde::Serialize;

use super::types::{view, TypeView};
use crate::kernel::{const_code, constant_unary_value, Expr, Machine, Outcome};
use crate::nat::{Nat, PairError};
use crate::verdict::Verdict;

/// Search limits shared by every query on a [`Universe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Fuel for each single application of a family or function code.
    pub fuel: u64,
    /// How many naturals are tried when a base type cannot be listed.
    pub probe: u64,
    /// Largest element list built for a finite type.
    pub enum_cap: usize,
    /// Nesting limit for recursive checks.
    pub depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            fuel: crate::kernel::DEFAULT_FUEL,
            probe: 64,
            enum_cap: 4096,
            depth: 256,
        }
    }
}

/// The elements of a type, when they can be listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elements {
    /// Exactly these; every other natural is a derivable non-element.
    Finite(Vec<Nat>),
    /// No finite list within the cap (the type may still be empty).
    Unlisted,
    Unknown(String),
}

enum Fiber {
    Value(Nat),
    Stuck,
    Unknown(String),
}

/// Decision procedures for the coded universe, relative to one [`Machine`].
///
/// `Yes` and `No` answers are cached; they do not depend on the bounds.
pub struct Universe<'m> {
    machine: &'m Machine,
    bounds: Bounds,
    types: Mutex<HashMap<Nat, Verdict>>,
    members: Mutex<HashMap<(Nat, Nat), Verdict>>,
    trees: Mutex<HashMap<Nat, Verdict>>,
    lists: Mutex<HashMap<Nat, Elements>>,
}

impl<'m> Universe<'m> {
    pub fn new(machine: &'m Machine) -> Self {
        Universe::with_bounds(machine, Bounds::default())
    }

    pub fn with_bounds(machine: &'m Machine, bounds: Bounds) -> Self {
        Universe {
            machine,
            bounds,
            types: Mutex::new(HashMap::new()),
            members: Mutex::new(HashMap::new()),
            trees: Mutex::new(HashMap::new()),
            lists: Mutex::new(HashMap::new()),
        }
    }

    pub fn machine(&self) -> &'m Machine {
        self.machine
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Apply `code` to `args` with the per-call fuel.
    pub fn apply(&self, code: &Nat, args: &[Nat]) -> Outcome {
        self.machine.apply(code, args, self.bounds.fuel)
    }

    pub fn in_universe(&self, t: &Nat) -> Verdict {
        self.iu(t, self.bounds.depth)
    }

    pub fn member(&self, x: &Nat, t: &Nat) -> Verdict {
        self.mem(x, t, self.bounds.depth)
    }

    pub fn in_v(&self, a: &Nat) -> Verdict {
        self.iv(a, self.bounds.depth)
    }

    pub fn elements(&self, t: &Nat) -> Elements {
        let d = self.bounds.depth;
        match self.iu(t, d) {
            Verdict::Yes(_) => self.elems(t, d),
            v => Elements::Unknown(format!("not a type: {v}")),
        }
    }

    /// A natural `w` with `w E t`, checked by [`Universe::member`].
    pub fn inhabit(&self, t: &Nat) -> Option<Nat> {
        let w = self.inhab(t, self.bounds.depth)?;
        self.member(&w, t).is_yes().then_some(w)
    }

    fn fiber(&self, e: &Nat, k: &Nat) -> Fiber {
        match self.apply(e, std::slice::from_ref(k)) {
            Outcome::Converged(t) => Fiber::Value(t),
            Outcome::Stuck(_) => Fiber::Stuck,
            o => Fiber::Unknown(format!("family at {}: {o}", b(k))),
        }
    }

    /// Naturals below the probe bound that are derivably in `n`.
    fn probe_members(&self, n: &Nat, d: usize) -> Vec<Nat> {
        (0..self.bounds.probe)
            .map(Nat::from)
            .filter(|k| self.mem(k, n, d).is_yes())
            .collect()
    }

    fn iu(&self, t: &Nat, d: usize) -> Verdict {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.iu_at(t, d))
    }

    fn iu_at(&self, t: &Nat, d: usize) -> Verdict {
        if d == 0 {
            return Verdict::unknown("depth bound reached");
        }
        if let Some(v) = self.types.lock().get(t) {
            return v.clone();
        }
        let v = match view(t) {
            TypeView::Fin(_) => Verdict::yes("finite type"),
            TypeView::Nat => Verdict::yes("nat"),
            TypeView::Pl(a, b) => match self.iu(&a, d - 1) {
                Verdict::Yes(_) => match self.iu(&b, d - 1) {
                    Verdict::Yes(_) => Verdict::yes("both summands are types"),
                    v => v,
                },
                v => v,
            },
            TypeView::Sigma(n, e) | TypeView::Pi(n, e) => {
                self.family(&n, &e, d, "type", |x| self.iu(x, d - 1))
            }
            TypeView::Sup(..) | TypeView::Foreign => {
                Verdict::no(format!("{} is not a type code", b(t)))
            }
            TypeView::Opaque => Verdict::unknown("tag of a symbolic value"),
        };
        if !v.is_unknown() {
            self.types.lock().insert(t.clone(), v.clone());
        }
        v
    }

    /// `n in U` and, for every `k`, `k NE n` or `{e}(k)` satisfies `pred`.
    fn family(
        &self,
        n: &Nat,
        e: &Nat,
        d: usize,
        what: &str,
        pred: impl Fn(&Nat) -> Verdict,
    ) -> Verdict {
        match self.iu(n, d - 1) {
            Verdict::Yes(_) => {}
            v => return v,
        }
        if let Some(t) = constant_unary_value(e) {
            let v = pred(&t);
            if v.is_yes() {
                return Verdict::yes(format!("constant family, {v}"));
            }
        }
        let check = |k: &Nat| match self.fiber(e, k) {
            Fiber::Value(t) => match pred(&t) {
                Verdict::No(why) => Verdict::no(format!("family at {}: {why}", b(k))),
                v => v,
            },
            Fiber::Stuck => Verdict::no(format!("family has no value at {}", b(k))),
            Fiber::Unknown(why) => Verdict::unknown(why),
        };
        match self.elems(n, d - 1) {
            Elements::Finite(ks) => first_no(ks.iter().map(check), || {
                format!("every family value is a {what}")
            }),
            Elements::Unlisted => {
                let ks = self.probe_members(n, d - 1);
                match first_no(ks.iter().map(check), String::new) {
                    Verdict::No(why) => Verdict::no(why),
                    _ => {
                        Verdict::unknown(format!("base not listable; {} members probed", ks.len()))
                    }
                }
            }
            Elements::Unknown(why) => Verdict::unknown(why),
        }
    }

    fn mem(&self, x: &Nat, t: &Nat, d: usize) -> Verdict {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.mem_at(x, t, d))
    }

    fn mem_at(&self, x: &Nat, t: &Nat, d: usize) -> Verdict {
        if d == 0 {
            return Verdict::unknown("depth bound reached");
        }
        let key = (x.clone(), t.clone());
        if let Some(v) = self.members.lock().get(&key) {
            return v.clone();
        }
        let v = match self.iu(t, d - 1) {
            Verdict::Yes(_) => self.mem_clause(x, t, d),
            v => Verdict::unknown(format!("type not established: {v}")),
        };
        if !v.is_unknown() {
            self.members.lock().insert(key, v.clone());
        }
        v
    }

    fn mem_clause(&self, x: &Nat, t: &Nat, d: usize) -> Verdict {
        match view(t) {
            TypeView::Fin(n) => match x.num_cmp(&n) {
                Ok(std::cmp::Ordering::Less) => Verdict::yes(format!("{} < {}", b(x), b(&n))),
                Ok(_) => Verdict::no(format!("{} >= {}", b(x), b(&n))),
                Err(o) => Verdict::unknown(o.to_string()),
            },
            TypeView::Nat => Verdict::yes("every natural is in nat"),
            TypeView::Pl(a, b) => match x.unpair() {
                Ok((tag, y)) if tag.is_zero() => self.mem(&y, &a, d - 1),
                Ok((tag, y)) if tag == Nat::one() => self.mem(&y, &b, d - 1),
                Ok(_) | Err(PairError::NotAPair) => Verdict::no("neither (0,y) nor (1,y)"),
                Err(PairError::Opaque(o)) => Verdict::unknown(o.to_string()),
            },
            TypeView::Sigma(n, e) => {
                let (k, u) = match x.unpair() {
                    Ok(p) => p,
                    Err(PairError::NotAPair) => {
                        return Verdict::no(format!("{} is not a pair", b(x)))
                    }
                    Err(PairError::Opaque(o)) => return Verdict::unknown(o.to_string()),
                };
                let mk = self.mem(&k, &n, d - 1);
                if mk.is_no() {
                    return Verdict::no(format!("first component: {}", mk.evidence()));
                }
                let mu = match self.fiber(&e, &k) {
                    Fiber::Value(s) => self.mem(&u, &s, d - 1),
                    Fiber::Stuck => Verdict::unknown(format!("family has no value at {}", b(&k))),
                    Fiber::Unknown(why) => Verdict::unknown(why),
                };
                match (mk, mu) {
                    (_, Verdict::No(why)) => Verdict::no(format!("second component: {why}")),
                    (Verdict::Yes(_), Verdict::Yes(_)) => Verdict::yes("both components"),
                    (Verdict::Unknown(why), _) | (_, Verdict::Unknown(why)) => {
                        Verdict::unknown(why)
                    }
                    _ => unreachable!(),
                }
            }
            TypeView::Pi(n, e) => self.pi_member(x, &n, &e, d),
            _ => Verdict::unknown("not a type"),
        }
    }

    fn pi_member(&self, x: &Nat, n: &Nat, e: &Nat, d: usize) -> Verdict {
        let at = |k: &Nat| -> Verdict {
            let s = match self.fiber(e, k) {
                Fiber::Value(s) => s,
                Fiber::Stuck => {
                    return Verdict::unknown(format!("family has no value at {}", b(k)))
                }
                Fiber::Unknown(why) => return Verdict::unknown(why),
            };
            match self.apply(x, std::slice::from_ref(k)) {
                Outcome::Converged(z) => match self.mem(&z, &s, d - 1) {
                    Verdict::No(why) => Verdict::no(format!("value {} at {}: {why}", b(&z), b(k))),
                    v => v,
                },
                Outcome::Stuck(r) => Verdict::no(format!("no value at {}: {r:?}", b(k))),
                o => Verdict::unknown(format!("at {}: {o}", b(k))),
            }
        };
        match self.elems(n, d - 1) {
            Elements::Finite(ks) => first_no(ks.iter().map(at), || {
                format!("all {} base elements map into their fibers", ks.len())
            }),
            Elements::Unknown(why) => Verdict::unknown(why),
            Elements::Unlisted => {
                let ks = self.probe_members(n, d - 1);
                if let Verdict::No(why) = first_no(ks.iter().map(at), String::new) {
                    return Verdict::no(why);
                }
                self.certified_pi(x, e, d).unwrap_or_else(|| {
                    Verdict::unknown(format!("{} base members probed", ks.len()))
                })
            }
        }
    }

    /// A certificate for `x` on all naturals and a constant family.
    fn certified_pi(&self, x: &Nat, e: &Nat, d: usize) -> Option<Verdict> {
        let cert = self.machine.certificate(x, 0, &[])?;
        let t = constant_unary_value(e)?;
        let mut values: Vec<&Nat> = cert.prefix.iter().collect();
        values.push(&cert.tail_value);
        let v = first_no(values.into_iter().map(|z| self.mem(z, &t, d - 1)), || {
            "certified values all lie in the fiber".to_string()
        });
        v.is_yes().then_some(v)
    }

    fn elems(&self, t: &Nat, d: usize) -> Elements {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.elems_at(t, d))
    }

    fn elems_at(&self, t: &Nat, d: usize) -> Elements {
        if d == 0 {
            return Elements::Unknown("depth bound reached".into());
        }
        if let Some(v) = self.lists.lock().get(t) {
            return v.clone();
        }
        let v = self.elems_clause(t, d);
        if !matches!(v, Elements::Unknown(_)) {
            self.lists.lock().insert(t.clone(), v.clone());
        }
        v
    }

    fn elems_clause(&self, t: &Nat, d: usize) -> Elements {
        let cap = self.bounds.enum_cap;
        match view(t) {
            TypeView::Fin(n) => match n.to_usize() {
                Some(n) if n <= cap => Elements::Finite((0..n).map(Nat::from).collect()),
                _ => Elements::Unlisted,
            },
            TypeView::Nat => Elements::Unlisted,
            TypeView::Pl(a, b) => match (self.elems(&a, d - 1), self.elems(&b, d - 1)) {
                (Elements::Unknown(w), _) | (_, Elements::Unknown(w)) => Elements::Unknown(w),
                (Elements::Finite(xs), Elements::Finite(ys)) if xs.len() + ys.len() <= cap => {
                    let left = xs.iter().map(|x| Nat::pair(&Nat::zero(), x));
                    let right = ys.iter().map(|y| Nat::pair(&Nat::one(), y));
                    Elements::Finite(left.chain(right).collect())
                }
                _ => Elements::Unlisted,
            },
            TypeView::Sigma(n, e) => {
                if let Some(s) = constant_unary_value(&e) {
                    if self.elems(&s, d - 1) == Elements::Finite(vec![]) {
                        return Elements::Finite(vec![]);
                    }
                }
                let ks = match self.elems(&n, d - 1) {
                    Elements::Finite(ks) => ks,
                    other => return other,
                };
                let mut out = Vec::new();
                let mut unlisted = false;
                for k in &ks {
                    let s = match self.fiber(&e, k) {
                        Fiber::Value(s) => s,
                        Fiber::Stuck => {
                            return Elements::Unknown(format!("family has no value at {}", b(k)))
                        }
                        Fiber::Unknown(why) => return Elements::Unknown(why),
                    };
                    match self.elems(&s, d - 1) {
                        Elements::Finite(us) => out.extend(us.iter().map(|u| Nat::pair(k, u))),
                        Elements::Unlisted => unlisted = true,
                        u @ Elements::Unknown(_) => return u,
                    }
                    if out.len() > cap {
                        unlisted = true;
                    }
                }
                if unlisted {
                    Elements::Unlisted
                } else {
                    Elements::Finite(out)
                }
            }
            TypeView::Pi(n, e) => {
                let ks = match self.elems(&n, d - 1) {
                    Elements::Finite(ks) => ks,
                    other => return other,
                };
                for k in &ks {
                    let s = match self.fiber(&e, k) {
                        Fiber::Value(s) => s,
                        Fiber::Stuck => {
                            return Elements::Unknown(format!("family has no value at {}", b(k)))
                        }
                        Fiber::Unknown(why) => return Elements::Unknown(why),
                    };
                    match self.elems(&s, d - 1) {
                        Elements::Finite(us) if us.is_empty() => return Elements::Finite(vec![]),
                        u @ Elements::Unknown(_) => return u,
                        _ => {}
                    }
                }
                Elements::Unlisted
            }
            _ => Elements::Unknown(format!("{} is not a type", b(t))),
        }
    }

    fn iv(&self, a: &Nat, d: usize) -> Verdict {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.iv_at(a, d))
    }

    fn iv_at(&self, a: &Nat, d: usize) -> Verdict {
        if d == 0 {
            return Verdict::unknown("depth bound reached");
        }
        if let Some(v) = self.trees.lock().get(a) {
            return v.clone();
        }
        let v = match view(a) {
            TypeView::Sup(n, e) => self.family(&n, &e, d, "tree", |x| self.iv(x, d - 1)),
            TypeView::Opaque => Verdict::unknown("tag of a symbolic value"),
            _ => Verdict::no(format!("{} is not of the form sup(n,e)", b(a))),
        };
        if !v.is_unknown() {
            self.trees.lock().insert(a.clone(), v.clone());
        }
        v
    }

    fn inhab(&self, t: &Nat, d: usize) -> Option<Nat> {
        if d == 0 || !self.iu(t, d).is_yes() {
            return None;
        }
        match view(t) {
            TypeView::Fin(n) => (!n.is_zero()).then(Nat::zero),
            TypeView::Nat => Some(Nat::zero()),
            TypeView::Pl(a, b) => self
                .inhab(&a, d - 1)
                .map(|w| Nat::pair(&Nat::zero(), &w))
                .or_else(|| self.inhab(&b, d - 1).map(|w| Nat::pair(&Nat::one(), &w))),
            TypeView::Sigma(n, e) => {
                let ks = match self.elems(&n, d - 1) {
                    Elements::Finite(ks) => ks,
                    Elements::Unlisted => {
                        let mut ks: Vec<Nat> = self.inhab(&n, d - 1).into_iter().collect();
                        ks.extend(self.probe_members(&n, d - 1));
                        ks
                    }
                    Elements::Unknown(_) => return None,
                };
                ks.iter().find_map(|k| match self.fiber(&e, k) {
                    Fiber::Value(s) => self.inhab(&s, d - 1).map(|w| Nat::pair(k, &w)),
                    _ => None,
                })
            }
            TypeView::Pi(n, e) => {
                if let Some(s) = constant_unary_value(&e) {
                    if let Some(w) = self.inhab(&s, d - 1) {
                        return Some(const_code(1, w));
                    }
                }
                let Elements::Finite(ks) = self.elems(&n, d - 1) else {
                    return None;
                };
                let mut ws = Vec::with_capacity(ks.len());
                for k in &ks {
                    let Fiber::Value(s) = self.fiber(&e, k) else {
                        return None;
                    };
                    ws.push(self.inhab(&s, d - 1)?);
                }
                Some(lookup(&ks, &ws))
            }
            _ => None,
        }
    }
}

/// Unary code sending `keys[i]` to `values[i]`.
pub fn lookup(keys: &[Nat], values: &[Nat]) -> Nat {
    let Some(last) = values.last() else {
        return const_code(1, 0u64);
    };
    if values.iter().all(|v| v == last) {
        return const_code(1, last.clone());
    }
    let mut e = Expr::Lit(last.clone());
    for (k, v) in keys.iter().zip(values).rev().skip(1) {
        e = Expr::if_eq(Expr::arg(0), Expr::Lit(k.clone()), Expr::Lit(v.clone()), e);
    }
    e.compile(1)
}

/// Stops at the first `No`; otherwise the first `Unknown`, else `Yes`.
fn first_no(items: impl Iterator<Item = Verdict>, yes: impl FnOnce() -> String) -> Verdict {
    let mut pending = None;
    for v in items {
        match v {
            Verdict::No(_) => return v,
            Verdict::Unknown(_) if pending.is_none() => pending = Some(v),
            _ => {}
        }
    }
    pending.unwrap_or_else(|| Verdict::yes(yes()))
}

const RED_ZONE: usize = 128 * 1024;
const STACK_CHUNK: usize = 4 * 1024 * 1024;

fn b(n: &Nat) -> String {
    n.brief(40)
}
