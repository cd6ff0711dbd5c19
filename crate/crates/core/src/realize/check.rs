use std::collections::HashMap;

use parking_lot::Mutex;
use serde::Serialize;

use super::formula::{Env, Formula, FormulaError, Term};
use crate::kernel::{const_code, constant_unary_value, Outcome};
use crate::nat::{Nat, PairError};
use crate::universe::{
    bar, gl_code, hf_to_v, lookup, omega, tilde_code, vnat_host, Elements, Hf, Universe,
};
use crate::verdict::Verdict;

/// What is known about the realizers of a closed formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Analysis {
    /// No natural realizes it.
    Refuted(String),
    /// This natural realizes it.
    Realized(Nat),
    Open(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchPhase {
    /// Least candidate below the bound.
    Enumeration,
    /// Built from the shape of the formula, then checked.
    Synthesis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub realizer: Option<Nat>,
    pub phase: Option<SearchPhase>,
    /// Candidates checked by enumeration.
    pub tried: u64,
}

enum Instances {
    /// Exactly the members of the base.
    Finite(Vec<Nat>),
    /// Some members of a base that cannot be listed.
    Probed(Vec<Nat>),
}

/// Bounded checks of `e realizes phi` over a [`Universe`].
pub struct Realizer<'u, 'm> {
    universe: &'u Universe<'m>,
    /// Instances checked when a quantifier ranges over a base that cannot be listed.
    pub spot: u64,
    /// Sample sets for unbounded quantifiers.
    pub family: Vec<Nat>,
    analyses: Mutex<HashMap<Formula, Analysis>>,
}

fn sample_family() -> Vec<Nat> {
    let mut out: Vec<Nat> = ["{}", "{{}}", "{{{}}}", "{{},{{}}}"]
        .iter()
        .map(|s| hf_to_v(&Hf::parse(s).expect("sample literal")))
        .collect();
    out.push(vnat_host(3));
    out.push(omega());
    out
}

impl<'u, 'm> Realizer<'u, 'm> {
    pub fn new(universe: &'u Universe<'m>) -> Self {
        Realizer {
            universe,
            spot: 21,
            family: sample_family(),
            analyses: Mutex::new(HashMap::new()),
        }
    }

    pub fn universe(&self) -> &'u Universe<'m> {
        self.universe
    }

    /// Does `e` realize `phi` under `env`?
    pub fn realizes(&self, e: &Nat, phi: &Formula, env: &Env) -> Result<Verdict, FormulaError> {
        Ok(self.check(e, &phi.close(env)?))
    }

    /// `Yes` when `phi` has no realizer, `No` when one is found.
    pub fn refutable(&self, phi: &Formula, env: &Env) -> Result<Verdict, FormulaError> {
        Ok(match self.analyse(&phi.close(env)?) {
            Analysis::Refuted(why) => Verdict::yes(why),
            Analysis::Realized(w) => Verdict::no(format!("realized by {}", b(&w))),
            Analysis::Open(why) => Verdict::unknown(why),
        })
    }

    /// A realizer built from the shape of `phi` and confirmed by [`Realizer::check`].
    pub fn synthesize(&self, phi: &Formula, env: &Env) -> Result<Option<Nat>, FormulaError> {
        let phi = phi.close(env)?;
        Ok(match self.analyse(&phi) {
            Analysis::Realized(w) if self.check(&w, &phi).is_yes() => Some(w),
            _ => None,
        })
    }

    /// The least `e < bound` that realizes `phi`; failing that, a synthesized one.
    pub fn search(
        &self,
        phi: &Formula,
        env: &Env,
        bound: u64,
    ) -> Result<SearchResult, FormulaError> {
        let phi = phi.close(env)?;
        for e in 0..bound {
            let e = Nat::from(e);
            if self.check(&e, &phi).is_yes() {
                let tried = e.to_u64().unwrap_or(bound) + 1;
                return Ok(SearchResult {
                    realizer: Some(e),
                    phase: Some(SearchPhase::Enumeration),
                    tried,
                });
            }
        }
        let found = match self.analyse(&phi) {
            Analysis::Realized(w) if self.check(&w, &phi).is_yes() => Some(w),
            _ => None,
        };
        Ok(SearchResult {
            phase: found.as_ref().map(|_| SearchPhase::Synthesis),
            realizer: found,
            tried: bound,
        })
    }

    /// `e realizes phi` for a closed formula.
    pub fn check(&self, e: &Nat, phi: &Formula) -> Verdict {
        stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || self.check_at(e, phi))
    }

    fn check_at(&self, e: &Nat, phi: &Formula) -> Verdict {
        let u = self.universe;
        match phi {
            Formula::Eq(a, bb) => match self.gl_type(a, bb) {
                Ok(t) => u.member(e, &t),
                Err(v) => v,
            },
            Formula::In(a, bb) => {
                let (e0, e1) = match components(e) {
                    Ok(c) => c,
                    Err(v) => return v,
                };
                let (n, f) = match set_parts(bb) {
                    Ok(p) => p,
                    Err(v) => return v,
                };
                let v0 = u.member(&e0, &n);
                if let Verdict::No(why) = v0 {
                    return Verdict::no(format!("index {}: {why}", b(&e0)));
                }
                let v1 = match self.instance(&f, &e0) {
                    Ok(c) => self.check(&e1, &Formula::Eq(a.clone(), Term::Lit(c))),
                    Err(v) => v,
                };
                both(v0, v1, "index is in the base and the components are equal")
            }
            Formula::And(p, q) => match components(e) {
                Ok((e0, e1)) => both(self.check(&e0, p), self.check(&e1, q), "both conjuncts"),
                Err(v) => v,
            },
            Formula::Or(p, q) => match components(e) {
                Ok((tag, e1)) if tag.is_zero() => tagged("left", self.check(&e1, p)),
                Ok((tag, e1)) if tag == Nat::one() => tagged("right", self.check(&e1, q)),
                Ok((tag, _)) => Verdict::no(format!("tag {} is neither 0 nor 1", b(&tag))),
                Err(v) => v,
            },
            Formula::Not(p) => match self.analyse(p) {
                Analysis::Refuted(why) => Verdict::yes(format!("no realizer: {why}")),
                Analysis::Realized(w) => {
                    Verdict::no(format!("{} realizes the negated formula", b(&w)))
                }
                Analysis::Open(why) => Verdict::unknown(why),
            },
            Formula::Implies(p, q) => self.check_implies(e, p, q),
            Formula::AllIn(x, t, p) => self.check_all_in(e, x, t, p),
            Formula::ExIn(x, t, p) => {
                let (e0, e1) = match components(e) {
                    Ok(c) => c,
                    Err(v) => return v,
                };
                let (n, f) = match set_parts(t) {
                    Ok(p) => p,
                    Err(v) => return v,
                };
                let v0 = u.member(&e0, &n);
                if let Verdict::No(why) = v0 {
                    return Verdict::no(format!("witness index {}: {why}", b(&e0)));
                }
                let v1 = match self.instance(&f, &e0) {
                    Ok(c) => self.check(&e1, &p.subst(x, &c)),
                    Err(v) => v,
                };
                both(v0, v1, format!("witness index {}", b(&e0)))
            }
            Formula::All(x, p) => {
                let mut checked = 0;
                for a in &self.family {
                    if !u.in_v(a).is_yes() {
                        continue;
                    }
                    checked += 1;
                    match u.apply(e, std::slice::from_ref(a)) {
                        Outcome::Converged(r) => {
                            if let Verdict::No(why) = self.check(&r, &p.subst(x, a)) {
                                return Verdict::no(format!("at sample {}: {why}", b(a)));
                            }
                        }
                        Outcome::Stuck(r) => {
                            return Verdict::no(format!("no value at sample {}: {r:?}", b(a)))
                        }
                        Outcome::Unknown { .. } => {}
                    }
                }
                Verdict::unknown(format!("unbounded; {checked} sample sets checked"))
            }
            Formula::Ex(x, p) => {
                let (e0, e1) = match components(e) {
                    Ok(c) => c,
                    Err(v) => return v,
                };
                let v0 = u.in_v(&e0);
                if let Verdict::No(why) = v0 {
                    return Verdict::no(format!("witness is not a set: {why}"));
                }
                both(v0, self.check(&e1, &p.subst(x, &e0)), "witness is a set")
            }
        }
    }

    fn check_implies(&self, e: &Nat, p: &Formula, q: &Formula) -> Verdict {
        let premise = self.analyse(p);
        if let Analysis::Refuted(why) = &premise {
            return Verdict::yes(format!("premise has no realizer: {why}"));
        }
        if let Analysis::Realized(d) = &premise {
            match self.universe.apply(e, std::slice::from_ref(d)) {
                Outcome::Stuck(r) => {
                    return Verdict::no(format!("no value at premise realizer: {r:?}"))
                }
                Outcome::Converged(z) => {
                    if let Verdict::No(why) = self.check(&z, q) {
                        return Verdict::no(format!("at premise realizer {}: {why}", b(d)));
                    }
                }
                Outcome::Unknown { .. } => {}
            }
        }
        if let Some(v) = constant_unary_value(e) {
            if let Verdict::Yes(why) = self.check(&v, q) {
                return Verdict::yes(format!("constant realizer of the conclusion: {why}"));
            }
        }
        Verdict::unknown("premise realizers not exhausted")
    }

    fn check_all_in(&self, e: &Nat, x: &str, t: &Term, p: &Formula) -> Verdict {
        let (n, f) = match set_parts(t) {
            Ok(p) => p,
            Err(v) => return v,
        };
        let at = |i: &Nat| -> Verdict {
            let r = match self.universe.apply(e, std::slice::from_ref(i)) {
                Outcome::Converged(r) => r,
                Outcome::Stuck(r) => return Verdict::no(format!("no value at {}: {r:?}", b(i))),
                o => return Verdict::unknown(format!("at {}: {o}", b(i))),
            };
            match self.instance(&f, i) {
                Ok(c) => match self.check(&r, &p.subst(x, &c)) {
                    Verdict::No(why) => Verdict::no(format!("instance {}: {why}", b(i))),
                    v => v,
                },
                Err(v) => v,
            }
        };
        match self.instances(&n) {
            Ok(Instances::Finite(ks)) => {
                let k = ks.len();
                Verdict::all(ks.iter().map(at), format!("all {k} instances"))
            }
            Ok(Instances::Probed(ks)) => match Verdict::all(ks.iter().map(at), "") {
                Verdict::No(why) => Verdict::no(why),
                Verdict::Yes(_) => {
                    Verdict::unknown(format!("base not listable; {} instances checked", ks.len()))
                }
                v => v,
            },
            Err(v) => v,
        }
    }

    /// Realizer analysis of a closed formula; definite results are cached.
    pub fn analyse(&self, phi: &Formula) -> Analysis {
        if let Some(a) = self.analyses.lock().get(phi) {
            return a.clone();
        }
        let a = stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || self.analyse_at(phi));
        if !matches!(a, Analysis::Open(_)) {
            self.analyses.lock().insert(phi.clone(), a.clone());
        }
        a
    }

    fn analyse_at(&self, phi: &Formula) -> Analysis {
        use Analysis::*;
        let u = self.universe;
        let open = |v: Verdict| Open(v.evidence().to_string());
        match phi {
            Formula::Eq(a, bb) => {
                let t = match self.gl_type(a, bb) {
                    Ok(t) => t,
                    Err(v) => return open(v),
                };
                if u.elements(&t) == Elements::Finite(vec![]) {
                    return Refuted("equality type is empty".into());
                }
                match u.inhabit(&t) {
                    Some(w) => Realized(w),
                    None => Open("equality type not settled".into()),
                }
            }
            Formula::In(a, bb) => {
                let (n, f) = match set_parts(bb) {
                    Ok(p) => p,
                    Err(v) => return open(v),
                };
                self.witness(&n, |k| {
                    let c = self.instance(&f, k).map_err(open)?;
                    Ok(self.analyse(&Formula::Eq(a.clone(), Term::Lit(c))))
                })
            }
            Formula::And(p, q) => match (self.analyse(p), self.analyse(q)) {
                (Refuted(why), _) | (_, Refuted(why)) => Refuted(why),
                (Realized(x), Realized(y)) => Realized(Nat::pair(&x, &y)),
                (Open(why), _) | (_, Open(why)) => Open(why),
            },
            Formula::Or(p, q) => match (self.analyse(p), self.analyse(q)) {
                (Realized(w), _) => Realized(Nat::pair(&Nat::zero(), &w)),
                (_, Realized(w)) => Realized(Nat::pair(&Nat::one(), &w)),
                (Refuted(x), Refuted(y)) => Refuted(format!("{x}; {y}")),
                (Open(why), _) | (_, Open(why)) => Open(why),
            },
            Formula::Not(p) => match self.analyse(p) {
                Refuted(_) => Realized(Nat::zero()),
                Realized(w) => Refuted(format!("{} realizes the negated formula", b(&w))),
                o => o,
            },
            Formula::Implies(p, q) => match (self.analyse(p), self.analyse(q)) {
                (Refuted(_), _) => Realized(Nat::zero()),
                (_, Realized(w)) => Realized(const_code(1, w)),
                (Realized(_), Refuted(why)) => {
                    Refuted(format!("premise realizable, conclusion not: {why}"))
                }
                (Open(why), _) | (_, Open(why)) => Open(why),
            },
            Formula::AllIn(x, t, p) => {
                let (n, f) = match set_parts(t) {
                    Ok(p) => p,
                    Err(v) => return open(v),
                };
                let (ks, finite) = match self.instances(&n) {
                    Ok(Instances::Finite(ks)) => (ks, true),
                    Ok(Instances::Probed(ks)) => (ks, false),
                    Err(v) => return open(v),
                };
                let mut ws = Vec::with_capacity(ks.len());
                let mut pending = None;
                for k in &ks {
                    let c = match self.instance(&f, k) {
                        Ok(c) => c,
                        Err(v) => return open(v),
                    };
                    match self.analyse(&p.subst(x, &c)) {
                        Refuted(why) => return Refuted(format!("instance {}: {why}", b(k))),
                        Realized(w) => ws.push(w),
                        Open(why) => pending = pending.or(Some(why)),
                    }
                }
                match (pending, finite) {
                    (Some(why), _) => Open(why),
                    (None, true) => Realized(lookup(&ks, &ws)),
                    (None, false) => Open(format!(
                        "base not listable; {} instances realized",
                        ks.len()
                    )),
                }
            }
            Formula::ExIn(x, t, p) => {
                let (n, f) = match set_parts(t) {
                    Ok(p) => p,
                    Err(v) => return open(v),
                };
                self.witness(&n, |k| {
                    let c = self.instance(&f, k).map_err(open)?;
                    Ok(self.analyse(&p.subst(x, &c)))
                })
            }
            Formula::All(x, p) => {
                for a in &self.family {
                    if u.in_v(a).is_yes() {
                        if let Refuted(why) = self.analyse(&p.subst(x, a)) {
                            return Refuted(format!("at sample {}: {why}", b(a)));
                        }
                    }
                }
                Open("unbounded quantifier".into())
            }
            Formula::Ex(x, p) => {
                for a in &self.family {
                    if u.in_v(a).is_yes() {
                        if let Realized(w) = self.analyse(&p.subst(x, a)) {
                            return Realized(Nat::pair(a, &w));
                        }
                    }
                }
                Open("no sample set witnesses it".into())
            }
        }
    }

    /// First index `k` of base `n` whose instance is realized, as `(k, w)`.
    fn witness(&self, n: &Nat, inst: impl Fn(&Nat) -> Result<Analysis, Analysis>) -> Analysis {
        let (ks, finite) = match self.instances(n) {
            Ok(Instances::Finite(ks)) => (ks, true),
            Ok(Instances::Probed(ks)) => (ks, false),
            Err(v) => return Analysis::Open(v.evidence().to_string()),
        };
        let mut pending = None;
        for k in &ks {
            match inst(k) {
                Ok(Analysis::Realized(w)) => return Analysis::Realized(Nat::pair(k, &w)),
                Ok(Analysis::Refuted(_)) => {}
                Ok(Analysis::Open(why)) | Err(Analysis::Open(why)) => {
                    pending = pending.or(Some(why))
                }
                Err(other) => return other,
            }
        }
        match (pending, finite) {
            (Some(why), _) => Analysis::Open(why),
            (None, true) => {
                Analysis::Refuted(format!("none of {} instances is realizable", ks.len()))
            }
            (None, false) => {
                Analysis::Open(format!("base not listable; {} instances refuted", ks.len()))
            }
        }
    }

    fn instances(&self, n: &Nat) -> Result<Instances, Verdict> {
        match self.universe.elements(n) {
            Elements::Finite(ks) => Ok(Instances::Finite(ks)),
            Elements::Unlisted => Ok(Instances::Probed(
                (0..self.spot)
                    .map(Nat::from)
                    .filter(|k| self.universe.member(k, n).is_yes())
                    .collect(),
            )),
            Elements::Unknown(why) => Err(Verdict::unknown(why)),
        }
    }

    fn instance(&self, f: &Nat, k: &Nat) -> Result<Nat, Verdict> {
        match self.universe.apply(f, std::slice::from_ref(k)) {
            Outcome::Converged(c) => Ok(c),
            Outcome::Stuck(r) => Err(Verdict::no(format!("subtree {} undefined: {r:?}", b(k)))),
            o => Err(Verdict::unknown(format!("subtree {}: {o}", b(k)))),
        }
    }

    fn gl_type(&self, a: &Term, bb: &Term) -> Result<Nat, Verdict> {
        let (a, bb) = (lit(a)?, lit(bb)?);
        match self.universe.apply(&gl_code(), &[a.clone(), bb.clone()]) {
            Outcome::Converged(t) => Ok(t),
            o => Err(Verdict::unknown(format!("equality type: {o}"))),
        }
    }
}

fn lit(t: &Term) -> Result<&Nat, Verdict> {
    t.value().map_err(|e| Verdict::unknown(e.to_string()))
}

fn set_parts(t: &Term) -> Result<(Nat, Nat), Verdict> {
    let a = lit(t)?;
    match (bar(a), tilde_code(a)) {
        (Some(n), Some(f)) => Ok((n, f)),
        _ => Err(Verdict::unknown(format!(
            "{} is not of the form sup(n,e)",
            b(a)
        ))),
    }
}

fn components(e: &Nat) -> Result<(Nat, Nat), Verdict> {
    match e.unpair() {
        Ok(p) => Ok(p),
        Err(PairError::NotAPair) => Err(Verdict::no(format!("{} is not a pair", b(e)))),
        Err(PairError::Opaque(o)) => Err(Verdict::unknown(o.to_string())),
    }
}

fn both(a: Verdict, c: Verdict, yes: impl Into<String>) -> Verdict {
    Verdict::all([a, c], yes)
}

fn tagged(side: &str, v: Verdict) -> Verdict {
    match v {
        Verdict::Yes(why) => Verdict::yes(format!("{side} disjunct: {why}")),
        Verdict::No(why) => Verdict::no(format!("{side} disjunct: {why}")),
        u => u,
    }
}

fn b(n: &Nat) -> String {
    n.brief(40)
}
