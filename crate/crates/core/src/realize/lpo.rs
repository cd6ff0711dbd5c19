//! Realizers for `(exists x in omega) P(x) or (forall x in omega) R(x)` from a
//! family `e` whose `n`-th value realizes `P(n) or R(n)`.
//!
//! The transform searches for the least `n` whose tag is 0 with the functional
//! `E`. It answers the universal side only through a totality certificate for
//! the tag function.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use super::check::Realizer;
use super::formula::{Env, Formula, FormulaError, Term};
use crate::kernel::{table, CertificateError, Expr, Outcome, TotalityCertificate};
use crate::nat::Nat;
use crate::universe::{mkset, omega, vnat_host};
use crate::verdict::Verdict;

/// Decidable predicate on naturals selecting the `P` side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PredSpec {
    Never,
    Always,
    Equals(u64),
    Below(u64),
    AtLeast(u64),
    OneOf(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad predicate {0:?}: expected never, always, n==k, n<k, n>=k or n in {{a,b,..}}")]
pub struct PredParseError(pub String);

impl FromStr for PredSpec {
    type Err = PredParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PredParseError(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let num = |r: &str| r.parse::<u64>().map_err(|_| err());
        if t == "never" {
            Ok(PredSpec::Never)
        } else if t == "always" {
            Ok(PredSpec::Always)
        } else if let Some(r) = t.strip_prefix("n==") {
            num(r).map(PredSpec::Equals)
        } else if let Some(r) = t.strip_prefix("n>=") {
            num(r).map(PredSpec::AtLeast)
        } else if let Some(r) = t.strip_prefix("n<") {
            num(r).map(PredSpec::Below)
        } else if let Some(r) = t.strip_prefix("nin{").and_then(|r| r.strip_suffix('}')) {
            if r.is_empty() {
                return Ok(PredSpec::OneOf(vec![]));
            }
            let mut v = r.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            v.sort_unstable();
            v.dedup();
            Ok(PredSpec::OneOf(v))
        } else {
            Err(err())
        }
    }
}

impl fmt::Display for PredSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredSpec::Never => f.write_str("never"),
            PredSpec::Always => f.write_str("always"),
            PredSpec::Equals(k) => write!(f, "n=={k}"),
            PredSpec::Below(k) => write!(f, "n<{k}"),
            PredSpec::AtLeast(k) => write!(f, "n>={k}"),
            PredSpec::OneOf(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "n in {{{}}}", items.join(","))
            }
        }
    }
}

impl PredSpec {
    pub fn holds(&self, n: u64) -> bool {
        match self {
            PredSpec::Never => false,
            PredSpec::Always => true,
            PredSpec::Equals(k) => n == *k,
            PredSpec::Below(k) => n < *k,
            PredSpec::AtLeast(k) => n >= *k,
            PredSpec::OneOf(v) => v.contains(&n),
        }
    }

    /// From this index on, `holds` is constant.
    pub fn tail_from(&self) -> u64 {
        match self {
            PredSpec::Never | PredSpec::Always => 0,
            PredSpec::Equals(k) => k + 1,
            PredSpec::Below(k) | PredSpec::AtLeast(k) => *k,
            PredSpec::OneOf(v) => v.last().map_or(0, |m| m + 1),
        }
    }

    pub fn tail_holds(&self) -> bool {
        self.holds(self.tail_from())
    }

    /// Least index where the predicate holds.
    pub fn first(&self) -> Option<u64> {
        (0..=self.tail_from()).find(|&n| self.holds(n))
    }
}

/// A predicate with the formulas realized on each side.
#[derive(Debug, Clone)]
pub struct LpoInstance {
    pub pred: PredSpec,
    pub var: String,
    pub p: Formula,
    pub r: Formula,
    pub env: Env,
}

impl LpoInstance {
    /// `P(x) = x in B` and `R(x) = not x in B`, with `B` the numerals where the
    /// predicate holds. When it holds on a tail, `B` collects the numerals
    /// where it fails and the roles swap, so that `B` stays finite.
    pub fn with_defaults(pred: PredSpec) -> LpoInstance {
        let hit = !pred.tail_holds();
        let members: Vec<Nat> = (0..pred.tail_from())
            .filter(|&n| pred.holds(n) == hit)
            .map(vnat_host)
            .collect();
        let inside = Formula::In(Term::var("x"), Term::var("B"));
        let outside = Formula::not(inside.clone());
        let env = Env::from([("B".to_string(), mkset(&members))]);
        let (p, r) = if hit {
            (inside, outside)
        } else {
            (outside, inside)
        };
        LpoInstance {
            pred,
            var: "x".into(),
            p,
            r,
            env,
        }
    }

    /// `(ex-in x omega P) or (all-in x omega R)`.
    pub fn formula(&self) -> Formula {
        lpo_formula(&self.var, &self.p, &self.r)
    }
}

#[derive(Debug, Error)]
pub enum LpoError {
    #[error("no realizer found for instance {n} of the {side} formula")]
    NoInstanceRealizer { n: u64, side: &'static str },
    #[error("tail instances need different realizers from {from} on")]
    NonUniformTail { from: u64 },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("certificate rejected: {0}")]
    Certificate(#[from] CertificateError),
}

/// A code `e` with `{e}(n) = (tag, r)` where `r` realizes `P(n)` (tag 0) or
/// `R(n)` (tag 1).
#[derive(Debug, Clone, Serialize)]
pub struct DisjunctionFamily {
    pub code: Nat,
    pub tags: Vec<u8>,
    pub tail_from: u64,
    pub tail_tag: u8,
    /// Registered when the tail tag is 1, so that the search may answer "none".
    pub certificate: Option<TotalityCertificate>,
}

const TAIL_SAMPLES: u64 = 4;

/// Build the family for `pred`, realizing each instance by synthesis.
pub fn build_disjunction_family(
    realizer: &Realizer,
    inst: &LpoInstance,
    certify: bool,
) -> Result<DisjunctionFamily, LpoError> {
    let LpoInstance {
        pred,
        var,
        p,
        r,
        env,
    } = inst;
    let instance = |n: u64| -> Result<(u8, Nat), LpoError> {
        let (tag, side, f) = if pred.holds(n) {
            (0, "P", p)
        } else {
            (1, "R", r)
        };
        let mut env = env.clone();
        env.insert(var.clone(), vnat_host(n));
        realizer
            .synthesize(f, &env)?
            .map(|w| (tag, w))
            .ok_or(LpoError::NoInstanceRealizer { n, side })
    };
    let t = pred.tail_from();
    let mut tags = Vec::new();
    let mut entries = Vec::new();
    for n in 0..t {
        let (tag, w) = instance(n)?;
        tags.push(tag);
        entries.push(Nat::pair(&Nat::from(tag as u64), &w));
    }
    let (tail_tag, tail) = instance(t)?;
    for n in t + 1..t + TAIL_SAMPLES {
        if instance(n)?.1 != tail {
            return Err(LpoError::NonUniformTail { from: t });
        }
    }
    let code = table(&entries, Nat::pair(&Nat::from(tail_tag as u64), &tail));
    let mut certificate = None;
    if certify && tail_tag == 1 {
        let cert = TotalityCertificate {
            code: tag_code(),
            position: 0,
            context: vec![code.clone()],
            prefix: tags.iter().map(|&g| Nat::from(g as u64)).collect(),
            tail_from: t,
            tail_value: Nat::one(),
        };
        realizer
            .universe()
            .machine()
            .register(cert.clone(), realizer.universe().bounds().fuel)?;
        certificate = Some(cert);
    }
    Ok(DisjunctionFamily {
        code,
        tags,
        tail_from: t,
        tail_tag,
        certificate,
    })
}

/// `{b}(n, e) = ({e}(n))0`, the tag of the `n`-th instance.
pub fn tag_code() -> Nat {
    static B: OnceLock<Nat> = OnceLock::new();
    B.get_or_init(|| Expr::fst(Expr::apply(Expr::arg(1), vec![Expr::arg(0)])).compile(2))
        .clone()
}

/// Unary code sending a family `e` to a realizer of the disjunction.
///
/// With `k = E(b, e)` it returns `(tag(k), {c}(k, e))`, where
/// `{c}(n+1, e) = (n, ({e}(n))1)` and `{c}(0, e)` indexes `x -> ({e}(x))1`.
/// The tag is 0 exactly when `k > 0`. `literal_sg` uses `sg(k)` instead,
/// which selects the wrong side.
pub fn lpo_code(literal_sg: bool) -> Nat {
    static CODES: OnceLock<[Nat; 2]> = OnceLock::new();
    let codes = CODES.get_or_init(|| {
        use Expr as E;
        let second = E::snd(E::apply(E::arg(0), vec![E::arg(1)])).compile(2);
        let build = |literal: bool| {
            let (on_zero, on_hit) = if literal { (0u64, 1u64) } else { (1, 0) };
            let (k, e) = (E::arg(0), E::arg(1));
            let tag = E::if_eq(k.clone(), E::lit(0u64), E::lit(on_zero), E::lit(on_hit));
            let n = E::pred(k.clone());
            let found = E::pair(n.clone(), E::snd(E::apply(e.clone(), vec![n])));
            let c = E::if_eq(k, E::lit(0u64), E::smn(E::Lit(second.clone()), e), found);
            let h = E::pair(tag, c).compile(2);
            E::call(h, vec![E::search(tag_code(), vec![E::arg(0)]), E::arg(0)]).compile(1)
        };
        [build(false), build(true)]
    });
    codes[literal_sg as usize].clone()
}

/// Apply the transform to a family code.
pub fn lpo_transform(realizer: &Realizer, family: &Nat, literal_sg: bool) -> Outcome {
    realizer
        .universe()
        .apply(&lpo_code(literal_sg), std::slice::from_ref(family))
}

/// `(ex-in x omega P) or (all-in x omega R)`.
pub fn lpo_formula(var: &str, p: &Formula, r: &Formula) -> Formula {
    Formula::or(
        Formula::ExIn(var.to_string(), Term::Lit(omega()), Box::new(p.clone())),
        Formula::AllIn(var.to_string(), Term::Lit(omega()), Box::new(r.clone())),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", content = "index")]
pub enum Branch {
    Exists(u64),
    Forall,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpoReport {
    pub pred: String,
    pub literal_sg: bool,
    pub family: DisjunctionFamily,
    pub outcome: Outcome,
    pub branch: Option<Branch>,
    pub verdict: Verdict,
}

impl LpoReport {
    /// The branch matches the predicate and the realizer check did not fail.
    /// The universal side can only be spot-checked, so `Unknown` counts there.
    pub fn is_correct(&self, pred: &PredSpec) -> bool {
        match (pred.first(), self.branch) {
            (Some(n), Some(Branch::Exists(m))) => n == m && self.verdict.is_yes(),
            (None, Some(Branch::Forall)) => !self.verdict.is_no(),
            _ => false,
        }
    }
}

/// Build the family for `pred`, run the transform and check the result.
pub fn run_lpo(
    realizer: &Realizer,
    inst: &LpoInstance,
    literal_sg: bool,
    certify: bool,
) -> Result<LpoReport, LpoError> {
    let family = build_disjunction_family(realizer, inst, certify)?;
    let outcome = lpo_transform(realizer, &family.code, literal_sg);
    let (branch, verdict) = match &outcome {
        Outcome::Converged(res) => {
            let branch = res.unpair().ok().and_then(|(tag, c)| match tag.to_u64() {
                Some(0) => c.fst().ok()?.to_u64().map(Branch::Exists),
                Some(1) => Some(Branch::Forall),
                _ => None,
            });
            (branch, realizer.realizes(res, &inst.formula(), &inst.env)?)
        }
        Outcome::Stuck(why) => (None, Verdict::no(format!("transform is stuck: {why:?}"))),
        o => (
            None,
            Verdict::unknown(format!("transform did not finish: {o}")),
        ),
    };
    Ok(LpoReport {
        pred: inst.pred.to_string(),
        literal_sg,
        family,
        outcome,
        branch,
        verdict,
    })
}
