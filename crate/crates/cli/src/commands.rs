use std::path::Path;

use anyhow::{bail, Context, Result};
use erec_core::kernel::{fix, smn, Machine, Outcome, TraceEvent};
use erec_core::lfp::{
    iterate, probe_monotone_within, CompCarrier, CompOperator, FixpointResult, MonotoneOperator,
    TypeCarrier, TypeOperator,
};
use erec_core::literal::{parse_nat, parse_type};
use erec_core::realize::{run_lpo, Env, Formula, LpoInstance, PredSpec, Realizer};
use erec_core::universe::{gl_code, mkset, vnat_host, Bounds, Universe};
use erec_core::{Nat, Verdict};
use serde_json::json;

use crate::report::{Report, Status};
use crate::Global;

pub struct Ctx {
    pub machine: Machine,
    pub global: Global,
}

impl Ctx {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            fuel: self.global.fuel,
            probe: self.global.probe,
            ..Bounds::default()
        }
    }

    fn report(&self, command: &str, status: Status, summary: impl Into<String>) -> Report {
        let mut r = Report::new(command, status, summary);
        r.fuel = self.global.fuel;
        r.bounds = serde_json::to_value(self.bounds()).unwrap_or_default();
        r
    }
}

pub fn nat(s: &str) -> Result<Nat> {
    parse_nat(s).with_context(|| format!("bad natural {s:?}"))
}

fn nats(items: &[String]) -> Result<Vec<Nat>> {
    items.iter().map(|s| nat(s)).collect()
}

fn brief(n: &Nat) -> String {
    n.brief(60)
}

fn outcome_status(o: &Outcome) -> Status {
    match o {
        Outcome::Converged(_) => Status::Converged,
        Outcome::Stuck(_) => Status::Stuck,
        Outcome::Unknown { .. } => Status::Unknown,
    }
}

fn outcome_summary(o: &Outcome) -> String {
    match o {
        Outcome::Converged(v) => brief(v),
        Outcome::Stuck(r) => format!("{r:?}"),
        Outcome::Unknown { spent, cause } => format!("{cause:?} after {spent} fuel"),
    }
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::Yes(_) => Status::Yes,
        Verdict::No(_) => Status::No,
        Verdict::Unknown(_) => Status::Unknown,
    }
}

fn trace_lines(events: &[TraceEvent]) -> Vec<String> {
    events
        .iter()
        .map(|e| {
            let args: Vec<String> = e.args.iter().map(|a| a.brief(24)).collect();
            let result = e.result.as_ref().map_or("-".to_string(), |r| r.brief(24));
            format!(
                "{:indent$}{} {} [{}] -> {}{}",
                "",
                e.clause,
                e.code.brief(24),
                args.join(", "),
                result,
                if e.certified { " (certificate)" } else { "" },
                indent = 2 * e.depth
            )
        })
        .collect()
}

fn run_code(ctx: &Ctx, code: &Nat, args: &[Nat]) -> (Outcome, Option<Vec<String>>) {
    if ctx.global.trace {
        let (o, ev) = ctx.machine.apply_traced(code, args, ctx.global.fuel);
        (o, Some(trace_lines(&ev)))
    } else {
        (ctx.machine.apply(code, args, ctx.global.fuel), None)
    }
}

pub fn eval(ctx: &Ctx, code: &str, args: &[String]) -> Result<Report> {
    let (c, a) = (nat(code)?, nats(args)?);
    let (o, trace) = run_code(ctx, &c, &a);
    let mut r = ctx
        .report("eval", outcome_status(&o), outcome_summary(&o))
        .input("code", &c)
        .input("args", args.join(" "))
        .result(&o);
    r.trace = trace;
    Ok(r)
}

/// A built code, and when arguments are given, the law it should satisfy.
fn law(
    ctx: &Ctx,
    name: &str,
    built: Nat,
    lhs: (&Nat, Vec<Nat>),
    rhs: (&Nat, Vec<Nat>),
    checked: bool,
) -> Report {
    if !checked {
        return ctx
            .report(name, Status::Converged, brief(&built))
            .result(json!({ "code": built }));
    }
    let (l, trace) = run_code(ctx, lhs.0, &lhs.1);
    let rr = ctx.machine.apply(rhs.0, &rhs.1, ctx.global.fuel);
    // the built side pays a fixed overhead, so compare values, not fuel
    let agree = match (&l, &rr) {
        (Outcome::Converged(a), Outcome::Converged(b)) => a == b,
        (a, b) => !a.is_converged() && !b.is_converged(),
    };
    let status = if agree {
        Status::Agree
    } else {
        Status::Mismatch
    };
    let mut r = ctx
        .report(
            name,
            status,
            format!("{} vs {}", outcome_summary(&l), outcome_summary(&rr)),
        )
        .result(json!({ "code": built, "built": l, "direct": rr }));
    r.trace = trace;
    r
}

pub fn smn_cmd(ctx: &Ctx, p: &str, q: &str, args: &[String]) -> Result<Report> {
    let (p, q, m) = (nat(p)?, nat(q)?, nats(args)?);
    let s = smn(&p, &q);
    let mut direct = vec![q.clone()];
    direct.extend(m.iter().cloned());
    Ok(law(
        ctx,
        "smn",
        s.clone(),
        (&s, m),
        (&p, direct),
        !args.is_empty(),
    )
    .input("p", &p)
    .input("q", &q)
    .input("args", args.join(" ")))
}

pub fn fix_cmd(ctx: &Ctx, f: &str, args: &[String]) -> Result<Report> {
    let (f, x) = (nat(f)?, nats(args)?);
    let e = fix(&f);
    let mut direct = vec![e.clone()];
    direct.extend(x.iter().cloned());
    Ok(law(
        ctx,
        "fix",
        e.clone(),
        (&e, x),
        (&f, direct),
        !args.is_empty(),
    )
    .input("f", &f)
    .input("args", args.join(" ")))
}

pub fn member(ctx: &Ctx, x: &str, ty: &str, bound: Option<u64>) -> Result<Report> {
    let (x, t) = (nat(x)?, parse_type(ty)?);
    let mut bounds = ctx.bounds();
    if let Some(b) = bound {
        bounds.probe = b;
    }
    let u = Universe::with_bounds(&ctx.machine, bounds);
    let v = u.member(&x, &t);
    let mut r = ctx
        .report("member", verdict_status(&v), v.evidence())
        .input("x", &x)
        .input("type", ty)
        .result(&v);
    r.bounds = serde_json::to_value(bounds)?;
    Ok(r)
}

pub fn in_universe(ctx: &Ctx, ty: &str) -> Result<Report> {
    let t = parse_type(ty)?;
    let u = Universe::with_bounds(&ctx.machine, ctx.bounds());
    let v = u.in_universe(&t);
    Ok(ctx
        .report("in-universe", verdict_status(&v), v.evidence())
        .input("type", ty)
        .result(&v))
}

pub fn mkset_cmd(ctx: &Ctx, elems: &[String]) -> Result<Report> {
    let es = nats(elems)?;
    let s = mkset(&es);
    let u = Universe::with_bounds(&ctx.machine, ctx.bounds());
    let v = u.in_v(&s);
    Ok(ctx
        .report(
            "mkset",
            verdict_status(&v),
            format!("{} ({})", brief(&s), v.evidence()),
        )
        .input("elements", elems.join(" "))
        .result(json!({ "code": s, "in_v": v })))
}

pub fn eq(ctx: &Ctx, a: &str, b: &str) -> Result<Report> {
    let (a, b) = (nat(a)?, nat(b)?);
    let u = Universe::with_bounds(&ctx.machine, ctx.bounds());
    let t = match ctx
        .machine
        .apply(&gl_code(), &[a.clone(), b.clone()], ctx.global.fuel)
    {
        Outcome::Converged(t) => t,
        o => {
            return Ok(ctx
                .report("eq", Status::Unknown, format!("equality type: {o}"))
                .result(&o))
        }
    };
    let r = Realizer::new(&u);
    let phi = Formula::eq(
        erec_core::realize::Term::Lit(a.clone()),
        erec_core::realize::Term::Lit(b.clone()),
    );
    let v = r.refutable(&phi, &Env::new())?;
    // refutable: Yes means unequal
    let (status, summary) = match &v {
        Verdict::Yes(why) => (Status::No, format!("not equal: {why}")),
        Verdict::No(why) => (Status::Yes, format!("equal, {why}")),
        Verdict::Unknown(why) => (Status::Unknown, why.clone()),
    };
    Ok(ctx
        .report("eq", status, summary)
        .input("a", &a)
        .input("b", &b)
        .result(json!({ "type": t, "refutable": v })))
}

/// A formula given inline or as a file path.
pub fn formula_arg(src: &str) -> Result<Formula> {
    let text = if !src.trim_start().starts_with('(') && Path::new(src).exists() {
        std::fs::read_to_string(src).with_context(|| format!("reading {src}"))?
    } else {
        src.to_string()
    };
    Ok(Formula::parse(&text)?)
}

/// `name=literal` bindings; `(vnat n)` is accepted as a value.
pub fn bindings(items: &[String]) -> Result<Env> {
    let mut env = Env::new();
    for it in items {
        let Some((k, v)) = it.split_once('=') else {
            bail!("binding {it:?} is not name=value");
        };
        let v = v.trim();
        let val = match v.strip_prefix("(vnat").and_then(|r| r.strip_suffix(')')) {
            Some(n) => vnat_host(n.trim().parse().context("vnat index")?),
            None => nat(v)?,
        };
        env.insert(k.trim().to_string(), val);
    }
    Ok(env)
}

pub fn realize(ctx: &Ctx, formula: &str, index: &str, lets: &[String]) -> Result<Report> {
    let (phi, e, env) = (formula_arg(formula)?, nat(index)?, bindings(lets)?);
    let u = Universe::with_bounds(&ctx.machine, ctx.bounds());
    let v = Realizer::new(&u).realizes(&e, &phi, &env)?;
    Ok(ctx
        .report("realize", verdict_status(&v), v.evidence())
        .input("formula", &phi)
        .input("index", &e)
        .input("let", lets.join(" "))
        .result(&v))
}

pub fn search(ctx: &Ctx, formula: &str, bound: u64, lets: &[String]) -> Result<Report> {
    let (phi, env) = (formula_arg(formula)?, bindings(lets)?);
    let u = Universe::with_bounds(&ctx.machine, ctx.bounds());
    let r = Realizer::new(&u);
    let s = r.search(&phi, &env, bound)?;
    let (status, summary) = match (&s.realizer, s.phase) {
        (Some(e), Some(phase)) => (Status::Yes, format!("realizer {} ({phase:?})", brief(e))),
        _ => match r.refutable(&phi, &env)? {
            Verdict::Yes(why) => (Status::No, format!("no realizer exists: {why}")),
            _ => (
                Status::Unknown,
                format!("none among {} candidates or by synthesis", s.tried),
            ),
        },
    };
    Ok(ctx
        .report("search", status, summary)
        .input("formula", &phi)
        .input("bound", bound)
        .input("let", lets.join(" "))
        .result(&s))
}

pub struct LpoArgs<'a> {
    pub pred: &'a str,
    pub p: Option<&'a str>,
    pub r: Option<&'a str>,
    pub lets: &'a [String],
    pub literal_sg: bool,
    pub certify: bool,
}

pub fn lpo_demo(ctx: &Ctx, a: &LpoArgs) -> Result<Report> {
    let pred: PredSpec = a.pred.parse()?;
    let mut inst = LpoInstance::with_defaults(pred.clone());
    if a.p.is_some() || a.r.is_some() {
        let (Some(p), Some(r)) = (a.p, a.r) else {
            bail!("give both --P and --R, or neither");
        };
        inst.p = formula_arg(p)?;
        inst.r = formula_arg(r)?;
        // B defaults to the numerals at P-indices
        let hits: Vec<Nat> = (0..pred.tail_from())
            .filter(|&n| pred.holds(n))
            .map(vnat_host)
            .collect();
        inst.env = Env::from([("B".to_string(), mkset(&hits))]);
    }
    inst.env.extend(bindings(a.lets)?);
    let u = Universe::with_bounds(&ctx.machine, ctx.bounds());
    let r = Realizer::new(&u);
    let rep = run_lpo(&r, &inst, a.literal_sg, a.certify)?;
    let branch = match rep.branch {
        Some(erec_core::realize::Branch::Exists(n)) => format!("exists-branch, witness {n}"),
        Some(erec_core::realize::Branch::Forall) => "forall-branch".to_string(),
        None => "no branch".to_string(),
    };
    let correct = rep.is_correct(&pred);
    Ok(ctx
        .report(
            "lpo-demo",
            verdict_status(&rep.verdict),
            format!(
                "{branch}; {}; {}",
                rep.verdict,
                if correct { "correct" } else { "incorrect" }
            ),
        )
        .input("pred", &pred)
        .input("P", &inst.p)
        .input("R", &inst.r)
        .input("literal_sg", a.literal_sg)
        .input("certify", a.certify)
        .result(json!({ "report": rep, "correct": correct })))
}

fn stage_trace<O: MonotoneOperator>(
    name: &str,
    op: &O,
    res: &FixpointResult,
    per_stage: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    for (i, w) in res.stages.windows(2).enumerate() {
        let fresh: Vec<usize> = w[1].difference(&w[0]).collect();
        out.push(format!("{name} stage {}: +{} atoms", i + 1, fresh.len()));
        for &a in fresh.iter().take(per_stage) {
            out.push(format!("  {}", op.describe(a)));
        }
        if fresh.len() > per_stage {
            out.push(format!("  .. {} more", fresh.len() - per_stage));
        }
    }
    out
}

pub struct OracleArgs {
    pub bound: usize,
    pub depth: usize,
    pub nats: u64,
    pub types_bound: u64,
}

pub fn oracle_compare(ctx: &Ctx, a: &OracleArgs) -> Result<Report> {
    let m = &ctx.machine;
    let carrier = CompCarrier::generated(a.nats, a.depth, a.bound);
    let comp = CompOperator::new(m, &carrier);
    let cres = iterate(&comp)?;
    probe_monotone_within(&comp, &cres.lfp, 16, 7)?;
    let cc = comp.compare(&cres.lfp, ctx.global.fuel);

    let tcar = TypeCarrier::standard(a.types_bound);
    let types = TypeOperator::new(m, &tcar, ctx.global.fuel);
    let tres = iterate(&types)?;
    probe_monotone_within(&types, &tres.lfp, 16, 7)?;
    let u = Universe::with_bounds(m, ctx.bounds());
    let tc = types.compare(&tres.lfp, &u);

    let mismatches = cc.conflicts.len()
        + cc.missing.len()
        + cc.multivalued.len()
        + tc.conflicts.len()
        + tc.missing.len();
    let status = if mismatches == 0 {
        Status::Agree
    } else {
        Status::Mismatch
    };
    let summary = format!(
        "{}, {mismatches} mismatches (comp: {} codes, {} atoms, {} agreed, closed at stage {}; universe: {} checked, {} agreed, {} relativized)",
        if mismatches == 0 { "agree" } else { "disagree" },
        carrier.codes.len(),
        cc.atoms,
        cc.agreed,
        cres.closure_stage,
        tc.checked,
        tc.agreed,
        tc.relativized,
    );
    let mut r = ctx
        .report("oracle-compare", status, summary)
        .input("bound", a.bound)
        .input("depth", a.depth)
        .input("nats", a.nats)
        .input("types_bound", a.types_bound)
        .result(json!({ "comp": cc, "universe": tc, "comp_stages": cres.closure_stage, "universe_stages": tres.closure_stage }));
    if ctx.global.trace {
        let mut t = stage_trace("comp", &comp, &cres, 8);
        t.extend(stage_trace("universe", &types, &tres, 8));
        r.trace = Some(t);
    }
    Ok(r)
}

pub fn certify(ctx: &Ctx, file: &Path) -> Result<Report> {
    let cert = crate::certfile::load(file)?;
    let r = match ctx.machine.register(cert.clone(), ctx.global.fuel) {
        Ok(()) => ctx.report(
            "certify",
            Status::Yes,
            format!("certificate for {} accepted", brief(&cert.code)),
        ),
        Err(e) => ctx.report("certify", Status::No, format!("rejected: {e}")),
    };
    Ok(r.input("file", file.display()).result(&cert))
}
