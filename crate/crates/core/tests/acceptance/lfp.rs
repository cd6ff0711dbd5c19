use erec_core::kernel::{const_code, efun, zero_at, Machine, TotalityCertificate, DEFAULT_FUEL};
use erec_core::lfp::{
    iterate, probe_monotone_within, CompCarrier, CompOperator, MonotoneOperator, TypeCarrier,
    TypeOperator,
};
use erec_core::universe::Universe;
use erec_core::Nat;

use crate::ensure;

fn comp(m: &Machine, carrier: &CompCarrier, label: &str) -> Result<(usize, usize), String> {
    let op = CompOperator::new(m, carrier);
    let res = iterate(&op).map_err(|e| format!("{label}: {e}"))?;
    probe_monotone_within(&op, &res.lfp, 16, 7).map_err(|e| format!("{label}: {e}"))?;
    ensure(res.closure_stage <= op.carrier(), || {
        format!(
            "{label}: {} stages for {} atoms",
            res.closure_stage,
            op.carrier()
        )
    })?;
    let c = op.compare(&res.lfp, DEFAULT_FUEL);
    ensure(c.is_consistent() && c.agreed == c.atoms, || {
        format!("{label}: {c:?}")
    })?;
    Ok((c.atoms, res.closure_stage))
}

pub fn oracles() -> Result<String, String> {
    let m = Machine::new();
    let generated = CompCarrier::generated(4, 6, 200);
    let (atoms, stages) = comp(&m, &generated, "generated carrier")?;

    // searches with and without a zero; the second is total by certificate
    let plus = const_code(2, 1u64);
    m.register(
        TotalityCertificate {
            code: plus.clone(),
            position: 0,
            context: vec![Nat::zero()],
            prefix: vec![],
            tail_from: 0,
            tail_value: Nat::one(),
        },
        DEFAULT_FUEL,
    )
    .map_err(|e| e.to_string())?;
    let searches = CompCarrier::new(4, [efun(1, zero_at(2)), efun(1, plus), efun(1, zero_at(0))]);
    let (satoms, _) = comp(&m, &searches, "search carrier")?;

    let tcar = TypeCarrier::standard(40);
    let types = TypeOperator::new(&m, &tcar, DEFAULT_FUEL);
    let tres = iterate(&types).map_err(|e| e.to_string())?;
    probe_monotone_within(&types, &tres.lfp, 16, 7).map_err(|e| e.to_string())?;
    let u = Universe::new(&m);
    let tc = types.compare(&tres.lfp, &u);
    ensure(tc.is_consistent(), || format!("universe: {tc:?}"))?;

    Ok(format!(
        "{} codes, {atoms} atoms closed at stage {stages}; {satoms} search atoms; universe {} checked, {} agreed, {} relativized",
        generated.codes.len(),
        tc.checked,
        tc.agreed,
        tc.relativized
    ))
}
