//! Built-in device models.

mod builtin;

pub use builtin::{builtin_schemas, bus, gencls, line, pq, pv, shunt, slack, tgov1, tgov1_blocks};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::numeric::{FieldValue, NumericError, System, SystemConfig};
use crate::symbolic::{CacheOutcome, ModelCache, SchemaError};

/// Compile (or load from `cache`) every built-in model and register them.
pub fn builtin_system(cache: &ModelCache, config: SystemConfig) -> Result<(System, Vec<CacheOutcome>), SchemaError> {
    let mut compiled = Vec::new();
    let mut outcomes = Vec::new();
    for s in builtin_schemas() {
        let (c, o) = cache.load_or_compile(&s)?;
        compiled.push(Arc::new(c));
        outcomes.push(o);
    }
    Ok((System::from_shared(compiled, config), outcomes))
}

/// Scale power-based parameters to the system base; refuses a second pass.
pub fn per_unit_convert(sys: &mut System) -> Result<(), NumericError> {
    sys.per_unit_convert()
}

fn companion(pq: &str) -> String {
    format!("{pq}_z")
}

/// Add a zero-admittance Shunt beside every PQ load so that loads can later
/// be converted without reallocating the system.
pub fn add_pq_companions(sys: &mut System) -> Result<(), NumericError> {
    let Some(m) = sys.model_index("PQ") else { return Ok(()) };
    let buses = sys.refs_of(m, "bus");
    let idx = sys.models[m].idx.clone();
    for (pq, bus) in idx.iter().zip(buses) {
        let row: BTreeMap<String, FieldValue> = [
            ("idx".to_string(), FieldValue::Text(companion(pq))),
            ("bus".to_string(), FieldValue::Text(bus)),
        ]
        .into_iter()
        .collect();
        sys.add_device("Shunt", &row)?;
    }
    Ok(())
}

/// Replace every online PQ load by the shunt drawing the same power at the
/// present bus voltage: g = p0 / v^2, b = -q0 / v^2. Offline loads stay
/// constant power so that they can still be switched in.
pub fn convert_pq_to_shunt(sys: &mut System) -> Result<(), NumericError> {
    let Some(m) = sys.model_index("PQ") else { return Ok(()) };
    let Some(s) = sys.model_index("Shunt") else { return Ok(()) };
    for d in 0..sys.models[m].n() {
        if sys.models[m].status()[d] == 0.0 {
            continue;
        }
        let pq = sys.models[m].idx[d].clone();
        let bad = |message: &str| NumericError::BadField {
            model: "PQ".into(),
            field: "bus".into(),
            idx: pq.clone(),
            message: message.into(),
        };
        let z = sys.models[s].device(&companion(&pq)).ok_or_else(|| bad("no companion shunt"))?;
        let v = sys.value_of(m, d, "v").unwrap_or(0.0);
        if v == 0.0 {
            return Err(bad("zero bus voltage"));
        }
        let p0 = sys.value_of(m, d, "p0").unwrap_or(0.0);
        let q0 = sys.value_of(m, d, "q0").unwrap_or(0.0);
        let md = &mut sys.models[s];
        md.param_mut("g").unwrap()[z] = p0 / (v * v);
        md.param_mut("b").unwrap()[z] = -q0 / (v * v);
        sys.set_status("PQ", &pq, 0.0)?;
    }
    Ok(())
}

/// Group membership of the built-in models.
pub fn group_of(model: &str) -> Option<&'static str> {
    Some(match model {
        "Bus" => "ACTopology",
        "PQ" => "StaticLoad",
        "PV" | "Slack" => "StaticGen",
        "Shunt" => "StaticShunt",
        "Line" => "ACLine",
        "GENCLS" => "SynGen",
        "TGOV1" | "TGOV1B" => "TurbineGov",
        _ => return None,
    })
}
