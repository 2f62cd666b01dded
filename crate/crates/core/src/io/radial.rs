//! Synthetic radial feeder for scaling runs.

use std::collections::BTreeMap;

use super::case::{CaseFile, Row};
use crate::numeric::FieldValue;

/// `n` buses in a chain: a slack at the head, a light load on every other
/// bus and a PV unit every 50 buses to hold the voltage profile.
pub fn radial_case(n: usize) -> CaseFile {
    let mut case = CaseFile::default();
    let t = &mut case.tables;
    let row = |f: &[(&str, FieldValue)]| -> Row { f.iter().map(|(k, v)| (k.to_string(), v.clone())).collect() };
    let id = |k: usize| FieldValue::Text(format!("{}", k + 1));
    let push = |t: &mut BTreeMap<String, Vec<Row>>, m: &str, r: Row| t.entry(m.into()).or_default().push(r);
    for k in 0..n {
        push(t, "Bus", row(&[("idx", id(k)), ("Vn", 110.0.into())]));
        if k == 0 {
            push(t, "Slack", row(&[("idx", "G1".into()), ("bus", id(k)), ("v0", 1.0.into())]));
            continue;
        }
        push(t, "Line", row(&[("idx", FieldValue::Text(format!("L{k}"))), ("bus1", id(k - 1)), ("bus2", id(k)), ("r", 0.001.into()), ("x", 0.005.into()), ("b", 0.002.into())]));
        if k % 50 == 0 {
            push(t, "PV", row(&[("idx", FieldValue::Text(format!("G{}", k + 1))), ("bus", id(k)), ("p0", 0.5.into()), ("v0", 1.0.into())]));
        } else {
            push(t, "PQ", row(&[("idx", FieldValue::Text(format!("L{}", k + 1))), ("bus", id(k)), ("p0", 0.01.into()), ("q0", 0.004.into())]));
        }
    }
    case
}
