//! MATPOWER case subset: `mpc.baseMVA` plus the bus, gen and branch matrices.

use std::collections::BTreeMap;
use std::path::Path;

use super::case::{CaseFile, Row};
use super::{read_file, IoError, Result};
use crate::numeric::FieldValue;

const BUS_COLS: usize = 13;
const GEN_COLS: usize = 10;
const BRANCH_COLS: usize = 11;

struct Matrix {
    line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

fn strip_comment(s: &str) -> &str {
    s.split('%').next().unwrap_or("")
}

/// Parse `mpc.<name> = [ ... ];` blocks and `mpc.baseMVA = <value>;`.
fn scan(text: &str) -> Result<(Option<f64>, BTreeMap<String, Matrix>)> {
    let mut base = None;
    let mut mats = BTreeMap::new();
    let mut open: Option<(String, Matrix)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut s = strip_comment(raw).trim();
        if open.is_none() {
            let Some(rest) = s.strip_prefix("mpc.") else { continue };
            let Some((name, value)) = rest.split_once('=') else { continue };
            let (name, value) = (name.trim().to_string(), value.trim());
            if let Some(body) = value.strip_prefix('[') {
                open = Some((name, Matrix { line: line_no, rows: Vec::new() }));
                s = body;
            } else if name == "baseMVA" {
                let v = value.trim_end_matches(';').trim();
                base = Some(v.parse::<f64>().map_err(|_| IoError::Matpower {
                    line: line_no,
                    message: format!("invalid baseMVA `{v}`"),
                })?);
                continue;
            } else {
                continue;
            }
        }
        let (name, mut m) = open.take().expect("inside a matrix block");
        let (body, closed) = match s.split_once(']') {
            Some((b, _)) => (b, true),
            None => (s, false),
        };
        for chunk in body.split(';') {
            let cells: Vec<&str> = chunk.split(|c: char| c.is_whitespace() || c == ',').filter(|c| !c.is_empty()).collect();
            if cells.is_empty() {
                continue;
            }
            let vals = cells
                .iter()
                .map(|c| {
                    c.parse::<f64>().map_err(|_| IoError::Matpower { line: line_no, message: format!("malformed number `{c}`") })
                })
                .collect::<Result<Vec<f64>>>()?;
            m.rows.push((line_no, vals));
        }
        if closed {
            mats.insert(name, m);
        } else {
            open = Some((name, m));
        }
    }
    if let Some((name, m)) = open {
        return Err(IoError::Matpower { line: m.line, message: format!("matrix `{name}` is not closed") });
    }
    Ok((base, mats))
}

fn row(fields: &[(&str, FieldValue)]) -> Row {
    fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn num(v: f64) -> FieldValue {
    FieldValue::Num(v)
}

fn text(s: &str) -> FieldValue {
    FieldValue::Text(s.to_string())
}

/// Convert MATPOWER text into a native case. Bus numbers become Bus idx
/// values; loads are `PQ_<bus>`, shunts `Shunt_<bus>`, branches `Line_<k>`
/// in file order. Generators sharing a bus are merged into one device.
pub fn parse_matpower(text_in: &str) -> Result<CaseFile> {
    let (base, mats) = scan(text_in)?;
    let base = base.ok_or(IoError::Matpower { line: 0, message: "missing `mpc.baseMVA`".into() })?;
    let get = |name: &str, width: usize| -> Result<&Matrix> {
        let m = mats.get(name).ok_or_else(|| IoError::Matpower { line: 0, message: format!("missing `mpc.{name}` block") })?;
        if let Some((line, r)) = m.rows.iter().find(|(_, r)| r.len() < width) {
            return Err(IoError::Matpower { line: *line, message: format!("`mpc.{name}` row has {} columns, expected at least {width}", r.len()) });
        }
        Ok(m)
    };
    let (bus, gen, branch) = (get("bus", BUS_COLS)?, get("gen", GEN_COLS)?, get("branch", BRANCH_COLS)?);

    let mut case = CaseFile { base_mva: base, ..CaseFile::default() };
    let mut kv = BTreeMap::new();
    let mut types = BTreeMap::new();
    let tables = &mut case.tables;
    for (_, r) in &bus.rows {
        let id = FieldValue::Num(r[0]).as_idx();
        kv.insert(id.clone(), r[9]);
        types.insert(id.clone(), r[1] as i64);
        tables.entry("Bus".into()).or_default().push(row(&[
            ("idx", text(&id)),
            ("u", num(f64::from(r[1] as i64 != 4))),
            ("Vn", num(r[9])),
            ("v0", num(r[7])),
            ("a0", num(r[8].to_radians())),
            ("area", num(r[6])),
        ]));
        if r[2] != 0.0 || r[3] != 0.0 {
            tables.entry("PQ".into()).or_default().push(row(&[
                ("idx", text(&format!("PQ_{id}"))),
                ("bus", text(&id)),
                ("Vn", num(r[9])),
                ("p0", num(r[2] / base)),
                ("q0", num(r[3] / base)),
            ]));
        }
        if r[4] != 0.0 || r[5] != 0.0 {
            tables.entry("Shunt".into()).or_default().push(row(&[
                ("idx", text(&format!("Shunt_{id}"))),
                ("bus", text(&id)),
                ("g", num(r[4] / base)),
                ("b", num(r[5] / base)),
            ]));
        }
    }

    // (p, q, v, online) merged per bus in first-appearance order
    let mut gens: Vec<(String, f64, f64, f64, bool)> = Vec::new();
    for (line, r) in &gen.rows {
        let id = FieldValue::Num(r[0]).as_idx();
        if !types.contains_key(&id) {
            return Err(IoError::Matpower { line: *line, message: format!("generator at unknown bus {id}") });
        }
        let on = r[7] > 0.0;
        match gens.iter_mut().find(|g| g.0 == id) {
            Some(g) => {
                if on {
                    if !g.4 {
                        g.3 = r[5];
                    }
                    g.1 += r[1];
                    g.2 += r[2];
                    g.4 = true;
                }
            }
            None => gens.push((id, if on { r[1] } else { 0.0 }, if on { r[2] } else { 0.0 }, r[5], on)),
        }
    }
    for (id, p, q, v, on) in gens {
        let model = match types[&id] {
            3 => "Slack",
            2 => "PV",
            _ => {
                // generation at a load bus: negative constant-power load
                tables.entry("PQ".into()).or_default().push(row(&[
                    ("idx", text(&format!("PQ_gen_{id}"))),
                    ("u", num(f64::from(on))),
                    ("bus", text(&id)),
                    ("p0", num(-p / base)),
                    ("q0", num(-q / base)),
                ]));
                continue;
            }
        };
        let mut r = row(&[
            ("idx", text(&id)),
            ("u", num(f64::from(on))),
            ("bus", text(&id)),
            ("Sn", num(base)),
            ("Vn", num(kv[&id])),
            ("p0", num(p / base)),
            ("q0", num(q / base)),
            ("v0", num(v)),
        ]);
        if model == "Slack" {
            let a0 = case_bus_angle(tables, &id);
            r.insert("a0".into(), num(a0));
        }
        tables.entry(model.into()).or_default().push(r);
    }

    for (k, (line, r)) in branch.rows.iter().enumerate() {
        let (b1, b2) = (FieldValue::Num(r[0]).as_idx(), FieldValue::Num(r[1]).as_idx());
        for b in [&b1, &b2] {
            if !kv.contains_key(b) {
                return Err(IoError::Matpower { line: *line, message: format!("branch to unknown bus {b}") });
            }
        }
        tables.entry("Line".into()).or_default().push(row(&[
            ("idx", text(&format!("Line_{k}"))),
            ("u", num(f64::from(r[10] > 0.0))),
            ("bus1", text(&b1)),
            ("bus2", text(&b2)),
            ("Sn", num(base)),
            ("Vn1", num(kv[&b1])),
            ("Vn2", num(kv[&b2])),
            ("r", num(r[2])),
            ("x", num(r[3])),
            ("b", num(r[4])),
            ("tap", num(if r[8] == 0.0 { 1.0 } else { r[8] })),
            ("phi", num(r[9].to_radians())),
        ]));
    }
    Ok(case)
}

fn case_bus_angle(tables: &BTreeMap<String, Vec<Row>>, id: &str) -> f64 {
    tables["Bus"]
        .iter()
        .find(|r| r.get("idx").map(FieldValue::as_idx).as_deref() == Some(id))
        .and_then(|r| r.get("a0")?.as_num())
        .unwrap_or(0.0)
}

pub fn load_matpower(path: impl AsRef<Path>) -> Result<CaseFile> {
    parse_matpower(&read_file(path.as_ref())?)
}
