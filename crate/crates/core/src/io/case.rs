//! Native JSON case format: model names as keys, arrays of row objects.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, IoError, Result};
use crate::models::{self, builtin_schemas};
use crate::numeric::{FieldValue, System, SystemConfig};
use crate::symbolic::{CacheOutcome, ModelCache};

pub type Row = BTreeMap<String, FieldValue>;

/// Tables accepted in a case but not simulated as such. GENROU rows feed
/// the classical machine; EXDC2 rows are kept untouched.
pub const STORED_TABLES: [&str; 2] = ["GENROU", "EXDC2"];

/// Columns of a GENROU row consumed by GENCLS.
const GENROU_TO_GENCLS: [&str; 11] = ["idx", "name", "u", "bus", "gen", "Sn", "Vn", "fn", "D", "M", "xd1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFile {
    #[serde(rename = "baseMVA", default = "default_base")]
    pub base_mva: f64,
    #[serde(default = "default_freq")]
    pub freq: f64,
    #[serde(flatten)]
    pub tables: BTreeMap<String, Vec<Row>>,
}

fn default_base() -> f64 {
    100.0
}

fn default_freq() -> f64 {
    60.0
}

impl Default for CaseFile {
    fn default() -> Self {
        CaseFile { base_mva: 100.0, freq: 60.0, tables: BTreeMap::new() }
    }
}

impl CaseFile {
    /// Parse and validate JSON text; idx fields become strings.
    pub fn parse(text: &str) -> Result<Self> {
        let mut case: CaseFile = serde_json::from_str(text)
            .map_err(|e| IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        case.normalize()?;
        Ok(case)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serializes") + "\n"
    }

    pub fn rows(&self, model: &str) -> &[Row] {
        self.tables.get(model).map_or(&[], Vec::as_slice)
    }

    fn normalize(&mut self) -> Result<()> {
        let schemas = builtin_schemas();
        for (name, rows) in &mut self.tables {
            let refs: Vec<String> = match schemas.iter().find(|s| &s.name == name) {
                Some(s) => s.params().filter(|p| p.is_idx()).map(|p| p.name.clone()).collect(),
                None if STORED_TABLES.contains(&name.as_str()) => {
                    ["bus", "gen", "syn"].iter().map(|s| s.to_string()).collect()
                }
                None => {
                    return Err(IoError::Schema {
                        model: name.clone(),
                        field: String::new(),
                        message: "unknown model".into(),
                    })
                }
            };
            let mut seen = std::collections::HashSet::new();
            for row in rows.iter_mut() {
                for (k, v) in row.iter_mut() {
                    if k == "idx" || refs.contains(k) {
                        *v = FieldValue::Text(v.as_idx());
                    }
                }
                if let Some(idx) = row.get("idx") {
                    if !seen.insert(idx.as_idx()) {
                        return Err(IoError::Schema {
                            model: name.clone(),
                            field: "idx".into(),
                            message: format!("duplicate idx `{}`", idx.as_idx()),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn load_case(path: impl AsRef<Path>) -> Result<CaseFile> {
    CaseFile::parse(&read_file(path.as_ref())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Prepare companion shunts so loads can become impedances after power flow.
    pub pq_companions: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { pq_companions: true }
    }
}

/// Load a case into a system of built-in models, convert to per unit and set up.
pub fn build_system(case: &CaseFile, cache: &ModelCache, opts: BuildOptions) -> Result<(System, Vec<CacheOutcome>)> {
    let config = SystemConfig { base_mva: case.base_mva, freq: case.freq };
    let (mut sys, outcomes) = models::builtin_system(cache, config)?;
    let order: Vec<String> = sys.models.iter().map(|m| m.model.name.clone()).collect();
    for name in &order {
        if name == "GENCLS" {
            for row in case.rows("GENROU") {
                let r: Row = row.iter().filter(|(k, _)| GENROU_TO_GENCLS.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
                sys.add_device(name, &r)?;
            }
        }
        for row in case.rows(name) {
            sys.add_device(name, row)?;
        }
    }
    if opts.pq_companions {
        models::add_pq_companions(&mut sys)?;
    }
    sys.per_unit_convert()?;
    sys.setup()?;
    Ok((sys, outcomes))
}
