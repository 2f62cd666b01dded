//! Result files and model documentation export.

use std::fmt::Write;
use std::path::Path;

use serde_json::json;

use super::{write_file, Result};
use crate::numeric::System;
use crate::routines::{EigenReport, PowerFlowResult, TdsResult};
use crate::symbolic::{render_docs, CompiledModel};

/// Decimal places of every number written to CSV.
const DECIMALS: usize = 12;

fn push_row(out: &mut String, vals: impl Iterator<Item = f64>) {
    for (k, v) in vals.enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.DECIMALS$}");
    }
    out.push('\n');
}

/// Time-major table: `t`, then states and algebraic variables in address order.
pub fn tds_csv(res: &TdsResult) -> String {
    let mut out = String::from("t");
    for n in res.x_names.iter().chain(&res.y_names) {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for ((t, x), y) in res.t.iter().zip(&res.x).zip(&res.y) {
        push_row(&mut out, std::iter::once(*t).chain(x.iter().copied()).chain(y.iter().copied()));
    }
    out
}

pub fn write_tds_csv(res: &TdsResult, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), tds_csv(res).as_bytes())
}

/// S-plane scatter data: one row per eigenvalue.
pub fn write_eigen_csv(report: &EigenReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("sigma,omega,zeta\n");
    for m in &report.modes {
        push_row(&mut out, [m.re, m.im, m.zeta].into_iter());
    }
    write_file(path.as_ref(), out.as_bytes())
}

/// Converged power flow as JSON: convergence data and the algebraic
/// variables of the power-flow models. Timing is left out so that
/// repeated runs write identical files.
pub fn pf_json(sys: &System, res: &PowerFlowResult) -> String {
    let n = sys.n_pf_algeb();
    let vars: serde_json::Map<String, serde_json::Value> =
        sys.dae.y_names[..n].iter().zip(&sys.dae.y[..n]).map(|(k, v)| (k.clone(), json!(v))).collect();
    let doc = json!({
        "converged": res.converged,
        "iterations": res.iterations,
        "residual": res.residual,
        "history": res.history,
        "variables": vars,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

/// One markdown file per model plus `index.md` linking them.
pub fn export_model_docs(models: &[&CompiledModel], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let mut index = String::from("# Model reference\n\n");
    for c in models {
        let file = format!("{}.md", c.name);
        write_file(&dir.join(&file), render_docs(c).as_bytes())?;
        let _ = writeln!(index, "- [{}]({file}) ({})", c.name, c.group.as_deref().unwrap_or("-"));
    }
    write_file(&dir.join("index.md"), index.as_bytes())
}
