//! Model reference documents generated from compiled models.

use std::collections::HashMap;
use std::fmt::Write;

use super::schema::{DiscreteKind, ParamKind, PowerBase, ServiceKind, VarKind, VarScope};
use super::CompiledModel;
use crate::expr::{default_tex_name, fmt_number, render_latex, Expr};

fn sym(name: &str, tex: &HashMap<String, String>) -> String {
    format!("${}$", tex.get(name).cloned().unwrap_or_else(|| default_tex_name(name)))
}

fn math(e: &Expr, tex: &HashMap<String, String>) -> String {
    format!("${}$", render_latex(e, tex))
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    if rows.is_empty() {
        out.push_str("(none)\n\n");
        return;
    }
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

/// Markdown reference for one model: parameters, variables, services,
/// discretes, initialization and residual equations in LaTeX.
pub fn render_docs(c: &CompiledModel) -> String {
    let tex = c.tex_names();
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", c.name);
    if !c.description.is_empty() {
        let _ = writeln!(out, "{}\n", c.description);
    }
    let yn = |b: bool| if b { "yes" } else { "no" };
    let _ = writeln!(
        out,
        "Group: {}. Power flow: {}. Time domain: {}.\n",
        c.group.as_deref().unwrap_or("none"),
        yn(c.flags.pflow),
        yn(c.flags.tds)
    );

    out.push_str("## Parameters\n\n");
    let rows: Vec<Vec<String>> = c
        .params
        .iter()
        .map(|p| {
            let mut props = Vec::new();
            if p.non_zero {
                props.push("non_zero".to_string());
            }
            match p.power_base {
                PowerBase::None => {}
                PowerBase::Power => props.push("power".into()),
                PowerBase::InversePower => props.push("inverse_power".into()),
            }
            if let ParamKind::Idx { model } = &p.kind {
                props.push(format!("idx({model})"));
            }
            vec![
                p.name.clone(),
                sym(&p.name, &tex),
                p.description.clone(),
                if p.is_idx() { String::new() } else { fmt_number(p.default) },
                p.unit.clone(),
                props.join(", "),
            ]
        })
        .collect();
    table(&mut out, &["Name", "Symbol", "Description", "Default", "Unit", "Properties"], &rows);

    out.push_str("## Variables\n\n");
    let rows: Vec<Vec<String>> = c
        .vars
        .iter()
        .map(|v| {
            let kind = match v.kind() {
                VarKind::State => "state",
                VarKind::Algeb => "algebraic",
            };
            let scope = match &v.spec.scope {
                VarScope::Internal => "internal".to_string(),
                VarScope::External { model, src, indexer } => format!("{model}.{src} via {indexer}"),
            };
            vec![v.name().to_string(), sym(v.name(), &tex), kind.into(), scope, v.spec.description.clone(), v.spec.unit.clone()]
        })
        .collect();
    table(&mut out, &["Name", "Symbol", "Type", "Scope", "Description", "Unit"], &rows);

    out.push_str("## Services\n\n");
    let rows: Vec<Vec<String>> = c
        .services
        .iter()
        .map(|s| {
            let (kind, def) = match (&s.spec.kind, &s.expr) {
                (ServiceKind::Const { .. }, Some(e)) => ("constant", math(e, &tex)),
                (ServiceKind::External { model, src, indexer }, _) => ("external", format!("{model}.{src} via {indexer}")),
                (ServiceKind::Reduce { source, indexer }, _) => ("reduce", format!("sum of {source} by {indexer}")),
                (ServiceKind::Repeat { source, indexer }, _) => ("repeat", format!("{source} by {indexer}")),
                _ => ("constant", String::new()),
            };
            vec![s.spec.name.clone(), sym(&s.spec.name, &tex), kind.into(), def]
        })
        .collect();
    table(&mut out, &["Name", "Symbol", "Kind", "Definition"], &rows);

    out.push_str("## Discrete components\n\n");
    let rows: Vec<Vec<String>> = c
        .discretes
        .iter()
        .map(|d| {
            let kind = match d.kind {
                DiscreteKind::HardLimiter => "hard limiter",
                DiscreteKind::AntiWindup => "anti-windup",
            };
            let flags: Vec<String> = d.flags().iter().map(|f| sym(f, &tex)).collect();
            vec![d.name.clone(), kind.into(), d.input.clone(), d.lower.clone(), d.upper.clone(), flags.join(", ")]
        })
        .collect();
    table(&mut out, &["Name", "Kind", "Input", "Lower", "Upper", "Flags"], &rows);

    out.push_str("## Initialization\n\n");
    let mut rows: Vec<Vec<String>> = c
        .init
        .sequential
        .iter()
        .map(|&i| {
            let v = &c.vars[i];
            vec![v.name().to_string(), sym(v.name(), &tex), "sequential".into(), math(v.v.as_ref().unwrap(), &tex)]
        })
        .collect();
    for (k, &i) in c.init.iterative.iter().enumerate() {
        let v = &c.vars[i];
        rows.push(vec![
            v.name().to_string(),
            sym(v.name(), &tex),
            "iterative".into(),
            format!("$0 = {}$", render_latex(&c.init.iterative_residuals[k].0, &tex)),
        ]);
    }
    table(&mut out, &["Name", "Symbol", "Method", "Equation"], &rows);

    for (title, list) in [("Differential equations", &c.states), ("Algebraic equations", &c.algebs)] {
        let _ = writeln!(out, "## {title}\n");
        let rows: Vec<Vec<String>> = list
            .iter()
            .filter_map(|&i| {
                let v = &c.vars[i];
                v.e.as_ref().map(|e| vec![v.name().to_string(), sym(v.name(), &tex), math(e, &tex)])
            })
            .collect();
        table(&mut out, &["Name", "Symbol", "Residual"], &rows);
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}
