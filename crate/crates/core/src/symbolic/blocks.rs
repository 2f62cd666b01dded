//! Transfer-function blocks expanded into plain elements.

use std::collections::{BTreeMap, HashSet};

use super::schema::{BlockKind, BlockSpec, DiscreteSpec, Element, ModelSchema, VarSpec};
use super::SchemaError;
use crate::expr::Expr;

/// Fill a template whose placeholders are written `$name`.
fn fill(template: &str, args: &BTreeMap<&str, Expr>) -> String {
    // placeholders are parsed as symbols prefixed with `__`
    let src = template.replace('$', "__");
    let e = Expr::parse(&src).expect("block templates are valid");
    let map: BTreeMap<String, Expr> = args.iter().map(|(k, v)| (format!("__{k}"), v.clone())).collect();
    e.substitute(&map).to_string()
}

fn arg(model: &str, block: &str, text: &str) -> Result<Expr, SchemaError> {
    Expr::parse(text).map_err(|source| SchemaError::Equation {
        model: model.into(),
        element: block.into(),
        source,
    })
}

fn expand_one(model: &str, b: &BlockSpec) -> Result<Vec<Element>, SchemaError> {
    let mut args: BTreeMap<&str, Expr> = BTreeMap::new();
    args.insert("u", arg(model, &b.name, &b.input)?);
    let y = b.output();
    args.insert("y", Expr::sym(&y));
    let out = match &b.kind {
        BlockKind::Gain { k } => {
            args.insert("K", arg(model, &b.name, k)?);
            vec![Element::Var(VarSpec::algeb(&y).e(&fill("$K*$u - $y", &args)).v(&fill("$K*$u", &args)))]
        }
        BlockKind::Lag { k, t } => {
            args.insert("K", arg(model, &b.name, k)?);
            args.insert("T", arg(model, &b.name, t)?);
            vec![Element::Var(VarSpec::state(&y).e(&fill("($K*$u - $y)/$T", &args)).v(&fill("$K*$u", &args)))]
        }
        BlockKind::LeadLag { t1, t2 } => {
            let x = format!("{}_x", b.name);
            args.insert("x", Expr::sym(&x));
            args.insert("T1", arg(model, &b.name, t1)?);
            args.insert("T2", arg(model, &b.name, t2)?);
            vec![
                Element::Var(VarSpec::state(&x).e(&fill("($u - $x)/$T2", &args)).v(&fill("$u", &args))),
                Element::Var(
                    VarSpec::algeb(&y)
                        .e(&fill("$T1/$T2*($u - $x) + $x - $y", &args))
                        .v(&fill("$u", &args)),
                ),
            ]
        }
        BlockKind::LagAntiWindup { k, t, lower, upper } => {
            let lim = format!("{}_lim", b.name);
            args.insert("z", Expr::sym(format!("{lim}_zi")));
            args.insert("K", arg(model, &b.name, k)?);
            args.insert("T", arg(model, &b.name, t)?);
            vec![
                Element::Var(VarSpec::state(&y).e(&fill("$z*($K*$u - $y)/$T", &args)).v(&fill("$K*$u", &args))),
                Element::Discrete(DiscreteSpec::anti_windup(&lim, &y, lower, upper)),
            ]
        }
    };
    Ok(out)
}

/// Replace every block by its elements, in place, keeping declaration order.
pub fn expand_blocks(s: &ModelSchema) -> Result<ModelSchema, SchemaError> {
    let own: HashSet<&str> = s
        .elements
        .iter()
        .filter(|e| !matches!(e, Element::Block(_)))
        .map(Element::name)
        .collect();
    let mut elements = Vec::with_capacity(s.elements.len());
    for e in &s.elements {
        match e {
            Element::Block(b) => {
                for name in ModelSchema::block_exports(b) {
                    if own.contains(name.as_str()) {
                        return Err(SchemaError::BlockCollision { model: s.name.clone(), block: b.name.clone(), name });
                    }
                }
                elements.extend(expand_one(&s.name, b)?);
            }
            other => elements.push(other.clone()),
        }
    }
    Ok(ModelSchema { elements, ..s.clone() })
}
