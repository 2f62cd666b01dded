//! Symbolic processing of a schema: ordered variables, residual programs,
//! Jacobian triplets and the initialization plan.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::blocks::expand_blocks;
use super::schema::{
    DiscreteSpec, ModelFlags, ModelSchema, ParamSpec, ServiceKind, ServiceSpec, VarKind, VarSpec, STATUS_PARAM,
};
use super::SchemaError;
use crate::expr::{Expr, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotKind {
    Param,
    Service,
    Var,
    Flag,
}

/// A named input column of a model's programs. `index` counts within `kind`;
/// flags are numbered `3 * discrete + k` with k in (zi, zl, zu) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledVar {
    pub spec: VarSpec,
    /// Position within the model's state list or algebraic list.
    pub local: usize,
    pub e: Option<Expr>,
    pub e_prog: Option<Program>,
    pub v: Option<Expr>,
    pub v_prog: Option<Program>,
}

impl CompiledVar {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn kind(&self) -> VarKind {
        self.spec.kind
    }

    pub fn is_external(&self) -> bool {
        self.spec.is_external()
    }
}

/// One nonzero of a local Jacobian block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: Expr,
    pub program: Program,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JacBlock {
    Fx,
    Fy,
    Gx,
    Gy,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Jacobians {
    pub fx: Vec<Triplet>,
    pub fy: Vec<Triplet>,
    pub gx: Vec<Triplet>,
    pub gy: Vec<Triplet>,
}

impl Jacobians {
    pub fn block(&self, b: JacBlock) -> &[Triplet] {
        match b {
            JacBlock::Fx => &self.fx,
            JacBlock::Fy => &self.fy,
            JacBlock::Gx => &self.gx,
            JacBlock::Gy => &self.gy,
        }
    }

    pub fn len(&self) -> usize {
        self.fx.len() + self.fy.len() + self.gx.len() + self.gy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledService {
    pub spec: ServiceSpec,
    pub expr: Option<Expr>,
    pub program: Option<Program>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterJacEntry {
    pub row: usize,
    pub col: usize,
    pub value: Expr,
    pub program: Program,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InitPlan {
    /// Service indices in dependency order.
    pub service_order: Vec<usize>,
    /// Variables assigned from `v_str`, declaration order.
    pub sequential: Vec<usize>,
    /// Variables solved jointly from their `v_iter` residuals; `v_str` is the start.
    pub iterative: Vec<usize>,
    pub iterative_residuals: Vec<(Expr, Program)>,
    /// d residual[row] / d iterative[col].
    pub iterative_jac: Vec<IterJacEntry>,
    pub native_hooks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledModel {
    pub name: String,
    pub group: Option<String>,
    pub description: String,
    pub flags: ModelFlags,
    /// Block-expanded schema.
    pub schema: ModelSchema,
    /// The status parameter `u` first, then declared parameters.
    pub params: Vec<ParamSpec>,
    /// All variables in declaration order (the xy vector).
    pub vars: Vec<CompiledVar>,
    /// Indices into `vars` of states (f rows / x columns) and algebraics.
    pub states: Vec<usize>,
    pub algebs: Vec<usize>,
    pub services: Vec<CompiledService>,
    pub discretes: Vec<DiscreteSpec>,
    pub slots: Vec<Slot>,
    pub jac: Jacobians,
    pub init: InitPlan,
    pub schema_hash: String,
}

impl CompiledModel {
    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.spec.name == name)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn service_index(&self, name: &str) -> Option<usize> {
        self.services.iter().position(|s| s.spec.name == name)
    }

    /// Residual expressions of the f vector, in row order.
    pub fn f(&self) -> Vec<Option<&Expr>> {
        self.states.iter().map(|&i| self.vars[i].e.as_ref()).collect()
    }

    /// Residual expressions of the g vector, in row order.
    pub fn g(&self) -> Vec<Option<&Expr>> {
        self.algebs.iter().map(|&i| self.vars[i].e.as_ref()).collect()
    }

    pub fn tex_names(&self) -> HashMap<String, String> {
        let mut m = HashMap::new();
        for p in &self.params {
            if let Some(t) = &p.tex_name {
                m.insert(p.name.clone(), t.clone());
            }
        }
        for v in &self.vars {
            if let Some(t) = &v.spec.tex_name {
                m.insert(v.spec.name.clone(), t.clone());
            }
        }
        for s in &self.services {
            if let Some(t) = &s.spec.tex_name {
                m.insert(s.spec.name.clone(), t.clone());
            }
        }
        for d in &self.discretes {
            // `LG_lim` -> z_{i,lim}^{LG}; plain `OL` -> z_{i}^{OL}
            let (sup, tail) = match (&d.tex_name, d.name.split_once('_')) {
                (Some(t), _) => (t.clone(), String::new()),
                (None, Some((a, b))) => (a.to_string(), format!(",{b}")),
                (None, None) => (d.name.clone(), String::new()),
            };
            for (flag, k) in d.flags().into_iter().zip(["i", "l", "u"]) {
                m.insert(flag, format!("z_{{{k}{tail}}}^{{{sup}}}"));
            }
        }
        m
    }
}

pub(crate) fn status_param() -> ParamSpec {
    ParamSpec::num(STATUS_PARAM).info("connection status").unit("bool").default(1.0)
}

fn parse(model: &str, element: &str, text: &str) -> Result<Expr, SchemaError> {
    Expr::parse(text).map_err(|source| SchemaError::Equation { model: model.into(), element: element.into(), source })
}

/// Compile a schema. Test-case independent: reads nothing but the schema.
pub fn compile_model(schema: &ModelSchema) -> Result<CompiledModel, SchemaError> {
    schema.validate()?;
    let hash = super::cache::schema_hash(schema);
    let s = expand_blocks(schema)?;
    let model = s.name.as_str();

    let mut params = vec![status_param()];
    params.extend(s.params().cloned());
    let discretes: Vec<DiscreteSpec> = s.discretes().cloned().collect();

    let mut slots = Vec::new();
    for (i, p) in params.iter().enumerate() {
        slots.push(Slot { name: p.name.clone(), kind: SlotKind::Param, index: i });
    }
    for (i, sv) in s.services().enumerate() {
        slots.push(Slot { name: sv.name.clone(), kind: SlotKind::Service, index: i });
    }
    for (i, v) in s.vars().enumerate() {
        slots.push(Slot { name: v.name.clone(), kind: SlotKind::Var, index: i });
    }
    for (i, d) in discretes.iter().enumerate() {
        for (k, f) in d.flags().into_iter().enumerate() {
            slots.push(Slot { name: f, kind: SlotKind::Flag, index: 3 * i + k });
        }
    }
    let slot_map: HashMap<String, usize> = slots.iter().enumerate().map(|(i, s)| (s.name.clone(), i)).collect();
    let resolve = |n: &str| slot_map.get(n).copied();
    let program = |element: &str, e: &Expr| -> Result<Program, SchemaError> {
        Program::compile(e, &resolve).map_err(|source| SchemaError::Equation {
            model: model.into(),
            element: element.into(),
            source,
        })
    };

    // 1. the ordered variable vector
    let mut vars = Vec::new();
    let (mut states, mut algebs) = (Vec::new(), Vec::new());
    for (i, v) in s.vars().enumerate() {
        let local = match v.kind {
            VarKind::State => {
                states.push(i);
                states.len() - 1
            }
            VarKind::Algeb => {
                algebs.push(i);
                algebs.len() - 1
            }
        };
        // 2. equation strings to expressions
        let e = v.e_str.as_deref().map(|t| parse(model, &v.name, t)).transpose()?;
        let vv = v.v_str.as_deref().map(|t| parse(model, &v.name, t)).transpose()?;
        let e_prog = e.as_ref().map(|e| program(&v.name, e)).transpose()?;
        let v_prog = vv.as_ref().map(|e| program(&v.name, e)).transpose()?;
        vars.push(CompiledVar { spec: v.clone(), local, e, e_prog, v: vv, v_prog });
    }

    // 3-5. Jacobians as sparse triplets; flags are constants here
    let mut jac = Jacobians::default();
    for v in &vars {
        let Some(e) = &v.e else { continue };
        let row = v.local;
        for w in &vars {
            if !e.contains_symbol(w.name()) {
                continue;
            }
            let d = e.diff(w.name());
            if d.is_zero() {
                continue;
            }
            let program = program(v.name(), &d)?;
            let t = Triplet { row, col: w.local, value: d, program };
            match (v.kind(), w.kind()) {
                (VarKind::State, VarKind::State) => jac.fx.push(t),
                (VarKind::State, VarKind::Algeb) => jac.fy.push(t),
                (VarKind::Algeb, VarKind::State) => jac.gx.push(t),
                (VarKind::Algeb, VarKind::Algeb) => jac.gy.push(t),
            }
        }
    }

    let mut services = Vec::new();
    for sv in s.services() {
        let (expr, prog) = match &sv.kind {
            ServiceKind::Const { e_str } => {
                let e = parse(model, &sv.name, e_str)?;
                let p = program(&sv.name, &e)?;
                (Some(e), Some(p))
            }
            _ => (None, None),
        };
        services.push(CompiledService { spec: sv.clone(), expr, program: prog });
    }

    let init = derive_init_plan_inner(&s, &vars, &services, &program)?;

    Ok(CompiledModel {
        name: s.name.clone(),
        group: s.group.clone(),
        description: s.description.clone(),
        flags: s.flags,
        params,
        vars,
        states,
        algebs,
        services,
        discretes,
        slots,
        jac,
        init,
        schema_hash: hash,
        schema: s,
    })
}

/// Initialization plan of a schema (compiles it).
pub fn derive_init_plan(schema: &ModelSchema) -> Result<InitPlan, SchemaError> {
    Ok(compile_model(schema)?.init)
}

fn derive_init_plan_inner(
    s: &ModelSchema,
    vars: &[CompiledVar],
    services: &[CompiledService],
    program: &impl Fn(&str, &Expr) -> Result<Program, SchemaError>,
) -> Result<InitPlan, SchemaError> {
    let service_order = service_order(s, services)?;
    let mut sequential = Vec::new();
    let mut iterative = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if v.spec.v_iter.is_some() {
            iterative.push(i);
        } else if v.v.is_some() && (!v.is_external() || v.spec.v_setter) {
            sequential.push(i);
        }
    }
    let mut residuals = Vec::new();
    let mut jac = Vec::new();
    for (row, &i) in iterative.iter().enumerate() {
        let name = vars[i].name();
        let r = parse(&s.name, name, vars[i].spec.v_iter.as_deref().unwrap())?;
        for (col, &j) in iterative.iter().enumerate() {
            let d = r.diff(vars[j].name());
            if !d.is_zero() {
                let p = program(name, &d)?;
                jac.push(IterJacEntry { row, col, value: d, program: p });
            }
        }
        let p = program(name, &r)?;
        residuals.push((r, p));
    }
    Ok(InitPlan {
        service_order,
        sequential,
        iterative,
        iterative_residuals: residuals,
        iterative_jac: jac,
        native_hooks: s.native_hooks.clone(),
    })
}

/// Topological order of services; ties keep declaration order.
fn service_order(s: &ModelSchema, services: &[CompiledService]) -> Result<Vec<usize>, SchemaError> {
    let index: BTreeMap<&str, usize> = services.iter().enumerate().map(|(i, c)| (c.spec.name.as_str(), i)).collect();
    let deps: Vec<Vec<usize>> = services
        .iter()
        .map(|c| match (&c.spec.kind, &c.expr) {
            (ServiceKind::Const { .. }, Some(e)) => {
                e.symbols().iter().filter_map(|n| index.get(n.as_str()).copied()).collect()
            }
            (ServiceKind::Reduce { source, .. }, _) | (ServiceKind::Repeat { source, .. }, _) => {
                index.get(source.as_str()).copied().into_iter().collect()
            }
            _ => Vec::new(),
        })
        .collect();
    let n = services.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                let names = (0..n).filter(|&i| !done[i]).map(|i| services[i].spec.name.clone()).collect();
                return Err(SchemaError::CyclicService { model: s.name.clone(), names });
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::schema::{BlockSpec, ParamSpec};

    fn shunt() -> ModelSchema {
        ModelSchema::builder("Shunt")
            .param(ParamSpec::idx("bus", "Bus"))
            .param(ParamSpec::num("g"))
            .param(ParamSpec::num("b"))
            .var(VarSpec::ext_algeb("a", "Bus", "a", "bus").e("g*v*v"))
            .var(VarSpec::ext_algeb("v", "Bus", "v", "bus").e("-b*v*v"))
            .build()
            .unwrap()
    }

    #[test]
    fn shunt_triplets() {
        let c = compile_model(&shunt()).unwrap();
        assert!(c.jac.fx.is_empty() && c.jac.fy.is_empty() && c.jac.gx.is_empty());
        let gy: Vec<(usize, usize, Expr)> = c.jac.gy.iter().map(|t| (t.row, t.col, t.value.clone())).collect();
        assert_eq!(
            gy,
            vec![
                (0, 1, Expr::parse("2*v*g").unwrap().simplify()),
                (1, 1, Expr::parse("-2*v*b").unwrap().simplify()),
            ]
        );
    }

    #[test]
    fn empty_model() {
        let c = compile_model(&ModelSchema::builder("Empty").build().unwrap()).unwrap();
        assert!(c.vars.is_empty() && c.jac.is_empty());
        assert!(c.f().is_empty() && c.g().is_empty());
    }

    #[test]
    fn linear_state() {
        let s = ModelSchema::builder("Decay").var(VarSpec::state("x").e("-x")).build().unwrap();
        let c = compile_model(&s).unwrap();
        assert_eq!(c.jac.fx.len(), 1);
        assert_eq!((c.jac.fx[0].row, c.jac.fx[0].col), (0, 0));
        assert_eq!(c.jac.fx[0].value, Expr::Const(-1.0));
    }

    #[test]
    fn cyclic_services_rejected() {
        let s = ModelSchema::builder("Cyc")
            .service(crate::symbolic::ServiceSpec::constant("a", "b + 1"))
            .service(crate::symbolic::ServiceSpec::constant("b", "a + 1"))
            .build()
            .unwrap();
        assert!(matches!(compile_model(&s), Err(SchemaError::CyclicService { .. })));
    }

    #[test]
    fn services_sorted_by_dependency() {
        let s = ModelSchema::builder("Ord")
            .param(ParamSpec::num("R").default(1.0))
            .service(crate::symbolic::ServiceSpec::constant("b", "a*2"))
            .service(crate::symbolic::ServiceSpec::constant("a", "u/R"))
            .build()
            .unwrap();
        let c = compile_model(&s).unwrap();
        assert_eq!(c.init.service_order, vec![1, 0]);
    }

    #[test]
    fn block_expanded_before_compile() {
        let s = ModelSchema::builder("B")
            .param(ParamSpec::num("K").default(1.0))
            .param(ParamSpec::num("T").default(1.0))
            .var(VarSpec::algeb("w").e("1 - w"))
            .block(BlockSpec::lag("LG", "w", "K", "T"))
            .build()
            .unwrap();
        let c = compile_model(&s).unwrap();
        assert_eq!(c.vars.iter().map(|v| v.name()).collect::<Vec<_>>(), ["w", "LG_y"]);
        assert_eq!(c.jac.fy.len(), 1);
        assert_eq!(c.jac.fx[0].value, Expr::parse("-1/T").unwrap().simplify());
    }
}
