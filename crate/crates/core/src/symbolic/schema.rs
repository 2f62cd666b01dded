//! Declarative model description.
//!
//! A model is an ordered list of elements. Declaration order is significant:
//! it fixes the variable vector, the equation order and the init order.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::SchemaError;
use crate::expr::{is_identifier, Expr};

/// Name of the implicit online-status parameter every model carries.
pub const STATUS_PARAM: &str = "u";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PowerBase {
    #[default]
    None,
    /// Multiplied by Sn / Sb when converting to the system base.
    Power,
    /// Multiplied by Sb / Sn.
    InversePower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    #[default]
    Numeric,
    /// Holds idx values of devices of another model or group.
    Idx { model: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub default: f64,
    #[serde(default)]
    pub non_zero: bool,
    #[serde(default)]
    pub power_base: PowerBase,
    #[serde(default)]
    pub kind: ParamKind,
    #[serde(default)]
    pub tex_name: Option<String>,
}

impl ParamSpec {
    pub fn num(name: &str) -> Self {
        ParamSpec {
            name: name.into(),
            description: String::new(),
            unit: String::new(),
            default: 0.0,
            non_zero: false,
            power_base: PowerBase::None,
            kind: ParamKind::Numeric,
            tex_name: None,
        }
    }

    pub fn idx(name: &str, model: &str) -> Self {
        ParamSpec { kind: ParamKind::Idx { model: model.into() }, ..Self::num(name) }
    }

    pub fn info(mut self, d: &str) -> Self {
        self.description = d.into();
        self
    }

    pub fn unit(mut self, u: &str) -> Self {
        self.unit = u.into();
        self
    }

    pub fn default(mut self, v: f64) -> Self {
        self.default = v;
        self
    }

    pub fn non_zero(mut self) -> Self {
        self.non_zero = true;
        self
    }

    pub fn power(mut self) -> Self {
        self.power_base = PowerBase::Power;
        self
    }

    pub fn ipower(mut self) -> Self {
        self.power_base = PowerBase::InversePower;
        self
    }

    pub fn tex(mut self, t: &str) -> Self {
        self.tex_name = Some(t.into());
        self
    }

    pub fn is_idx(&self) -> bool {
        matches!(self.kind, ParamKind::Idx { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    State,
    Algeb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VarScope {
    #[default]
    Internal,
    /// A handle on variable `src` of the device of `model` named by param `indexer`.
    External { model: String, src: String, indexer: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub kind: VarKind,
    #[serde(default)]
    pub scope: VarScope,
    #[serde(default)]
    pub e_str: Option<String>,
    #[serde(default)]
    pub v_str: Option<String>,
    #[serde(default)]
    pub v_iter: Option<String>,
    #[serde(default)]
    pub diag_eps: f64,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub tex_name: Option<String>,
    /// For external variables: `v_str` overwrites the linked variable's value.
    #[serde(default)]
    pub v_setter: bool,
}

impl VarSpec {
    fn new(name: &str, kind: VarKind, scope: VarScope) -> Self {
        VarSpec {
            name: name.into(),
            kind,
            scope,
            e_str: None,
            v_str: None,
            v_iter: None,
            diag_eps: 0.0,
            description: String::new(),
            unit: String::new(),
            tex_name: None,
            v_setter: false,
        }
    }

    pub fn state(name: &str) -> Self {
        Self::new(name, VarKind::State, VarScope::Internal)
    }

    pub fn algeb(name: &str) -> Self {
        Self::new(name, VarKind::Algeb, VarScope::Internal)
    }

    pub fn ext_state(name: &str, model: &str, src: &str, indexer: &str) -> Self {
        let scope = VarScope::External { model: model.into(), src: src.into(), indexer: indexer.into() };
        Self::new(name, VarKind::State, scope)
    }

    pub fn ext_algeb(name: &str, model: &str, src: &str, indexer: &str) -> Self {
        let scope = VarScope::External { model: model.into(), src: src.into(), indexer: indexer.into() };
        Self::new(name, VarKind::Algeb, scope)
    }

    pub fn e(mut self, s: &str) -> Self {
        self.e_str = Some(s.into());
        self
    }

    pub fn v(mut self, s: &str) -> Self {
        self.v_str = Some(s.into());
        self
    }

    pub fn v_iter(mut self, s: &str) -> Self {
        self.v_iter = Some(s.into());
        self
    }

    pub fn info(mut self, d: &str) -> Self {
        self.description = d.into();
        self
    }

    pub fn unit(mut self, u: &str) -> Self {
        self.unit = u.into();
        self
    }

    pub fn tex(mut self, t: &str) -> Self {
        self.tex_name = Some(t.into());
        self
    }

    pub fn diag_eps(mut self, eps: f64) -> Self {
        self.diag_eps = eps;
        self
    }

    pub fn setter(mut self) -> Self {
        self.v_setter = true;
        self
    }

    pub fn is_external(&self) -> bool {
        matches!(self.scope, VarScope::External { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteKind {
    HardLimiter,
    AntiWindup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpec {
    pub name: String,
    pub kind: DiscreteKind,
    /// Limited variable.
    pub input: String,
    /// Lower and upper bound parameter (or service) names.
    pub lower: String,
    pub upper: String,
    #[serde(default)]
    pub tex_name: Option<String>,
}

impl DiscreteSpec {
    pub fn hard_limiter(name: &str, input: &str, lower: &str, upper: &str) -> Self {
        DiscreteSpec {
            name: name.into(),
            kind: DiscreteKind::HardLimiter,
            input: input.into(),
            lower: lower.into(),
            upper: upper.into(),
            tex_name: None,
        }
    }

    pub fn anti_windup(name: &str, input: &str, lower: &str, upper: &str) -> Self {
        DiscreteSpec { kind: DiscreteKind::AntiWindup, ..Self::hard_limiter(name, input, lower, upper) }
    }

    /// Exported flag names in (zi, zl, zu) order.
    pub fn flags(&self) -> [String; 3] {
        [format!("{}_zi", self.name), format!("{}_zl", self.name), format!("{}_zu", self.name)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceKind {
    Const { e_str: String },
    External { model: String, src: String, indexer: String },
    /// Sum of `source` over devices sharing the same `indexer` value.
    Reduce { source: String, indexer: String },
    /// Broadcast a reduce service back to device length.
    Repeat { source: String, indexer: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSpec {
    pub name: String,
    pub kind: ServiceKind,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tex_name: Option<String>,
}

impl ServiceSpec {
    pub fn constant(name: &str, e_str: &str) -> Self {
        ServiceSpec {
            name: name.into(),
            kind: ServiceKind::Const { e_str: e_str.into() },
            description: String::new(),
            tex_name: None,
        }
    }

    pub fn external(name: &str, model: &str, src: &str, indexer: &str) -> Self {
        let kind = ServiceKind::External { model: model.into(), src: src.into(), indexer: indexer.into() };
        ServiceSpec { kind, ..Self::constant(name, "0") }
    }

    pub fn reduce(name: &str, source: &str, indexer: &str) -> Self {
        let kind = ServiceKind::Reduce { source: source.into(), indexer: indexer.into() };
        ServiceSpec { kind, ..Self::constant(name, "0") }
    }

    pub fn repeat(name: &str, source: &str, indexer: &str) -> Self {
        let kind = ServiceKind::Repeat { source: source.into(), indexer: indexer.into() };
        ServiceSpec { kind, ..Self::constant(name, "0") }
    }

    pub fn info(mut self, d: &str) -> Self {
        self.description = d.into();
        self
    }

    pub fn tex(mut self, t: &str) -> Self {
        self.tex_name = Some(t.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Gain { k: String },
    Lag { k: String, t: String },
    LeadLag { t1: String, t2: String },
    LagAntiWindup { k: String, t: String, lower: String, upper: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub kind: BlockKind,
    /// Input expression over model symbols.
    pub input: String,
}

impl BlockSpec {
    pub fn gain(name: &str, input: &str, k: &str) -> Self {
        BlockSpec { name: name.into(), kind: BlockKind::Gain { k: k.into() }, input: input.into() }
    }

    pub fn lag(name: &str, input: &str, k: &str, t: &str) -> Self {
        BlockSpec { name: name.into(), kind: BlockKind::Lag { k: k.into(), t: t.into() }, input: input.into() }
    }

    pub fn lead_lag(name: &str, input: &str, t1: &str, t2: &str) -> Self {
        let kind = BlockKind::LeadLag { t1: t1.into(), t2: t2.into() };
        BlockSpec { name: name.into(), kind, input: input.into() }
    }

    pub fn lag_anti_windup(name: &str, input: &str, k: &str, t: &str, lower: &str, upper: &str) -> Self {
        let kind = BlockKind::LagAntiWindup { k: k.into(), t: t.into(), lower: lower.into(), upper: upper.into() };
        BlockSpec { name: name.into(), kind, input: input.into() }
    }

    /// Output variable name.
    pub fn output(&self) -> String {
        format!("{}_y", self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum Element {
    Param(ParamSpec),
    Var(VarSpec),
    Discrete(DiscreteSpec),
    Service(ServiceSpec),
    Block(BlockSpec),
}

impl Element {
    pub fn name(&self) -> &str {
        match self {
            Element::Param(p) => &p.name,
            Element::Var(v) => &v.name,
            Element::Discrete(d) => &d.name,
            Element::Service(s) => &s.name,
            Element::Block(b) => &b.name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFlags {
    /// Takes part in power flow.
    pub pflow: bool,
    /// Takes part in time-domain simulation.
    pub tds: bool,
}

impl Default for ModelFlags {
    fn default() -> Self {
        ModelFlags { pflow: false, tds: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSchema {
    pub name: String,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub flags: ModelFlags,
    pub elements: Vec<Element>,
    /// Names of natively implemented hooks registered for this model.
    #[serde(default)]
    pub native_hooks: Vec<String>,
}

/// Validate an ordered element list into a schema.
pub fn build_schema(name: &str, elements: Vec<Element>) -> Result<ModelSchema, SchemaError> {
    let s = ModelSchema {
        name: name.into(),
        group: None,
        description: String::new(),
        flags: ModelFlags::default(),
        elements,
        native_hooks: Vec::new(),
    };
    s.validate()?;
    Ok(s)
}

/// Fluent construction of a [`ModelSchema`].
#[derive(Debug, Clone)]
pub struct SchemaBuilder {
    schema: ModelSchema,
}

impl ModelSchema {
    pub fn builder(name: &str) -> SchemaBuilder {
        SchemaBuilder {
            schema: ModelSchema {
                name: name.into(),
                group: None,
                description: String::new(),
                flags: ModelFlags::default(),
                elements: Vec::new(),
                native_hooks: Vec::new(),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<ModelSchema, SchemaError> {
        let s: ModelSchema =
            serde_json::from_str(text).map_err(|e| SchemaError::Format { message: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn params(&self) -> impl Iterator<Item = &ParamSpec> {
        self.elements.iter().filter_map(|e| match e {
            Element::Param(p) => Some(p),
            _ => None,
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarSpec> {
        self.elements.iter().filter_map(|e| match e {
            Element::Var(v) => Some(v),
            _ => None,
        })
    }

    pub fn discretes(&self) -> impl Iterator<Item = &DiscreteSpec> {
        self.elements.iter().filter_map(|e| match e {
            Element::Discrete(d) => Some(d),
            _ => None,
        })
    }

    pub fn services(&self) -> impl Iterator<Item = &ServiceSpec> {
        self.elements.iter().filter_map(|e| match e {
            Element::Service(s) => Some(s),
            _ => None,
        })
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BlockSpec> {
        self.elements.iter().filter_map(|e| match e {
            Element::Block(b) => Some(b),
            _ => None,
        })
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params().find(|p| p.name == name)
    }

    pub fn var(&self, name: &str) -> Option<&VarSpec> {
        self.vars().find(|v| v.name == name)
    }

    /// Names a block exports once expanded.
    pub(crate) fn block_exports(b: &BlockSpec) -> Vec<String> {
        match b.kind {
            BlockKind::Gain { .. } | BlockKind::Lag { .. } => vec![b.output()],
            BlockKind::LeadLag { .. } => vec![format!("{}_x", b.name), b.output()],
            BlockKind::LagAntiWindup { .. } => {
                let lim = format!("{}_lim", b.name);
                let flags = DiscreteSpec::anti_windup(&lim, "", "", "").flags();
                let mut v = vec![b.output(), lim];
                v.extend(flags);
                v
            }
        }
    }

    /// Every name a symbol in an equation may refer to, with what it is.
    pub(crate) fn symbol_kinds(&self) -> HashMap<String, &'static str> {
        let mut m = HashMap::new();
        m.insert(STATUS_PARAM.to_string(), "param");
        for e in &self.elements {
            match e {
                Element::Param(p) => {
                    m.insert(p.name.clone(), "param");
                }
                Element::Var(v) => {
                    m.insert(v.name.clone(), "var");
                }
                Element::Service(s) => {
                    let k = if matches!(s.kind, ServiceKind::Reduce { .. }) { "reduce" } else { "service" };
                    m.insert(s.name.clone(), k);
                }
                Element::Discrete(d) => {
                    for f in d.flags() {
                        m.insert(f, "flag");
                    }
                }
                Element::Block(b) => {
                    for n in Self::block_exports(b) {
                        let k = if n.ends_with("_zi") || n.ends_with("_zl") || n.ends_with("_zu") {
                            "flag"
                        } else {
                            "var"
                        };
                        m.insert(n, k);
                    }
                }
            }
        }
        m
    }

    /// Check names, equation syntax and references.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let model = self.name.clone();
        if !is_identifier(&self.name) {
            return Err(SchemaError::InvalidName { model, name: self.name.clone() });
        }
        let mut seen: BTreeSet<String> = BTreeSet::new();
        seen.insert(STATUS_PARAM.into());
        let mut claim = |name: &str| -> Result<(), SchemaError> {
            if !is_identifier(name) {
                return Err(SchemaError::InvalidName { model: self.name.clone(), name: name.into() });
            }
            if !seen.insert(name.to_string()) {
                return Err(SchemaError::Duplicate { model: self.name.clone(), name: name.into() });
            }
            Ok(())
        };
        for e in &self.elements {
            match e {
                Element::Discrete(d) => {
                    claim(&d.name)?;
                    for f in d.flags() {
                        claim(&f)?;
                    }
                }
                Element::Block(b) => {
                    claim(&b.name)?;
                    for n in Self::block_exports(b) {
                        claim(&n)?;
                    }
                }
                other => claim(other.name())?,
            }
        }

        let kinds = self.symbol_kinds();
        let check = |what: &str, text: &str| -> Result<Expr, SchemaError> {
            let e = Expr::parse(text).map_err(|source| SchemaError::Equation {
                model: self.name.clone(),
                element: what.into(),
                source,
            })?;
            for s in e.symbols() {
                match kinds.get(&s) {
                    None => {
                        return Err(SchemaError::Dangling {
                            model: self.name.clone(),
                            element: what.into(),
                            name: s,
                        })
                    }
                    Some(&"reduce") => {
                        return Err(SchemaError::ReduceMisuse { model: self.name.clone(), name: s })
                    }
                    _ => {}
                }
            }
            Ok(e)
        };
        let is_idx_param = |n: &str| self.param(n).is_some_and(|p| p.is_idx());
        let known = |n: &str| kinds.contains_key(n);

        for e in &self.elements {
            match e {
                Element::Param(_) => {}
                Element::Var(v) => {
                    for text in [&v.e_str, &v.v_str, &v.v_iter].into_iter().flatten() {
                        check(&v.name, text)?;
                    }
                    if let VarScope::External { indexer, .. } = &v.scope {
                        if !is_idx_param(indexer) {
                            return Err(self.dangling(&v.name, indexer));
                        }
                    } else if v.kind == VarKind::State && v.e_str.is_none() {
                        return Err(SchemaError::MissingEquation { model: self.name.clone(), name: v.name.clone() });
                    }
                    if v.v_setter && (!v.is_external() || v.v_str.is_none()) {
                        return Err(SchemaError::Setter { model: self.name.clone(), name: v.name.clone() });
                    }
                }
                Element::Discrete(d) => {
                    if kinds.get(&d.input) != Some(&"var") {
                        return Err(self.dangling(&d.name, &d.input));
                    }
                    for b in [&d.lower, &d.upper] {
                        if !known(b) {
                            return Err(self.dangling(&d.name, b));
                        }
                    }
                }
                Element::Service(s) => match &s.kind {
                    ServiceKind::Const { e_str } => {
                        check(&s.name, e_str)?;
                    }
                    ServiceKind::External { indexer, .. } => {
                        if !is_idx_param(indexer) {
                            return Err(self.dangling(&s.name, indexer));
                        }
                    }
                    ServiceKind::Reduce { source, indexer } => {
                        if !known(source) || kinds.get(source) == Some(&"reduce") {
                            return Err(self.dangling(&s.name, source));
                        }
                        if self.param(indexer).is_none() {
                            return Err(self.dangling(&s.name, indexer));
                        }
                    }
                    ServiceKind::Repeat { source, indexer } => {
                        if kinds.get(source) != Some(&"reduce") {
                            return Err(SchemaError::ReduceMisuse { model: self.name.clone(), name: source.clone() });
                        }
                        if self.param(indexer).is_none() {
                            return Err(self.dangling(&s.name, indexer));
                        }
                    }
                },
                Element::Block(b) => {
                    check(&b.name, &b.input)?;
                    let args: Vec<&String> = match &b.kind {
                        BlockKind::Gain { k } => vec![k],
                        BlockKind::Lag { k, t } => vec![k, t],
                        BlockKind::LeadLag { t1, t2 } => vec![t1, t2],
                        BlockKind::LagAntiWindup { k, t, lower, upper } => vec![k, t, lower, upper],
                    };
                    for a in args {
                        check(&b.name, a)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn dangling(&self, element: &str, name: &str) -> SchemaError {
        SchemaError::Dangling { model: self.name.clone(), element: element.into(), name: name.into() }
    }
}

impl SchemaBuilder {
    pub fn group(mut self, g: &str) -> Self {
        self.schema.group = Some(g.into());
        self
    }

    pub fn info(mut self, d: &str) -> Self {
        self.schema.description = d.into();
        self
    }

    pub fn pflow(mut self, on: bool) -> Self {
        self.schema.flags.pflow = on;
        self
    }

    pub fn tds(mut self, on: bool) -> Self {
        self.schema.flags.tds = on;
        self
    }

    pub fn param(mut self, p: ParamSpec) -> Self {
        self.schema.elements.push(Element::Param(p));
        self
    }

    pub fn var(mut self, v: VarSpec) -> Self {
        self.schema.elements.push(Element::Var(v));
        self
    }

    pub fn discrete(mut self, d: DiscreteSpec) -> Self {
        self.schema.elements.push(Element::Discrete(d));
        self
    }

    pub fn service(mut self, s: ServiceSpec) -> Self {
        self.schema.elements.push(Element::Service(s));
        self
    }

    pub fn block(mut self, b: BlockSpec) -> Self {
        self.schema.elements.push(Element::Block(b));
        self
    }

    pub fn native_hook(mut self, name: &str) -> Self {
        self.schema.native_hooks.push(name.into());
        self
    }

    pub fn build(self) -> Result<ModelSchema, SchemaError> {
        self.schema.validate()?;
        Ok(self.schema)
    }
}
