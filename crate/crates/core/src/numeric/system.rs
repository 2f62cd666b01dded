//! Device tables, address allocation, linking and services.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{NumericError, Result};
use crate::expr::{fmt_number, Scratch};
use crate::symbolic::{
    CompiledModel, DiscreteKind, ParamKind, PowerBase, ServiceKind, SlotKind, VarKind, VarScope,
};

/// A cell of a case table: a number or an identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Num(f64),
    Text(String),
}

impl FieldValue {
    /// Identifier text; integral numbers print without a fraction.
    pub fn as_idx(&self) -> String {
        match self {
            FieldValue::Text(s) => s.clone(),
            FieldValue::Num(v) => fmt_number(*v),
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            FieldValue::Num(v) => Some(*v),
            FieldValue::Text(s) => s.trim().parse().ok(),
        }
    }
}

impl From<f64> for FieldValue {
    fn from(v: f64) -> Self {
        FieldValue::Num(v)
    }
}

impl From<&str> for FieldValue {
    fn from(s: &str) -> Self {
        FieldValue::Text(s.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// System power base in MVA.
    pub base_mva: f64,
    /// Nominal frequency in Hz, used as the default of `fn` parameters.
    pub freq: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig { base_mva: 100.0, freq: 60.0 }
    }
}

/// Which models take part in an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Power-flow models only, over the leading algebraic block.
    PowerFlow,
    /// Every model.
    Full,
}

/// The four DAE arrays.
#[derive(Debug, Clone, Default)]
pub struct Dae {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// States held at an anti-windup bound by the last evaluation.
    pub clamped: Vec<bool>,
    pub t: f64,
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
}

impl Dae {
    pub fn n_x(&self) -> usize {
        self.x.len()
    }

    pub fn n_y(&self) -> usize {
        self.y.len()
    }
}

/// Where a program slot reads its column from.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Source {
    Param(usize),
    Service(usize),
    /// Internal state block starting at the given address.
    X(usize),
    Y(usize),
    /// Gathered copy of an external variable.
    Ext(usize),
    Flag(usize),
}

/// Numeric data of one model: one column per element, one entry per device.
#[derive(Debug, Clone)]
pub struct ModelData {
    pub model: Arc<CompiledModel>,
    pub idx: Vec<String>,
    /// Parameter columns in `model.params` order; idx parameters hold 0.
    pub params: Vec<Vec<f64>>,
    /// Identifier columns of idx parameters.
    pub refs: Vec<Option<Vec<String>>>,
    /// Service columns; a reduce service holds one value per distinct key.
    pub services: Vec<Vec<f64>>,
    pub(crate) reduce_keys: Vec<Vec<String>>,
    /// Flag columns, `3 * discrete + k` with k in (zi, zl, zu) order.
    pub flags: Vec<Vec<f64>>,
    /// Global address of every variable for every device.
    pub addr: Vec<Vec<usize>>,
    pub(crate) ext_vals: Vec<Vec<f64>>,
    pub(crate) ext_eq: Vec<Vec<f64>>,
    pub(crate) sources: Vec<Source>,
    pub(crate) scratch: Scratch,
    idx_map: HashMap<String, usize>,
}

impl ModelData {
    fn new(model: Arc<CompiledModel>) -> Self {
        let np = model.params.len();
        let ns = model.services.len();
        let nv = model.vars.len();
        let refs = model.params.iter().map(|p| p.is_idx().then(Vec::new)).collect();
        ModelData {
            idx: Vec::new(),
            params: vec![Vec::new(); np],
            refs,
            services: vec![Vec::new(); ns],
            reduce_keys: vec![Vec::new(); ns],
            flags: vec![Vec::new(); 3 * model.discretes.len()],
            addr: vec![Vec::new(); nv],
            ext_vals: vec![Vec::new(); nv],
            ext_eq: vec![Vec::new(); nv],
            sources: Vec::new(),
            scratch: Scratch::new(),
            idx_map: HashMap::new(),
            model,
        }
    }

    pub fn n(&self) -> usize {
        self.idx.len()
    }

    pub fn name(&self) -> &str {
        &self.model.name
    }

    pub fn device(&self, idx: &str) -> Option<usize> {
        self.idx_map.get(idx).copied()
    }

    pub fn param(&self, name: &str) -> Option<&[f64]> {
        self.model.param_index(name).map(|k| self.params[k].as_slice())
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        self.model.param_index(name).map(|k| &mut self.params[k])
    }

    pub fn service(&self, name: &str) -> Option<&[f64]> {
        self.model.service_index(name).map(|k| self.services[k].as_slice())
    }

    pub fn status(&self) -> &[f64] {
        &self.params[0]
    }

    /// Flags `[zi, zl, zu]` of a discrete component.
    pub fn discrete_flags(&self, name: &str) -> Option<[&[f64]; 3]> {
        let d = self.model.discretes.iter().position(|d| d.name == name)?;
        Some([&self.flags[3 * d], &self.flags[3 * d + 1], &self.flags[3 * d + 2]])
    }

    /// Column of any slot, reading variables from the DAE arrays.
    pub(crate) fn column<'a>(&'a self, x: &'a [f64], y: &'a [f64], slot: usize) -> &'a [f64] {
        let n = self.n();
        match self.sources[slot] {
            Source::Param(k) => &self.params[k],
            Source::Service(k) => &self.services[k],
            Source::X(s) => &x[s..s + n],
            Source::Y(s) => &y[s..s + n],
            Source::Ext(k) => &self.ext_vals[k],
            Source::Flag(k) => &self.flags[k],
        }
    }
}

/// A set of devices over compiled models, with the DAE arrays.
#[derive(Debug, Clone)]
pub struct System {
    pub config: SystemConfig,
    pub models: Vec<ModelData>,
    pub dae: Dae,
    names: HashMap<String, usize>,
    groups: BTreeMap<String, Vec<usize>>,
    per_unit: bool,
    ready: bool,
    n_pf_algeb: usize,
}

impl System {
    /// Register compiled models; registration order is evaluation and address order.
    pub fn new(models: Vec<CompiledModel>, config: SystemConfig) -> Self {
        Self::from_shared(models.into_iter().map(Arc::new).collect(), config)
    }

    pub fn from_shared(models: Vec<Arc<CompiledModel>>, config: SystemConfig) -> Self {
        let mut names = HashMap::new();
        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let data: Vec<ModelData> = models.into_iter().map(ModelData::new).collect();
        for (i, m) in data.iter().enumerate() {
            names.insert(m.model.name.clone(), i);
            if let Some(g) = &m.model.group {
                groups.entry(g.clone()).or_default().push(i);
            }
        }
        System {
            config,
            models: data,
            dae: Dae::default(),
            names,
            groups,
            per_unit: false,
            ready: false,
            n_pf_algeb: 0,
        }
    }

    pub fn model_index(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn model(&self, name: &str) -> Option<&ModelData> {
        self.model_index(name).map(|i| &self.models[i])
    }

    pub fn model_mut(&mut self, name: &str) -> Option<&mut ModelData> {
        self.model_index(name).map(move |i| &mut self.models[i])
    }

    /// Models belonging to a group, or the single model of that name.
    pub fn members(&self, target: &str) -> Vec<usize> {
        match self.model_index(target) {
            Some(i) => vec![i],
            None => self.groups.get(target).cloned().unwrap_or_default(),
        }
    }

    /// Locate a device by idx within a model or group.
    pub fn find_device(&self, target: &str, idx: &str) -> Option<(usize, usize)> {
        self.members(target).into_iter().find_map(|m| self.models[m].device(idx).map(|d| (m, d)))
    }

    pub fn is_ready(&self) -> bool {
        self.ready
    }

    pub fn is_per_unit(&self) -> bool {
        self.per_unit
    }

    /// Number of algebraic variables owned by power-flow models.
    pub fn n_pf_algeb(&self) -> usize {
        self.n_pf_algeb
    }

    pub fn in_scope(&self, m: usize, scope: Scope) -> bool {
        match scope {
            Scope::Full => true,
            Scope::PowerFlow => self.models[m].model.flags.pflow,
        }
    }

    /// Append one device. Missing fields take their defaults; idx parameters are required.
    pub fn add_device(&mut self, model: &str, fields: &BTreeMap<String, FieldValue>) -> Result<usize> {
        if self.ready {
            return Err(NumericError::Sealed);
        }
        let freq = self.config.freq;
        let m = self.model_index(model).ok_or_else(|| NumericError::UnknownModel(model.into()))?;
        let md = &mut self.models[m];
        let c = md.model.clone();
        let pos = md.n();
        let idx = match fields.get("idx") {
            Some(v) => v.as_idx(),
            None => format!("{}_{}", c.name, pos),
        };
        for k in fields.keys() {
            if k != "idx" && k != "name" && c.param_index(k).is_none() {
                return Err(NumericError::UnknownField { model: c.name.clone(), field: k.clone() });
            }
        }
        if md.idx_map.contains_key(&idx) {
            return Err(NumericError::DuplicateIdx { model: c.name.clone(), idx });
        }
        let bad = |field: &str, message: &str| NumericError::BadField {
            model: c.name.clone(),
            field: field.into(),
            idx: idx.clone(),
            message: message.into(),
        };
        let mut values = Vec::with_capacity(c.params.len());
        let mut texts = Vec::with_capacity(c.params.len());
        for p in &c.params {
            let given = fields.get(&p.name);
            match &p.kind {
                ParamKind::Idx { .. } => {
                    let v = given.ok_or_else(|| bad(&p.name, "required reference is missing"))?;
                    texts.push(Some(v.as_idx()));
                    values.push(0.0);
                }
                ParamKind::Numeric => {
                    let v = match given {
                        Some(v) => v.as_num().ok_or_else(|| bad(&p.name, "expected a number"))?,
                        None if p.name == "fn" => freq,
                        None => p.default,
                    };
                    if !v.is_finite() {
                        return Err(bad(&p.name, "value is not finite"));
                    }
                    if p.non_zero && v == 0.0 {
                        return Err(NumericError::NonZero { model: c.name.clone(), field: p.name.clone(), idx });
                    }
                    texts.push(None);
                    values.push(v);
                }
            }
        }
        for (k, (v, t)) in values.into_iter().zip(texts).enumerate() {
            md.params[k].push(v);
            if let (Some(col), Some(t)) = (md.refs[k].as_mut(), t) {
                col.push(t);
            }
        }
        md.idx_map.insert(idx.clone(), pos);
        md.idx.push(idx);
        Ok(pos)
    }

    /// Scale power-based parameters from device to system base.
    pub fn per_unit_convert(&mut self) -> Result<()> {
        if self.per_unit {
            return Err(NumericError::AlreadyConverted);
        }
        let sb = self.config.base_mva;
        for md in &mut self.models {
            let Some(sn_k) = md.model.param_index("Sn") else { continue };
            let sn = md.params[sn_k].clone();
            let c = md.model.clone();
            for (k, p) in c.params.iter().enumerate() {
                match p.power_base {
                    PowerBase::None => {}
                    PowerBase::Power => md.params[k].iter_mut().zip(&sn).for_each(|(v, s)| *v *= s / sb),
                    PowerBase::InversePower => md.params[k].iter_mut().zip(&sn).for_each(|(v, s)| *v *= sb / s),
                }
            }
        }
        self.per_unit = true;
        Ok(())
    }

    /// Allocate addresses, link external variables and size all arrays.
    pub fn setup(&mut self) -> Result<()> {
        if self.ready {
            return Ok(());
        }
        let mut seen_dynamic: Option<String> = None;
        for md in &self.models {
            if md.n() == 0 {
                continue;
            }
            if md.model.flags.pflow {
                if let Some(d) = &seen_dynamic {
                    return Err(NumericError::Registration(d.clone()));
                }
            } else {
                seen_dynamic.get_or_insert_with(|| md.model.name.clone());
            }
        }

        // internal variables: contiguous blocks, model by model
        let (mut nx, mut ny) = (0usize, 0usize);
        let mut x_names = Vec::new();
        let mut y_names = Vec::new();
        for md in &mut self.models {
            let n = md.n();
            let c = md.model.clone();
            for (k, v) in c.vars.iter().enumerate() {
                if v.is_external() {
                    continue;
                }
                let (next, names) = match v.kind() {
                    VarKind::State => (&mut nx, &mut x_names),
                    VarKind::Algeb => (&mut ny, &mut y_names),
                };
                md.addr[k] = (*next..*next + n).collect();
                names.extend(md.idx.iter().map(|i| format!("{}.{}[{}]", c.name, v.name(), i)));
                *next += n;
            }
            if c.flags.pflow {
                self.n_pf_algeb = ny;
            }
        }

        // external variables follow their indexers
        for m in 0..self.models.len() {
            let c = self.models[m].model.clone();
            for (k, v) in c.vars.iter().enumerate() {
                let VarScope::External { model: target, src, indexer } = &v.spec.scope else { continue };
                let refs = self.refs_of(m, indexer);
                let mut addr = Vec::with_capacity(refs.len());
                for (i, r) in refs.iter().enumerate() {
                    let (tm, td) = self.find_device(target, r).ok_or_else(|| NumericError::UnknownIdx {
                        model: c.name.clone(),
                        idx: self.models[m].idx[i].clone(),
                        indexer: indexer.clone(),
                        target: target.clone(),
                        value: r.clone(),
                    })?;
                    let tmodel = &self.models[tm].model;
                    let bad = || NumericError::BadLink {
                        model: c.name.clone(),
                        name: v.name().into(),
                        target: tmodel.name.clone(),
                        src: src.clone(),
                    };
                    let tv = tmodel.var_index(src).ok_or_else(bad)?;
                    if tmodel.vars[tv].kind() != v.kind() || tmodel.vars[tv].is_external() {
                        return Err(bad());
                    }
                    addr.push(self.models[tm].addr[tv][td]);
                }
                self.models[m].addr[k] = addr;
            }
        }

        for md in &mut self.models {
            let n = md.n();
            let c = md.model.clone();
            for (k, sv) in c.services.iter().enumerate() {
                if !matches!(sv.spec.kind, ServiceKind::Reduce { .. }) {
                    md.services[k] = vec![0.0; n];
                }
            }
            for (d, spec) in c.discretes.iter().enumerate() {
                md.flags[3 * d] = vec![1.0; n];
                md.flags[3 * d + 1] = vec![0.0; n];
                md.flags[3 * d + 2] = vec![0.0; n];
                if spec.kind == DiscreteKind::AntiWindup {
                    let v = c.var_index(&spec.input).map(|i| &c.vars[i]);
                    if !v.is_some_and(|v| v.kind() == VarKind::State && !v.is_external()) {
                        return Err(NumericError::AntiWindupInput { model: c.name.clone(), discrete: spec.name.clone() });
                    }
                }
            }
            let mut sources = Vec::with_capacity(c.slots.len());
            for s in &c.slots {
                sources.push(match s.kind {
                    SlotKind::Param => Source::Param(s.index),
                    SlotKind::Service => Source::Service(s.index),
                    SlotKind::Flag => Source::Flag(s.index),
                    SlotKind::Var => {
                        let v = &c.vars[s.index];
                        if v.is_external() {
                            Source::Ext(s.index)
                        } else {
                            let start = md.addr[s.index].first().copied().unwrap_or(0);
                            match v.kind() {
                                VarKind::State => Source::X(start),
                                VarKind::Algeb => Source::Y(start),
                            }
                        }
                    }
                });
            }
            md.sources = sources;
            for (k, v) in c.vars.iter().enumerate() {
                if v.is_external() {
                    md.ext_vals[k] = vec![0.0; n];
                    md.ext_eq[k] = vec![0.0; n];
                }
            }
            let depth = c
                .vars
                .iter()
                .flat_map(|v| v.e_prog.iter().chain(v.v_prog.iter()))
                .chain(c.services.iter().filter_map(|s| s.program.as_ref()))
                .chain(c.jac.fx.iter().chain(&c.jac.fy).chain(&c.jac.gx).chain(&c.jac.gy).map(|t| &t.program))
                .map(|p| p.depth())
                .max()
                .unwrap_or(0);
            md.scratch.reserve(depth + 1, n);
        }

        self.dae = Dae {
            x: vec![0.0; nx],
            y: vec![0.0; ny],
            f: vec![0.0; nx],
            g: vec![0.0; ny],
            clamped: vec![false; nx],
            t: 0.0,
            x_names,
            y_names,
        };
        self.ready = true;
        Ok(())
    }

    /// Identifier column of a parameter, as text; numeric parameters are formatted.
    pub fn refs_of(&self, m: usize, param: &str) -> Vec<String> {
        let md = &self.models[m];
        let k = md.model.param_index(param).expect("validated parameter name");
        match &md.refs[k] {
            Some(r) => r.clone(),
            None => md.params[k].iter().map(|v| fmt_number(*v)).collect(),
        }
    }

    pub(crate) fn eval_error(&self, m: usize, element: &str, source: crate::expr::ExprError) -> NumericError {
        let md = &self.models[m];
        let device = match &source {
            crate::expr::ExprError::DivisionByZero { element } | crate::expr::ExprError::NonFinite { element, .. } => {
                md.idx.get(*element).cloned().unwrap_or_default()
            }
            _ => String::new(),
        };
        NumericError::Eval { model: md.model.name.clone(), element: element.into(), idx: device, source }
    }

    /// Copy external variable values into the model's local columns.
    pub fn gather(&mut self, m: usize) {
        let dae = &self.dae;
        let md = &mut self.models[m];
        let c = md.model.clone();
        for (k, v) in c.vars.iter().enumerate() {
            if !v.is_external() {
                continue;
            }
            let src = match v.kind() {
                VarKind::State => &dae.x,
                VarKind::Algeb => &dae.y,
            };
            for (dst, &a) in md.ext_vals[k].iter_mut().zip(&md.addr[k]) {
                *dst = src[a];
            }
        }
    }

    /// Evaluate services of one model in dependency order.
    ///
    /// With `params_only`, services whose value depends on variables or on
    /// other models are left untouched.
    pub fn eval_services(&mut self, m: usize, params_only: bool) -> Result<()> {
        if !self.ready {
            return Err(NumericError::NotSetUp);
        }
        let c = self.models[m].model.clone();
        let n = self.models[m].n();
        if n == 0 {
            return Ok(());
        }
        self.gather(m);
        for &k in &c.init.service_order {
            let sv = &c.services[k];
            match &sv.spec.kind {
                ServiceKind::Const { .. } => {
                    let expr = sv.expr.as_ref().expect("constant services carry an expression");
                    if params_only && expr.symbols().iter().any(|s| !self.param_only_symbol(&c, s)) {
                        continue;
                    }
                    let prog = sv.program.as_ref().expect("constant services carry a program");
                    let md = &mut self.models[m];
                    let mut out = std::mem::take(&mut md.services[k]);
                    out.resize(n, 0.0);
                    let mut scratch = std::mem::take(&mut md.scratch);
                    let r = prog.eval_into(n, |s| md.column(&self.dae.x, &self.dae.y, s), &mut scratch, &mut out);
                    md.scratch = scratch;
                    md.services[k] = out;
                    r.map_err(|e| self.eval_error(m, &sv.spec.name, e))?;
                }
                ServiceKind::External { model: target, src, indexer } => {
                    if params_only {
                        continue;
                    }
                    let refs = self.refs_of(m, indexer);
                    let mut out = Vec::with_capacity(n);
                    for (i, r) in refs.iter().enumerate() {
                        let (tm, td) = self.find_device(target, r).ok_or_else(|| NumericError::UnknownIdx {
                            model: c.name.clone(),
                            idx: self.models[m].idx[i].clone(),
                            indexer: indexer.clone(),
                            target: target.clone(),
                            value: r.clone(),
                        })?;
                        out.push(self.value_of(tm, td, src).ok_or_else(|| NumericError::BadLink {
                            model: c.name.clone(),
                            name: sv.spec.name.clone(),
                            target: self.models[tm].model.name.clone(),
                            src: src.clone(),
                        })?);
                    }
                    self.models[m].services[k] = out;
                }
                ServiceKind::Reduce { source, indexer } => {
                    let keys = self.refs_of(m, indexer);
                    let vals = self.local_column(m, source);
                    let mut order: Vec<String> = Vec::new();
                    let mut sums: Vec<f64> = Vec::new();
                    for (key, v) in keys.iter().zip(vals) {
                        match order.iter().position(|o| o == key) {
                            Some(p) => sums[p] += v,
                            None => {
                                order.push(key.clone());
                                sums.push(v);
                            }
                        }
                    }
                    let md = &mut self.models[m];
                    md.services[k] = sums;
                    md.reduce_keys[k] = order;
                }
                ServiceKind::Repeat { source, indexer } => {
                    let keys = self.refs_of(m, indexer);
                    let md = &self.models[m];
                    let r = c.service_index(source).expect("validated reduce source");
                    let out: Vec<f64> = keys
                        .iter()
                        .map(|key| {
                            md.reduce_keys[r].iter().position(|o| o == key).map_or(0.0, |p| md.services[r][p])
                        })
                        .collect();
                    self.models[m].services[k] = out;
                }
            }
        }
        Ok(())
    }

    fn param_only_symbol(&self, c: &CompiledModel, s: &str) -> bool {
        if c.param_index(s).is_some() {
            return true;
        }
        match c.service_index(s) {
            Some(k) => match &c.services[k].expr {
                Some(e) => matches!(c.services[k].spec.kind, ServiceKind::Const { .. })
                    && e.symbols().iter().all(|t| self.param_only_symbol(c, t)),
                None => false,
            },
            None => false,
        }
    }

    /// Current value of a named parameter, service or variable of one device.
    pub fn value_of(&self, m: usize, d: usize, name: &str) -> Option<f64> {
        let md = &self.models[m];
        let c = &md.model;
        if let Some(v) = c.var_index(name) {
            let a = md.addr[v][d];
            return Some(match c.vars[v].kind() {
                VarKind::State => self.dae.x[a],
                VarKind::Algeb => self.dae.y[a],
            });
        }
        if let Some(k) = c.service_index(name) {
            return md.services[k].get(d).copied();
        }
        c.param_index(name).map(|k| md.params[k][d])
    }

    /// Per-device column of a parameter, service or variable of model `m`.
    pub fn local_column(&self, m: usize, name: &str) -> Vec<f64> {
        (0..self.models[m].n()).map(|d| self.value_of(m, d, name).unwrap_or(0.0)).collect()
    }

    /// Values of a variable across the devices of a model.
    pub fn var_values(&self, model: &str, var: &str) -> Option<Vec<f64>> {
        let m = self.model_index(model)?;
        self.models[m].model.var_index(var)?;
        Some(self.local_column(m, var))
    }

    /// Set a device's status; refreshes services computed from parameters alone.
    pub fn set_status(&mut self, model: &str, idx: &str, u: f64) -> Result<()> {
        let m = self.model_index(model).ok_or_else(|| NumericError::UnknownModel(model.into()))?;
        let d = self.models[m].device(idx).ok_or_else(|| NumericError::UnknownIdx {
            model: model.into(),
            idx: idx.into(),
            indexer: "idx".into(),
            target: model.into(),
            value: idx.into(),
        })?;
        self.models[m].params[0][d] = u;
        if self.ready {
            self.eval_services(m, true)?;
        }
        Ok(())
    }

    /// Flip a device's status between 0 and 1.
    pub fn toggle(&mut self, model: &str, idx: &str) -> Result<f64> {
        let m = self.model_index(model).ok_or_else(|| NumericError::UnknownModel(model.into()))?;
        let d = self.models[m].device(idx).ok_or_else(|| NumericError::UnknownIdx {
            model: model.into(),
            idx: idx.into(),
            indexer: "idx".into(),
            target: model.into(),
            value: idx.into(),
        })?;
        let u = if self.models[m].params[0][d] != 0.0 { 0.0 } else { 1.0 };
        self.set_status(model, idx, u)?;
        Ok(u)
    }
}
