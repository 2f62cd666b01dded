//! Residual evaluation and discrete flag updates.

use super::system::{Scope, System};
use super::{NumericError, Result};
use crate::symbolic::{DiscreteKind, VarKind};

impl System {
    /// Hard limiters from their inputs; anti-windup flags reset to within.
    pub fn update_flags_pre(&mut self, m: usize) {
        let md = &mut self.models[m];
        let n = md.n();
        let c = md.model.clone();
        for (d, spec) in c.discretes.iter().enumerate() {
            match spec.kind {
                DiscreteKind::AntiWindup => {
                    md.flags[3 * d].fill(1.0);
                    md.flags[3 * d + 1].fill(0.0);
                    md.flags[3 * d + 2].fill(0.0);
                }
                DiscreteKind::HardLimiter => {
                    let col = |name: &str| -> Vec<f64> {
                        let s = c.slot_of(name).expect("validated discrete operand");
                        let v = md.column(&self.dae.x, &self.dae.y, s);
                        (0..n).map(|i| if v.len() == n { v[i] } else { v[0] }).collect()
                    };
                    let (input, lo, hi) = (col(&spec.input), col(&spec.lower), col(&spec.upper));
                    for i in 0..n {
                        let (zl, zu) = (input[i] < lo[i], input[i] > hi[i]);
                        md.flags[3 * d][i] = f64::from(!zl && !zu);
                        md.flags[3 * d + 1][i] = f64::from(zl);
                        md.flags[3 * d + 2][i] = f64::from(zu);
                    }
                }
            }
        }
    }

    /// Anti-windup clamping after the state residuals are known.
    fn update_flags_post(&mut self, m: usize) {
        let md = &mut self.models[m];
        let n = md.n();
        let c = md.model.clone();
        for (d, spec) in c.discretes.iter().enumerate() {
            if spec.kind != DiscreteKind::AntiWindup {
                continue;
            }
            let v = c.var_index(&spec.input).expect("validated discrete input");
            let start = md.addr[v][0];
            let bound = |name: &str| -> Vec<f64> {
                let s = c.slot_of(name).expect("validated discrete operand");
                let col = md.column(&self.dae.x, &self.dae.y, s);
                (0..n).map(|i| if col.len() == n { col[i] } else { col[0] }).collect()
            };
            let (los, his) = (bound(&spec.lower), bound(&spec.upper));
            for i in 0..n {
                let (lo, hi) = (los[i], his[i]);
                let a = start + i;
                let (x, f) = (self.dae.x[a], self.dae.f[a]);
                let (zl, zu) = (x <= lo && f < 0.0, x >= hi && f > 0.0);
                if zl || zu {
                    self.dae.x[a] = if zu { hi } else { lo };
                    self.dae.f[a] = 0.0;
                    self.dae.clamped[a] = true;
                }
                md.flags[3 * d][i] = f64::from(!zl && !zu);
                md.flags[3 * d + 1][i] = f64::from(zl);
                md.flags[3 * d + 2][i] = f64::from(zu);
            }
        }
    }

    /// Check lower <= upper for every discrete component.
    pub fn check_bounds(&self) -> Result<()> {
        for md in &self.models {
            let n = md.n();
            let c = &md.model;
            for spec in &c.discretes {
                let col = |name: &str| md.column(&self.dae.x, &self.dae.y, c.slot_of(name).unwrap()).to_vec();
                let (lo, hi) = (col(&spec.lower), col(&spec.upper));
                for i in 0..n {
                    let l = if lo.len() == n { lo[i] } else { lo[0] };
                    let h = if hi.len() == n { hi[i] } else { hi[0] };
                    if l > h {
                        return Err(NumericError::Bounds {
                            model: c.name.clone(),
                            discrete: spec.name.clone(),
                            idx: md.idx[i].clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluate one model's residuals and accumulate them into `f` and `g`.
    pub fn eval_model(&mut self, m: usize) -> Result<()> {
        if self.models[m].n() == 0 {
            return Ok(());
        }
        // 1. external values in
        self.gather(m);
        self.update_flags_pre(m);
        // 2. residual programs: internal rows in place, external rows locally
        let c = self.models[m].model.clone();
        let n = self.models[m].n();
        for (k, v) in c.vars.iter().enumerate() {
            let Some(prog) = &v.e_prog else { continue };
            let dae = &mut self.dae;
            let md = &mut self.models[m];
            let (x, y) = (&dae.x, &dae.y);
            let mut scratch = std::mem::take(&mut md.scratch);
            let r = if v.is_external() {
                let mut out = std::mem::take(&mut md.ext_eq[k]);
                let r = prog.eval_into(n, |s| md.column(x, y, s), &mut scratch, &mut out);
                md.ext_eq[k] = out;
                r
            } else {
                let start = md.addr[k][0];
                let out = match v.kind() {
                    VarKind::State => &mut dae.f[start..start + n],
                    VarKind::Algeb => &mut dae.g[start..start + n],
                };
                prog.eval_add(n, |s| md.column(x, y, s), &mut scratch, out)
            };
            md.scratch = scratch;
            r.map_err(|e| self.eval_error(m, v.name(), e))?;
        }
        // 3. binding anti-windup limiters
        self.update_flags_post(m);
        // 4. external contributions out
        let dae = &mut self.dae;
        let md = &self.models[m];
        for (k, v) in c.vars.iter().enumerate() {
            if !v.is_external() || v.e_prog.is_none() {
                continue;
            }
            let dst = match v.kind() {
                VarKind::State => &mut dae.f,
                VarKind::Algeb => &mut dae.g,
            };
            for (&a, &val) in md.addr[k].iter().zip(&md.ext_eq[k]) {
                dst[a] += val;
            }
        }
        Ok(())
    }

    /// Zero the residuals in scope, then evaluate every model in scope.
    pub fn eval_equations(&mut self, scope: Scope) -> Result<()> {
        if !self.is_ready() {
            return Err(NumericError::NotSetUp);
        }
        match scope {
            Scope::Full => {
                self.dae.f.fill(0.0);
                self.dae.g.fill(0.0);
                self.dae.clamped.fill(false);
            }
            Scope::PowerFlow => {
                let n = self.n_pf_algeb();
                self.dae.g[..n].fill(0.0);
            }
        }
        for m in 0..self.models.len() {
            if self.in_scope(m, scope) {
                self.eval_model(m)?;
            }
        }
        Ok(())
    }

    /// Largest absolute residual in scope.
    pub fn max_residual(&self, scope: Scope) -> f64 {
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        match scope {
            Scope::Full => inf(&self.dae.f).max(inf(&self.dae.g)),
            Scope::PowerFlow => inf(&self.dae.g[..self.n_pf_algeb()]),
        }
    }
}
