//! Fixed-step implicit trapezoidal integration with switching events.

use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::newton::{algebraic_with, inf_norm, LinearSolver};
use super::pf::Timing;
use super::{Result, RoutineError};
use crate::linalg::Csc;
use crate::numeric::{JacobianStore, Scope, System};

/// Status toggle of one device at a given time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub model: String,
    pub idx: String,
    pub time: f64,
}

impl FromStr for Event {
    type Err = String;

    /// `toggle:<model>:<idx>:<time>`
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["toggle", model, idx, time] if !model.is_empty() && !idx.is_empty() => {
                let time: f64 = time.parse().map_err(|_| format!("bad event time `{time}`"))?;
                if !time.is_finite() || time < 0.0 {
                    return Err(format!("bad event time `{time}`"));
                }
                Ok(Event { model: model.to_string(), idx: idx.to_string(), time })
            }
            _ => Err(format!("expected toggle:<model>:<idx>:<time>, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdsConfig {
    pub h: f64,
    pub t_end: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub events: Vec<Event>,
}

impl Default for TdsConfig {
    fn default() -> Self {
        TdsConfig { h: 1.0 / 30.0, t_end: 20.0, tol: 1e-8, max_iter: 15, events: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TdsResult {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
    pub newton_iterations: usize,
    pub timing: Timing,
}

impl TdsResult {
    /// Trajectory of a named variable, e.g. `GENCLS.omega[1]`.
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(i) = self.x_names.iter().position(|n| n == name) {
            return Some(self.x.iter().map(|r| r[i]).collect());
        }
        let i = self.y_names.iter().position(|n| n == name)?;
        Some(self.y.iter().map(|r| r[i]).collect())
    }
}

/// Newton iteration matrix [[I - h/2 fx, -h/2 fy], [gx, gy]] over a fixed pattern.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub jac: JacobianStore,
    a: Csc,
    /// Combined-matrix value index of every block entry, blocks in fx, fy, gx, gy order.
    maps: [Vec<usize>; 4],
    /// Row of every fx and fy entry, for clamped-state masking.
    rows: [Vec<usize>; 2],
    diag: Vec<usize>,
    lin: LinearSolver,
    x0: Vec<f64>,
    f0: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
    pub timing: Timing,
}

fn entries(m: &Csc) -> Vec<(usize, usize)> {
    m.iter().map(|(r, c, _)| (r, c)).collect()
}

impl Integrator {
    pub fn new(sys: &System) -> Result<Self> {
        let jac = JacobianStore::build(sys, Scope::Full)?;
        let (nx, ny) = (sys.dae.n_x(), sys.dae.n_y());
        let blocks = [
            (entries(&jac.fx), 0, 0),
            (entries(&jac.fy), 0, nx),
            (entries(&jac.gx), nx, 0),
            (entries(&jac.gy), nx, nx),
        ];
        let mut pos: Vec<(usize, usize)> = (0..nx).map(|i| (i, i)).collect();
        for (e, r0, c0) in &blocks {
            pos.extend(e.iter().map(|(r, c)| (r + r0, c + c0)));
        }
        let a = Csc::pattern(nx + ny, nx + ny, pos).map_err(RoutineError::Linalg)?;
        let maps = blocks.map(|(e, r0, c0)| e.iter().map(|(r, c)| a.slot(r + r0, c + c0).unwrap()).collect());
        let rows = [entries(&jac.fx).iter().map(|e| e.0).collect(), entries(&jac.fy).iter().map(|e| e.0).collect()];
        let diag = (0..nx).map(|i| a.slot(i, i).unwrap()).collect();
        Ok(Integrator {
            jac,
            a,
            maps,
            rows,
            diag,
            lin: LinearSolver::default(),
            x0: vec![0.0; nx],
            f0: vec![0.0; nx],
            rhs: vec![0.0; nx + ny],
            work: vec![0.0; nx + ny],
            timing: Timing::default(),
        })
    }

    fn assemble(&mut self, h: f64, clamped: &[bool]) {
        let vals = self.a.values_mut();
        vals.fill(0.0);
        for &s in &self.diag {
            vals[s] = 1.0;
        }
        let blocks = [&self.jac.fx, &self.jac.fy, &self.jac.gx, &self.jac.gy];
        for (b, m) in blocks.iter().enumerate() {
            let coef = if b < 2 { -0.5 * h } else { 1.0 };
            for (k, (&s, &v)) in self.maps[b].iter().zip(m.values()).enumerate() {
                if b < 2 && clamped[self.rows[b][k]] {
                    continue;
                }
                vals[s] += coef * v;
            }
        }
    }

    /// Advance the system by one step of length `h`. Returns Newton iterations.
    pub fn step(&mut self, sys: &mut System, h: f64, tol: f64, max_iter: usize) -> Result<usize> {
        let nx = sys.dae.n_x();
        let t0 = Instant::now();
        sys.eval_equations(Scope::Full)?;
        self.timing.update += t0.elapsed();
        self.x0.copy_from_slice(&sys.dae.x);
        self.f0.copy_from_slice(&sys.dae.f);
        for it in 0..=max_iter {
            if it > 0 {
                let t0 = Instant::now();
                sys.eval_equations(Scope::Full)?;
                self.timing.update += t0.elapsed();
            }
            let dae = &sys.dae;
            for i in 0..nx {
                self.rhs[i] = if dae.clamped[i] { 0.0 } else { dae.x[i] - self.x0[i] - 0.5 * h * (dae.f[i] + self.f0[i]) };
            }
            self.rhs[nx..].copy_from_slice(&dae.g);
            let r = inf_norm(&self.rhs);
            if r < tol {
                return Ok(it);
            }
            if it == max_iter || !r.is_finite() {
                return Err(RoutineError::NoConvergence { routine: "trapezoidal step", iterations: it, residual: r });
            }
            let t0 = Instant::now();
            self.jac.fill(sys)?;
            self.assemble(h, &sys.dae.clamped);
            self.timing.jacobian += t0.elapsed();
            let t0 = Instant::now();
            let names: Vec<String> = Vec::new();
            let lu = self.lin.factor(&self.a, &names).map_err(|e| match e {
                RoutineError::Singular { variable } => {
                    let k: usize = variable.trim_start_matches('#').parse().unwrap_or(0);
                    let name = if k < nx { sys.dae.x_names.get(k) } else { sys.dae.y_names.get(k - nx) };
                    RoutineError::Singular { variable: name.cloned().unwrap_or(variable) }
                }
                other => other,
            })?;
            self.rhs.iter_mut().for_each(|v| *v = -*v);
            lu.solve_in_place(&mut self.rhs, &mut self.work);
            self.timing.solve += t0.elapsed();
            let dae = &mut sys.dae;
            dae.x.iter_mut().zip(&self.rhs[..nx]).for_each(|(x, d)| *x += d);
            dae.y.iter_mut().zip(&self.rhs[nx..]).for_each(|(y, d)| *y += d);
        }
        unreachable!()
    }

    /// Re-solve the algebraic variables with states frozen.
    pub fn resolve_algebraic(&mut self, sys: &mut System, tol: f64, max_iter: usize) -> Result<usize> {
        let mut lin = LinearSolver::default();
        Ok(algebraic_with(sys, &mut self.jac, &mut lin, tol, max_iter)?.0)
    }
}

/// Simulate from the current (initialized) state to `t_end`.
pub fn run_tds(sys: &mut System, cfg: &TdsConfig) -> Result<TdsResult> {
    if !(cfg.h > 0.0) || !(cfg.t_end >= 0.0) || !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(RoutineError::Config("time-domain simulation needs h > 0, t_end >= 0, tol > 0".into()));
    }
    let mut events = cfg.events.clone();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    for e in &events {
        let ok = sys.model(&e.model).is_some_and(|m| m.device(&e.idx).is_some());
        if !ok {
            return Err(RoutineError::Config(format!("event target {}:{} does not exist", e.model, e.idx)));
        }
    }
    let steps = (cfg.t_end / cfg.h).round() as usize;
    let at: Vec<usize> = events.iter().map(|e| (e.time / cfg.h).round() as usize).collect();
    let mut integ = Integrator::new(sys)?;
    let mut out = TdsResult {
        t: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        x_names: sys.dae.x_names.clone(),
        y_names: sys.dae.y_names.clone(),
        newton_iterations: 0,
        timing: Timing::default(),
    };
    let mut next = 0;
    for k in 0..=steps {
        let t = k as f64 * cfg.h;
        if k > 0 {
            let it = integ
                .step(sys, cfg.h, cfg.tol, cfg.max_iter)
                .map_err(|e| RoutineError::Step { t, source: Box::new(e) })?;
            out.newton_iterations += it;
        }
        sys.dae.t = t;
        out.t.push(t);
        out.x.push(sys.dae.x.clone());
        out.y.push(sys.dae.y.clone());
        let mut fired = false;
        while next < events.len() && at[next] == k {
            sys.toggle(&events[next].model, &events[next].idx)?;
            next += 1;
            fired = true;
        }
        if fired {
            integ
                .resolve_algebraic(sys, cfg.tol, cfg.max_iter)
                .map_err(|e| RoutineError::Step { t, source: Box::new(e) })?;
        }
    }
    out.timing = integ.timing;
    Ok(out)
}
