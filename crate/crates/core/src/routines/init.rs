//! Initialization of dynamic models from a solved power flow.

use super::newton::{algebraic_with, inf_norm, LinearSolver};
use super::{Result, RoutineError};
use crate::expr::Program;
use crate::models;
use crate::numeric::{JacobianStore, Scope, System};
use crate::symbolic::{ParamKind, VarKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    /// Replace constant-power loads by constant impedances before initializing.
    pub pq_to_shunt: bool,
    /// Required max(|f|, |g|) after initialization.
    pub tol: f64,
    /// Tolerance and iteration cap of iterative variable sets.
    pub iter_tol: f64,
    pub iter_max: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig { pq_to_shunt: true, tol: 1e-8, iter_tol: 1e-10, iter_max: 50 }
    }
}

fn eval_prog(sys: &mut System, m: usize, name: &str, prog: &Program) -> Result<Vec<f64>> {
    let n = sys.models[m].n();
    let mut out = vec![0.0; n];
    let md = &mut sys.models[m];
    let mut scratch = std::mem::take(&mut md.scratch);
    let r = prog.eval_into(n, |s| md.column(&sys.dae.x, &sys.dae.y, s), &mut scratch, &mut out);
    md.scratch = scratch;
    r.map_err(|e| sys.eval_error(m, name, e))?;
    Ok(out)
}

fn write_var(sys: &mut System, m: usize, k: usize, values: &[f64], online_only: bool) {
    let md = &sys.models[m];
    let kind = md.model.vars[k].kind();
    let dst = match kind {
        VarKind::State => &mut sys.dae.x,
        VarKind::Algeb => &mut sys.dae.y,
    };
    for (d, (&a, &v)) in md.addr[k].iter().zip(values).enumerate() {
        if !online_only || md.params[0][d] != 0.0 {
            dst[a] = v;
        }
    }
}

/// Services, then `v_str` assignments in declaration order.
pub(crate) fn run_initial_values(sys: &mut System, m: usize, flat_start: bool) -> Result<()> {
    if sys.models[m].n() == 0 {
        return Ok(());
    }
    sys.eval_services(m, false)?;
    let c = sys.models[m].model.clone();
    for &k in &c.init.sequential {
        let v = &c.vars[k];
        sys.gather(m);
        sys.update_flags_pre(m);
        let vals = eval_prog(sys, m, v.name(), v.v_prog.as_ref().expect("sequential variables have v_str"))?;
        write_var(sys, m, k, &vals, v.is_external());
    }
    if flat_start && c.name == "Bus" {
        for (k, val) in [(0usize, 0.0), (1, 1.0)] {
            let n = sys.models[m].n();
            write_var(sys, m, k, &vec![val; n], false);
        }
    }
    Ok(())
}

/// Damped Newton on the model's `v_iter` residuals, device by device.
fn run_iterative(sys: &mut System, m: usize, cfg: &InitConfig) -> Result<()> {
    let c = sys.models[m].model.clone();
    let plan = &c.init;
    let k = plan.iterative.len();
    let n = sys.models[m].n();
    if k == 0 || n == 0 {
        return Ok(());
    }
    // start values
    for &v in &plan.iterative {
        if let Some(p) = &c.vars[v].v_prog {
            sys.gather(m);
            let vals = eval_prog(sys, m, c.vars[v].name(), p)?;
            write_var(sys, m, v, &vals, false);
        }
    }
    let residuals = |sys: &mut System| -> Result<Vec<Vec<f64>>> {
        sys.gather(m);
        sys.update_flags_pre(m);
        plan.iterative_residuals
            .iter()
            .zip(&plan.iterative)
            .map(|((_, p), &v)| eval_prog(sys, m, c.vars[v].name(), p))
            .collect()
    };
    let norm = |r: &[Vec<f64>], d: usize| r.iter().fold(0.0f64, |a, col| a.max(col[d].abs()));
    let read = |sys: &System| -> Vec<Vec<f64>> { plan.iterative.iter().map(|&v| sys.local_column(m, c.vars[v].name())).collect() };

    let mut r = residuals(sys)?;
    for _ in 0..cfg.iter_max {
        if (0..n).all(|d| norm(&r, d) < cfg.iter_tol) {
            return Ok(());
        }
        let mut jac = vec![vec![0.0; k * k]; n];
        for e in &plan.iterative_jac {
            let vals = eval_prog(sys, m, c.vars[plan.iterative[e.row]].name(), &e.program)?;
            for d in 0..n {
                jac[d][e.row * k + e.col] += vals[d];
            }
        }
        let start = read(sys);
        let mut step = vec![vec![0.0; n]; k];
        for d in 0..n {
            let rhs: Vec<f64> = r.iter().map(|col| -col[d]).collect();
            let dx = solve_small(&jac[d], rhs, k).ok_or_else(|| RoutineError::Init {
                model: c.name.clone(),
                vars: plan.iterative.iter().map(|&v| c.vars[v].name().to_string()).collect(),
            })?;
            for j in 0..k {
                step[j][d] = dx[j];
            }
        }
        // backtrack per device until its residual does not grow
        let before: Vec<f64> = (0..n).map(|d| norm(&r, d)).collect();
        let mut alpha = vec![1.0; n];
        for _ in 0..20 {
            for (j, &v) in plan.iterative.iter().enumerate() {
                let vals: Vec<f64> = (0..n).map(|d| start[j][d] + alpha[d] * step[j][d]).collect();
                write_var(sys, m, v, &vals, false);
            }
            r = residuals(sys)?;
            let mut again = false;
            for d in 0..n {
                if norm(&r, d) > before[d] && alpha[d] > 1e-4 {
                    alpha[d] *= 0.5;
                    again = true;
                }
            }
            if !again {
                break;
            }
        }
    }
    if (0..n).all(|d| norm(&r, d) < cfg.iter_tol) {
        return Ok(());
    }
    Err(RoutineError::Init {
        model: c.name.clone(),
        vars: plan.iterative.iter().map(|&v| c.vars[v].name().to_string()).collect(),
    })
}

/// Gaussian elimination with partial pivoting on a k x k row-major matrix.
fn solve_small(a: &[f64], mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    let mut a = a.to_vec();
    for col in 0..k {
        let p = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if a[p * k + col] == 0.0 {
            return None;
        }
        for j in 0..k {
            a.swap(col * k + j, p * k + j);
        }
        b.swap(col, p);
        for i in col + 1..k {
            let f = a[i * k + col] / a[col * k + col];
            for j in col..k {
                a[i * k + j] -= f * a[col * k + j];
            }
            b[i] -= f * b[col];
        }
    }
    for col in (0..k).rev() {
        let s: f64 = (col + 1..k).map(|j| a[col * k + j] * b[j]).sum();
        b[col] = (b[col] - s) / a[col * k + col];
    }
    Some(b)
}

/// Take static generators replaced by dynamic machines offline.
fn retire_static_gens(sys: &mut System) -> Result<()> {
    let mut off = Vec::new();
    for m in 0..sys.models.len() {
        let md = &sys.models[m];
        if md.model.flags.pflow || md.n() == 0 {
            continue;
        }
        for p in &md.model.params {
            if let ParamKind::Idx { model: target } = &p.kind {
                if target == "StaticGen" {
                    for (d, r) in sys.refs_of(m, &p.name).into_iter().enumerate() {
                        if md.params[0][d] != 0.0 {
                            if let Some((tm, _)) = sys.find_device(target, &r) {
                                off.push((sys.models[tm].model.name.clone(), r));
                            }
                        }
                    }
                }
            }
        }
    }
    for (model, idx) in off {
        sys.set_status(&model, &idx, 0.0)?;
    }
    Ok(())
}

/// Initialize every dynamic model from the current power-flow solution and
/// verify that the full residual vanishes.
pub fn initialize_dynamics(sys: &mut System, cfg: &InitConfig) -> Result<JacobianStore> {
    if cfg.pq_to_shunt {
        models::convert_pq_to_shunt(sys)?;
    }
    for m in 0..sys.models.len() {
        if sys.in_scope(m, Scope::PowerFlow) {
            continue;
        }
        run_initial_values(sys, m, false)?;
        run_iterative(sys, m, cfg)?;
    }
    sys.check_bounds()?;
    retire_static_gens(sys)?;
    let mut jac = JacobianStore::build(sys, Scope::Full)?;
    let mut lin = LinearSolver::default();
    algebraic_with(sys, &mut jac, &mut lin, cfg.tol * 1e-3, 20)?;
    sys.eval_equations(Scope::Full)?;
    let (fmax, gmax) = (inf_norm(&sys.dae.f), inf_norm(&sys.dae.g));
    if fmax.max(gmax) >= cfg.tol {
        let (names, vals) = if fmax >= gmax { (&sys.dae.x_names, &sys.dae.f) } else { (&sys.dae.y_names, &sys.dae.g) };
        let i = (0..vals.len()).max_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs())).unwrap();
        return Err(RoutineError::Inconsistent { equation: names[i].clone(), residual: vals[i].abs() });
    }
    jac.fill(sys)?;
    Ok(jac)
}
