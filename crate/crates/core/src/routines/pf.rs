//! Newton-Raphson power flow.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::init::run_initial_values;
use super::newton::{inf_norm, LinearSolver};
use super::{Result, RoutineError};
use crate::linalg::LuFactors;
use crate::numeric::{JacobianStore, Scope, System};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlowConfig {
    /// Convergence threshold on max |g|.
    pub tol: f64,
    pub max_iter: usize,
    /// Start from v = 1, a = 0 instead of the bus table values.
    pub flat_start: bool,
    /// Factorize the Jacobian only once (dishonest Newton).
    pub dishonest: bool,
}

impl Default for PowerFlowConfig {
    fn default() -> Self {
        PowerFlowConfig { tol: 1e-8, max_iter: 20, flat_start: false, dishonest: false }
    }
}

/// Accumulated wall time of the three phases of a Newton iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    /// Factorization and triangular solves.
    pub solve: Duration,
    /// Residual evaluation.
    pub update: Duration,
    /// Jacobian fill.
    pub jacobian: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerFlowResult {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Max |g| before each update, last entry at the solution.
    pub history: Vec<f64>,
    pub timing: Timing,
}

/// Buses not connected through online lines to an online slack.
fn islanded(sys: &System) -> Vec<String> {
    let Some(bus) = sys.model("Bus") else { return Vec::new() };
    let n = bus.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    if let Some(m) = sys.model_index("Line") {
        let b1 = sys.refs_of(m, "bus1");
        let b2 = sys.refs_of(m, "bus2");
        for d in 0..sys.models[m].n() {
            if sys.models[m].status()[d] == 0.0 {
                continue;
            }
            if let (Some(i), Some(j)) = (bus.device(&b1[d]), bus.device(&b2[d])) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut anchored = vec![false; n];
    if let Some(m) = sys.model_index("Slack") {
        let b = sys.refs_of(m, "bus");
        for d in 0..sys.models[m].n() {
            if sys.models[m].status()[d] != 0.0 {
                if let Some(i) = bus.device(&b[d]) {
                    let r = find(&mut parent, i);
                    anchored[r] = true;
                }
            }
        }
    }
    (0..n).filter(|&i| !anchored[find(&mut parent, i)]).map(|i| bus.idx[i].clone()).collect()
}

/// Solve the power-flow equations in place.
pub fn solve_power_flow(sys: &mut System, cfg: &PowerFlowConfig) -> Result<PowerFlowResult> {
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(RoutineError::Config("power flow needs tol > 0 and max_iter >= 1".into()));
    }
    let buses = islanded(sys);
    if !buses.is_empty() {
        return Err(RoutineError::Islanded { buses });
    }
    for m in 0..sys.models.len() {
        if sys.in_scope(m, Scope::PowerFlow) {
            run_initial_values(sys, m, cfg.flat_start)?;
        }
    }
    let mut jac = JacobianStore::build(sys, Scope::PowerFlow)?;
    let ny = sys.n_pf_algeb();
    let mut lin = LinearSolver::default();
    let mut lu: Option<LuFactors> = None;
    let mut dy = vec![0.0; ny];
    let mut work = vec![0.0; ny];
    let mut timing = Timing::default();
    let mut history = Vec::new();
    for it in 0..=cfg.max_iter {
        let t0 = Instant::now();
        sys.eval_equations(Scope::PowerFlow)?;
        timing.update += t0.elapsed();
        let r = inf_norm(&sys.dae.g[..ny]);
        history.push(r);
        if r < cfg.tol {
            return Ok(PowerFlowResult { converged: true, iterations: it, residual: r, history, timing });
        }
        if it == cfg.max_iter || !r.is_finite() {
            return Err(RoutineError::NoConvergence { routine: "power flow", iterations: it, residual: r });
        }
        if lu.is_none() || !cfg.dishonest {
            let t0 = Instant::now();
            jac.fill(sys)?;
            timing.jacobian += t0.elapsed();
            let t0 = Instant::now();
            lu = Some(lin.factor(&jac.gy, &sys.dae.y_names)?);
            timing.solve += t0.elapsed();
        }
        let t0 = Instant::now();
        dy.iter_mut().zip(&sys.dae.g).for_each(|(d, g)| *d = -g);
        lu.as_ref().unwrap().solve_in_place(&mut dy, &mut work);
        timing.solve += t0.elapsed();
        sys.dae.y[..ny].iter_mut().zip(&dy).for_each(|(y, d)| *y += d);
    }
    unreachable!()
}
