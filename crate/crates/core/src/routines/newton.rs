//! Newton iterations on the algebraic equations with states held fixed.

use super::{Result, RoutineError};
use crate::linalg::{factorize, Csc, LinalgError, LuFactors, Symbolic};
use crate::numeric::{JacobianStore, Scope, System};

/// Sparse LU with a cached symbolic analysis.
#[derive(Debug, Default, Clone)]
pub(crate) struct LinearSolver {
    symbolic: Option<Symbolic>,
}

impl LinearSolver {
    /// Factorize; a singular pivot is reported with the variable it belongs to.
    pub fn factor(&mut self, a: &Csc, names: &[String]) -> Result<LuFactors> {
        if self.symbolic.as_ref().is_some_and(|s| !s.matches(a)) {
            self.symbolic = None;
        }
        match factorize(a, self.symbolic.as_ref()) {
            Ok(f) => {
                self.symbolic = Some(f.symbolic().clone());
                Ok(f)
            }
            Err(LinalgError::Singular { pivot }) => {
                let col = self
                    .symbolic
                    .clone()
                    .or_else(|| Symbolic::analyze(a).ok())
                    .and_then(|s| s.column_order().get(pivot).copied())
                    .unwrap_or(pivot);
                let variable = names.get(col).cloned().unwrap_or_else(|| format!("#{col}"));
                Err(RoutineError::Singular { variable })
            }
            Err(e) => Err(RoutineError::Linalg(e)),
        }
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

pub(crate) fn n_algeb(sys: &System, scope: Scope) -> usize {
    match scope {
        Scope::Full => sys.dae.n_y(),
        Scope::PowerFlow => sys.n_pf_algeb(),
    }
}

/// Solve g(x, y) = 0 for y in the store's scope. Returns iterations and
/// the final max |g|.
pub fn solve_algebraic(sys: &mut System, jac: &mut JacobianStore, tol: f64, max_iter: usize) -> Result<(usize, f64)> {
    let mut lin = LinearSolver::default();
    algebraic_with(sys, jac, &mut lin, tol, max_iter)
}

pub(crate) fn algebraic_with(
    sys: &mut System,
    jac: &mut JacobianStore,
    lin: &mut LinearSolver,
    tol: f64,
    max_iter: usize,
) -> Result<(usize, f64)> {
    let scope = jac.scope();
    let ny = n_algeb(sys, scope);
    let mut dy = vec![0.0; ny];
    let mut work = vec![0.0; ny];
    for it in 0..=max_iter {
        sys.eval_equations(scope)?;
        let r = inf_norm(&sys.dae.g[..ny]);
        if r < tol {
            return Ok((it, r));
        }
        if it == max_iter {
            return Err(RoutineError::NoConvergence { routine: "algebraic solve", iterations: it, residual: r });
        }
        jac.fill(sys)?;
        let lu = lin.factor(&jac.gy, &sys.dae.y_names)?;
        dy.iter_mut().zip(&sys.dae.g).for_each(|(d, g)| *d = -g);
        lu.solve_in_place(&mut dy, &mut work);
        sys.dae.y[..ny].iter_mut().zip(&dy).for_each(|(y, d)| *y += d);
    }
    unreachable!()
}
