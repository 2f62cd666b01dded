//! State matrix and eigenvalue report.

use num_complex::Complex64;
use serde::Serialize;

use super::newton::LinearSolver;
use super::Result;
use crate::linalg::{damping_ratio, dense_eigenvalues, DenseMatrix};
use crate::numeric::{JacobianStore, Scope, System};

/// A = fx - fy gy^-1 gx at the current operating point.
pub fn compute_state_matrix(sys: &mut System, jac: &mut JacobianStore) -> Result<DenseMatrix> {
    sys.eval_equations(Scope::Full)?;
    jac.fill(sys)?;
    let (nx, ny) = (sys.dae.n_x(), sys.dae.n_y());
    let mut a = jac.fx.to_dense().to_rows();
    if ny > 0 && nx > 0 {
        let lu = LinearSolver::default().factor(&jac.gy, &sys.dae.y_names)?;
        let mut work = vec![0.0; ny];
        let mut z = vec![0.0; ny];
        let (gp, gi, gv) = (jac.gx.colptr(), jac.gx.rowidx(), jac.gx.values());
        let (fp, fi, fv) = (jac.fy.colptr(), jac.fy.rowidx(), jac.fy.values());
        for j in 0..nx {
            if gp[j] == gp[j + 1] {
                continue;
            }
            z.fill(0.0);
            for p in gp[j]..gp[j + 1] {
                z[gi[p]] = gv[p];
            }
            lu.solve_in_place(&mut z, &mut work);
            // a[:, j] -= fy z
            for (col, &zc) in z.iter().enumerate() {
                if zc == 0.0 {
                    continue;
                }
                for p in fp[col]..fp[col + 1] {
                    a[fi[p]][j] -= fv[p] * zc;
                }
            }
        }
    }
    Ok(DenseMatrix::from_rows(&a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub re: f64,
    pub im: f64,
    /// Damping ratio; 1 for a zero eigenvalue.
    pub zeta: f64,
}

impl Mode {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Oscillation frequency in Hz.
    pub fn freq_hz(&self) -> f64 {
        self.im.abs() / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    /// Sorted by damping ratio, ascending; conjugates adjacent (positive imaginary part first).
    pub modes: Vec<Mode>,
}

impl EigenReport {
    pub fn from_eigenvalues(values: &[Complex64]) -> Self {
        let mut modes: Vec<Mode> =
            values.iter().map(|l| Mode { re: l.re, im: l.im, zeta: damping_ratio(*l) }).collect();
        modes.sort_by(|a, b| {
            a.zeta
                .total_cmp(&b.zeta)
                .then(a.im.abs().total_cmp(&b.im.abs()))
                .then(b.im.total_cmp(&a.im))
        });
        EigenReport { modes }
    }

    /// Modes with a positive imaginary part.
    pub fn oscillatory(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(|m| m.im > 0.0)
    }
}

/// Eigenvalues of `a` ranked by damping ratio.
pub fn eigen_report(a: &DenseMatrix) -> Result<EigenReport> {
    let values = dense_eigenvalues(a).map_err(super::RoutineError::Linalg)?;
    Ok(EigenReport::from_eigenvalues(&values))
}
