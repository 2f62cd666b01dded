use super::{minimum_degree, Csc, LinalgError};

const NONE: usize = usize::MAX;
// Keep the diagonal as pivot when it is at least this fraction of the column max.
const DIAG_PREFERENCE: f64 = 1e-3;

/// Reusable symbolic analysis: column ordering plus the pattern it was made for.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbolic {
    n: usize,
    colperm: Vec<usize>,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    lnz_hint: usize,
    unz_hint: usize,
}

impl Symbolic {
    pub fn analyze(a: &Csc) -> Result<Self, LinalgError> {
        if a.nrows() != a.ncols() {
            return Err(LinalgError::NotSquare { nrows: a.nrows(), ncols: a.ncols() });
        }
        Ok(Symbolic {
            n: a.ncols(),
            colperm: minimum_degree(a),
            colptr: a.colptr().to_vec(),
            rowidx: a.rowidx().to_vec(),
            lnz_hint: 4 * a.nnz() + a.ncols(),
            unz_hint: 4 * a.nnz() + a.ncols(),
        })
    }

    pub fn matches(&self, a: &Csc) -> bool {
        a.ncols() == self.n && a.colptr() == self.colptr.as_slice() && a.rowidx() == self.rowidx.as_slice()
    }

    pub fn column_order(&self) -> &[usize] {
        &self.colperm
    }
}

/// L and U factors with row pivoting `pinv` and column ordering `q`:
/// P A Q = L U, with unit lower-triangular L.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    pinv: Vec<usize>,
    l: Csc,
    u: Csc,
    symbolic: Symbolic,
}

/// Factorize `a`, reusing `reuse` when given. The token must match the pattern.
pub fn factorize(a: &Csc, reuse: Option<&Symbolic>) -> Result<LuFactors, LinalgError> {
    let symbolic = match reuse {
        Some(s) => {
            if !s.matches(a) {
                return Err(LinalgError::PatternMismatch);
            }
            s.clone()
        }
        None => Symbolic::analyze(a)?,
    };
    let n = symbolic.n;
    let q = &symbolic.colperm;

    let mut lp = Vec::with_capacity(n + 1);
    let mut li: Vec<usize> = Vec::with_capacity(symbolic.lnz_hint);
    let mut lx: Vec<f64> = Vec::with_capacity(symbolic.lnz_hint);
    let mut up = Vec::with_capacity(n + 1);
    let mut ui: Vec<usize> = Vec::with_capacity(symbolic.unz_hint);
    let mut ux: Vec<f64> = Vec::with_capacity(symbolic.unz_hint);

    let mut pinv = vec![NONE; n];
    let mut x = vec![0.0; n];
    let mut xi = vec![0usize; n];
    let mut stack = vec![0usize; n];
    let mut pstack = vec![0usize; n];
    let mut mark = vec![false; n];

    for k in 0..n {
        lp.push(li.len());
        up.push(ui.len());
        let col = q[k];

        // x = L \ A(:, col) restricted to the reach of A(:, col)
        let top = reach(&lp, &li, a, col, &pinv, &mut xi, &mut stack, &mut pstack, &mut mark);
        for &i in &xi[top..] {
            x[i] = 0.0;
        }
        for p in a.colptr()[col]..a.colptr()[col + 1] {
            x[a.rowidx()[p]] = a.values()[p];
        }
        for px in top..n {
            let j = xi[px];
            let jj = pinv[j];
            if jj == NONE {
                continue;
            }
            let xj = x[j];
            let end = if jj + 1 < lp.len() { lp[jj + 1] } else { li.len() };
            for p in lp[jj] + 1..end {
                x[li[p]] -= lx[p] * xj;
            }
        }

        // choose pivot among rows not yet pivotal
        let mut ipiv = NONE;
        let mut amax = -1.0;
        for &i in &xi[top..] {
            if pinv[i] == NONE {
                let t = x[i].abs();
                if t > amax {
                    amax = t;
                    ipiv = i;
                }
            } else {
                ui.push(pinv[i]);
                ux.push(x[i]);
            }
        }
        if ipiv == NONE || amax <= 0.0 || !amax.is_finite() {
            return Err(LinalgError::Singular { pivot: k });
        }
        if pinv[col] == NONE && x[col].abs() >= amax * DIAG_PREFERENCE {
            ipiv = col;
        }
        let pivot = x[ipiv];
        ui.push(k);
        ux.push(pivot);
        pinv[ipiv] = k;
        li.push(ipiv);
        lx.push(1.0);
        for &i in &xi[top..] {
            if pinv[i] == NONE {
                li.push(i);
                lx.push(x[i] / pivot);
            }
            x[i] = 0.0;
        }
    }
    lp.push(li.len());
    up.push(ui.len());
    for r in li.iter_mut() {
        *r = pinv[*r];
    }
    Ok(LuFactors {
        n,
        pinv,
        l: Csc::from_parts(n, n, lp, li, lx),
        u: Csc::from_parts(n, n, up, ui, ux),
        symbolic,
    })
}

/// Depth-first reach of column `col` of B in the graph of the partial L.
/// Returns `top`; the reach in topological order is `xi[top..n]`.
#[allow(clippy::too_many_arguments)]
fn reach(
    lp: &[usize],
    li: &[usize],
    b: &Csc,
    col: usize,
    pinv: &[usize],
    xi: &mut [usize],
    stack: &mut [usize],
    pstack: &mut [usize],
    mark: &mut [bool],
) -> usize {
    let n = xi.len();
    let mut top = n;
    let lcols = lp.len();
    let col_end = |jj: usize| if jj + 1 < lcols { lp[jj + 1] } else { li.len() };
    for p in b.colptr()[col]..b.colptr()[col + 1] {
        let start = b.rowidx()[p];
        if mark[start] {
            continue;
        }
        let mut head = 0usize;
        stack[0] = start;
        loop {
            let j = stack[head];
            let jj = pinv[j];
            if !mark[j] {
                mark[j] = true;
                pstack[head] = if jj == NONE { 0 } else { lp[jj] };
            }
            let end = if jj == NONE { 0 } else { col_end(jj) };
            let mut done = true;
            let mut q = pstack[head];
            while q < end {
                let i = li[q];
                q += 1;
                if mark[i] {
                    continue;
                }
                pstack[head] = q;
                head += 1;
                stack[head] = i;
                done = false;
                break;
            }
            if done {
                top -= 1;
                xi[top] = j;
                if head == 0 {
                    break;
                }
                head -= 1;
            }
        }
    }
    for &i in &xi[top..] {
        mark[i] = false;
    }
    top
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn symbolic(&self) -> &Symbolic {
        &self.symbolic
    }

    /// Solve A z = b, overwriting `b` with z. `work` must have length n.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            work[self.pinv[k]] = b[k];
        }
        let (lp, li, lx) = (self.l.colptr(), self.l.rowidx(), self.l.values());
        for j in 0..n {
            let xj = work[j];
            for p in lp[j] + 1..lp[j + 1] {
                work[li[p]] -= lx[p] * xj;
            }
        }
        let (up, ui, ux) = (self.u.colptr(), self.u.rowidx(), self.u.values());
        for j in (0..n).rev() {
            work[j] /= ux[up[j + 1] - 1];
            let xj = work[j];
            for p in up[j]..up[j + 1] - 1 {
                work[ui[p]] -= ux[p] * xj;
            }
        }
        let q = &self.symbolic.colperm;
        for k in 0..n {
            b[q[k]] = work[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::Dimension { expected: self.n, got: b.len() });
        }
        let mut z = b.to_vec();
        let mut work = vec![0.0; self.n];
        self.solve_in_place(&mut z, &mut work);
        Ok(z)
    }

    pub fn nnz(&self) -> (usize, usize) {
        (self.l.nnz(), self.u.nnz())
    }
}

/// Solve A z = b. Returns the solution and the symbolic token for reuse.
pub fn sparse_lu_solve(
    a: &Csc,
    b: &[f64],
    reuse: Option<&Symbolic>,
) -> Result<(Vec<f64>, Symbolic), LinalgError> {
    let f = factorize(a, reuse)?;
    let z = f.solve(b)?;
    Ok((z, f.symbolic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &Csc, z: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(z).iter().zip(b).map(|(l, r)| (l - r).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_reproduces_rhs() {
        let a = Csc::identity(4);
        let b = [1.0, -2.0, 3.5, 0.0];
        let (z, _) = sparse_lu_solve(&a, &b, None).unwrap();
        assert_eq!(z, b);
    }

    #[test]
    fn two_by_two_hand_elimination() {
        let a = Csc::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let (z, _) = sparse_lu_solve(&a, &[3.0, 5.0], None).unwrap();
        assert!((z[0] - 0.8).abs() < 1e-14 && (z[1] - 1.4).abs() < 1e-14, "{z:?}");
    }

    #[test]
    fn needs_row_pivoting() {
        // zero diagonal
        let a = Csc::from_triplets(3, 3, &[(1, 0, 1.0), (0, 1, 1.0), (2, 2, 2.0), (0, 2, 1.0)]).unwrap();
        let b = [1.0, 2.0, 3.0];
        let (z, _) = sparse_lu_solve(&a, &b, None).unwrap();
        assert!(residual(&a, &z, &b) < 1e-14);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = Csc::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(factorize(&a, None), Err(LinalgError::Singular { .. })));
        let a = Csc::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(factorize(&a, None), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn reuse_and_mismatch() {
        let a = Csc::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let (_, sym) = sparse_lu_solve(&a, &[1.0, 1.0], None).unwrap();
        let a2 = Csc::from_triplets(2, 2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 5.0)]).unwrap();
        let (z, _) = sparse_lu_solve(&a2, &[5.0, 6.0], Some(&sym)).unwrap();
        assert!(residual(&a2, &z, &[5.0, 6.0]) < 1e-14);
        let a3 = Csc::identity(2);
        assert_eq!(factorize(&a3, Some(&sym)).unwrap_err(), LinalgError::PatternMismatch);
    }
}
