use super::LinalgError;

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csc {
    nrows: usize,
    ncols: usize,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    values: Vec<f64>,
}

/// Sum duplicate triplets into a canonical CSC matrix.
pub fn csc_from_triplets(
    nrows: usize,
    ncols: usize,
    entries: &[(usize, usize, f64)],
) -> Result<Csc, LinalgError> {
    Csc::from_triplets(nrows, ncols, entries)
}

impl Csc {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Csc { nrows, ncols, colptr: vec![0; ncols + 1], rowidx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Csc {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowidx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        let mut m = Self::pattern(nrows, ncols, entries.iter().map(|&(r, c, _)| (r, c)))?;
        for &(r, c, v) in entries {
            let s = m.slot(r, c).expect("position registered above");
            m.values[s] += v;
        }
        Ok(m)
    }

    /// Zero-filled matrix whose stored positions are the given (row, col) pairs.
    pub fn pattern(
        nrows: usize,
        ncols: usize,
        positions: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, LinalgError> {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); ncols];
        for (r, c) in positions {
            if r >= nrows || c >= ncols {
                return Err(LinalgError::OutOfBounds { row: r, col: c, nrows, ncols });
            }
            cols[c].push(r);
        }
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowidx = Vec::new();
        colptr.push(0);
        for mut rows in cols {
            rows.sort_unstable();
            rows.dedup();
            rowidx.extend(rows);
            colptr.push(rowidx.len());
        }
        let nnz = rowidx.len();
        Ok(Csc { nrows, ncols, colptr, rowidx, values: vec![0.0; nnz] })
    }

    pub(crate) fn from_parts(
        nrows: usize,
        ncols: usize,
        colptr: Vec<usize>,
        rowidx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        Csc { nrows, ncols, colptr, rowidx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rowidx.len()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowidx(&self) -> &[usize] {
        &self.rowidx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Storage slot of position (row, col), if present.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        if col >= self.ncols {
            return None;
        }
        let lo = self.colptr[col];
        let hi = self.colptr[col + 1];
        self.rowidx[lo..hi].binary_search(&row).ok().map(|k| lo + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.slot(row, col).map_or(0.0, |s| self.values[s])
    }

    /// Reset stored values to zero, keeping the pattern.
    pub fn zeroize(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Add `values[k]` at storage slot `slots[k]`. Never reallocates.
    pub fn inplace_add(&mut self, slots: &[usize], values: &[f64]) -> Result<(), LinalgError> {
        if slots.len() != values.len() {
            return Err(LinalgError::Dimension { expected: slots.len(), got: values.len() });
        }
        let nnz = self.values.len();
        for (&s, &v) in slots.iter().zip(values) {
            match self.values.get_mut(s) {
                Some(x) => *x += v,
                None => return Err(LinalgError::UnregisteredSlot { slot: s, nnz }),
            }
        }
        Ok(())
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for (j, xj) in x.iter().enumerate().take(self.ncols) {
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowidx[p]] += self.values[p] * xj;
            }
        }
        y
    }

    pub fn transpose(&self) -> Csc {
        let mut entries = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                entries.push((j, self.rowidx[p], self.values[p]));
            }
        }
        Csc::from_triplets(self.ncols, self.nrows, &entries).expect("indices in range")
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                d[(self.rowidx[p], j)] += self.values[p];
            }
        }
        d
    }

    /// Iterate stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.colptr[j]..self.colptr[j + 1]).map(move |p| (self.rowidx[p], j, self.values[p]))
        })
    }

    /// Equality of the stored position sets.
    pub fn same_pattern(&self, other: &Csc) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.colptr == other.colptr
            && self.rowidx == other.rowidx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shunt_column() {
        let m = csc_from_triplets(2, 2, &[(0, 1, 2.0), (1, 1, -3.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.colptr(), &[0, 0, 2]);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 1), -3.0);
    }

    #[test]
    fn empty_and_duplicates() {
        let m = csc_from_triplets(3, 3, &[]).unwrap();
        assert_eq!(m.nnz(), 0);
        let m = csc_from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn out_of_bounds() {
        assert!(csc_from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn inplace_add_at_slots() {
        let mut m = Csc::pattern(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let slots: Vec<usize> = (0..3).map(|i| m.slot(i, i).unwrap()).collect();
        m.inplace_add(&slots, &[0.002; 3]).unwrap();
        assert_eq!(m.values(), &[0.002; 3]);
        m.inplace_add(&slots, &[0.0; 3]).unwrap();
        assert_eq!(m.values(), &[0.002; 3]);
        assert!(m.inplace_add(&[7], &[1.0]).is_err());
        m.zeroize();
        assert_eq!(m.values(), &[0.0; 3]);
        assert_eq!(m.nnz(), 3);
    }
}
