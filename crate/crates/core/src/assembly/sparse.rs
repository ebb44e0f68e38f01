use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in input order, so two entries fed the same
    /// contributions in the same order end up bitwise equal.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> CsrMatrix {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Shape { expected: self.n, actual: x.len() });
        }
        Ok((0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    /// Largest `|K_ij − K_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets().into_iter().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max)
    }

    /// Submatrix on the index set `keep` (given in increasing order), renumbered.
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let entries = keep
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| {
                let new_index = &new_index;
                self.row(i).filter_map(move |(j, v)| (new_index[j] != usize::MAX).then_some((k, new_index[j], v)))
            })
            .collect();
        CsrMatrix::from_triplets(keep.len(), entries)
    }

    /// `scale_a · A + scale_m · diag(d)` as a faer column matrix (lower and upper parts).
    pub fn to_faer_shifted(&self, scale_a: f64, diag: &[f64], scale_d: f64) -> Result<SparseColMat<usize, f64>> {
        let mut t: Vec<Triplet<usize, usize, f64>> = self.triplets().into_iter().map(|(i, j, v)| Triplet::new(i, j, scale_a * v)).collect();
        t.extend(diag.iter().enumerate().map(|(i, &d)| Triplet::new(i, i, scale_d * d)));
        SparseColMat::try_new_from_triplets(self.n, self.n, &t)
            .map_err(|e| Error::numerical(format!("sparse matrix construction failed: {e:?}"), f64::NAN))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }
}
