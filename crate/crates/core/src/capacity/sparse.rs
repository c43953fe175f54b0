//! Compressed sparse rows, incomplete Cholesky and preconditioned CG.

/// Symmetric matrix stored with both triangles, columns sorted per row.
#[derive(Clone, Debug)]
pub(crate) struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
    pub diag: Vec<usize>,
}

impl Csr {
    /// Pattern from a list of (row, col) pairs; duplicates merged.
    pub fn from_pattern(n: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _) in &pairs {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols: Vec<u32> = pairs.iter().map(|&(_, c)| c).collect();
        let diag = (0..n)
            .map(|i| {
                let lo = row_ptr[i];
                let hi = row_ptr[i + 1];
                lo + cols[lo..hi]
                    .binary_search(&(i as u32))
                    .expect("pattern contains the diagonal")
            })
            .collect();
        let nnz = cols.len();
        Self {
            n,
            row_ptr,
            cols,
            vals: vec![0.0; nnz],
            diag,
        }
    }

    pub fn slot(&self, r: usize, c: usize) -> usize {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        lo + self.cols[lo..hi]
            .binary_search(&(c as u32))
            .expect("entry present in pattern")
    }

    pub fn clear(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }
}

/// Incomplete Cholesky factor on the lower pattern of a [`Csr`] matrix.
pub(crate) struct IncompleteCholesky {
    /// Row-wise strictly lower part of `L` (same pattern as the matrix).
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl IncompleteCholesky {
    /// Factorizes `A + shift·diag(A)`, raising the shift until all pivots are positive.
    pub fn new(a: &Csr) -> Self {
        let mut shift = 0.0;
        loop {
            if let Some(f) = Self::try_factor(a, shift) {
                return f;
            }
            shift = if shift == 0.0 { 1e-3 } else { shift * 4.0 };
        }
    }

    fn try_factor(a: &Csr, shift: f64) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        for i in 0..n {
            for k in a.row_ptr[i]..a.diag[i] {
                cols.push(a.cols[k]);
            }
            row_ptr[i + 1] = cols.len();
        }
        let mut vals = vec![0.0; cols.len()];
        let mut diag = vec![0.0; n];
        // Dense scatter of the current row for the inner products.
        let mut work = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        for i in 0..n {
            let lo = row_ptr[i];
            let hi = row_ptr[i + 1];
            for (off, k) in (lo..hi).enumerate() {
                let j = cols[k] as usize;
                work[j] = a.vals[a.row_ptr[i] + off];
                mark[j] = i;
            }
            for k in lo..hi {
                let j = cols[k] as usize;
                // L_ij = (a_ij - Σ_{m<j} L_im L_jm) / L_jj
                let mut s = work[j];
                for kk in row_ptr[j]..row_ptr[j + 1] {
                    let m = cols[kk] as usize;
                    if mark[m] == i {
                        s -= vals[kk] * work_l(&vals, &cols, lo, hi, m);
                    }
                }
                let lij = s / diag[j];
                vals[k] = lij;
            }
            let mut d = a.vals[a.diag[i]] * (1.0 + shift);
            d -= vals[lo..hi].iter().map(|v| v * v).sum::<f64>();
            if d <= 1e-14 * a.vals[a.diag[i]].abs() || !d.is_finite() {
                return None;
            }
            diag[i] = d.sqrt();
            for k in lo..hi {
                mark[cols[k] as usize] = usize::MAX;
            }
        }
        Some(Self {
            row_ptr,
            cols,
            vals,
            diag,
        })
    }

    /// Solves `L Lᵀ z = r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut s = r[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s -= self.vals[k] * z[self.cols[k] as usize];
            }
            z[i] = s / self.diag[i];
        }
        for i in (0..n).rev() {
            z[i] /= self.diag[i];
            let zi = z[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                z[self.cols[k] as usize] -= self.vals[k] * zi;
            }
        }
    }
}

/// Already-computed `L_im` for the row being factored (columns sorted).
fn work_l(vals: &[f64], cols: &[u32], lo: usize, hi: usize, m: usize) -> f64 {
    match cols[lo..hi].binary_search(&(m as u32)) {
        Ok(p) => vals[lo + p],
        Err(_) => 0.0,
    }
}

pub(crate) struct CgOutcome {
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub(crate) fn pcg(
    a: &Csr,
    pre: &IncompleteCholesky,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = a.n;
    x.iter_mut().for_each(|v| *v = 0.0);
    let mut r = b.to_vec();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return CgOutcome {
            relative_residual: 0.0,
        };
    }
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for _ in 0..max_iter {
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return CgOutcome {
                relative_residual: rel,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= rel_tol {
            return CgOutcome {
                relative_residual: rel,
            };
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        relative_residual: rel,
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
