//! Symmetric sparse matrices assembled from triplets, with a preconditioned conjugate-gradient solver.

use nalgebra_sparse::{CooMatrix, CsrMatrix};

pub struct SparseSym {
    csr: CsrMatrix<f64>,
}

impl SparseSym {
    pub fn from_triplets(n: usize, rows: &[usize], cols: &[usize], vals: &[f64]) -> Self {
        let mut coo = CooMatrix::new(n, n);
        for ((&r, &c), &v) in rows.iter().zip(cols).zip(vals) {
            coo.push(r, c, v);
        }
        Self { csr: CsrMatrix::from(&coo) }
    }

    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        let offsets = self.csr.row_offsets();
        let cols = self.csr.col_indices();
        let vals = self.csr.values();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in offsets[i]..offsets[i + 1] {
                s += vals[k] * x[cols[k]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim()];
        for (i, j, v) in self.csr.triplet_iter() {
            if i == j {
                d[i] += *v;
            }
        }
        d
    }

    /// A + shift·diag(weights).
    pub fn shifted(&self, shift: f64, weights: &[f64]) -> Self {
        let mut csr = self.csr.clone();
        let offsets = csr.row_offsets().to_vec();
        let cols = csr.col_indices().to_vec();
        let vals = csr.values_mut();
        for i in 0..weights.len() {
            for k in offsets[i]..offsets[i + 1] {
                if cols[k] == i {
                    vals[k] += shift * weights[i];
                }
            }
        }
        Self { csr }
    }
}

pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Set when a direction of non-positive curvature was met.
    pub indefinite: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG for A x = b starting from x.
pub fn cg(a: &SparseSym, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgOutcome {
    let n = b.len();
    let diag = a.diagonal();
    let minv: Vec<f64> = diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    a.mul_into(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot(b, b).sqrt().max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut indefinite = false;
    while it < max_iter {
        let rn = dot(&r, &r).sqrt();
        if rn <= rel_tol * bnorm {
            return CgOutcome { iterations: it, residual: rn / bnorm, converged: true, indefinite };
        }
        a.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            indefinite = true;
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
    }
    let rn = dot(&r, &r).sqrt();
    CgOutcome { iterations: it, residual: rn / bnorm, converged: rn <= rel_tol * bnorm, indefinite }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_laplacian_1d() {
        let n = 50;
        let (mut r, mut c, mut v) = (vec![], vec![], vec![]);
        for i in 0..n {
            r.push(i);
            c.push(i);
            v.push(2.0);
            if i + 1 < n {
                r.extend([i, i + 1]);
                c.extend([i + 1, i]);
                v.extend([-1.0, -1.0]);
            }
        }
        let a = SparseSym::from_triplets(n, &r, &c, &v);
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = cg(&a, &b, &mut x, 1e-12, 500);
        assert!(out.converged);
        let ax = a.mul(&x);
        assert!(ax.iter().all(|y| (y - 1.0).abs() < 1e-9));
    }
}
