//! Sparse operators, sector restriction, dense Hermitian eigensolvers and Krylov exponentials.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{FermionOp, PauliSum};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Matrix-free linear operator on `C^dim`.
pub trait LinOp: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct SparseOp {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<C64>,
}

impl SparseOp {
    /// Full-space matrix of a Pauli sum, rows grouped by distinct x masks.
    pub fn from_pauli(sum: &PauliSum) -> Self {
        let dim = 1usize << sum.n_qubits;
        let mut groups: Vec<(u64, Vec<(crate::pauli::PauliString, C64)>)> = Vec::new();
        let mut gi: HashMap<u64, usize> = HashMap::new();
        for (p, c) in sum.iter() {
            let k = *gi.entry(p.x_mask).or_insert_with(|| {
                groups.push((p.x_mask, Vec::new()));
                groups.len() - 1
            });
            groups[k].1.push((p, c));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(u32, C64)> = Vec::new();
        for r in 0..dim as u64 {
            row.clear();
            for (x, terms) in &groups {
                let col = r ^ x;
                let mut v = ZERO;
                for (p, c) in terms {
                    let (a, i) = p.apply_basis(col);
                    debug_assert_eq!(i, r);
                    v += c * a;
                }
                if v.norm() > 1e-15 {
                    row.push((col as u32, v));
                }
            }
            row.sort_by_key(|e| e.0);
            for &(c, v) in &row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseOp { dim, row_ptr, cols, vals }
    }

    /// Builds CSR from unsorted row entries; duplicates are summed and exact zeros dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(u32, C64)>>) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = ZERO;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v.norm() > 1e-15 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOp { dim, row_ptr, cols, vals }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

impl LinOp for SparseOp {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yr = acc;
        }
    }
}

/// `A x` into a fresh vector.
pub fn matvec(op: &dyn LinOp, x: &[C64]) -> Vec<C64> {
    let mut y = vec![ZERO; x.len()];
    op.apply(x, &mut y);
    y
}

/// `i·A`; Hermitian when `A` is anti-Hermitian.
pub struct TimesI<'a>(pub &'a dyn LinOp);

impl LinOp for TimesI<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.0.apply(x, y);
        for v in y.iter_mut() {
            *v *= C64::i();
        }
    }
}

/// Dense matrix wrapped as an operator.
impl LinOp for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for v in y.iter_mut() {
            *v = ZERO;
        }
        for (j, &xj) in x.iter().enumerate().take(self.ncols()) {
            if xj == ZERO {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.column(j).iter()) {
                *yi += a * xj;
            }
        }
    }
}

/// `a·A + b·B` evaluated lazily.
pub struct Combo<'a, A: LinOp, B: LinOp> {
    pub a: f64,
    pub op_a: &'a A,
    pub b: f64,
    pub op_b: &'a B,
}

impl<A: LinOp, B: LinOp> LinOp for Combo<'_, A, B> {
    fn dim(&self) -> usize {
        self.op_a.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let mut t = vec![ZERO; x.len()];
        self.op_a.apply(x, y);
        self.op_b.apply(x, &mut t);
        for (yi, ti) in y.iter_mut().zip(&t) {
            *yi = *yi * self.a + *ti * self.b;
        }
    }
}

/// Determinants with fixed electron count (and optionally fixed `2M_S`), in ascending order.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub n_qubits: usize,
    pub dets: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl SectorBasis {
    pub fn new(n_qubits: usize, n_elec: u32, ms2: Option<i32>) -> Self {
        let dets: Vec<u64> = (0..1u64 << n_qubits)
            .filter(|&d| d.count_ones() == n_elec)
            .filter(|&d| ms2.is_none_or(|m| crate::pauli::Determinant::new(d).ms2() == m))
            .collect();
        let index = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        SectorBasis { n_qubits, dets, index }
    }

    pub fn dim(&self) -> usize {
        self.dets.len()
    }

    pub fn index_of(&self, det: u64) -> Option<usize> {
        self.index.get(&det).copied()
    }

    /// Dense restriction of a Pauli sum; amplitude leaking out of the sector is dropped.
    pub fn restrict_pauli(&self, sum: &PauliSum) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (p, c) in sum.iter() {
            for (j, &d) in self.dets.iter().enumerate() {
                let (a, i) = p.apply_basis(d);
                if let Some(ii) = self.index_of(i) {
                    m[(ii, j)] += c * a;
                }
            }
        }
        m
    }

    pub fn restrict_fermion(&self, op: &FermionOp) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (j, &d) in self.dets.iter().enumerate() {
            for (a, i) in op.apply_det(d) {
                if let Some(ii) = self.index_of(i) {
                    m[(ii, j)] += a;
                }
            }
        }
        m
    }

    /// Sparse restriction of a fermionic operator that conserves the sector.
    pub fn sparse_fermion(&self, op: &FermionOp) -> SparseOp {
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.dim()];
        for (j, &d) in self.dets.iter().enumerate() {
            for (a, i) in op.apply_det(d) {
                if let Some(ii) = self.index_of(i) {
                    rows[ii].push((j as u32, a));
                }
            }
        }
        SparseOp::from_rows(self.dim(), rows)
    }

    /// Sparse restriction of a Pauli sum; amplitude leaking out of the sector is dropped.
    pub fn sparse_pauli(&self, sum: &PauliSum) -> SparseOp {
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.dim()];
        for (p, c) in sum.iter() {
            for (j, &d) in self.dets.iter().enumerate() {
                let (a, i) = p.apply_basis(d);
                if let Some(ii) = self.index_of(i) {
                    rows[ii].push((j as u32, c * a));
                }
            }
        }
        SparseOp::from_rows(self.dim(), rows)
    }

    /// Sector coordinates of a full-space vector.
    pub fn project(&self, full: &[C64]) -> Vec<C64> {
        self.dets.iter().map(|&d| full[d as usize]).collect()
    }

    pub fn embed(&self, sector: &[C64]) -> Vec<C64> {
        let mut v = vec![ZERO; 1 << self.n_qubits];
        for (&d, &a) in self.dets.iter().zip(sector) {
            v[d as usize] = a;
        }
        v
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = herm.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = DMatrix::from_element(n, n, ZERO);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Real symmetric tridiagonal eigenproblem (small, dense).
fn tridiag_eigh(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let e = t.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Krylov settings for [`expm_krylov`].
#[derive(Clone, Copy, Debug)]
pub struct KrylovConfig {
    pub tol: f64,
    pub max_dim: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig { tol: 1e-12, max_dim: 64 }
    }
}

/// `exp(−i t A) v` for Hermitian `A` by Lanczos with full reorthogonalization.
///
/// The interval is subdivided until the a posteriori error estimate of every
/// substep is below `tol · h / t`.
pub fn expm_krylov(op: &dyn LinOp, t: f64, v: &[C64], cfg: KrylovConfig) -> Result<Vec<C64>> {
    let n = op.dim();
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    let total = t.abs();
    let sign = t.signum();
    let mut w = v.to_vec();
    let mut done = 0.0;
    let mut h = total;
    let mut halvings = 0;
    while done < total * (1.0 - 1e-15) {
        let step = h.min(total - done);
        let (next, err) = lanczos_step(op, sign * step, &w, cfg.max_dim.min(n).max(1));
        if err > cfg.tol * (step / total).max(1e-3) && step > total * 1e-9 {
            h = step / 2.0;
            halvings += 1;
            if halvings > 200 {
                return Err(Error::numerical("Krylov exponential failed to converge"));
            }
            continue;
        }
        w = next;
        done += step;
        if err < cfg.tol * 1e-3 {
            h = step * 1.5;
        }
    }
    Ok(w)
}

fn lanczos_step(op: &dyn LinOp, t: f64, v: &[C64], m_max: usize) -> (Vec<C64>, f64) {
    let n = v.len();
    let nv = norm(v);
    if nv == 0.0 {
        return (v.to_vec(), 0.0);
    }
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|x| x / nv).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let mut breakdown = false;
    for j in 0..m_max {
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let b = norm(&w);
        if b < 1e-13 * (1.0 + a.abs()) {
            breakdown = true;
            break;
        }
        beta.push(b);
        if j + 1 < m_max {
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
    let m = alpha.len();
    let (ev, evec) = tridiag_eigh(&alpha, &beta[..m - 1]);
    // c = exp(−i t T) e1
    let mut c = vec![ZERO; m];
    for k in 0..m {
        let ph = C64::from_polar(1.0, -t * ev[k]) * evec[(0, k)];
        for i in 0..m {
            c[i] += ph * evec[(i, k)];
        }
    }
    let err = if breakdown { 0.0 } else { nv * beta[m - 1] * c[m - 1].norm() };
    let mut out = vec![ZERO; n];
    for (ci, b) in c.iter().zip(&basis) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += ci * bi * nv;
        }
    }
    (out, err)
}

/// Lowest eigenpair by dense diagonalization.
pub fn ground_state(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let (vals, vecs) = eigh(m);
    (vals[0], vecs.column(0).into_owned())
}
