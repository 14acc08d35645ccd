//! Sparse column-compressed maps used for tracking data, plus a sparse
//! incremental echelon used by the Fock oracle. Internal plumbing: the
//! structural decisions still go through the dense exact routines.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex64;

use crate::linalg::{Matrix, Scalar};

pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn to_complex(&self) -> Complex64;
    fn from_scalar(s: &Scalar) -> Self;
    /// Orthonormal basis of the span; `None` when it cannot be formed in this field.
    fn orthonormal_basis(vs: &[Vec<Self>]) -> Option<Vec<Vec<Self>>>;
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Scalar::conj(self)
    }
    fn to_complex(&self) -> Complex64 {
        Scalar::to_complex(self)
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
    fn orthonormal_basis(vs: &[Vec<Self>]) -> Option<Vec<Vec<Self>>> {
        crate::linalg::exact_orthonormal_basis(vs)
    }
}

/// Entries below this magnitude are pruned from float maps.
const FLOAT_PRUNE: f64 = 1e-14;

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.norm() < FLOAT_PRUNE
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.to_complex()
    }
    fn orthonormal_basis(vs: &[Vec<Self>]) -> Option<Vec<Vec<Self>>> {
        Some(float_orthonormal_basis(vs))
    }
}

/// Residual norm below which a Gram-Schmidt candidate counts as dependent.
const FLOAT_DEPENDENT: f64 = 1e-8;

/// Modified Gram-Schmidt with re-orthogonalisation.
pub fn float_orthonormal_basis(vs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c: Complex64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let n = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > FLOAT_DEPENDENT {
            out.push(w.iter().map(|x| x / n).collect());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, T)>>,
}

impl<T: Coeff> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: n, columns: (0..n).map(|i| vec![(i, T::one())]).collect() }
    }

    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, T)>>) -> Self {
        let columns = columns
            .into_iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, T> = BTreeMap::new();
                for (r, v) in col {
                    debug_assert!(r < rows);
                    let e = acc.entry(r).or_insert_with(T::zero);
                    *e = e.add(&v);
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect::<Vec<_>>();
        SparseMatrix { rows, cols: columns.len(), columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[(usize, T)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.columns[c].iter().find(|(i, _)| *i == r).map_or_else(T::zero, |(_, v)| v.clone())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn mul(&self, o: &SparseMatrix<T>) -> SparseMatrix<T> {
        assert_eq!(self.cols, o.rows, "sparse product shape");
        let columns = o
            .columns
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, T> = BTreeMap::new();
                for (k, b) in col {
                    for (r, a) in &self.columns[*k] {
                        let e = acc.entry(*r).or_insert_with(T::zero);
                        *e = e.add(&a.mul(b));
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: o.cols, columns }
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![T::zero(); self.rows];
        for (c, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (r, a) in &self.columns[c] {
                out[*r] = out[*r].add(&a.mul(x));
            }
        }
        out
    }

    pub fn adjoint(&self) -> SparseMatrix<T> {
        let mut columns: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                columns[*r].push((c, v.conj()));
            }
        }
        SparseMatrix { rows: self.cols, cols: self.rows, columns }
    }

    pub fn scale(&self, s: &T) -> SparseMatrix<T> {
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().map(|(r, v)| (*r, v.mul(s))).filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, columns }
    }

    pub fn add(&self, o: &SparseMatrix<T>) -> SparseMatrix<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "sparse sum shape");
        let columns = self
            .columns
            .iter()
            .zip(&o.columns)
            .map(|(a, b)| {
                let mut acc: BTreeMap<usize, T> = a.iter().cloned().collect();
                for (r, v) in b {
                    let e = acc.entry(*r).or_insert_with(T::zero);
                    *e = e.add(v);
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, columns }
    }

    pub fn sub(&self, o: &SparseMatrix<T>) -> SparseMatrix<T> {
        self.add(&o.scale(&T::one().neg()))
    }

    /// Kronecker product, index `(i, j) ↦ i * o.rows + j`.
    pub fn kron(&self, o: &SparseMatrix<T>) -> SparseMatrix<T> {
        let mut columns = Vec::with_capacity(self.cols * o.cols);
        for a_col in &self.columns {
            for b_col in &o.columns {
                let mut col = Vec::with_capacity(a_col.len() * b_col.len());
                for (ra, va) in a_col {
                    for (rb, vb) in b_col {
                        col.push((ra * o.rows + rb, va.mul(vb)));
                    }
                }
                columns.push(col);
            }
        }
        SparseMatrix { rows: self.rows * o.rows, cols: self.cols * o.cols, columns }
    }

    pub fn select_columns(&self, cols: &[usize]) -> SparseMatrix<T> {
        SparseMatrix { rows: self.rows, cols: cols.len(), columns: cols.iter().map(|&c| self.columns[c].clone()).collect() }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> SparseMatrix<U> {
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().map(|(r, v)| (*r, f(v))).filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, columns }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }
}

impl SparseMatrix<Scalar> {
    pub fn from_dense(m: &Matrix) -> Self {
        let columns = (0..m.cols())
            .map(|c| (0..m.rows()).filter(|&r| !m[(r, c)].is_zero()).map(|r| (r, m[(r, c)].clone())).collect())
            .collect();
        SparseMatrix { rows: m.rows(), cols: m.cols(), columns }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                m[(*r, c)] = v.clone();
            }
        }
        m
    }
}

impl SparseMatrix<Complex64> {
    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.columns.iter().flatten().map(|(_, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.columns.iter().flatten().map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A linear map in standard coordinates, exact when every input was exact.
#[derive(Clone, Debug, PartialEq)]
pub enum LinMap {
    Exact(SparseMatrix<Scalar>),
    Float(SparseMatrix<Complex64>),
}

/// Outcome of comparing two maps.
#[derive(Clone, Debug, PartialEq)]
pub enum MapDiff {
    Equal,
    /// Column index of the first differing basis vector and the defect there.
    Differs { column: usize, defect: f64 },
    Shape,
}

impl LinMap {
    pub fn identity(n: usize) -> Self {
        LinMap::Exact(SparseMatrix::identity(n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinMap::Exact(SparseMatrix::zeros(rows, cols))
    }

    pub fn from_dense(m: &Matrix) -> Self {
        LinMap::Exact(SparseMatrix::from_dense(m))
    }

    pub fn rows(&self) -> usize {
        match self {
            LinMap::Exact(m) => m.rows(),
            LinMap::Float(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinMap::Exact(m) => m.cols(),
            LinMap::Float(m) => m.cols(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LinMap::Exact(_))
    }

    pub fn exact(&self) -> Option<&SparseMatrix<Scalar>> {
        match self {
            LinMap::Exact(m) => Some(m),
            LinMap::Float(_) => None,
        }
    }

    pub fn to_float(&self) -> SparseMatrix<Complex64> {
        match self {
            LinMap::Exact(m) => m.map(|x| x.to_complex()),
            LinMap::Float(m) => m.clone(),
        }
    }

    pub fn to_dense(&self) -> Option<Matrix> {
        self.exact().map(SparseMatrix::to_dense)
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &LinMap) -> LinMap {
        match (self, o) {
            (LinMap::Exact(a), LinMap::Exact(b)) => LinMap::Exact(a.mul(b)),
            _ => LinMap::Float(self.to_float().mul(&o.to_float())),
        }
    }

    pub fn adjoint(&self) -> LinMap {
        match self {
            LinMap::Exact(m) => LinMap::Exact(m.adjoint()),
            LinMap::Float(m) => LinMap::Float(m.adjoint()),
        }
    }

    pub fn kron(&self, o: &LinMap) -> LinMap {
        match (self, o) {
            (LinMap::Exact(a), LinMap::Exact(b)) => LinMap::Exact(a.kron(b)),
            _ => LinMap::Float(self.to_float().kron(&o.to_float())),
        }
    }

    pub fn add(&self, o: &LinMap) -> LinMap {
        match (self, o) {
            (LinMap::Exact(a), LinMap::Exact(b)) => LinMap::Exact(a.add(b)),
            _ => LinMap::Float(self.to_float().add(&o.to_float())),
        }
    }

    pub fn sub(&self, o: &LinMap) -> LinMap {
        match (self, o) {
            (LinMap::Exact(a), LinMap::Exact(b)) => LinMap::Exact(a.sub(b)),
            _ => LinMap::Float(self.to_float().sub(&o.to_float())),
        }
    }

    pub fn scale(&self, s: &Scalar) -> LinMap {
        match self {
            LinMap::Exact(a) => LinMap::Exact(a.scale(s)),
            LinMap::Float(a) => LinMap::Float(a.scale(&s.to_complex())),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> LinMap {
        match self {
            LinMap::Exact(a) => LinMap::Exact(a.select_columns(cols)),
            LinMap::Float(a) => LinMap::Float(a.select_columns(cols)),
        }
    }

    pub fn apply_exact(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        self.exact().map(|m| m.apply(v))
    }

    pub fn apply_float(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.to_float().apply(v)
    }

    /// Exact equality when both sides are exact, else agreement within `tol`
    /// measured per column in the Euclidean norm.
    pub fn compare(&self, o: &LinMap, tol: f64) -> MapDiff {
        if self.rows() != o.rows() || self.cols() != o.cols() {
            return MapDiff::Shape;
        }
        match (self, o) {
            (LinMap::Exact(a), LinMap::Exact(b)) => {
                let d = a.sub(b);
                match (0..d.cols()).find(|&c| !d.column(c).is_empty()) {
                    None => MapDiff::Equal,
                    Some(c) => {
                        let defect = d.column(c).iter().map(|(_, v)| v.to_complex().norm_sqr()).sum::<f64>().sqrt();
                        MapDiff::Differs { column: c, defect }
                    }
                }
            }
            _ => {
                let d = self.to_float().sub(&o.to_float());
                for c in 0..d.cols() {
                    let defect = d.column(c).iter().map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt();
                    if defect > tol {
                        return MapDiff::Differs { column: c, defect };
                    }
                }
                MapDiff::Equal
            }
        }
    }
}

/// Incremental row echelon over sparse vectors with ℚ(i) entries.
/// Every stored pivot vector is normalised to leading coefficient one.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    pivots: BTreeMap<usize, Vec<(usize, Scalar)>>,
}

impl SparseEchelon {
    pub fn new() -> Self {
        SparseEchelon::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `v` against the stored pivots; the result has no pivot leads.
    pub fn reduce(&self, v: Vec<(usize, Scalar)>) -> BTreeMap<usize, Scalar> {
        let mut work: BTreeMap<usize, Scalar> = v.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        let mut cursor = 0usize;
        loop {
            let next = work.range(cursor..).find(|(k, _)| self.pivots.contains_key(k)).map(|(k, x)| (*k, x.clone()));
            let Some((k, c)) = next else { return work };
            for (idx, val) in &self.pivots[&k] {
                let e = work.entry(*idx).or_insert_with(Scalar::zero);
                *e -= &(&c * val);
                if e.is_zero() {
                    work.remove(idx);
                }
            }
            cursor = k + 1;
        }
    }

    /// Insert a vector; returns true when it was independent of the span so far.
    pub fn insert(&mut self, v: Vec<(usize, Scalar)>) -> bool {
        let work = self.reduce(v);
        let Some((&lead, c)) = work.iter().next() else { return false };
        let inv = c.inv().expect("nonzero lead");
        let row = work.iter().map(|(k, x)| (*k, x * &inv)).collect();
        self.pivots.insert(lead, row);
        true
    }

    pub fn contains(&self, v: Vec<(usize, Scalar)>) -> bool {
        self.reduce(v).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echelon_rank_matches_dense() {
        let rows = [[1, 2, 0, 1], [0, 1, 1, 0], [1, 3, 1, 1], [2, 0, 0, 5]];
        let mut e = SparseEchelon::new();
        for r in rows {
            e.insert(r.iter().enumerate().map(|(i, &x)| (i, Scalar::from_int(x))).collect());
        }
        let dense = Matrix::from_ints(&[&[1, 2, 0, 1], &[0, 1, 1, 0], &[1, 3, 1, 1], &[2, 0, 0, 5]]);
        assert_eq!(e.rank(), crate::linalg::rank(&dense));
    }

    #[test]
    fn kron_and_adjoint_agree_with_dense() {
        let a = Matrix::from_ints(&[&[1, 2], &[0, 3]]);
        let b = Matrix::from_ints(&[&[0, 1, 4]]);
        let sa = SparseMatrix::from_dense(&a);
        let sb = SparseMatrix::from_dense(&b);
        assert_eq!(sa.kron(&sb).to_dense(), a.kron(&b));
        assert_eq!(sb.adjoint().to_dense(), b.adjoint());
        assert_eq!(sa.mul(&sa).to_dense(), a.mul(&a));
    }
}
