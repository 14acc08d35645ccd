use std::fmt;
use std::ops::{Index, IndexMut};

use num_rational::BigRational;
use num_traits::Signed;

use super::scalar::Scalar;
use super::LinalgError;

/// Dense matrix over ℚ(i), row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

pub type Vector = Vec<Scalar>;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    /// Matrix unit `E_{r,c}` of the given shape.
    pub fn unit(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        m[(r, c)] = Scalar::one();
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Ragged);
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let r: Vec<Vec<Scalar>> =
            rows.iter().map(|row| row.iter().map(|&x| Scalar::from_int(x)).collect()).collect();
        Matrix::from_rows(r).expect("ragged integer matrix")
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn column_vector(v: &[Scalar]) -> Self {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn diagonal(d: &[Scalar]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| if r == c { self[(r, c)].is_one() } else { self[(r, c)].is_zero() })
            })
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (r..self.cols).all(|c| self[(r, c)] == self[(c, r)].conj()))
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn try_add(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_shape(o)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_shape(o)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_mul(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != o.rows {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: o.shape() });
        }
        let mut out = Matrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = &o[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Panicking shorthand for internally shape-checked products.
    pub fn mul(&self, o: &Matrix) -> Matrix {
        self.try_mul(o).expect("matrix product shape")
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        self.try_add(o).expect("matrix sum shape")
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        self.try_sub(o).expect("matrix difference shape")
    }

    pub fn apply(&self, v: &[Scalar]) -> Result<Vector, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: (v.len(), 1) });
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = Scalar::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect())
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows * o.rows, self.cols * o.cols, |r, c| {
            let a = &self[(r / o.rows, c / o.cols)];
            if a.is_zero() {
                Scalar::zero()
            } else {
                a * &o[(r % o.rows, c % o.cols)]
            }
        })
    }

    pub fn hstack(parts: &[Matrix]) -> Result<Matrix, LinalgError> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(LinalgError::Ragged);
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut off = 0;
        for m in parts {
            for r in 0..rows {
                for c in 0..m.cols {
                    out[(r, off + c)] = m[(r, c)].clone();
                }
            }
            off += m.cols;
        }
        Ok(out)
    }

    pub fn vstack(parts: &[Matrix]) -> Result<Matrix, LinalgError> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(LinalgError::Ragged);
        }
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for m in parts {
            data.extend(m.data.iter().cloned());
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn block_diag(parts: &[Matrix]) -> Matrix {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let (mut ro, mut co) = (0, 0);
        for m in parts {
            for r in 0..m.rows {
                for c in 0..m.cols {
                    out[(ro + r, co + c)] = m[(r, c)].clone();
                }
            }
            ro += m.rows;
            co += m.cols;
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])].clone())
    }

    pub fn trace(&self) -> Scalar {
        let mut t = Scalar::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    /// Reduced row echelon form with first-nonzero pivoting; returns pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else { continue };
            m.swap_rows(row, p);
            let inv = m[(row, col)].inv().expect("nonzero pivot");
            for c in col..m.cols {
                if !m[(row, c)].is_zero() {
                    m[(row, c)] = &m[(row, c)] * &inv;
                }
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = m[(r, col)].clone();
                for c in col..m.cols {
                    if !m[(row, c)].is_zero() {
                        let d = &f * &m[(row, c)];
                        m[(r, c)] -= &d;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Columns spanning the column space, as indices into `self`.
    pub fn column_space_indices(&self) -> Vec<usize> {
        self.rref().1
    }

    fn same_shape(&self, o: &Matrix) -> Result<(), LinalgError> {
        if self.shape() != o.shape() {
            return Err(LinalgError::ShapeMismatch { left: self.shape(), right: o.shape() });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn rank(m: &Matrix) -> usize {
    m.rref().1.len()
}

pub fn kernel_basis(m: &Matrix) -> Vec<Vector> {
    let (r, pivots) = m.rref();
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); m.cols()];
            v[f] = Scalar::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(i, f)];
            }
            v
        })
        .collect()
}

/// Exact solution of `m x = b`; `Ok(None)` when inconsistent.
pub fn solve(m: &Matrix, b: &[Scalar]) -> Result<Option<Vector>, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::ShapeMismatch { left: m.shape(), right: (b.len(), 1) });
    }
    let aug = Matrix::hstack(&[m.clone(), Matrix::column_vector(b)])?;
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&m.cols()) {
        return Ok(None);
    }
    let mut x = vec![Scalar::zero(); m.cols()];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[(i, m.cols())].clone();
    }
    Ok(Some(x))
}

/// Positive semidefiniteness of a Hermitian matrix by exact symmetric elimination.
pub fn is_psd(h: &Matrix) -> bool {
    ldl_factor(h).is_some()
}

/// Pivoted factorisation `h = Σ d_k l_k l_k*` with every `d_k > 0`.
/// `None` when `h` is not Hermitian positive semidefinite.
pub fn ldl_factor(h: &Matrix) -> Option<Vec<(BigRational, Vector)>> {
    if !h.is_hermitian() {
        return None;
    }
    let n = h.rows();
    let mut w = h.clone();
    let mut out = Vec::new();
    loop {
        let mut pivot = None;
        for k in 0..n {
            let d = &w[(k, k)];
            if !d.is_zero() {
                if d.re.is_negative() {
                    return None;
                }
                pivot = Some(k);
                break;
            }
        }
        let Some(k) = pivot else {
            // all diagonal entries vanish: a PSD remainder must be zero
            return if w.is_zero() { Some(out) } else { None };
        };
        let d = w[(k, k)].re.clone();
        let dinv = Scalar::from_rational(BigRational::from_integer(1.into()) / &d);
        let col: Vector = (0..n).map(|r| w[(r, k)].clone()).collect();
        let l: Vector = col.iter().map(|x| x * &dinv).collect();
        for r in 0..n {
            if col[r].is_zero() {
                continue;
            }
            for c in 0..n {
                if l[c].is_zero() {
                    continue;
                }
                let upd = &col[r] * &l[c].conj();
                w[(r, c)] -= &upd;
            }
        }
        out.push((d, l));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: i64, im: i64) -> Scalar {
        Scalar::from_parts(re, 1, im, 1).unwrap()
    }

    #[test]
    fn rank_of_hermitian_rank_one() {
        let m = Matrix::from_rows(vec![vec![c(1, 0), c(0, 1)], vec![c(0, -1), c(1, 0)]]).unwrap();
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn kernel_of_row_one_one() {
        let k = kernel_basis(&Matrix::from_ints(&[&[1, 1]]));
        assert_eq!(k, vec![vec![c(-1, 0), c(1, 0)]]);
    }

    #[test]
    fn solve_half() {
        let x = solve(&Matrix::from_ints(&[&[2]]), &[c(1, 0)]).unwrap().unwrap();
        assert_eq!(x, vec![Scalar::frac(1, 2)]);
        assert_eq!(solve(&Matrix::zeros(2, 2), &[c(1, 0), c(0, 0)]).unwrap(), None);
        assert!(solve(&Matrix::identity(2), &[c(1, 0)]).is_err());
    }

    #[test]
    fn psd_detection() {
        assert!(is_psd(&Matrix::from_ints(&[&[1, 1], &[1, 1]])));
        assert!(!is_psd(&Matrix::from_ints(&[&[0, 1], &[1, 0]])));
        assert!(!is_psd(&Matrix::from_ints(&[&[1, 2], &[2, 1]])));
        assert!(is_psd(&Matrix::zeros(3, 3)));
    }

    #[test]
    fn ldl_reconstructs() {
        let h = Matrix::from_rows(vec![
            vec![c(2, 0), c(1, 1), c(0, 0)],
            vec![c(1, -1), c(3, 0), c(1, 0)],
            vec![c(0, 0), c(1, 0), c(1, 0)],
        ])
        .unwrap();
        let f = ldl_factor(&h).unwrap();
        let mut acc = Matrix::zeros(3, 3);
        for (d, l) in &f {
            let col = Matrix::column_vector(l);
            acc = acc.add(&col.mul(&col.adjoint()).scale(&Scalar::from_rational(d.clone())));
        }
        assert_eq!(acc, h);
    }
}
