//! Exact arithmetic and dense linear algebra over the Gaussian rationals.

mod matrix;
mod scalar;

use thiserror::Error;

pub use matrix::{is_psd, kernel_basis, ldl_factor, rank, solve, Matrix, Vector};
pub use scalar::{rat_to_f64, rational_sqrt, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {left:?} against {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("rows of unequal length")]
    Ragged,
}

/// Hermitian inner product `Σ conj(x_i) y_i`.
pub fn dot(x: &[Scalar], y: &[Scalar]) -> Scalar {
    let mut acc = Scalar::zero();
    for (a, b) in x.iter().zip(y) {
        if !a.is_zero() && !b.is_zero() {
            acc += &(a.conj() * b);
        }
    }
    acc
}

/// Orthonormal basis of the span of `vectors`, when Gram-Schmidt stays in ℚ(i).
/// `None` signals a norm that is not a rational square.
pub fn exact_orthonormal_basis(vectors: &[Vector]) -> Option<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = dot(u, &w);
            if c.is_zero() {
                continue;
            }
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= &(&c * ui);
            }
        }
        if w.iter().all(Scalar::is_zero) {
            continue;
        }
        let n2 = dot(&w, &w).re;
        let n = rational_sqrt(&n2)?;
        let inv = Scalar::from_rational(num_rational::BigRational::from_integer(1.into()) / n);
        out.push(w.iter().map(|x| x * &inv).collect());
    }
    Some(out)
}
