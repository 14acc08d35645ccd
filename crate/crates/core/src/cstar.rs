//! Finite-dimensional C*-algebras ⊕ M_n, their ideals and *-homomorphisms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{rank, Matrix, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CstarError {
    #[error("an algebra needs at least one block and every block size must be positive")]
    BadBlocks,
    #[error("block index {0} out of range")]
    BlockOutOfRange(usize),
    #[error("element shape does not match the algebra")]
    ShapeMismatch,
    #[error("homomorphism law violated: {0}")]
    LawViolation(LawViolation),
    #[error("multiplicity data cannot fit: {0}")]
    BadMultiplicity(String),
}

/// A matrix unit `e^{(block)}_{row,col}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitIndex {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for UnitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e[{}]({},{})", self.block, self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    Multiplicative,
    Adjoint,
    Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawViolation {
    pub kind: LawKind,
    pub left: UnitIndex,
    pub right: Option<UnitIndex>,
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.right {
            Some(r) => write!(f, "{:?} law fails on ({}, {})", self.kind, self.left, r),
            None => write!(f, "{:?} law fails on {}", self.kind, self.left),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FdCStarAlgebra {
    blocks: Vec<usize>,
}

impl FdCStarAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self, CstarError> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(CstarError::BadBlocks);
        }
        Ok(FdCStarAlgebra { blocks })
    }

    /// Allows the zero algebra (no blocks); used for compacts of a zero module.
    pub(crate) fn from_blocks_unchecked(blocks: Vec<usize>) -> Self {
        debug_assert!(!blocks.contains(&0));
        FdCStarAlgebra { blocks }
    }

    /// ℂ^n.
    pub fn commutative(n: usize) -> Self {
        FdCStarAlgebra::from_blocks_unchecked(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self, i: usize) -> usize {
        self.blocks[i]
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub fn offset(&self, block: usize) -> usize {
        self.blocks[..block].iter().map(|n| n * n).sum()
    }

    pub fn unit_position(&self, u: UnitIndex) -> usize {
        self.offset(u.block) + u.row * self.blocks[u.block] + u.col
    }

    pub fn units(&self) -> Vec<UnitIndex> {
        let mut out = Vec::with_capacity(self.dim());
        for (block, &n) in self.blocks.iter().enumerate() {
            for row in 0..n {
                for col in 0..n {
                    out.push(UnitIndex { block, row, col });
                }
            }
        }
        out
    }
}

impl fmt::Display for FdCStarAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| format!("M{n}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of a finite-dimensional C*-algebra, one square matrix per block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgElement {
    blocks: Vec<Matrix>,
}

impl AlgElement {
    pub fn from_blocks(alg: &FdCStarAlgebra, blocks: Vec<Matrix>) -> Result<Self, CstarError> {
        if blocks.len() != alg.num_blocks() || blocks.iter().zip(alg.blocks()).any(|(m, &n)| m.shape() != (n, n)) {
            return Err(CstarError::ShapeMismatch);
        }
        Ok(AlgElement { blocks })
    }

    pub fn zero(alg: &FdCStarAlgebra) -> Self {
        AlgElement { blocks: alg.blocks().iter().map(|&n| Matrix::zeros(n, n)).collect() }
    }

    pub fn one(alg: &FdCStarAlgebra) -> Self {
        AlgElement { blocks: alg.blocks().iter().map(|&n| Matrix::identity(n)).collect() }
    }

    pub fn unit(alg: &FdCStarAlgebra, u: UnitIndex) -> Self {
        let mut e = AlgElement::zero(alg);
        e.blocks[u.block][(u.row, u.col)] = Scalar::one();
        e
    }

    /// Sum of the identities of the listed blocks.
    pub fn central_projection(alg: &FdCStarAlgebra, blocks: &BTreeSet<usize>) -> Self {
        let mut e = AlgElement::zero(alg);
        for &b in blocks {
            e.blocks[b] = Matrix::identity(alg.block_size(b));
        }
        e
    }

    pub fn from_coords(alg: &FdCStarAlgebra, coords: &[Scalar]) -> Result<Self, CstarError> {
        if coords.len() != alg.dim() {
            return Err(CstarError::ShapeMismatch);
        }
        let mut blocks = Vec::with_capacity(alg.num_blocks());
        let mut off = 0;
        for &n in alg.blocks() {
            blocks.push(Matrix::from_fn(n, n, |r, c| coords[off + r * n + c].clone()));
            off += n * n;
        }
        Ok(AlgElement { blocks })
    }

    pub fn coords(&self) -> Vec<Scalar> {
        self.blocks.iter().flat_map(|m| m.entries().iter().cloned()).collect()
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Matrix {
        &self.blocks[i]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Matrix::rows).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(Matrix::is_zero)
    }

    pub fn mul(&self, o: &AlgElement) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn add(&self, o: &AlgElement) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &AlgElement) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(|a| a.scale(s)).collect() }
    }

    pub fn adjoint(&self) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(Matrix::adjoint).collect() }
    }

    /// Block-diagonal matrix on ⊕ ℂ^{n_i}.
    pub fn to_block_diag(&self) -> Matrix {
        Matrix::block_diag(&self.blocks)
    }

    /// Left multiplication as a matrix on the ℂ-basis of matrix units.
    pub fn left_regular(&self) -> Matrix {
        let per_block: Vec<Matrix> =
            self.blocks.iter().map(|b| b.kron(&Matrix::identity(b.rows()))).collect();
        Matrix::block_diag(&per_block)
    }
}

/// An ideal of ⊕ M_n, i.e. a set of blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdealSpec {
    algebra: FdCStarAlgebra,
    blocks: BTreeSet<usize>,
}

impl IdealSpec {
    pub fn new(algebra: &FdCStarAlgebra, blocks: impl IntoIterator<Item = usize>) -> Result<Self, CstarError> {
        let blocks: BTreeSet<usize> = blocks.into_iter().collect();
        if let Some(&b) = blocks.iter().find(|&&b| b >= algebra.num_blocks()) {
            return Err(CstarError::BlockOutOfRange(b));
        }
        Ok(IdealSpec { algebra: algebra.clone(), blocks })
    }

    pub fn full(algebra: &FdCStarAlgebra) -> Self {
        IdealSpec { algebra: algebra.clone(), blocks: (0..algebra.num_blocks()).collect() }
    }

    pub fn empty(algebra: &FdCStarAlgebra) -> Self {
        IdealSpec { algebra: algebra.clone(), blocks: BTreeSet::new() }
    }

    pub fn algebra(&self) -> &FdCStarAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &BTreeSet<usize> {
        &self.blocks
    }

    pub fn contains(&self, block: usize) -> bool {
        self.blocks.contains(&block)
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() == self.algebra.num_blocks()
    }

    pub fn complement(&self) -> IdealSpec {
        ideal_complement(self)
    }

    pub fn intersect(&self, o: &IdealSpec) -> IdealSpec {
        IdealSpec { algebra: self.algebra.clone(), blocks: self.blocks.intersection(&o.blocks).copied().collect() }
    }

    pub fn union(&self, o: &IdealSpec) -> IdealSpec {
        IdealSpec { algebra: self.algebra.clone(), blocks: self.blocks.union(&o.blocks).copied().collect() }
    }

    pub fn is_subset(&self, o: &IdealSpec) -> bool {
        self.blocks.is_subset(&o.blocks)
    }

    /// The unit of the ideal, a central projection of the algebra.
    pub fn unit(&self) -> AlgElement {
        AlgElement::central_projection(&self.algebra, &self.blocks)
    }
}

pub fn ideal_complement(i: &IdealSpec) -> IdealSpec {
    IdealSpec {
        algebra: i.algebra.clone(),
        blocks: (0..i.algebra.num_blocks()).filter(|b| !i.blocks.contains(b)).collect(),
    }
}

/// A linear map given on matrix units; a *-homomorphism once checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarHom {
    source: FdCStarAlgebra,
    target: FdCStarAlgebra,
    images: Vec<AlgElement>,
}

impl StarHom {
    /// Checked constructor.
    pub fn new(source: FdCStarAlgebra, target: FdCStarAlgebra, images: Vec<AlgElement>) -> Result<Self, CstarError> {
        let h = StarHom::from_images(source, target, images)?;
        check_star_hom_units(&h).map_err(CstarError::LawViolation)?;
        Ok(h)
    }

    /// Shape-checked but law-unchecked constructor; pair with [`check_star_hom`].
    pub fn from_images(source: FdCStarAlgebra, target: FdCStarAlgebra, images: Vec<AlgElement>) -> Result<Self, CstarError> {
        if images.len() != source.dim() || images.iter().any(|x| x.block_sizes() != target.blocks()) {
            return Err(CstarError::ShapeMismatch);
        }
        Ok(StarHom { source, target, images })
    }

    pub fn identity(alg: &FdCStarAlgebra) -> Self {
        let images = alg.units().into_iter().map(|u| AlgElement::unit(alg, u)).collect();
        StarHom { source: alg.clone(), target: alg.clone(), images }
    }

    pub fn zero(source: &FdCStarAlgebra, target: &FdCStarAlgebra) -> Self {
        StarHom { source: source.clone(), target: target.clone(), images: vec![AlgElement::zero(target); source.dim()] }
    }

    /// The standard homomorphism with multiplicity matrix `mult`: copies of
    /// source block i sit block-diagonally in target block j, ordered by i
    /// then copy, padded by zeros when the target block is larger.
    pub fn canonical(source: &FdCStarAlgebra, target: &FdCStarAlgebra, mult: &[Vec<usize>]) -> Result<Self, CstarError> {
        if mult.len() != source.num_blocks() || mult.iter().any(|row| row.len() != target.num_blocks()) {
            return Err(CstarError::BadMultiplicity("matrix shape".into()));
        }
        let mut offsets = vec![vec![0usize; target.num_blocks()]; source.num_blocks()];
        for j in 0..target.num_blocks() {
            let mut off = 0;
            for i in 0..source.num_blocks() {
                offsets[i][j] = off;
                off += mult[i][j] * source.block_size(i);
            }
            if off > target.block_size(j) {
                return Err(CstarError::BadMultiplicity(format!("target block {j} too small")));
            }
        }
        let images = source
            .units()
            .into_iter()
            .map(|u| {
                let mut e = AlgElement::zero(target);
                let n = source.block_size(u.block);
                for j in 0..target.num_blocks() {
                    for copy in 0..mult[u.block][j] {
                        let base = offsets[u.block][j] + copy * n;
                        e.blocks[j][(base + u.row, base + u.col)] = Scalar::one();
                    }
                }
                e
            })
            .collect();
        Ok(StarHom { source: source.clone(), target: target.clone(), images })
    }

    pub fn source(&self) -> &FdCStarAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FdCStarAlgebra {
        &self.target
    }

    pub fn images(&self) -> &[AlgElement] {
        &self.images
    }

    pub fn image_of_unit(&self, u: UnitIndex) -> &AlgElement {
        &self.images[self.source.unit_position(u)]
    }

    pub fn apply(&self, x: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero(&self.target);
        for (c, img) in x.coords().iter().zip(&self.images) {
            if !c.is_zero() {
                out = out.add(&img.scale(c));
            }
        }
        out
    }

    /// Image of the identity of source block i.
    pub fn block_unit_image(&self, i: usize) -> AlgElement {
        let n = self.source.block_size(i);
        let mut out = AlgElement::zero(&self.target);
        for r in 0..n {
            out = out.add(self.image_of_unit(UnitIndex { block: i, row: r, col: r }));
        }
        out
    }

    pub fn is_unital(&self) -> bool {
        let mut one = AlgElement::zero(&self.target);
        for i in 0..self.source.num_blocks() {
            one = one.add(&self.block_unit_image(i));
        }
        one == AlgElement::one(&self.target)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &StarHom) -> Result<StarHom, CstarError> {
        if self.target != other.source {
            return Err(CstarError::ShapeMismatch);
        }
        let images = self.images.iter().map(|x| other.apply(x)).collect();
        Ok(StarHom { source: self.source.clone(), target: other.target.clone(), images })
    }

    pub fn multiplicity_matrix(&self) -> Vec<Vec<usize>> {
        multiplicity_matrix(self)
    }

    pub fn kernel_ideal(&self) -> IdealSpec {
        kernel_ideal(self)
    }

    pub fn is_injective(&self) -> bool {
        kernel_ideal(self).is_empty()
    }

    /// Block bijection: every source block lands in exactly one target block
    /// with multiplicity one and equal size, and every target block is hit once.
    pub fn is_block_bijection(&self) -> bool {
        let m = multiplicity_matrix(self);
        let rows_ok = (0..self.source.num_blocks()).all(|i| {
            let hits: Vec<usize> = (0..self.target.num_blocks()).filter(|&j| m[i][j] != 0).collect();
            hits.len() == 1 && m[i][hits[0]] == 1 && self.source.block_size(i) == self.target.block_size(hits[0])
        });
        let cols_ok = (0..self.target.num_blocks()).all(|j| (0..self.source.num_blocks()).filter(|&i| m[i][j] != 0).count() == 1);
        rows_ok && cols_ok
    }

    /// The restriction to the blocks of an ideal, as a map out of ⊕_{i∈J} M_{n_i}.
    pub fn restrict(&self, ideal: &IdealSpec) -> StarHom {
        let sub = FdCStarAlgebra::from_blocks_unchecked(ideal.blocks().iter().map(|&b| self.source.block_size(b)).collect());
        let images = ideal
            .blocks()
            .iter()
            .flat_map(|&b| {
                let n = self.source.block_size(b);
                (0..n * n).map(move |k| (b, k / n, k % n))
            })
            .map(|(block, row, col)| self.image_of_unit(UnitIndex { block, row, col }).clone())
            .collect();
        StarHom { source: sub, target: self.target.clone(), images }
    }
}

/// Multiplicativity and adjoint preservation on all pairs of matrix units.
pub fn check_star_hom(h: &StarHom) -> Result<(), LawViolation> {
    let units = h.source.units();
    for &x in &units {
        let hx = h.image_of_unit(x);
        let xt = UnitIndex { block: x.block, row: x.col, col: x.row };
        if &hx.adjoint() != h.image_of_unit(xt) {
            return Err(LawViolation { kind: LawKind::Adjoint, left: x, right: None });
        }
        for &y in &units {
            let prod = hx.mul(h.image_of_unit(y));
            let ok = if x.block == y.block && x.col == y.row {
                &prod == h.image_of_unit(UnitIndex { block: x.block, row: x.row, col: y.col })
            } else {
                prod.is_zero()
            };
            if !ok {
                return Err(LawViolation { kind: LawKind::Multiplicative, left: x, right: Some(y) });
            }
        }
    }
    Ok(())
}

/// Same verdict as [`check_star_hom`] from the matrix-unit relations alone:
/// `h(e00)` a projection, `h(e_a0)^* h(e_b0) = δ_ab h(e00)`,
/// `h(e_ab) = h(e_a0) h(e_b0)^*`, and orthogonal block units. Cost is
/// quadratic in block sizes rather than in the dimension.
pub fn check_star_hom_units(h: &StarHom) -> Result<(), LawViolation> {
    let mut units = Vec::with_capacity(h.source.num_blocks());
    for i in 0..h.source.num_blocks() {
        let n = h.source.block_size(i);
        let u = |r, c| UnitIndex { block: i, row: r, col: c };
        let e = |r, c| h.image_of_unit(u(r, c));
        let h00 = e(0, 0);
        if &h00.adjoint() != h00 {
            return Err(LawViolation { kind: LawKind::Adjoint, left: u(0, 0), right: None });
        }
        if &h00.mul(h00) != h00 {
            return Err(LawViolation { kind: LawKind::Multiplicative, left: u(0, 0), right: Some(u(0, 0)) });
        }
        let adj: Vec<AlgElement> = (0..n).map(|a| e(a, 0).adjoint()).collect();
        for a in 0..n {
            for b in 0..n {
                let p = adj[a].mul(e(b, 0));
                let ok = if a == b { &p == h00 } else { p.is_zero() };
                if !ok {
                    return Err(LawViolation { kind: LawKind::Multiplicative, left: u(0, a), right: Some(u(b, 0)) });
                }
                if e(a, b) != &e(a, 0).mul(&adj[b]) {
                    return Err(LawViolation { kind: LawKind::Multiplicative, left: u(a, 0), right: Some(u(0, b)) });
                }
                if e(b, a) != &e(a, b).adjoint() {
                    return Err(LawViolation { kind: LawKind::Adjoint, left: u(a, b), right: None });
                }
            }
        }
        units.push(h.block_unit_image(i));
    }
    for i in 0..units.len() {
        for j in (i + 1)..units.len() {
            if !units[i].mul(&units[j]).is_zero() {
                let left = UnitIndex { block: i, row: 0, col: 0 };
                return Err(LawViolation { kind: LawKind::Multiplicative, left, right: Some(UnitIndex { block: j, row: 0, col: 0 }) });
            }
        }
    }
    Ok(())
}

/// `m_ij = rank(h(1_i) in block j) / n_i`.
pub fn multiplicity_matrix(h: &StarHom) -> Vec<Vec<usize>> {
    (0..h.source.num_blocks())
        .map(|i| {
            let p = h.block_unit_image(i);
            let n = h.source.block_size(i);
            (0..h.target.num_blocks())
                .map(|j| {
                    let r = rank(p.block(j));
                    debug_assert_eq!(r % n, 0, "rank not divisible by block size; homomorphism unchecked?");
                    r / n
                })
                .collect()
        })
        .collect()
}

pub fn kernel_ideal(h: &StarHom) -> IdealSpec {
    let m = multiplicity_matrix(h);
    IdealSpec {
        algebra: h.source.clone(),
        blocks: (0..h.source.num_blocks()).filter(|&i| m[i].iter().all(|&x| x == 0)).collect(),
    }
}

/// Integer matrix product, used for multiplicity bookkeeping.
pub fn mat_mul_usize(a: &[Vec<usize>], b: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(b: &[usize]) -> FdCStarAlgebra {
        FdCStarAlgebra::new(b.to_vec()).unwrap()
    }

    #[test]
    fn identity_and_zero_are_homomorphisms() {
        let m2 = alg(&[2]);
        assert!(check_star_hom(&StarHom::identity(&m2)).is_ok());
        assert!(check_star_hom(&StarHom::zero(&m2, &m2)).is_ok());
    }

    #[test]
    fn scaling_a_unit_breaks_multiplicativity() {
        let m2 = alg(&[2]);
        let mut images: Vec<AlgElement> = StarHom::identity(&m2).images().to_vec();
        images[0] = images[0].scale(&Scalar::from_int(2));
        let h = StarHom::from_images(m2.clone(), m2, images).unwrap();
        let err = check_star_hom(&h).unwrap_err();
        assert_eq!(err.kind, LawKind::Multiplicative);
        assert!(check_star_hom_units(&h).is_err());
    }

    #[test]
    fn unit_relations_agree_with_exhaustive_check() {
        let src = alg(&[1, 2]);
        let dst = alg(&[3, 2]);
        let good = StarHom::canonical(&src, &dst, &[vec![1, 0], vec![1, 1]]).unwrap();
        assert!(check_star_hom(&good).is_ok() && check_star_hom_units(&good).is_ok());
        // both blocks on overlapping coordinates
        let mut images = good.images().to_vec();
        images[0] = good.image_of_unit(UnitIndex { block: 1, row: 0, col: 0 }).clone();
        let bad = StarHom::from_images(src, dst, images).unwrap();
        assert!(check_star_hom(&bad).is_err() && check_star_hom_units(&bad).is_err());
    }

    #[test]
    fn multiplicities_of_standard_maps() {
        let c = alg(&[1]);
        let h = StarHom::canonical(&c, &alg(&[2]), &[vec![2]]).unwrap();
        assert_eq!(multiplicity_matrix(&h), vec![vec![2]]);
        assert_eq!(multiplicity_matrix(&StarHom::identity(&alg(&[3]))), vec![vec![1]]);
        let h = StarHom::canonical(&alg(&[1, 1]), &alg(&[3]), &[vec![2], vec![1]]).unwrap();
        assert!(check_star_hom(&h).is_ok());
        assert_eq!(multiplicity_matrix(&h), vec![vec![2], vec![1]]);
        assert!(kernel_ideal(&h).is_empty());
        let h0 = StarHom::canonical(&alg(&[1, 1]), &alg(&[3]), &[vec![2], vec![0]]).unwrap();
        assert_eq!(kernel_ideal(&h0).blocks().iter().copied().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn complement_of_ideals() {
        let a = alg(&[1, 2, 3]);
        assert!(IdealSpec::empty(&a).complement().is_full());
        assert!(IdealSpec::full(&a).complement().is_empty());
        let i = IdealSpec::new(&a, [1]).unwrap();
        assert_eq!(i.complement().blocks().iter().copied().collect::<Vec<_>>(), vec![0, 2]);
    }
}
