//! Hilbert modules over finite-dimensional C*-algebras in standard form
//! ⊕_j M_{p_j × m_j}, their compact operators and rank-one operators.

use num_complex::Complex64;
use thiserror::Error;

use crate::cstar::{AlgElement, CstarError, FdCStarAlgebra, IdealSpec, StarHom, UnitIndex};
use crate::linalg::{ldl_factor, rank, rat_to_f64, Matrix, Scalar, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HilbertError {
    #[error("Gram matrix is not positive semidefinite in block {block}")]
    NotPsd { block: usize },
    #[error("module mismatch")]
    ModuleMismatch,
    #[error("vector length {got} does not match module dimension {expected}")]
    BadVector { expected: usize, got: usize },
    #[error(transparent)]
    Cstar(#[from] CstarError),
}

/// ⊕_j M_{p_j × m_j} over B = ⊕_j M_{m_j}; ℂ-basis `(j, row, col)` in that order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StandardModule {
    base: FdCStarAlgebra,
    mult: Vec<usize>,
}

/// A ℂ-basis vector `E^{(block)}_{row,col}` of a standard module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleBasis {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl StandardModule {
    pub fn new(base: FdCStarAlgebra, mult: Vec<usize>) -> Result<Self, HilbertError> {
        if mult.len() != base.num_blocks() {
            return Err(HilbertError::ModuleMismatch);
        }
        Ok(StandardModule { base, mult })
    }

    /// B as a module over itself.
    pub fn regular(base: &FdCStarAlgebra) -> Self {
        StandardModule { base: base.clone(), mult: base.blocks().to_vec() }
    }

    pub fn base(&self) -> &FdCStarAlgebra {
        &self.base
    }

    pub fn mult(&self) -> &[usize] {
        &self.mult
    }

    pub fn dim(&self) -> usize {
        self.mult.iter().zip(self.base.blocks()).map(|(p, m)| p * m).sum()
    }

    pub fn block_offset(&self, j: usize) -> usize {
        self.mult[..j].iter().zip(self.base.blocks()).map(|(p, m)| p * m).sum()
    }

    pub fn position(&self, b: ModuleBasis) -> usize {
        self.block_offset(b.block) + b.row * self.base.block_size(b.block) + b.col
    }

    pub fn basis(&self) -> Vec<ModuleBasis> {
        let mut out = Vec::with_capacity(self.dim());
        for (block, (&p, &m)) in self.mult.iter().zip(self.base.blocks()).enumerate() {
            for row in 0..p {
                for col in 0..m {
                    out.push(ModuleBasis { block, row, col });
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, b: ModuleBasis) -> Vector {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[self.position(b)] = Scalar::one();
        v
    }

    /// Parseval frame `E^{(j)}_{r,0}`; its rank-one operators sum to the identity.
    pub fn frame(&self) -> Vec<Vector> {
        self.basis().into_iter().filter(|b| b.col == 0).map(|b| self.basis_vector(b)).collect()
    }

    /// Block j of a vector as a `p_j × m_j` matrix.
    pub fn block_of(&self, x: &[Scalar], j: usize) -> Matrix {
        let (p, m) = (self.mult[j], self.base.block_size(j));
        let off = self.block_offset(j);
        Matrix::from_fn(p, m, |r, c| x[off + r * m + c].clone())
    }

    fn check_vec(&self, x: &[Scalar]) -> Result<(), HilbertError> {
        if x.len() != self.dim() {
            return Err(HilbertError::BadVector { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `⟨x, y⟩ = x* y` blockwise.
    pub fn inner(&self, x: &[Scalar], y: &[Scalar]) -> Result<AlgElement, HilbertError> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        let blocks = (0..self.mult.len()).map(|j| self.block_of(x, j).adjoint().mul(&self.block_of(y, j))).collect();
        Ok(AlgElement::from_blocks(&self.base, blocks)?)
    }

    /// `x · b`.
    pub fn right_act(&self, x: &[Scalar], b: &AlgElement) -> Result<Vector, HilbertError> {
        self.check_vec(x)?;
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.mult.len() {
            let xb = self.block_of(x, j).mul(b.block(j));
            out.extend(xb.entries().iter().cloned());
        }
        Ok(out)
    }

    /// Right multiplication by a matrix unit of B as a ℂ-matrix.
    pub fn right_action_matrix(&self, u: UnitIndex) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for a in 0..self.mult[u.block] {
            let from = self.position(ModuleBasis { block: u.block, row: a, col: u.row });
            let to = self.position(ModuleBasis { block: u.block, row: a, col: u.col });
            m[(to, from)] = Scalar::one();
        }
        m
    }

    /// 𝕂(F) = ⊕ M_{p_j} over the nonzero p_j, with the block index map.
    pub fn compacts_algebra(&self) -> (FdCStarAlgebra, Vec<Option<usize>>) {
        let mut blocks = Vec::new();
        let mut index = Vec::with_capacity(self.mult.len());
        for &p in &self.mult {
            if p == 0 {
                index.push(None);
            } else {
                index.push(Some(blocks.len()));
                blocks.push(p);
            }
        }
        (FdCStarAlgebra::from_blocks_unchecked(blocks), index)
    }

    pub fn compacts(&self) -> FdCStarAlgebra {
        self.compacts_algebra().0
    }

    /// Module block of each compacts block.
    pub fn compacts_blocks(&self) -> Vec<usize> {
        (0..self.mult.len()).filter(|&j| self.mult[j] > 0).collect()
    }

    /// Full ℂ-matrix of a compact operator `T`, acting as `T_j ⊗ 1_{m_j}`.
    pub fn operator_matrix(&self, t: &AlgElement) -> Matrix {
        let parts: Vec<Matrix> = self
            .compacts_blocks()
            .iter()
            .enumerate()
            .map(|(k, &j)| t.block(k).kron(&Matrix::identity(self.base.block_size(j))))
            .collect();
        Matrix::block_diag(&parts)
    }

    /// Recovers `T` from its ℂ-matrix when the matrix is right B-linear.
    pub fn compact_from_matrix(&self, m: &Matrix) -> Option<AlgElement> {
        if m.shape() != (self.dim(), self.dim()) {
            return None;
        }
        let k = self.compacts();
        let blocks = self
            .compacts_blocks()
            .iter()
            .map(|&j| {
                let p = self.mult[j];
                Matrix::from_fn(p, p, |a, r| {
                    m[(self.position(ModuleBasis { block: j, row: a, col: 0 }), self.position(ModuleBasis { block: j, row: r, col: 0 }))]
                        .clone()
                })
            })
            .collect();
        let t = AlgElement::from_blocks(&k, blocks).ok()?;
        (&self.operator_matrix(&t) == m).then_some(t)
    }

    /// Standard submodule `F·J`.
    pub fn restrict_to(&self, ideal: &IdealSpec) -> StandardModule {
        let mult = self.mult.iter().enumerate().map(|(j, &p)| if ideal.contains(j) { p } else { 0 }).collect();
        StandardModule { base: self.base.clone(), mult }
    }

    /// Coordinate indices spanning `F·J`.
    pub fn support_indices(&self, ideal: &IdealSpec) -> Vec<usize> {
        self.basis().into_iter().filter(|b| ideal.contains(b.block)).map(|b| self.position(b)).collect()
    }
}

/// A right B-linear map between standard modules, one block per base block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleOperator {
    domain: StandardModule,
    codomain: StandardModule,
    blocks: Vec<Matrix>,
}

impl ModuleOperator {
    pub fn new(domain: StandardModule, codomain: StandardModule, blocks: Vec<Matrix>) -> Result<Self, HilbertError> {
        if domain.base != codomain.base
            || blocks.len() != domain.mult.len()
            || blocks.iter().enumerate().any(|(j, b)| b.shape() != (codomain.mult[j], domain.mult[j]))
        {
            return Err(HilbertError::ModuleMismatch);
        }
        Ok(ModuleOperator { domain, codomain, blocks })
    }

    pub fn identity(f: &StandardModule) -> Self {
        let blocks = f.mult.iter().map(|&p| Matrix::identity(p)).collect();
        ModuleOperator { domain: f.clone(), codomain: f.clone(), blocks }
    }

    pub fn domain(&self) -> &StandardModule {
        &self.domain
    }

    pub fn codomain(&self) -> &StandardModule {
        &self.codomain
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn adjoint(&self) -> ModuleOperator {
        ModuleOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            blocks: self.blocks.iter().map(Matrix::adjoint).collect(),
        }
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &ModuleOperator) -> Result<ModuleOperator, HilbertError> {
        if o.codomain != self.domain {
            return Err(HilbertError::ModuleMismatch);
        }
        Ok(ModuleOperator {
            domain: o.domain.clone(),
            codomain: self.codomain.clone(),
            blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.mul(b)).collect(),
        })
    }

    pub fn apply(&self, x: &[Scalar]) -> Result<Vector, HilbertError> {
        self.domain.check_vec(x)?;
        let mut out = Vec::with_capacity(self.codomain.dim());
        for (j, b) in self.blocks.iter().enumerate() {
            out.extend(b.mul(&self.domain.block_of(x, j)).entries().iter().cloned());
        }
        Ok(out)
    }

    pub fn to_matrix(&self) -> Matrix {
        let parts: Vec<Matrix> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.kron(&Matrix::identity(self.domain.base.block_size(j))))
            .collect();
        Matrix::block_diag(&parts)
    }

    /// As an element of 𝕂(F) when domain and codomain agree.
    pub fn to_compact(&self) -> Option<AlgElement> {
        if self.domain != self.codomain {
            return None;
        }
        let k = self.domain.compacts();
        let blocks = self.domain.compacts_blocks().iter().map(|&j| self.blocks[j].clone()).collect();
        AlgElement::from_blocks(&k, blocks).ok()
    }

    pub fn from_compact(f: &StandardModule, t: &AlgElement) -> Self {
        let mut blocks: Vec<Matrix> = f.mult.iter().map(|&p| Matrix::zeros(p, p)).collect();
        for (k, j) in f.compacts_blocks().into_iter().enumerate() {
            blocks[j] = t.block(k).clone();
        }
        ModuleOperator { domain: f.clone(), codomain: f.clone(), blocks }
    }
}

/// `|ξ⟩⟨η|`, the operator `ζ ↦ ξ⟨η, ζ⟩`.
pub fn rank_one(f: &StandardModule, xi: &[Scalar], eta: &[Scalar]) -> Result<ModuleOperator, HilbertError> {
    rank_one_between(f, xi, f, eta)
}

/// `|ξ⟩⟨η|` from the module of `η` to the module of `ξ`.
pub fn rank_one_between(
    xi_module: &StandardModule,
    xi: &[Scalar],
    eta_module: &StandardModule,
    eta: &[Scalar],
) -> Result<ModuleOperator, HilbertError> {
    if xi_module.base != eta_module.base {
        return Err(HilbertError::ModuleMismatch);
    }
    xi_module.check_vec(xi)?;
    eta_module.check_vec(eta)?;
    let blocks = (0..xi_module.mult.len())
        .map(|j| xi_module.block_of(xi, j).mul(&eta_module.block_of(eta, j).adjoint()))
        .collect();
    ModuleOperator::new(eta_module.clone(), xi_module.clone(), blocks)
}

/// A finitely generated module presented by a B-valued Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentedModule {
    base: FdCStarAlgebra,
    gram: Vec<Vec<AlgElement>>,
}

/// Images of the generators in the standard module, with their isometry defect.
#[derive(Debug, Clone)]
pub struct GeneratorWitness {
    pub images: Vec<Vec<Complex64>>,
    /// Largest Frobenius defect `‖⟨w_a, w_b⟩ − G_ab‖` over generator pairs.
    pub defect: f64,
}

impl PresentedModule {
    pub fn new(base: FdCStarAlgebra, gram: Vec<Vec<AlgElement>>) -> Result<Self, HilbertError> {
        let g = gram.len();
        if gram.iter().any(|row| row.len() != g || row.iter().any(|x| x.block_sizes() != base.blocks())) {
            return Err(HilbertError::ModuleMismatch);
        }
        Ok(PresentedModule { base, gram })
    }

    pub fn generators(&self) -> usize {
        self.gram.len()
    }

    pub fn base(&self) -> &FdCStarAlgebra {
        &self.base
    }

    /// The Gram matrix restricted to base block j, as a `g·m × g·m` matrix.
    pub fn block_gram(&self, j: usize) -> Matrix {
        let m = self.base.block_size(j);
        let g = self.gram.len();
        Matrix::from_fn(g * m, g * m, |r, c| self.gram[r / m][c / m].block(j)[(r % m, c % m)].clone())
    }
}

pub fn canonicalize(p: &PresentedModule) -> Result<(StandardModule, GeneratorWitness), HilbertError> {
    let g = p.generators();
    let mut mult = Vec::with_capacity(p.base.num_blocks());
    let mut factors = Vec::with_capacity(p.base.num_blocks());
    for j in 0..p.base.num_blocks() {
        let m = p.base.block_size(j);
        let gj = p.block_gram(j);
        let f = ldl_factor(&gj).ok_or(HilbertError::NotPsd { block: j })?;
        // ℂ-Gram of the spanning set {x_a · e_rc} is G_j ⊗ 1_m up to reordering
        let span_rank = rank(&gj.kron(&Matrix::identity(m)));
        debug_assert_eq!(span_rank % m, 0);
        let pj = span_rank / m;
        debug_assert_eq!(pj, f.len());
        mult.push(pj);
        factors.push(f);
    }
    let module = StandardModule::new(p.base.clone(), mult)?;
    let dim = module.dim();
    let mut images = vec![vec![Complex64::new(0.0, 0.0); dim]; g];
    for (j, f) in factors.iter().enumerate() {
        let m = p.base.block_size(j);
        for (k, (d, l)) in f.iter().enumerate() {
            let s = rat_to_f64(d).sqrt();
            for (a, img) in images.iter_mut().enumerate() {
                for c in 0..m {
                    let pos = module.position(ModuleBasis { block: j, row: k, col: c });
                    img[pos] = l[a * m + c].conj().to_complex() * s;
                }
            }
        }
    }
    let mut defect: f64 = 0.0;
    for a in 0..g {
        for b in 0..g {
            for j in 0..p.base.num_blocks() {
                let m = p.base.block_size(j);
                let off = module.block_offset(j);
                let pj = module.mult[j];
                let mut err = 0.0;
                for r in 0..m {
                    for c in 0..m {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..pj {
                            acc += images[a][off + k * m + r].conj() * images[b][off + k * m + c];
                        }
                        err += (acc - p.gram[a][b].block(j)[(r, c)].to_complex()).norm_sqr();
                    }
                }
                defect = defect.max(err.sqrt());
            }
        }
    }
    Ok((module, GeneratorWitness { images, defect }))
}

/// `F·J` with its inclusion into `F` and the induced embedding of compacts.
#[derive(Debug, Clone)]
pub struct SubmoduleInclusion {
    pub submodule: StandardModule,
    pub inclusion: ModuleOperator,
    pub compacts_embedding: StarHom,
}

pub fn submodule_by_ideal(f: &StandardModule, ideal: &IdealSpec) -> Result<SubmoduleInclusion, HilbertError> {
    if ideal.algebra() != f.base() {
        return Err(HilbertError::ModuleMismatch);
    }
    let sub = f.restrict_to(ideal);
    let blocks = (0..f.mult.len())
        .map(|j| if ideal.contains(j) { Matrix::identity(f.mult[j]) } else { Matrix::zeros(f.mult[j], 0) })
        .collect();
    let inclusion = ModuleOperator::new(sub.clone(), f.clone(), blocks)?;
    let (k_sub, _) = sub.compacts_algebra();
    let (k_full, index) = f.compacts_algebra();
    let images = sub
        .compacts_blocks()
        .iter()
        .enumerate()
        .flat_map(|(kb, &j)| {
            let p = sub.mult[j];
            (0..p * p).map(move |t| (kb, j, t / p, t % p))
        })
        .map(|(_, j, r, c)| AlgElement::unit(&k_full, UnitIndex { block: index[j].expect("nonzero block"), row: r, col: c }))
        .collect();
    let compacts_embedding = StarHom::from_images(k_sub, k_full, images)?;
    Ok(SubmoduleInclusion { submodule: sub, inclusion, compacts_embedding })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(b: &[usize]) -> FdCStarAlgebra {
        FdCStarAlgebra::new(b.to_vec()).unwrap()
    }

    fn scalar_elem(a: &FdCStarAlgebra, x: i64) -> AlgElement {
        AlgElement::one(a).scale(&Scalar::from_int(x))
    }

    #[test]
    fn canonicalize_small_presentations() {
        let c = alg(&[1]);
        let (m, w) = canonicalize(&PresentedModule::new(c.clone(), vec![vec![scalar_elem(&c, 1)]]).unwrap()).unwrap();
        assert_eq!(m.mult(), &[1]);
        assert!(w.defect < 1e-12);
        let ones = vec![vec![scalar_elem(&c, 1), scalar_elem(&c, 1)], vec![scalar_elem(&c, 1), scalar_elem(&c, 1)]];
        let (m, w) = canonicalize(&PresentedModule::new(c.clone(), ones).unwrap()).unwrap();
        assert_eq!(m.mult(), &[1]);
        assert!(w.defect < 1e-12);
        let (m, _) = canonicalize(&PresentedModule::new(c.clone(), vec![vec![scalar_elem(&c, 0)]]).unwrap()).unwrap();
        assert_eq!(m.mult(), &[0]);
        let bad = PresentedModule::new(c.clone(), vec![vec![scalar_elem(&c, -1)]]).unwrap();
        assert_eq!(canonicalize(&bad).unwrap_err(), HilbertError::NotPsd { block: 0 });
    }

    #[test]
    fn corner_projection_gram_over_m2() {
        let m2 = alg(&[2]);
        let e11 = AlgElement::unit(&m2, UnitIndex { block: 0, row: 0, col: 0 });
        let (m, w) = canonicalize(&PresentedModule::new(m2, vec![vec![e11]]).unwrap()).unwrap();
        assert_eq!(m.mult(), &[1]);
        assert!(w.defect < 1e-12);
    }

    #[test]
    fn compacts_blocks() {
        assert_eq!(StandardModule::new(alg(&[1]), vec![3]).unwrap().compacts().blocks(), &[3]);
        let b = alg(&[1, 2]);
        assert_eq!(StandardModule::regular(&b).compacts(), b);
        let f = StandardModule::new(alg(&[1, 1]), vec![2, 1]).unwrap();
        assert_eq!(f.compacts().blocks(), &[2, 1]);
    }

    #[test]
    fn rank_one_over_c() {
        let f = StandardModule::new(alg(&[1]), vec![2]).unwrap();
        let xi = vec![Scalar::one(), Scalar::zero()];
        let eta = vec![Scalar::zero(), Scalar::one()];
        let t = rank_one(&f, &xi, &eta).unwrap();
        assert_eq!(t.to_matrix(), Matrix::unit(2, 2, 0, 1));
        assert!(rank_one(&f, &xi, &[Scalar::zero(), Scalar::zero()]).unwrap().to_matrix().is_zero());
    }

    #[test]
    fn submodule_restriction() {
        let b = alg(&[1, 1]);
        let f = StandardModule::new(b.clone(), vec![2, 1]).unwrap();
        let s = submodule_by_ideal(&f, &IdealSpec::new(&b, [0]).unwrap()).unwrap();
        assert_eq!(s.submodule.mult(), &[2, 0]);
        assert!(crate::cstar::check_star_hom(&s.compacts_embedding).is_ok());
        assert!(s.compacts_embedding.is_injective());
        let full = submodule_by_ideal(&f, &IdealSpec::full(&b)).unwrap();
        assert_eq!(full.submodule, f);
        let none = submodule_by_ideal(&f, &IdealSpec::empty(&b)).unwrap();
        assert_eq!(none.submodule.dim(), 0);
    }
}
