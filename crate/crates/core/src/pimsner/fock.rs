//! Truncated Fock space of a graph correspondence and the monomial-span
//! oracle used to cross-check every stage computation.

use std::collections::HashMap;

use crate::corr::GraphSpec;
use crate::linalg::Scalar;
use crate::sparse::{SparseEchelon, SparseMatrix};

use super::paths::{paths_of_length, Monomial, Path};

/// Paths of length `≤ level`, listed level by level.
#[derive(Debug, Clone)]
pub struct FockTruncation {
    graph: GraphSpec,
    level: usize,
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
}

impl FockTruncation {
    pub fn new(graph: &GraphSpec, level: usize) -> Self {
        let mut paths = Vec::new();
        for k in 0..=level {
            paths.extend(paths_of_length(graph, k));
        }
        let index = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        FockTruncation { graph: graph.clone(), level, paths, index }
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Basis indices of paths shorter than `k`.
    pub fn below(&self, k: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.paths[i].len() < k).collect()
    }

    /// `t_e`: prepends `e`, dropping the top level.
    pub fn creation(&self, e: usize) -> SparseMatrix<Scalar> {
        let edge = Path::edge(&self.graph, e);
        let cols = self
            .paths
            .iter()
            .map(|p| match edge.concat(&self.graph, p) {
                Some(q) if q.len() <= self.level => vec![(self.index[&q], Scalar::one())],
                _ => Vec::new(),
            })
            .collect();
        SparseMatrix::from_columns(self.dim(), cols)
    }

    /// `π(p_v)`: projection onto paths with range `v`.
    pub fn vertex_projection(&self, v: usize) -> SparseMatrix<Scalar> {
        let cols = (0..self.dim())
            .map(|i| if self.paths[i].range(&self.graph) == v { vec![(i, Scalar::one())] } else { Vec::new() })
            .collect();
        SparseMatrix::from_columns(self.dim(), cols)
    }

    /// Nonzero entries `(row, col)` of the truncated `t_μ t_ν^*`.
    pub fn monomial_pairs(&self, m: &Monomial) -> Vec<(usize, usize)> {
        let g = &self.graph;
        let top = m.left.len().max(m.right.len());
        if top > self.level {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut tails = vec![Path::vertex(m.right.source())];
        for _ in 0..=(self.level - top) {
            let mut next = Vec::new();
            for gamma in &tails {
                let (Some(row), Some(col)) = (m.left.concat(g, gamma), m.right.concat(g, gamma)) else { continue };
                out.push((self.index[&row], self.index[&col]));
                for e in 0..g.edges().len() {
                    if let Some(x) = gamma.extend(g, e) {
                        next.push(x);
                    }
                }
            }
            tails = next;
        }
        out
    }

    pub fn monomial_operator(&self, m: &Monomial) -> SparseMatrix<Scalar> {
        let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); self.dim()];
        for (r, c) in self.monomial_pairs(m) {
            cols[c].push((r, Scalar::one()));
        }
        SparseMatrix::from_columns(self.dim(), cols)
    }
}

/// Monomials `t_μ t_ν^*` with `|μ| = |ν| + degree` and `|ν| ≤ depth`, deepest first.
pub fn stage_monomials(g: &GraphSpec, degree: usize, depth: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for k in (0..=depth).rev() {
        let rights = paths_of_length(g, k);
        let lefts = paths_of_length(g, k + degree);
        for mu in &lefts {
            for nu in rights.iter().filter(|nu| nu.base == mu.base) {
                out.push(Monomial { left: mu.clone(), right: nu.clone() });
            }
        }
    }
    out
}

/// Span of monomials inside the truncated Fock matrices, modulo the rank-one
/// operators `|μ⟩⟨ν|` with `s(μ) ∈ J` that the stage itself contains.
#[derive(Debug, Clone)]
pub struct OracleSpan {
    fock: FockTruncation,
    degree: usize,
    depth: usize,
    echelon: SparseEchelon,
}

impl OracleSpan {
    pub fn new(g: &GraphSpec, degree: usize, depth: usize, level: usize) -> Self {
        OracleSpan { fock: FockTruncation::new(g, level), degree, depth, echelon: SparseEchelon::new() }
    }

    fn in_quotient(&self, row: usize, col: usize) -> bool {
        let (mu, nu) = (&self.fock.paths[row], &self.fock.paths[col]);
        self.depth > 0
            && nu.len() < self.depth
            && mu.len() == nu.len() + self.degree
            && self.fock.graph.relative().contains(&mu.base)
    }

    /// Flattened entries of a monomial with the quotient coordinates removed.
    pub fn entries(&self, m: &Monomial) -> Vec<(usize, Scalar)> {
        let d = self.fock.dim();
        self.fock
            .monomial_pairs(m)
            .into_iter()
            .filter(|&(r, c)| !self.in_quotient(r, c))
            .map(|(r, c)| (r * d + c, Scalar::one()))
            .collect()
    }

    pub fn insert(&mut self, m: &Monomial) -> bool {
        let v = self.entries(m);
        self.echelon.insert(v)
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.echelon.contains(self.entries(m))
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn fock(&self) -> &FockTruncation {
        &self.fock
    }
}

/// Dimension of the stage of the given degree and depth bound.
pub fn oracle_dimension(g: &GraphSpec, degree: usize, depth: usize, level: usize) -> usize {
    let mut span = OracleSpan::new(g, degree, depth, level);
    for m in stage_monomials(g, degree, depth) {
        span.insert(&m);
    }
    span.rank()
}

/// Semi-saturation at a stage: products of degree-one monomials, with the
/// first factor of depth at most one, span the degree-two stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiSaturation {
    pub products: usize,
    pub degree_two: usize,
    pub joint: usize,
}

impl SemiSaturation {
    pub fn holds(&self) -> bool {
        self.products == self.degree_two && self.joint == self.degree_two
    }
}

pub fn semi_saturation(g: &GraphSpec, n: usize) -> SemiSaturation {
    let depth = n.saturating_sub(1);
    let level = n + 3;
    let ones = stage_monomials(g, 1, depth);
    let firsts: Vec<&Monomial> = ones.iter().filter(|m| m.depth() <= 1).collect();
    let mut products = Vec::new();
    for a in &firsts {
        for b in &ones {
            if let Some(p) = a.mul(g, b) {
                if p.depth() <= depth {
                    products.push(p);
                }
            }
        }
    }
    products.sort();
    products.dedup();
    let twos = stage_monomials(g, 2, depth);
    let mut p_span = OracleSpan::new(g, 2, depth, level);
    for m in &products {
        p_span.insert(m);
    }
    let mut d_span = OracleSpan::new(g, 2, depth, level);
    for m in &twos {
        d_span.insert(m);
    }
    let degree_two = d_span.rank();
    for m in &products {
        d_span.insert(m);
    }
    SemiSaturation { products: p_span.rank(), degree_two, joint: d_span.rank() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_sizes() {
        let loop1 = GraphSpec::from_indices(1, &[(0, 0)], &[]).unwrap();
        assert_eq!(FockTruncation::new(&loop1, 3).dim(), 4);
        let o2 = GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[]).unwrap();
        assert_eq!(FockTruncation::new(&o2, 2).dim(), 7);
        let line = GraphSpec::from_indices(2, &[(0, 1)], &[]).unwrap();
        assert_eq!(FockTruncation::new(&line, 2).dim(), 3);
    }

    #[test]
    fn single_loop_creation_is_shift() {
        let loop1 = GraphSpec::from_indices(1, &[(0, 0)], &[]).unwrap();
        let f = FockTruncation::new(&loop1, 3);
        let t = f.creation(0).to_dense();
        for c in 0..4 {
            for r in 0..4 {
                let want = if r == c + 1 { Scalar::one() } else { Scalar::zero() };
                assert_eq!(t[(r, c)], want);
            }
        }
    }

    #[test]
    fn toeplitz_relation_below_cutoff() {
        let o2 = GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[]).unwrap();
        let f = FockTruncation::new(&o2, 3);
        let low = f.below(3);
        for e in 0..2 {
            for g in 0..2 {
                let te = f.creation(e);
                let tg = f.creation(g);
                let prod = te.adjoint().mul(&tg).select_columns(&low);
                let want = if e == g { f.vertex_projection(0).select_columns(&low) } else { SparseMatrix::zeros(f.dim(), low.len()) };
                assert_eq!(prod.to_dense(), want.to_dense());
            }
        }
    }

    #[test]
    fn monomial_operator_matches_products() {
        let g = GraphSpec::from_indices(2, &[(0, 1), (1, 0), (1, 1)], &[]).unwrap();
        let f = FockTruncation::new(&g, 4);
        let mu = Path::edge(&g, 2).extend(&g, 0).unwrap();
        let nu = Path::edge(&g, 0).extend(&g, 0);
        assert!(nu.is_none());
        let nu = Path::edge(&g, 1).extend(&g, 0).unwrap();
        let m = Monomial::new(mu.clone(), nu.clone()).unwrap();
        let direct = f.monomial_operator(&m);
        let tmu = f.creation(2).mul(&f.creation(0));
        let tnu = f.creation(1).mul(&f.creation(0));
        let prod = tmu.mul(&tnu.adjoint());
        // products of truncated operators lose entries near the top level
        let low = f.below(3);
        assert_eq!(direct.select_columns(&low).to_dense(), prod.select_columns(&low).to_dense());
    }
}
