//! Concrete representations of a graph correspondence on finite-dimensional
//! spaces: the representation laws and the two covariance criteria.

use std::collections::{BTreeMap, BTreeSet};

use crate::corr::{GraphSpec, LawCheck};
use crate::cstar::{AlgElement, UnitIndex};
use crate::linalg::Scalar;
use crate::sparse::{SparseEchelon, SparseMatrix};

use super::fock::FockTruncation;
use super::paths::{Monomial, Path};
use super::reflect::Sharp;
use super::stage::{CoreStage, StageElement};

/// `π(p_v)`, optionally `t(e)`, and `π¹(θ_{e,f})` on `ℂ^dim`.
#[derive(Debug, Clone)]
pub struct Representation {
    pub name: String,
    pub graph: GraphSpec,
    pub dim: usize,
    pub vertex: Vec<SparseMatrix<Scalar>>,
    pub edge: Option<Vec<SparseMatrix<Scalar>>>,
    /// Keyed by edge pairs with a common source.
    pub compact: BTreeMap<(usize, usize), SparseMatrix<Scalar>>,
    /// Basis vectors on which the laws are required to hold.
    pub law_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    pub name: String,
    pub law_one: LawCheck,
    pub law_two: LawCheck,
    /// `π(p_v) = Σ_{r(e)=v} π¹(θ_{e,e})` for `v ∈ J`.
    pub identity_criterion: bool,
    /// `π(p_v)H ⊆ span t(E)H` for `v ∈ J`.
    pub subspace_criterion: bool,
}

impl RepresentationReport {
    pub fn laws_hold(&self) -> bool {
        self.law_one.ok && self.law_two.ok
    }

    pub fn criteria_agree(&self) -> bool {
        self.identity_criterion == self.subspace_criterion
    }
}

fn same_on(a: &SparseMatrix<Scalar>, b: &SparseMatrix<Scalar>, cols: &[usize]) -> bool {
    a.select_columns(cols) == b.select_columns(cols)
}

fn common_source_pairs(g: &GraphSpec) -> Vec<(usize, usize)> {
    let n = g.edges().len();
    (0..n).flat_map(|e| (0..n).map(move |f| (e, f))).filter(|&(e, f)| g.source(e) == g.source(f)).collect()
}

impl Representation {
    /// The Fock representation truncated at `level`; laws are required below the top level.
    pub fn fock(g: &GraphSpec, level: usize) -> Self {
        let fock = FockTruncation::new(g, level);
        let vertex = (0..g.num_vertices()).map(|v| fock.vertex_projection(v)).collect();
        let edge: Vec<SparseMatrix<Scalar>> = (0..g.edges().len()).map(|e| fock.creation(e)).collect();
        let compact = common_source_pairs(g).into_iter().map(|(e, f)| ((e, f), edge[e].mul(&edge[f].adjoint()))).collect();
        Representation {
            name: format!("fock level {level}"),
            graph: g.clone(),
            dim: fock.dim(),
            vertex,
            edge: Some(edge),
            compact,
            law_columns: fock.below(level),
        }
    }

    /// The stage algebra acting on itself by left multiplication.
    pub fn stage(stage: &CoreStage) -> Self {
        let g = stage.graph();
        let alg = stage.algebra();
        let left = |x: &StageElement| -> SparseMatrix<Scalar> {
            let cols = alg
                .units()
                .into_iter()
                .map(|u| {
                    let prod = x.mul(&StageElement::unit(u));
                    let mut col: Vec<(usize, Scalar)> = prod.0.into_iter().map(|(w, c)| (alg.unit_position(w), c)).collect();
                    col.sort_by_key(|(r, _)| *r);
                    col
                })
                .collect();
            SparseMatrix::from_columns(alg.dim(), cols)
        };
        let vertex = (0..g.num_vertices())
            .map(|v| left(&StageElement::from_alg(alg, stage.stage_map().image_of_unit(UnitIndex { block: v, row: 0, col: 0 }))))
            .collect();
        let compact = common_source_pairs(g)
            .into_iter()
            .map(|(e, f)| {
                let m = Monomial { left: Path::edge(g, e), right: Path::edge(g, f) };
                let x = stage.monomial_to_stage(&m).expect("depth one fits a positive stage");
                ((e, f), left(&x))
            })
            .collect();
        Representation {
            name: format!("stage {} left regular", stage.level()),
            graph: g.clone(),
            dim: alg.dim(),
            vertex,
            edge: None,
            compact,
            law_columns: (0..alg.dim()).collect(),
        }
    }

    /// `F` with `A` acting by `φ_F` and `θ_{e,f}` acting through the induced stage action.
    pub fn from_sharp(g: &GraphSpec, s: &Sharp) -> Self {
        let f = &s.arrow.corr;
        let module = f.module();
        let dense = |x: &AlgElement| SparseMatrix::from_dense(&module.operator_matrix(x));
        let source = s.core.stage.stage_map().source();
        let vertex = (0..g.num_vertices())
            .map(|v| {
                let p = s.core.stage.stage_map().apply(&AlgElement::unit(source, UnitIndex { block: v, row: 0, col: 0 }));
                dense(&s.action.apply(&p))
            })
            .collect();
        let alg = s.core.algebra();
        let compact = common_source_pairs(g)
            .into_iter()
            .map(|(e, h)| {
                let m = Monomial { left: Path::edge(g, e), right: Path::edge(g, h) };
                let x = s.core.stage.monomial_to_stage(&m).expect("depth one fits a positive stage").to_alg(alg);
                ((e, h), dense(&s.action.apply(&x)))
            })
            .collect();
        Representation {
            name: format!("induced action at stage {}", s.level),
            graph: g.clone(),
            dim: f.dim(),
            vertex,
            edge: None,
            compact,
            law_columns: (0..f.dim()).collect(),
        }
    }

    /// Law (1) `π(a)t(ξ) = t(φ(a)ξ)` and law (2) `t(ξ)^*t(η) = π(⟨ξ,η⟩)` on the
    /// law columns; without `t` they are checked in their compact form
    /// `π(p_v)θ_{e,f} = [r(e)=v]θ_{e,f}`, `θ_{e,f}θ_{g,h} = δ_{f,g}θ_{e,h}`, `θ_{e,f}^* = θ_{f,e}`.
    fn laws(&self) -> (LawCheck, LawCheck) {
        let g = &self.graph;
        let cols = &self.law_columns;
        let zero = SparseMatrix::zeros(self.dim, self.dim);
        let mut one = LawCheck::pass();
        let mut two = LawCheck::pass();
        if let Some(t) = &self.edge {
            'one: for (v, p) in self.vertex.iter().enumerate() {
                for (e, te) in t.iter().enumerate() {
                    let want = if g.range(e) == v { te } else { &zero };
                    if !same_on(&p.mul(te), want, cols) {
                        one = LawCheck::fail(format!("π(p_{v}) t(e{e}) ≠ t(φ(p_{v}) e{e})"));
                        break 'one;
                    }
                }
            }
            'two: for (e, te) in t.iter().enumerate() {
                for (f, tf) in t.iter().enumerate() {
                    let want = if e == f { &self.vertex[g.source(e)] } else { &zero };
                    if !same_on(&te.adjoint().mul(tf), want, cols) {
                        two = LawCheck::fail(format!("t(e{e})* t(e{f}) ≠ π(⟨e{e}, e{f}⟩)"));
                        break 'two;
                    }
                }
            }
            return (one, two);
        }
        'one: for (v, p) in self.vertex.iter().enumerate() {
            for (&(e, f), k) in &self.compact {
                let want = if g.range(e) == v { k } else { &zero };
                if !same_on(&p.mul(k), want, cols) {
                    one = LawCheck::fail(format!("π(p_{v}) θ(e{e},e{f}) ≠ [r(e{e})={v}] θ(e{e},e{f})"));
                    break 'one;
                }
            }
        }
        'two: for (&(e, f), k) in &self.compact {
            if !same_on(&k.adjoint(), &self.compact[&(f, e)], cols) {
                two = LawCheck::fail(format!("θ(e{e},e{f})* ≠ θ(e{f},e{e})"));
                break;
            }
            for (&(a, b), l) in &self.compact {
                let want = if f == a { &self.compact[&(e, b)] } else { &zero };
                if g.source(f) == g.source(a) && !same_on(&k.mul(l), want, cols) {
                    two = LawCheck::fail(format!("θ(e{e},e{f}) θ(e{a},e{b}) ≠ δ θ(e{e},e{b})"));
                    break 'two;
                }
            }
        }
        (one, two)
    }

    fn identity_criterion(&self, j: &BTreeSet<usize>) -> bool {
        let g = &self.graph;
        j.iter().all(|&v| {
            let mut sum = SparseMatrix::zeros(self.dim, self.dim);
            for e in 0..g.edges().len() {
                if g.range(e) == v {
                    sum = sum.add(&self.compact[&(e, e)]);
                }
            }
            sum == self.vertex[v]
        })
    }

    fn subspace_criterion(&self, j: &BTreeSet<usize>) -> bool {
        let mut span = SparseEchelon::new();
        let ranges: Vec<&SparseMatrix<Scalar>> = match &self.edge {
            Some(t) => t.iter().collect(),
            None => self.compact.values().collect(),
        };
        for m in ranges {
            for c in 0..m.cols() {
                span.insert(m.column(c).to_vec());
            }
        }
        j.iter().all(|&v| {
            let p = &self.vertex[v];
            (0..p.cols()).all(|c| span.contains(p.column(c).to_vec()))
        })
    }

    /// Both laws, and both covariance criteria for the relative set `j`.
    pub fn check(&self, j: &BTreeSet<usize>) -> RepresentationReport {
        let (law_one, law_two) = self.laws();
        RepresentationReport {
            name: self.name.clone(),
            law_one,
            law_two,
            identity_criterion: self.identity_criterion(j),
            subspace_criterion: self.subspace_criterion(j),
        }
    }

    /// Same representation with `t` scaled; a negative control for law (2).
    pub fn scaled(&self, s: &Scalar) -> Self {
        let mut out = self.clone();
        if let Some(t) = &mut out.edge {
            for te in t.iter_mut() {
                *te = te.scale(s);
            }
        }
        out.compact = out.compact.iter().map(|(k, m)| (*k, m.scale(&(s * s)))).collect();
        out.name = format!("{} scaled", self.name);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pimsner::samples::cuntz;
    use crate::pimsner::stage::core_stage;

    #[test]
    fn fock_is_a_non_covariant_representation() {
        let g = cuntz(2, &[0]);
        let r = Representation::fock(&g, 3).check(g.relative());
        assert!(r.laws_hold());
        assert!(!r.identity_criterion);
        assert!(r.criteria_agree());
        let empty = Representation::fock(&g, 3).check(&BTreeSet::new());
        assert!(empty.identity_criterion && empty.subspace_criterion);
    }

    #[test]
    fn stage_representation_is_covariant() {
        let g = cuntz(2, &[0]);
        let st = core_stage(&g, 2).unwrap();
        let r = Representation::stage(&st).check(g.relative());
        assert!(r.laws_hold(), "{r:?}");
        assert!(r.identity_criterion && r.subspace_criterion);
    }

    #[test]
    fn toeplitz_stage_is_not_covariant_on_receivers() {
        let g = cuntz(2, &[]);
        let st = core_stage(&g, 2).unwrap();
        let r = Representation::stage(&st).check(&g.receivers());
        assert!(r.laws_hold());
        assert!(!r.identity_criterion && !r.subspace_criterion);
    }

    #[test]
    fn scaled_creation_breaks_law_two() {
        let g = cuntz(2, &[0]);
        let r = Representation::fock(&g, 3).scaled(&Scalar::from_int(2)).check(g.relative());
        assert!(r.law_one.ok);
        assert!(!r.law_two.ok);
    }
}
