//! Graded stages `F ⊗ Gⁿ` of the correspondence induced by an arrow into a
//! Hilbert-bimodule triple, its representation of the source, and the
//! composition isomorphisms `λ` with their coherence.

use std::collections::BTreeMap;

use crate::bicat::{bracketing, compose_covariant, CoherenceResult, CovariantCorrespondence};
use crate::corr::{tensor, tensor_maps, verify_iso, CorrIso, Correspondence, GraphSpec, LawCheck, TensorProduct};
use crate::cstar::{AlgElement, UnitIndex};
use crate::linalg::{Matrix, Scalar};
use crate::sparse::{LinMap, SparseMatrix};

use super::paths::{Monomial, Path};
use super::reflect::Sharp;
use super::rep::{Representation, RepresentationReport};
use super::PimsnerError;

/// `Gⁿ` for `n = 0..=top`, with `G⁰` the identity correspondence.
fn powers(g: &Correspondence, top: usize) -> Result<Vec<Correspondence>, PimsnerError> {
    let mut out = vec![Correspondence::identity(g.source())];
    for n in 1..=top {
        let next = if n == 1 { g.clone() } else { tensor(g, &out[n - 1])?.product };
        out.push(next);
    }
    Ok(out)
}

/// `F ⊗ Gⁿ`, with `F` itself at `n = 0`.
fn level(f: &Correspondence, g_pow: &[Correspondence], n: usize) -> Result<Correspondence, PimsnerError> {
    Ok(if n == 0 { f.clone() } else { tensor(f, &g_pow[n])?.product })
}

/// `E ⊗ (F ⊗ Gⁿ) → F ⊗ Gⁿ⁺¹` through `u`, with its domain tensor.
fn transport(cc: &CovariantCorrespondence, g_pow: &[Correspondence], n: usize) -> Result<(LinMap, TensorProduct), PimsnerError> {
    if n == 0 {
        return Ok((cc.u.map.clone(), cc.ef.clone()));
    }
    let (e, f, g) = (&cc.source.corr, &cc.corr, &cc.target.corr);
    let a = bracketing(e, f, &g_pow[n])?;
    let b = bracketing(f, g, &g_pow[n])?;
    let map = b.forward.compose(&tensor_maps(&cc.u.map, &LinMap::identity(g_pow[n].dim()), &a.xy_z, &b.xy_z)).compose(&a.forward.adjoint());
    Ok((map, a.x_yz))
}

/// `η ↦ x ⊗ η` into a tensor product.
fn creation(t: &TensorProduct, x: &[Scalar]) -> LinMap {
    let col = LinMap::from_dense(&Matrix::column_vector(x));
    t.tau.compose(&col.kron(&LinMap::identity(t.right.dim())))
}

fn basis_vectors(e: &Correspondence) -> Vec<Vec<Scalar>> {
    (0..e.dim()).map(|i| (0..e.dim()).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

/// Degrees `0..=top` of the induced correspondence with `t(x)` between them.
#[derive(Debug, Clone)]
pub struct GradedArrow {
    pub arrow: CovariantCorrespondence,
    pub top: usize,
    pub levels: Vec<Correspondence>,
    pub offsets: Vec<usize>,
    /// `shifts[i][n]: F ⊗ Gⁿ → F ⊗ Gⁿ⁺¹` for the i-th basis vector of `E`.
    pub shifts: Vec<Vec<LinMap>>,
}

impl GradedArrow {
    pub fn new(cc: &CovariantCorrespondence, top: usize) -> Result<Self, PimsnerError> {
        let g_pow = powers(&cc.target.corr, top)?;
        let levels = (0..=top).map(|n| level(&cc.corr, &g_pow, n)).collect::<Result<Vec<_>, _>>()?;
        let mut offsets = vec![0];
        for l in &levels {
            offsets.push(offsets.last().expect("nonempty") + l.dim());
        }
        let xs = basis_vectors(&cc.source.corr);
        let mut shifts = vec![Vec::with_capacity(top); xs.len()];
        for n in 0..top {
            let (map, dom) = transport(cc, &g_pow, n)?;
            for (i, x) in xs.iter().enumerate() {
                shifts[i].push(map.compose(&creation(&dom, x)));
            }
        }
        Ok(GradedArrow { arrow: cc.clone(), top, levels, offsets, shifts })
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().expect("nonempty")
    }

    fn assemble(&self, parts: &[(usize, usize, LinMap)]) -> SparseMatrix<Scalar> {
        let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); self.dim()];
        for (to, from, m) in parts {
            let m = m.exact().expect("exact graded data");
            for c in 0..m.cols() {
                for (r, v) in m.column(c) {
                    cols[self.offsets[*from] + c].push((self.offsets[*to] + r, v.clone()));
                }
            }
        }
        for col in &mut cols {
            col.sort_by_key(|(r, _)| *r);
        }
        SparseMatrix::from_columns(self.dim(), cols)
    }

    pub fn is_exact(&self) -> bool {
        self.arrow.u.map.is_exact() && self.shifts.iter().flatten().all(LinMap::is_exact)
    }

    /// `t(x)` on the direct sum, zero on the top degree.
    pub fn shift(&self, i: usize) -> SparseMatrix<Scalar> {
        let parts: Vec<(usize, usize, LinMap)> = (0..self.top).map(|n| (n + 1, n, self.shifts[i][n].clone())).collect();
        self.assemble(&parts)
    }

    /// `a ⊗ 1` on every degree.
    pub fn left(&self, a: &AlgElement) -> Result<SparseMatrix<Scalar>, PimsnerError> {
        let phi = LinMap::from_dense(&self.arrow.corr.left_matrix_of(a));
        let g_pow = powers(&self.arrow.target.corr, self.top)?;
        let mut parts = vec![(0, 0, phi.clone())];
        for n in 1..=self.top {
            let t = tensor(&self.arrow.corr, &g_pow[n])?;
            parts.push((n, n, tensor_maps(&phi, &LinMap::identity(g_pow[n].dim()), &t, &t)));
        }
        Ok(self.assemble(&parts))
    }

    /// `t(x)` raises degree by one and `π(a)` preserves it.
    pub fn grading(&self) -> LawCheck {
        let degree_of = |i: usize| self.offsets.iter().rposition(|&o| o <= i).expect("offset zero");
        for i in 0..self.shifts.len() {
            let t = self.shift(i);
            for c in 0..t.cols() {
                for (r, _) in t.column(c) {
                    if degree_of(*r) != degree_of(c) + 1 {
                        return LawCheck::fail(format!("t(x{i}) is not homogeneous of degree one"));
                    }
                }
            }
        }
        let a = self.arrow.source.algebra();
        for u in a.units() {
            let Ok(p) = self.left(&AlgElement::unit(a, u)) else { return LawCheck::fail("left action on a degree") };
            for c in 0..p.cols() {
                if p.column(c).iter().any(|(r, _)| degree_of(*r) != degree_of(c)) {
                    return LawCheck::fail(format!("π({u}) does not preserve degree"));
                }
            }
        }
        LawCheck::pass()
    }
}

/// Representation checks of the graded stages of an arrow out of a graph
/// triple: the laws for `t`, and covariance with degree zero acting through
/// the induced stage action of `#`.
#[derive(Debug, Clone)]
pub struct GradedReport {
    pub grading: LawCheck,
    pub laws: RepresentationReport,
    pub covariance: RepresentationReport,
}

impl GradedReport {
    pub fn is_valid(&self) -> bool {
        self.grading.ok && self.laws.laws_hold() && self.covariance.identity_criterion && self.covariance.criteria_agree()
    }
}

pub fn cp_correspondence(g: &GraphSpec, s: &Sharp, graded: &GradedArrow) -> Result<GradedReport, PimsnerError> {
    let cc = &graded.arrow;
    let gc = crate::corr::graph_correspondence(g)?;
    let a = cc.source.algebra();
    let vertex: Vec<SparseMatrix<Scalar>> =
        (0..g.num_vertices()).map(|v| graded.left(&AlgElement::unit(a, UnitIndex { block: v, row: 0, col: 0 }))).collect::<Result<_, _>>()?;
    let edge: Vec<SparseMatrix<Scalar>> = (0..g.edges().len()).map(|e| graded.shift(gc.edge_position[e])).collect();
    let below: Vec<usize> = (0..graded.offsets[graded.top]).collect();
    let pairs: Vec<(usize, usize)> = (0..edge.len())
        .flat_map(|e| (0..edge.len()).map(move |f| (e, f)))
        .filter(|&(e, f)| g.source(e) == g.source(f))
        .collect();
    let products: BTreeMap<(usize, usize), SparseMatrix<Scalar>> = pairs.iter().map(|&(e, f)| ((e, f), edge[e].mul(&edge[f].adjoint()))).collect();
    let with_t = Representation {
        name: format!("graded stages to degree {}", graded.top),
        graph: g.clone(),
        dim: graded.dim(),
        vertex: vertex.clone(),
        edge: Some(edge),
        compact: products.clone(),
        law_columns: below,
    };
    // degree zero: θ_{e,f} acts through the stage action; higher degrees through t t^*
    let module = cc.corr.module();
    let alg = s.core.algebra();
    let compact = products
        .into_iter()
        .map(|((e, f), m)| {
            let mono = Monomial { left: Path::edge(g, e), right: Path::edge(g, f) };
            let x = s.core.stage.monomial_to_stage(&mono).expect("depth one fits a positive stage").to_alg(alg);
            let zero = LinMap::from_dense(&module.operator_matrix(&s.action.apply(&x)));
            let d0 = graded.levels[0].dim();
            let rest: Vec<usize> = (d0..graded.dim()).collect();
            let high = m.select_columns(&rest);
            let mut cols: Vec<Vec<(usize, Scalar)>> = Vec::with_capacity(graded.dim());
            let z = zero.exact().expect("exact stage action");
            for c in 0..d0 {
                cols.push(z.column(c).to_vec());
            }
            for c in 0..high.cols() {
                cols.push(high.column(c).iter().filter(|(r, _)| *r >= d0).cloned().collect());
            }
            ((e, f), SparseMatrix::from_columns(graded.dim(), cols))
        })
        .collect();
    let covariant = Representation {
        name: format!("graded stages to degree {} with stage action", graded.top),
        graph: g.clone(),
        dim: graded.dim(),
        vertex,
        edge: None,
        compact,
        law_columns: (0..graded.dim()).collect(),
    };
    Ok(GradedReport { grading: graded.grading(), laws: with_t.check(g.relative()), covariance: covariant.check(g.relative()) })
}

/// `λ_n: F₁ ⊗ (F₂ ⊗ Hⁿ) → (F₁ ⊗ F₂) ⊗ Hⁿ`.
fn lambda(f1: &Correspondence, f2: &Correspondence, h_pow: &[Correspondence], n: usize) -> Result<LinMap, PimsnerError> {
    if n == 0 {
        return Ok(LinMap::identity(tensor(f1, f2)?.product.dim()));
    }
    Ok(bracketing(f1, f2, &h_pow[n])?.forward.adjoint())
}

/// `λ` for a composable pair: unitary in each degree and intertwining the
/// shifts of the stepwise composite with those of `(F₁⊗F₂, u₁∙u₂)`.
pub fn lambda_checks(cc1: &CovariantCorrespondence, cc2: &CovariantCorrespondence, top: usize) -> Result<Vec<CoherenceResult>, PimsnerError> {
    let composite = compose_covariant(cc1, cc2)?;
    let graded = GradedArrow::new(&composite, top)?;
    let (f1, f2) = (&cc1.corr, &cc2.corr);
    let h_pow = powers(&cc2.target.corr, top)?;
    let l2: Vec<Correspondence> = (0..=top).map(|n| level(f2, &h_pow, n)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for n in 0..=top {
        let lam = lambda(f1, f2, &h_pow, n)?;
        let p_n = tensor(f1, &l2[n])?;
        let iso = CorrIso { domain: p_n.product.clone(), codomain: graded.levels[n].clone(), map: lam.clone() };
        let rep = verify_iso(&iso);
        let law = if rep.is_valid() { LawCheck::pass() } else { LawCheck::fail(rep.first_failure().unwrap_or_default()) };
        out.push(CoherenceResult::from_law(&format!("lambda unitary in degree {n}"), &law, rep.exact));
        if n == top {
            break;
        }
        let (tr2, _) = transport(cc2, &h_pow, n)?;
        let e = &cc1.source.corr;
        let a = bracketing(e, f1, &l2[n])?;
        let b = bracketing(f1, &cc1.target.corr, &l2[n])?;
        let p_next = tensor(f1, &l2[n + 1])?;
        let lam_next = lambda(f1, f2, &h_pow, n + 1)?;
        for (i, x) in basis_vectors(e).iter().enumerate() {
            let stepwise = tensor_maps(&LinMap::identity(f1.dim()), &tr2, &b.x_yz, &p_next)
                .compose(&b.forward)
                .compose(&tensor_maps(&cc1.u.map, &LinMap::identity(l2[n].dim()), &a.xy_z, &b.xy_z))
                .compose(&a.forward.adjoint())
                .compose(&creation(&a.x_yz, x));
            let lhs = lam_next.compose(&stepwise);
            let rhs = graded.shifts[i][n].compose(&lam);
            out.push(CoherenceResult::from_diff(&format!("lambda intertwines t(x{i}) in degree {n}"), &lhs, &rhs));
        }
    }
    Ok(out)
}

/// The associativity square for `λ` on three composable arrows, in each degree.
pub fn lambda_associativity(
    f: &CovariantCorrespondence,
    g: &CovariantCorrespondence,
    h: &CovariantCorrespondence,
    top: usize,
) -> Result<Vec<CoherenceResult>, PimsnerError> {
    compose_covariant(&compose_covariant(f, g)?, h)?;
    let (ff, fg, fh) = (&f.corr, &g.corr, &h.corr);
    let z_pow = powers(&h.target.corr, top)?;
    let gh = tensor(fg, fh)?.product;
    let fg_ = tensor(ff, fg)?.product;
    let fgh = bracketing(ff, fg, fh)?;
    let mut out = Vec::new();
    for n in 0..=top {
        let lh = level(fh, &z_pow, n)?;
        let lgh = level(&gh, &z_pow, n)?;
        let start = tensor(ff, &tensor(fg, &lh)?.product)?;
        // F_f ⊗ (λ_{g,h}) then λ_{f,gh} then α⁻¹ ⊗ 1
        let mid = tensor(ff, &lgh)?;
        let step1 = tensor_maps(&LinMap::identity(ff.dim()), &lambda(fg, fh, &z_pow, n)?, &start, &mid);
        let step2 = lambda(ff, &gh, &z_pow, n)?;
        let step3 = if n == 0 {
            fgh.forward.adjoint()
        } else {
            let from = tensor(&fgh.x_yz.product, &z_pow[n])?;
            let to = tensor(&fgh.xy_z.product, &z_pow[n])?;
            tensor_maps(&fgh.forward.adjoint(), &LinMap::identity(z_pow[n].dim()), &from, &to)
        };
        let route1 = step3.compose(&step2).compose(&step1);
        // λ_{f,g} whiskered by the h-stage, then λ_{fg,h}
        let whisker = bracketing(ff, fg, &lh)?.forward.adjoint();
        let route2 = lambda(&fg_, fh, &z_pow, n)?.compose(&whisker);
        out.push(CoherenceResult::from_diff(&format!("lambda associativity in degree {n}"), &route1, &route2));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pimsner::reflect::sharp;
    use crate::pimsner::samples::sample_arrows;

    #[test]
    fn graded_stages_represent_the_source() {
        for s in sample_arrows() {
            let sh = sharp(&s.graph, &s.arrow, 2).unwrap();
            let gr = GradedArrow::new(&s.arrow, 2).unwrap();
            let rep = cp_correspondence(&s.graph, &sh, &gr).unwrap();
            assert!(rep.is_valid(), "{}: {rep:?}", s.name);
        }
    }

    #[test]
    fn identity_arrow_has_canonical_lambda() {
        let arrows = sample_arrows();
        let id = CovariantCorrespondence::identity(&arrows[0].arrow.target);
        for c in lambda_checks(&id, &id, 2).unwrap() {
            assert!(c.ok && c.exact, "{c:?}");
        }
    }

    #[test]
    fn lambda_square_commutes() {
        let arrows = sample_arrows();
        let (swap, onto) = (&arrows[1].arrow, &arrows[4].arrow);
        for c in lambda_checks(onto, swap, 2).unwrap().into_iter().chain(lambda_associativity(onto, swap, swap, 2).unwrap()) {
            assert!(c.ok && c.exact, "{c:?}");
        }
    }
}
