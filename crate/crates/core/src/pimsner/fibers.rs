//! The degree-one fiber at a stage, the core triple it generates, and the
//! universal arrow from a graph triple into that core triple.

use crate::bicat::{check_covariant, CPTriple, CovariantCorrespondence, CovariantReport};
use crate::corr::{
    graph_correspondence, is_hilbert_bimodule, katsura_ideal, left_unitor, tensor, Correspondence, GraphCorrespondence, GraphSpec,
    TensorProduct,
};
use crate::cstar::{AlgElement, FdCStarAlgebra, IdealSpec, StarHom, UnitIndex};
use crate::hilbert::{ModuleBasis, StandardModule};
use crate::linalg::{Matrix, Scalar};
use crate::sparse::{LinMap, SparseMatrix};

use super::fock::{oracle_dimension, semi_saturation, SemiSaturation};
use super::paths::{MonoComb, Monomial};
use super::stage::{core_stage, CoreStage};
use super::PimsnerError;

/// `F_N` as a right module over itself with `A` acting through the stage map.
pub fn stage_module(stage: &CoreStage) -> Result<Correspondence, PimsnerError> {
    let a = stage.stage_map().source().clone();
    Ok(Correspondence::new(a, StandardModule::regular(stage.algebra()), stage.stage_map().clone())?)
}

/// `E ⊗_A F_L` with the left action of `F_M` by `t_μ t_ν^* · (e ⊗ x)`.
#[derive(Debug, Clone)]
pub struct DegreeOne {
    pub left: CoreStage,
    pub coeff: CoreStage,
    pub graph: GraphCorrespondence,
    /// `E ⊗_A Υ_L` over `A`.
    pub tensor: TensorProduct,
    /// The same module as an `F_M ⤳ F_L` correspondence.
    pub corr: Correspondence,
}

/// Action of a monomial on the ℂ-tensor `E ⊗ F_L`: `t_v t_v^*` multiplies by
/// `[r(e)=v]`; otherwise `t_μ t_ν^* (e ⊗ x) = δ_{ν₁,e} μ₁ ⊗ t_{μ'} t_{ν'}^* x`.
fn monomial_on_tensor(m: &Monomial, g: &GraphCorrespondence, coeff: &CoreStage, cols: &mut [Vec<(usize, Scalar)>], c: &Scalar) {
    let gs = &g.graph;
    let alg = coeff.algebra();
    let dl = alg.dim();
    let units = alg.units();
    match (m.left.split_first(), m.right.split_first()) {
        (None, None) => {
            let v = m.left.base;
            for (e, &(_, r)) in gs.edges().iter().enumerate() {
                if r != v {
                    continue;
                }
                let base = g.edge_position[e] * dl;
                for y in 0..dl {
                    cols[base + y].push((base + y, c.clone()));
                }
            }
        }
        (Some((mu1, mu_rest)), Some((nu1, nu_rest))) => {
            let inner = coeff.monomial_to_stage(&Monomial { left: mu_rest, right: nu_rest }).expect("depth within coefficient stage");
            let from = g.edge_position[nu1] * dl;
            let to = g.edge_position[mu1] * dl;
            for (y, u) in units.iter().enumerate() {
                for (w, val) in &inner.0 {
                    if w.block == u.block && w.col == u.row {
                        let target = alg.unit_position(UnitIndex { block: u.block, row: w.row, col: u.col });
                        cols[from + y].push((to + target, val * c));
                    }
                }
            }
        }
        _ => unreachable!("degree-zero monomial"),
    }
}

fn comb_on_tensor(x: &MonoComb, g: &GraphCorrespondence, coeff: &CoreStage) -> SparseMatrix<Scalar> {
    let n = g.corr.dim() * coeff.algebra().dim();
    let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); n];
    for (m, c) in x.terms() {
        monomial_on_tensor(m, g, coeff, &mut cols, c);
    }
    let cols = cols
        .into_iter()
        .map(|col| {
            let mut acc: std::collections::BTreeMap<usize, Scalar> = std::collections::BTreeMap::new();
            for (r, v) in col {
                *acc.entry(r).or_insert_with(Scalar::zero) += &v;
            }
            acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
        })
        .collect();
    SparseMatrix::from_columns(n, cols)
}

/// Compact operator of a right-linear sparse matrix on a standard module.
pub(crate) fn compact_from_sparse(module: &StandardModule, m: &SparseMatrix<Scalar>) -> Option<AlgElement> {
    let k = module.compacts();
    let blocks = module
        .compacts_blocks()
        .iter()
        .map(|&j| {
            let p = module.mult()[j];
            Matrix::from_fn(p, p, |a, b| {
                m.get(module.position(ModuleBasis { block: j, row: a, col: 0 }), module.position(ModuleBasis { block: j, row: b, col: 0 }))
            })
        })
        .collect();
    let t = AlgElement::from_blocks(&k, blocks).ok()?;
    // right linearity: m must be T ⊗ 1 blockwise
    let mut pos = 0usize;
    let mut kblock = 0usize;
    for (j, &p) in module.mult().iter().enumerate() {
        let mj = module.base().block_size(j);
        if p == 0 {
            continue;
        }
        for b in 0..p {
            for col in 0..mj {
                let c = pos + b * mj + col;
                let want: Vec<(usize, Scalar)> = (0..p)
                    .filter_map(|a| {
                        let v = t.block(kblock)[(a, b)].clone();
                        (!v.is_zero()).then(|| (pos + a * mj + col, v))
                    })
                    .collect();
                let mut have: Vec<(usize, Scalar)> = m.column(c).iter().filter(|(_, v)| !v.is_zero()).cloned().collect();
                have.sort_by_key(|(r, _)| *r);
                if have != want {
                    return None;
                }
            }
        }
        pos += p * mj;
        kblock += 1;
    }
    Some(t)
}

impl DegreeOne {
    pub fn build(graph: &GraphSpec, left_level: usize, coeff_level: usize) -> Result<DegreeOne, PimsnerError> {
        let left = core_stage(graph, left_level)?;
        let coeff = if coeff_level == left_level { left.clone() } else { core_stage(graph, coeff_level)? };
        DegreeOne::from_stages(left, coeff)
    }

    pub fn from_stages(left: CoreStage, coeff: CoreStage) -> Result<DegreeOne, PimsnerError> {
        if left.level() > coeff.level() + 1 {
            return Err(PimsnerError::StageInsufficient { level: coeff.level(), required: left.level() - 1 });
        }
        let g = graph_correspondence(left.graph())?;
        let ups = stage_module(&coeff)?;
        let t = tensor(&g.corr, &ups)?;
        let (Some(tau), Some(sigma)) = (t.tau.exact(), t.sigma.exact()) else {
            return Err(PimsnerError::Internal("stage tensor frames are not exact".into()));
        };
        let module = t.product.module().clone();
        let k = module.compacts();
        let st = sigma.mul(tau);
        let mut images = Vec::with_capacity(left.algebra().dim());
        for u in left.algebra().units() {
            let r = comb_on_tensor(&left.unit_expansion(u), &g, &coeff);
            let tr = tau.mul(&r);
            if !tr.sub(&tr.mul(&st)).is_zero() {
                return Err(PimsnerError::Internal(format!("left action of unit {u} does not respect the balanced relations")));
            }
            let l = tr.mul(sigma);
            let x = compact_from_sparse(&module, &l)
                .ok_or_else(|| PimsnerError::Internal(format!("left action of unit {u} is not right linear")))?;
            images.push(x);
        }
        let phi = StarHom::new(left.algebra().clone(), k, images)?;
        let corr = Correspondence::new(left.algebra().clone(), module, phi)?;
        Ok(DegreeOne { left, coeff, graph: g, tensor: t, corr })
    }
}

/// Degree-one stage `O¹_N`: degree-one monomials of depth `≤ N−1`, an
/// `F_N ⤳ F_{N−1}` correspondence, with its fiber and saturation checks.
#[derive(Debug, Clone)]
pub struct O1Stage {
    pub level: usize,
    pub fiber: DegreeOne,
    /// Monomial-span rank of the degree-one stage in the Fock truncation.
    pub oracle_dim: usize,
    /// Left-inner-product range ideal when the stage is a Hilbert bimodule.
    pub range_ideal: Option<IdealSpec>,
    pub saturation: SemiSaturation,
}

impl O1Stage {
    pub fn tensor_dim(&self) -> usize {
        self.fiber.tensor.product.dim()
    }

    /// `dim O¹_N = dim(E ⊗_A F_{N−1})`.
    pub fn fibers_hold(&self) -> bool {
        self.oracle_dim == self.tensor_dim()
    }
}

pub fn o1_stage(g: &GraphSpec, n: usize) -> Result<O1Stage, PimsnerError> {
    if n == 0 {
        return Err(PimsnerError::StageInsufficient { level: 0, required: 1 });
    }
    let fiber = DegreeOne::build(g, n, n - 1)?;
    let oracle_dim = oracle_dimension(g, 1, n - 1, n + 2);
    let range_ideal = is_hilbert_bimodule(&fiber.corr).map(|h| h.ideal);
    Ok(O1Stage { level: n, fiber, oracle_dim, range_ideal, saturation: semi_saturation(g, n) })
}

/// `(F_N, E ⊗_A F_N, I)`: the stage triple standing in for the core triple,
/// with `I` the Katsura ideal of the endo-correspondence.
#[derive(Debug, Clone)]
pub struct CoreTriple {
    pub stage: CoreStage,
    pub fiber: DegreeOne,
    pub triple: CPTriple,
}

impl CoreTriple {
    pub fn algebra(&self) -> &FdCStarAlgebra {
        self.stage.algebra()
    }
}

pub fn core_triple(g: &GraphSpec, n: usize) -> Result<CoreTriple, PimsnerError> {
    let stage = core_stage(g, n)?;
    core_triple_from(stage)
}

pub fn core_triple_from(stage: CoreStage) -> Result<CoreTriple, PimsnerError> {
    let fiber = DegreeOne::from_stages(stage.clone(), stage.clone())?;
    let ideal = katsura_ideal(&fiber.corr);
    let triple = CPTriple::new(fiber.corr.clone(), ideal)?;
    Ok(CoreTriple { stage, fiber, triple })
}

/// The graph triple `(ℂ^V, E, J)`.
pub fn graph_triple(g: &GraphSpec) -> Result<CPTriple, PimsnerError> {
    let gc = graph_correspondence(g)?;
    let a = gc.corr.source().clone();
    let j = IdealSpec::new(&a, g.relative().iter().copied())?;
    Ok(CPTriple::new(gc.corr, j)?)
}

/// `υ = (F_N, u)` from `(A, E, J)` to the stage core triple, where
/// `u: E ⊗_A F_N ⇒ F_N ⊗ (E ⊗_A F_N)` is the inverse left unitor.
#[derive(Debug, Clone)]
pub struct UniversalArrow {
    pub core: CoreTriple,
    pub arrow: CovariantCorrespondence,
    pub report: CovariantReport,
}

pub fn universal_arrow(g: &GraphSpec, n: usize) -> Result<UniversalArrow, PimsnerError> {
    let core = core_triple(g, n)?;
    universal_arrow_from(g, core)
}

pub fn universal_arrow_from(g: &GraphSpec, core: CoreTriple) -> Result<UniversalArrow, PimsnerError> {
    let source = graph_triple(g)?;
    let ups = stage_module(&core.stage)?;
    let fg = tensor(&ups, &core.fiber.corr)?;
    let u: LinMap = left_unitor(&fg).adjoint();
    let arrow = CovariantCorrespondence::new(source, core.triple.clone(), ups, u)?;
    let report = check_covariant(&arrow);
    Ok(UniversalArrow { core, arrow, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_fiber_is_the_graph_module() {
        let g = GraphSpec::from_indices(2, &[(0, 1), (1, 0)], &[0, 1]).unwrap();
        for n in 1..4 {
            let o = o1_stage(&g, n).unwrap();
            assert!(o.fibers_hold());
            assert_eq!(o.tensor_dim(), 2);
            assert!(o.range_ideal.is_some());
            assert!(o.saturation.holds());
        }
    }

    #[test]
    fn cuntz_fiber_dimensions() {
        let g = GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[0]).unwrap();
        let o = o1_stage(&g, 2).unwrap();
        assert_eq!(o.tensor_dim(), 8);
        assert!(o.fibers_hold());
        assert!(o.saturation.holds());
        assert_eq!(o.range_ideal.as_ref().map(|i| i.is_full()), Some(true));
    }

    #[test]
    fn toeplitz_first_fiber() {
        let g = GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[]).unwrap();
        let o = o1_stage(&g, 1).unwrap();
        assert!(o.fibers_hold());
        assert!(o.saturation.holds());
        // the gap projection at depth zero acts by zero
        let i = o.range_ideal.clone().unwrap();
        assert_eq!(i.blocks().len(), 1);
    }

    #[test]
    fn universal_arrow_is_covariant() {
        let cases = [
            GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[0]).unwrap(),
            GraphSpec::from_indices(1, &[(0, 0), (0, 0)], &[]).unwrap(),
            GraphSpec::from_indices(2, &[(0, 1), (1, 0)], &[0, 1]).unwrap(),
            GraphSpec::from_indices(2, &[(0, 1), (0, 0)], &[0]).unwrap(),
        ];
        for g in &cases {
            for n in 1..3 {
                let ua = universal_arrow(g, n).unwrap();
                assert!(ua.report.is_valid(), "{g:?} N={n}: {:?}", ua.report);
            }
        }
    }

    #[test]
    fn bimodule_core_triple_is_identity_like() {
        let g = GraphSpec::from_indices(2, &[(0, 1), (1, 0)], &[0, 1]).unwrap();
        let ua = universal_arrow(&g, 2).unwrap();
        assert!(ua.core.triple.is_hilbert_bimodule_with_katsura());
        assert_eq!(ua.arrow.corr.phi().multiplicity_matrix(), vec![vec![1, 0], vec![0, 1]]);
    }
}
