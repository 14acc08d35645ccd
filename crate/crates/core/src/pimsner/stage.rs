//! Finite stages of the gauge core of a graph correspondence and their
//! Bratteli embeddings.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::corr::GraphSpec;
use crate::cstar::{AlgElement, FdCStarAlgebra, StarHom, UnitIndex};
use crate::linalg::Scalar;

use super::fock::oracle_dimension;
use super::paths::{paths_with_source, MonoComb, Monomial, Path};
use super::PimsnerError;

/// A sparse element of a stage algebra in matrix-unit coordinates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageElement(pub BTreeMap<UnitIndex, Scalar>);

impl StageElement {
    pub fn zero() -> Self {
        StageElement::default()
    }

    pub fn unit(u: UnitIndex) -> Self {
        StageElement(BTreeMap::from([(u, Scalar::one())]))
    }

    pub fn add_term(&mut self, u: UnitIndex, c: &Scalar) {
        let e = self.0.entry(u).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&u);
        }
    }

    pub fn add(&self, o: &StageElement) -> StageElement {
        let mut out = self.clone();
        for (u, c) in &o.0 {
            out.add_term(*u, c);
        }
        out
    }

    pub fn sub(&self, o: &StageElement) -> StageElement {
        self.add(&o.scale(&-Scalar::one()))
    }

    pub fn scale(&self, s: &Scalar) -> StageElement {
        if s.is_zero() {
            return StageElement::zero();
        }
        StageElement(self.0.iter().map(|(u, c)| (*u, c * s)).collect())
    }

    pub fn adjoint(&self) -> StageElement {
        StageElement(self.0.iter().map(|(u, c)| (UnitIndex { block: u.block, row: u.col, col: u.row }, c.conj())).collect())
    }

    pub fn mul(&self, o: &StageElement) -> StageElement {
        let mut by_row: HashMap<(usize, usize), Vec<(usize, &Scalar)>> = HashMap::new();
        for (u, c) in &o.0 {
            by_row.entry((u.block, u.row)).or_default().push((u.col, c));
        }
        let mut out = StageElement::zero();
        for (u, x) in &self.0 {
            if let Some(row) = by_row.get(&(u.block, u.col)) {
                for (col, y) in row {
                    out.add_term(UnitIndex { block: u.block, row: u.row, col: *col }, &(x * *y));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace_in_block(&self, block: usize) -> Scalar {
        let mut t = Scalar::zero();
        for (u, c) in self.0.range(UnitIndex { block, row: 0, col: 0 }..) {
            if u.block != block {
                break;
            }
            if u.row == u.col {
                t += c;
            }
        }
        t
    }

    pub fn to_alg(&self, alg: &FdCStarAlgebra) -> AlgElement {
        let mut coords = vec![Scalar::zero(); alg.dim()];
        for (u, c) in &self.0 {
            coords[alg.unit_position(*u)] = c.clone();
        }
        AlgElement::from_coords(alg, &coords).expect("coordinates match the algebra")
    }

    pub fn from_alg(alg: &FdCStarAlgebra, x: &AlgElement) -> StageElement {
        let coords = x.coords();
        StageElement(alg.units().into_iter().zip(coords).filter(|(_, c)| !c.is_zero()).collect())
    }
}

/// A block of a stage: matrix units indexed by pairs of paths of length
/// `depth` with source `vertex`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageBlock {
    pub depth: usize,
    pub vertex: usize,
    /// Top blocks carry the monomials of maximal depth; lower blocks carry
    /// the gap projections at vertices outside J.
    pub top: bool,
    pub paths: Vec<Path>,
}

impl StageBlock {
    pub fn size(&self) -> usize {
        self.paths.len()
    }
}

/// The stage `F_N`: span of the degree-zero monomials of depth `≤ N` in the
/// relative algebra.
#[derive(Debug, Clone)]
pub struct CoreStage {
    graph: GraphSpec,
    level: usize,
    blocks: Vec<StageBlock>,
    algebra: FdCStarAlgebra,
    slots: HashMap<Path, (usize, usize)>,
    stage_map: StarHom,
    oracle_dim: usize,
}

/// Rejects relative sets containing vertices that receive no edge.
pub fn check_relative(g: &GraphSpec) -> Result<(), PimsnerError> {
    let receivers = g.receivers();
    match g.relative().iter().find(|v| !receivers.contains(v)) {
        Some(&v) => Err(PimsnerError::RelativeOutsideKatsura { vertex: g.vertices()[v].clone() }),
        None => Ok(()),
    }
}

/// Stage `N` with its oracle cross-check.
pub fn core_stage(g: &GraphSpec, n: usize) -> Result<CoreStage, PimsnerError> {
    let stage = CoreStage::combinatorial(g, n)?;
    let oracle = oracle_dimension(g, 0, n, n + 2);
    if oracle != stage.algebra.dim() {
        return Err(PimsnerError::OracleMismatch {
            what: format!("core stage {n}"),
            combinatorial: stage.algebra.dim(),
            oracle,
        });
    }
    Ok(CoreStage { oracle_dim: oracle, ..stage })
}

impl CoreStage {
    /// Block formula alone, without the oracle.
    pub fn combinatorial(g: &GraphSpec, n: usize) -> Result<CoreStage, PimsnerError> {
        check_relative(g)?;
        let mut blocks = Vec::new();
        for k in 0..=n {
            for v in 0..g.num_vertices() {
                let top = k == n;
                if !top && g.relative().contains(&v) {
                    continue;
                }
                let paths = paths_with_source(g, v, k);
                if !paths.is_empty() {
                    blocks.push(StageBlock { depth: k, vertex: v, top, paths });
                }
            }
        }
        let algebra = FdCStarAlgebra::new(blocks.iter().map(StageBlock::size).collect())
            .map_err(|e| PimsnerError::Internal(format!("stage algebra: {e}")))?;
        let mut slots = HashMap::new();
        for (b, blk) in blocks.iter().enumerate() {
            for (i, p) in blk.paths.iter().enumerate() {
                slots.insert(p.clone(), (b, i));
            }
        }
        let a = FdCStarAlgebra::commutative(g.num_vertices());
        let mut stage = CoreStage {
            graph: g.clone(),
            level: n,
            blocks,
            algebra: algebra.clone(),
            slots,
            stage_map: StarHom::zero(&a, &algebra),
            oracle_dim: 0,
        };
        let images = (0..g.num_vertices())
            .map(|v| {
                let p = Path::vertex(v);
                stage.monomial_to_stage(&Monomial { left: p.clone(), right: p }).expect("depth zero").to_alg(&algebra)
            })
            .collect();
        stage.stage_map = StarHom::new(a, algebra, images).map_err(|e| PimsnerError::Internal(format!("stage map: {e}")))?;
        Ok(stage)
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn blocks(&self) -> &[StageBlock] {
        &self.blocks
    }

    pub fn algebra(&self) -> &FdCStarAlgebra {
        &self.algebra
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.algebra.blocks().to_vec()
    }

    /// Dimension reported by the Fock oracle; zero for unchecked stages.
    pub fn oracle_dim(&self) -> usize {
        self.oracle_dim
    }

    /// `A → F_N`, `p_v ↦ t_v t_v^*`.
    pub fn stage_map(&self) -> &StarHom {
        &self.stage_map
    }

    pub fn block_label(&self, b: usize) -> String {
        let blk = &self.blocks[b];
        let kind = if blk.top { "top" } else { "gap" };
        format!("{kind}({},{})", blk.depth, self.graph.vertices()[blk.vertex])
    }

    pub fn block_index(&self, depth: usize, vertex: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.depth == depth && b.vertex == vertex)
    }

    /// Image of `t_μ t_ν^*` for `|μ| = |ν| ≤ N`.
    pub fn monomial_to_stage(&self, m: &Monomial) -> Option<StageElement> {
        let k = m.left.len();
        if m.right.len() != k || k > self.level || m.left.base != m.right.base {
            return None;
        }
        let v = m.left.base;
        let mut out = StageElement::zero();
        if k == self.level || !self.graph.relative().contains(&v) {
            let (b, row) = *self.slots.get(&m.left)?;
            let (b2, col) = *self.slots.get(&m.right)?;
            debug_assert_eq!(b, b2);
            out.add_term(UnitIndex { block: b, row, col }, &Scalar::one());
        }
        if k < self.level {
            for (e, &(_, r)) in self.graph.edges().iter().enumerate() {
                if r != v {
                    continue;
                }
                let left = m.left.extend(&self.graph, e).expect("range matches");
                let right = m.right.extend(&self.graph, e).expect("range matches");
                out = out.add(&self.monomial_to_stage(&Monomial { left, right })?);
            }
        }
        Some(out)
    }

    /// Image of a combination of degree-zero monomials.
    pub fn comb_to_stage(&self, x: &MonoComb) -> Option<StageElement> {
        let mut out = StageElement::zero();
        for (m, c) in x.terms() {
            out = out.add(&self.monomial_to_stage(m)?.scale(c));
        }
        Some(out)
    }

    /// A matrix unit as a combination of Toeplitz monomials: `t_μ t_ν^*` for
    /// top blocks, `t_μ (p_v − Σ_{r(e)=v} t_e t_e^*) t_ν^*` for gap blocks.
    pub fn unit_expansion(&self, u: UnitIndex) -> MonoComb {
        let blk = &self.blocks[u.block];
        let mu = blk.paths[u.row].clone();
        let nu = blk.paths[u.col].clone();
        let mut out = MonoComb::single(Monomial { left: mu.clone(), right: nu.clone() });
        if !blk.top {
            for (e, &(_, r)) in self.graph.edges().iter().enumerate() {
                if r == blk.vertex {
                    let m = Monomial { left: mu.extend(&self.graph, e).expect("range"), right: nu.extend(&self.graph, e).expect("range") };
                    out.add_term(m, -Scalar::one());
                }
            }
        }
        out
    }
}

/// The embedding `F_N → F_{N+1}` computed on matrix units.
#[derive(Debug, Clone)]
pub struct StageEmbedding {
    pub images: Vec<StageElement>,
    pub multiplicity: Vec<Vec<usize>>,
}

/// Bratteli multiplicities of `F_N → F_{N+1}`, checked to be a unital
/// *-homomorphism compatible with the stage maps and against the block formula.
pub fn stage_embedding(from: &CoreStage, to: &CoreStage) -> Result<StageEmbedding, PimsnerError> {
    let alg = from.algebra();
    let images: Vec<StageElement> = alg
        .units()
        .into_iter()
        .map(|u| to.comb_to_stage(&from.unit_expansion(u)).ok_or_else(|| PimsnerError::Internal("unit outside next stage".into())))
        .collect::<Result<_, _>>()?;
    let at = |u: UnitIndex| &images[alg.unit_position(u)];
    let bad = |msg: String| PimsnerError::EmbeddingNotHomomorphism(msg);
    let mut block_units = Vec::new();
    for i in 0..alg.num_blocks() {
        let n = alg.block_size(i);
        let u = |r, c| UnitIndex { block: i, row: r, col: c };
        let h00 = at(u(0, 0));
        if &h00.adjoint() != h00 || &h00.mul(h00) != h00 {
            return Err(bad(format!("block {i}: image of e00 is not a projection")));
        }
        for a in 0..n {
            for b in 0..n {
                let p = at(u(a, 0)).adjoint().mul(at(u(b, 0)));
                let want = if a == b { h00.clone() } else { StageElement::zero() };
                if p != want {
                    return Err(bad(format!("block {i}: e{a}0* e{b}0 relation")));
                }
                if at(u(a, b)) != &at(u(a, 0)).mul(&at(u(b, 0)).adjoint()) {
                    return Err(bad(format!("block {i}: e{a}{b} = e{a}0 e{b}0*")));
                }
            }
        }
        let mut one = StageElement::zero();
        for a in 0..n {
            one = one.add(at(u(a, a)));
        }
        block_units.push(one);
    }
    let mut total = StageElement::zero();
    for (i, p) in block_units.iter().enumerate() {
        for (j, q) in block_units.iter().enumerate() {
            if i < j && !p.mul(q).is_zero() {
                return Err(bad(format!("blocks {i} and {j} do not map orthogonally")));
            }
        }
        total = total.add(p);
    }
    let one_to = StageElement::from_alg(to.algebra(), &AlgElement::one(to.algebra()));
    if total != one_to {
        return Err(bad("embedding is not unital".into()));
    }
    for v in 0..from.graph().num_vertices() {
        let x = StageElement::from_alg(alg, &from.stage_map().images()[v]);
        let mut y = StageElement::zero();
        for (u, c) in &x.0 {
            y = y.add(&at(*u).scale(c));
        }
        if y != StageElement::from_alg(to.algebra(), &to.stage_map().images()[v]) {
            return Err(bad(format!("stage maps disagree at vertex {v}")));
        }
    }
    let multiplicity: Vec<Vec<usize>> = block_units
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (0..to.algebra().num_blocks())
                .map(|j| {
                    let t = p.trace_in_block(j);
                    let n = Scalar::from_int(alg.block_size(i) as i64);
                    (&t / &n).to_usize().expect("integral multiplicity")
                })
                .collect()
        })
        .collect();
    let formula = embedding_formula(from, to);
    if multiplicity != formula {
        return Err(PimsnerError::OracleMismatch {
            what: format!("embedding {} → {}", from.level(), from.level() + 1),
            combinatorial: formula.iter().flatten().sum(),
            oracle: multiplicity.iter().flatten().sum(),
        });
    }
    Ok(StageEmbedding { images, multiplicity })
}

/// Gap blocks map to themselves; a top block `(N,v)` maps to the gap block
/// `(N,v)` when `v ∉ J` and to `(N+1,w)` once per edge `w → v`.
pub fn embedding_formula(from: &CoreStage, to: &CoreStage) -> Vec<Vec<usize>> {
    let g = from.graph();
    from.blocks()
        .iter()
        .map(|b| {
            let mut row = vec![0usize; to.blocks().len()];
            if !b.top || !g.relative().contains(&b.vertex) {
                if let Some(j) = to.block_index(b.depth, b.vertex) {
                    row[j] += 1;
                }
            }
            if b.top {
                for &(s, r) in g.edges() {
                    if r == b.vertex {
                        if let Some(j) = to.block_index(b.depth + 1, s) {
                            row[j] += 1;
                        }
                    }
                }
            }
            row
        })
        .collect()
}

/// `core_embedding(G, N)`: multiplicities of `F_N → F_{N+1}`.
pub fn core_embedding(g: &GraphSpec, n: usize) -> Result<Vec<Vec<usize>>, PimsnerError> {
    let from = core_stage(g, n)?;
    let to = core_stage(g, n + 1)?;
    Ok(stage_embedding(&from, &to)?.multiplicity)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockInfo {
    pub label: String,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageInfo {
    pub level: usize,
    pub blocks: Vec<BlockInfo>,
    pub oracle_dim: usize,
}

/// Stages `0..=N` with their embeddings.
#[derive(Debug, Clone, Serialize)]
pub struct BratteliDiagram {
    pub stages: Vec<StageInfo>,
    pub embeddings: Vec<Vec<Vec<usize>>>,
    /// First level from which two consecutive embeddings are permutations.
    pub stable_from: Option<usize>,
}

fn is_permutation(m: &[Vec<usize>]) -> bool {
    let rows_ok = m.iter().all(|r| r.iter().sum::<usize>() == 1 && r.iter().all(|&x| x <= 1));
    let cols = m.first().map_or(0, Vec::len);
    let cols_ok = (0..cols).all(|j| m.iter().map(|r| r[j]).sum::<usize>() == 1);
    rows_ok && cols_ok
}

pub fn bratteli(g: &GraphSpec, n: usize) -> Result<BratteliDiagram, PimsnerError> {
    let stages: Vec<CoreStage> = (0..=n).map(|k| core_stage(g, k)).collect::<Result<_, _>>()?;
    let mut embeddings = Vec::new();
    for w in stages.windows(2) {
        embeddings.push(stage_embedding(&w[0], &w[1])?.multiplicity);
    }
    let stable_from = (0..embeddings.len().saturating_sub(1)).find(|&i| is_permutation(&embeddings[i]) && is_permutation(&embeddings[i + 1]));
    let stages = stages
        .iter()
        .map(|s| StageInfo {
            level: s.level(),
            blocks: (0..s.blocks().len()).map(|b| BlockInfo { label: s.block_label(b), size: s.blocks()[b].size() }).collect(),
            oracle_dim: s.oracle_dim(),
        })
        .collect();
    Ok(BratteliDiagram { stages, embeddings, stable_from })
}

impl BratteliDiagram {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph bratteli {\n  rankdir=TB;\n");
        for s in &self.stages {
            let _ = writeln!(out, "  subgraph level{} {{ rank=same;", s.level);
            for (b, blk) in s.blocks.iter().enumerate() {
                let _ = writeln!(out, "    n{}_{} [label=\"{}: {}\"];", s.level, b, blk.label, blk.size);
            }
            out.push_str("  }\n");
        }
        for (k, m) in self.embeddings.iter().enumerate() {
            for (i, row) in m.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    for _ in 0..c {
                        let _ = writeln!(out, "  n{}_{} -> n{}_{};", k, i, k + 1, j);
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o2(j: &[usize]) -> GraphSpec {
        GraphSpec::from_indices(1, &[(0, 0), (0, 0)], j).unwrap()
    }

    #[test]
    fn cuntz_stage_is_one_block() {
        let s = core_stage(&o2(&[0]), 2).unwrap();
        assert_eq!(s.block_sizes(), vec![4]);
        assert_eq!(s.oracle_dim(), 16);
        assert_eq!(core_embedding(&o2(&[0]), 2).unwrap(), vec![vec![2]]);
    }

    #[test]
    fn toeplitz_stage_is_staircase() {
        let s = core_stage(&o2(&[]), 2).unwrap();
        assert_eq!(s.block_sizes(), vec![1, 2, 4]);
        assert_eq!(s.oracle_dim(), 21);
        let m = core_embedding(&o2(&[]), 2).unwrap();
        assert_eq!(m, vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 2]]);
    }

    #[test]
    fn two_cycle_is_stable() {
        let g = GraphSpec::from_indices(2, &[(0, 1), (1, 0)], &[0, 1]).unwrap();
        for n in 0..4 {
            assert_eq!(core_stage(&g, n).unwrap().block_sizes(), vec![1, 1]);
        }
        let d = bratteli(&g, 3).unwrap();
        assert_eq!(d.stable_from, Some(0));
        assert!(d.to_dot().contains("->"));
    }

    #[test]
    fn relative_set_must_receive_edges() {
        let g = GraphSpec::from_indices(2, &[(0, 1)], &[0]).unwrap();
        assert!(matches!(core_stage(&g, 1), Err(PimsnerError::RelativeOutsideKatsura { .. })));
    }

    #[test]
    fn stage_elements_multiply_like_matrices() {
        let s = core_stage(&o2(&[]), 2).unwrap();
        let alg = s.algebra().clone();
        let x = s.monomial_to_stage(&Monomial { left: Path::vertex(0), right: Path::vertex(0) }).unwrap();
        assert_eq!(x.to_alg(&alg), AlgElement::one(&alg));
        let e = Path::edge(s.graph(), 0);
        let f = Path::edge(s.graph(), 1);
        let a = s.monomial_to_stage(&Monomial { left: e.clone(), right: f.clone() }).unwrap();
        let b = s.monomial_to_stage(&Monomial { left: f, right: e.clone() }).unwrap();
        let ee = s.monomial_to_stage(&Monomial { left: e.clone(), right: e }).unwrap();
        assert_eq!(a.mul(&b), ee);
        assert_eq!(a.mul(&b).to_alg(&alg), a.to_alg(&alg).mul(&b.to_alg(&alg)));
    }
}
