//! The `#` and `♭` transforms between arrows out of a graph triple and arrows
//! out of its core triple, for targets that are Hilbert bimodules with their
//! Katsura ideal.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bicat::{
    bracketing, check_covariant, compose_covariant, conjugate_arrow, corrupt_map, random_automorphism, CoherenceResult,
    CovariantCorrespondence, CovariantIso, CovariantReport,
};
use crate::corr::{graph_correspondence, katsura_ideal, left_unitor, tensor, tensor_maps, CorrIso, Correspondence, GraphSpec, LawCheck, TensorProduct};
use crate::cstar::{AlgElement, StarHom, UnitIndex};
use crate::hilbert::{rank_one, ModuleOperator};
use crate::linalg::{solve, Matrix, Scalar, Vector};
use crate::sparse::{LinMap, SparseEchelon, SparseMatrix};

use super::fibers::{core_triple, graph_triple, stage_module, universal_arrow_from, CoreTriple};
use super::paths::{Monomial, Path};
use super::PimsnerError;

/// `u⁽ᵏ⁾: E^{⊗k} ⊗ F ≅ F ⊗ G^{⊗k}` for `k ≤ top`, with the tensor data
/// needed to evaluate it.
struct Transport {
    e: Correspondence,
    f: Correspondence,
    e_pow: Vec<Correspondence>,
    g_pow: Vec<Correspondence>,
    /// `E ⊗ E^{k−1}`, used to build path vectors.
    e_split: Vec<Option<TensorProduct>>,
    ef: Vec<TensorProduct>,
    fg: Vec<TensorProduct>,
    maps: Vec<LinMap>,
    edge_vectors: Vec<Vector>,
    paths: HashMap<Path, Vector>,
    /// Units of `𝕂(F)` supported on `katsura(G^k)` with their `w ⊗ 1` images.
    units: HashMap<usize, Vec<(UnitIndex, SparseMatrix<Scalar>)>>,
}

impl Transport {
    fn new(cc: &CovariantCorrespondence, g: &GraphSpec) -> Result<Self, PimsnerError> {
        let gc = graph_correspondence(g)?;
        let edge_vectors = (0..g.edges().len()).map(|e| gc.edge_vector(e)).collect();
        Ok(Transport {
            e: cc.source.corr.clone(),
            f: cc.corr.clone(),
            e_pow: vec![Correspondence::identity(cc.source.algebra()), cc.source.corr.clone()],
            g_pow: vec![Correspondence::identity(cc.target.algebra()), cc.target.corr.clone()],
            e_split: vec![None, None],
            ef: vec![cc.ef.clone(), cc.ef.clone()],
            fg: vec![cc.fg.clone(), cc.fg.clone()],
            maps: vec![LinMap::zeros(0, 0), cc.u.map.clone()],
            edge_vectors,
            paths: HashMap::new(),
            units: HashMap::new(),
        })
    }

    fn extend_to(&mut self, top: usize) -> Result<(), PimsnerError> {
        let (e, f) = (self.e.clone(), self.f.clone());
        let g = self.g_pow[1].clone();
        while self.maps.len() <= top {
            let k = self.maps.len();
            let a1 = bracketing(&e, &self.e_pow[k - 1], &f)?; // (E E^{k-1}) F → E (E^{k-1} F)
            let a2 = bracketing(&e, &f, &self.g_pow[k - 1])?; // (E F) G^{k-1} → E (F G^{k-1})
            let a3 = bracketing(&f, &g, &self.g_pow[k - 1])?; // (F G) G^{k-1} → F (G G^{k-1})
            let inner = tensor_maps(&LinMap::identity(e.dim()), &self.maps[k - 1], &a1.x_yz, &a2.x_yz);
            let outer = tensor_maps(&self.maps[1], &LinMap::identity(self.g_pow[k - 1].dim()), &a2.xy_z, &a3.xy_z);
            let map = a3.forward.compose(&outer).compose(&a2.forward.adjoint()).compose(&inner).compose(&a1.forward);
            self.e_pow.push(a1.xy.product.clone());
            self.g_pow.push(a3.yz.product.clone());
            self.e_split.push(Some(a1.xy));
            self.ef.push(a1.xy_z);
            self.fg.push(a3.x_yz);
            self.maps.push(map);
        }
        Ok(())
    }

    fn path_vector(&mut self, g: &GraphSpec, p: &Path) -> Result<Vector, PimsnerError> {
        if let Some(v) = self.paths.get(p) {
            return Ok(v.clone());
        }
        let (first, rest) = p.split_first().ok_or_else(|| PimsnerError::Internal("vertex path has no vector".into()))?;
        let v = if rest.is_empty() {
            self.edge_vectors[first].clone()
        } else {
            let tail = self.path_vector(g, &rest)?;
            let split = self.e_split[p.len()].as_ref().expect("tensor power built");
            split.elementary(&self.edge_vectors[first], &tail).ok_or_else(|| PimsnerError::Internal("inexact path tensor".into()))?
        };
        self.paths.insert(p.clone(), v.clone());
        Ok(v)
    }

    fn unit_images(&mut self, k: usize) -> Result<&[(UnitIndex, SparseMatrix<Scalar>)], PimsnerError> {
        if !self.units.contains_key(&k) {
            let fm = self.f.module();
            let kf = fm.compacts();
            let ideal = katsura_ideal(&self.g_pow[k]);
            let id_g = LinMap::identity(self.g_pow[k].dim());
            let mut out = Vec::new();
            for (kb, &j) in fm.compacts_blocks().iter().enumerate() {
                if !ideal.contains(j) {
                    continue;
                }
                for row in 0..kf.block_size(kb) {
                    for col in 0..kf.block_size(kb) {
                        let w = UnitIndex { block: kb, row, col };
                        let op = ModuleOperator::from_compact(fm, &AlgElement::unit(&kf, w)).to_matrix();
                        let lifted = tensor_maps(&LinMap::from_dense(&op), &id_g, &self.fg[k], &self.fg[k]);
                        let m = lifted.exact().ok_or_else(|| PimsnerError::Internal("inexact transport frames".into()))?.clone();
                        out.push((w, m));
                    }
                }
            }
            self.units.insert(k, out);
        }
        Ok(&self.units[&k])
    }

    /// `X ∈ 𝕂(F)` with `X ⊗ 1 = u⁽ᵏ⁾ (θ_{μ,ν} ⊗ 1) u⁽ᵏ⁾*`, supported where `G^k` acts faithfully.
    fn solve_monomial(&mut self, g: &GraphSpec, m: &Monomial) -> Result<AlgElement, PimsnerError> {
        let k = m.left.len();
        self.extend_to(k)?;
        let xi = self.path_vector(g, &m.left)?;
        let eta = self.path_vector(g, &m.right)?;
        let theta = rank_one(self.e_pow[k].module(), &xi, &eta).map_err(|err| PimsnerError::Internal(err.to_string()))?.to_matrix();
        let lifted = tensor_maps(&LinMap::from_dense(&theta), &LinMap::identity(self.f.dim()), &self.ef[k], &self.ef[k]);
        let target = self.maps[k].compose(&lifted).compose(&self.maps[k].adjoint());
        let target = target.exact().ok_or_else(|| PimsnerError::Internal("inexact transported monomial".into()))?.clone();
        let d = target.rows();
        let kf = self.f.module().compacts();
        let units = self.unit_images(k)?;

        let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
        let index = |pos: usize, rows: &mut BTreeMap<usize, usize>| {
            let n = rows.len();
            *rows.entry(pos).or_insert(n)
        };
        let mut entries: Vec<(usize, usize, Scalar)> = Vec::new();
        for (c, (_, w)) in units.iter().enumerate() {
            for col in 0..w.cols() {
                for (r, v) in w.column(col) {
                    let i = index(r * d + col, &mut rows);
                    entries.push((i, c, v.clone()));
                }
            }
        }
        let mut rhs_entries = Vec::new();
        for col in 0..target.cols() {
            for (r, v) in target.column(col) {
                let i = index(r * d + col, &mut rows);
                rhs_entries.push((i, v.clone()));
            }
        }
        let mut a = Matrix::zeros(rows.len(), units.len());
        for (i, c, v) in entries {
            a[(i, c)] = v;
        }
        let mut b = vec![Scalar::zero(); rows.len()];
        for (i, v) in rhs_entries {
            b[i] = v;
        }
        let x = solve(&a, &b)
            .map_err(|err| PimsnerError::Internal(err.to_string()))?
            .ok_or_else(|| PimsnerError::Internal(format!("{m} does not act through compacts on F")))?;
        let mut out = AlgElement::zero(&kf);
        for ((w, _), c) in units.iter().zip(&x) {
            if !c.is_zero() {
                out = out.add(&AlgElement::unit(&kf, *w).scale(c));
            }
        }
        Ok(out)
    }
}

/// The induced action of `F_N` on `F`, one image per stage matrix unit.
fn stage_action(t: &mut Transport, g: &GraphSpec, core: &CoreTriple, cache: &mut HashMap<Monomial, AlgElement>) -> Result<Vec<AlgElement>, PimsnerError> {
    let kf = t.f.module().compacts();
    let mut images = Vec::with_capacity(core.algebra().dim());
    for u in core.algebra().units() {
        let mut img = AlgElement::zero(&kf);
        for (m, c) in core.stage.unit_expansion(u).terms() {
            img = img.add(&monomial_image(t, g, m, cache)?.scale(c));
        }
        images.push(img);
    }
    Ok(images)
}

fn monomial_image(t: &mut Transport, g: &GraphSpec, m: &Monomial, cache: &mut HashMap<Monomial, AlgElement>) -> Result<AlgElement, PimsnerError> {
    if let Some(x) = cache.get(m) {
        return Ok(x.clone());
    }
    let x = if m.left.is_empty() {
        t.f.phi().image_of_unit(UnitIndex { block: m.left.base, row: 0, col: 0 }).clone()
    } else {
        t.solve_monomial(g, m)?
    };
    cache.insert(m.clone(), x.clone());
    Ok(x)
}

fn span_rank(images: &[AlgElement]) -> usize {
    let mut ech = SparseEchelon::new();
    for x in images {
        let v = x.coords().into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        ech.insert(v);
    }
    ech.rank()
}

/// `F` viewed as an arrow out of the core triple.
#[derive(Debug, Clone)]
pub struct Sharp {
    pub level: usize,
    pub core: CoreTriple,
    pub action: StarHom,
    pub arrow: CovariantCorrespondence,
    pub report: CovariantReport,
    /// `u^#` through the fiber isomorphism against the multiplication formula.
    pub formulas_agree: CoherenceResult,
    /// `φ_F(p_v) = Σ_{r(e)=v} ψ(t_e t_e^*)` for `v ∈ J`.
    pub covariance: LawCheck,
    /// Rank of the action's image at this stage and at the next.
    pub image_ranks: (usize, usize),
}

impl Sharp {
    pub fn is_valid(&self) -> bool {
        self.report.is_valid() && self.formulas_agree.ok && self.covariance.ok
    }
}

fn check_source(g: &GraphSpec, cc: &CovariantCorrespondence) -> Result<(), PimsnerError> {
    let expected = graph_triple(g)?;
    if cc.source.corr != expected.corr {
        return Err(PimsnerError::SourceMismatch("source correspondence is not the graph correspondence".into()));
    }
    if cc.source.ideal != expected.ideal {
        return Err(PimsnerError::SourceMismatch("source ideal differs from the graph's relative set".into()));
    }
    Ok(())
}

pub fn sharp(g: &GraphSpec, cc: &CovariantCorrespondence, n: usize) -> Result<Sharp, PimsnerError> {
    let core = core_triple(g, n)?;
    sharp_with(g, cc, core)
}

/// `(F^#, u^#)` into the same target, using an already computed core triple.
pub fn sharp_with(g: &GraphSpec, cc: &CovariantCorrespondence, core: CoreTriple) -> Result<Sharp, PimsnerError> {
    if !cc.target.is_hilbert_bimodule_with_katsura() {
        return Err(PimsnerError::TargetNotBimodule);
    }
    check_source(g, cc)?;
    let n = core.stage.level();
    let f = &cc.corr;
    let mut t = Transport::new(cc, g)?;
    let mut cache = HashMap::new();
    let images = stage_action(&mut t, g, &core, &mut cache)?;
    let next = core_triple(g, n + 1)?;
    let next_images = stage_action(&mut t, g, &next, &mut cache)?;
    let image_ranks = (span_rank(&images), span_rank(&next_images));
    if image_ranks.0 != image_ranks.1 {
        return Err(PimsnerError::StageInsufficient { level: n, required: n + 1 });
    }
    let kf = f.module().compacts();
    let action = StarHom::new(core.algebra().clone(), kf, images)
        .map_err(|err| PimsnerError::EmbeddingNotHomomorphism(format!("induced stage action: {err}")))?;
    if !action.is_unital() {
        return Err(PimsnerError::EmbeddingNotHomomorphism("induced stage action is not unital".into()));
    }
    let f_sharp = Correspondence::new(core.algebra().clone(), f.module().clone(), action.clone())?;

    let mut covariance = LawCheck::pass();
    for &v in g.relative() {
        let mut sum = AlgElement::zero(f.phi().target());
        for (e, &(_, r)) in g.edges().iter().enumerate() {
            if r == v {
                let p = Path::edge(g, e);
                sum = sum.add(&monomial_image(&mut t, g, &Monomial { left: p.clone(), right: p }, &mut cache)?);
            }
        }
        if &sum != f.phi().image_of_unit(UnitIndex { block: v, row: 0, col: 0 }) {
            covariance = LawCheck::fail(format!("vertex {} is not covariant on F", g.vertices()[v]));
            break;
        }
    }

    // u^# = u ∘ τ_{EF} ∘ (1_E ⊗ ψ) ∘ (σ_{EΥ} ⊗ 1_F) ∘ σ_{O¹F}
    let o1 = &core.fiber.corr;
    let t_of = tensor(o1, &f_sharp)?;
    let t_ey = &core.fiber.tensor;
    let dy = core.algebra().dim();
    let df = f.dim();
    let ops: Vec<Matrix> = core.algebra().units().iter().map(|&w| f.module().operator_matrix(action.image_of_unit(w))).collect();
    let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); dy * df];
    for (y, op) in ops.iter().enumerate() {
        for x in 0..df {
            cols[y * df + x] = (0..df).filter(|&r| !op[(r, x)].is_zero()).map(|r| (r, op[(r, x)].clone())).collect();
        }
    }
    let mult = LinMap::Exact(SparseMatrix::from_columns(df, cols));
    let e = &cc.source.corr;
    let via_fibers = cc
        .u
        .map
        .compose(&cc.ef.tau)
        .compose(&LinMap::identity(e.dim()).kron(&mult))
        .compose(&t_ey.sigma.kron(&LinMap::identity(df)))
        .compose(&t_of.sigma);
    // t(ξ)⊗η ↦ u(ξ⊗η): rebracket, multiply in the middle, apply u
    let br = bracketing(e, &stage_module(&core.stage)?, &f_sharp)?;
    let l = left_unitor(&br.yz);
    let via_product = cc.u.map.compose(&tensor_maps(&LinMap::identity(e.dim()), &l, &br.x_yz, &cc.ef)).compose(&br.forward);
    let formulas_agree = CoherenceResult::from_diff("u# formulas", &via_fibers, &via_product);

    let arrow = CovariantCorrespondence::new(core.triple.clone(), cc.target.clone(), f_sharp, via_fibers)?;
    let report = check_covariant(&arrow);
    Ok(Sharp { level: n, core, action, arrow, report, formulas_agree, covariance, image_ranks })
}

/// An arrow out of the graph triple recovered from one out of its core triple.
#[derive(Debug, Clone)]
pub struct Flat {
    pub arrow: CovariantCorrespondence,
    pub report: CovariantReport,
}

/// `(F^♭, u^♭)`: `A` acts through the stage map and `u^♭ = u ∘ c^*` with
/// `c: (E ⊗ F_N) ⊗ F ≅ E ⊗ F` the fiber isomorphism.
pub fn flat(g: &GraphSpec, core: &CoreTriple, cc: &CovariantCorrespondence) -> Result<Flat, PimsnerError> {
    if cc.source.corr != core.triple.corr || cc.source.ideal != core.triple.ideal {
        return Err(PimsnerError::SourceMismatch("arrow does not start at the core triple".into()));
    }
    let source = graph_triple(g)?;
    let f_flat = cc.corr.restrict_left(core.stage.stage_map())?;
    let br = bracketing(&source.corr, &stage_module(&core.stage)?, &cc.corr)?;
    let l = left_unitor(&br.yz);
    let ef = tensor(&source.corr, &f_flat)?;
    let c = tensor_maps(&LinMap::identity(source.corr.dim()), &l, &br.x_yz, &ef).compose(&br.forward);
    let u = cc.u.map.compose(&c.adjoint());
    let arrow = CovariantCorrespondence::new(source, cc.target.clone(), f_flat, u)?;
    let report = check_covariant(&arrow);
    Ok(Flat { arrow, report })
}

/// Round-trip verdicts for one arrow at one stage.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub level: usize,
    pub checks: Vec<CoherenceResult>,
}

impl RoundTrip {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn exact(&self) -> bool {
        self.checks.iter().all(|c| c.exact)
    }

    pub fn first_failure(&self) -> Option<&CoherenceResult> {
        self.checks.iter().find(|c| !c.ok)
    }
}

fn same_arrow(name: &str, a: &CovariantCorrespondence, b: &CovariantCorrespondence) -> Vec<CoherenceResult> {
    let corr = if a.corr == b.corr {
        LawCheck::pass()
    } else {
        LawCheck::fail("left actions or modules differ")
    };
    let mut out = vec![CoherenceResult::from_law(&format!("{name}: correspondence"), &corr, true)];
    if corr.ok {
        out.push(CoherenceResult::from_diff(&format!("{name}: u"), &a.u.map, &b.u.map));
    }
    out
}

fn iso_result(name: &str, w: &CovariantIso) -> CoherenceResult {
    CoherenceResult::from_law(name, &w.check(), w.w.map.is_exact() && w.from.u.map.is_exact() && w.to.u.map.is_exact())
}

/// Runs `#`, then `♭`, and checks both composites against the identity;
/// `corrupt` flips a sign in `u^#` before transporting it back.
pub fn roundtrip_check(g: &GraphSpec, cc: &CovariantCorrespondence, n: usize, corrupt: bool) -> Result<RoundTrip, PimsnerError> {
    let s = sharp(g, cc, n)?;
    let mut checks = Vec::new();
    let exact = s.arrow.u.map.is_exact();
    let rep = &s.report;
    let u_ok = if rep.u.is_valid() { LawCheck::pass() } else { LawCheck::fail(rep.u.first_failure().unwrap_or_default()) };
    checks.push(CoherenceResult::from_law("sharp: u# unitary bimodule map", &u_ok, rep.u.exact));
    checks.push(CoherenceResult::from_law("sharp: range ideal containment", &rep.containment, true));
    checks.push(CoherenceResult::from_law("sharp: covariance on J", &s.covariance, true));
    checks.push(s.formulas_agree.clone());

    let mut sharp_arrow = s.arrow.clone();
    if corrupt {
        sharp_arrow = sharp_arrow.with_u(corrupt_map(&sharp_arrow.u.map));
    }
    let back = flat(g, &s.core, &sharp_arrow)?;
    checks.extend(same_arrow("flat after sharp", &back.arrow, cc));

    let again = sharp_with(g, &back.arrow, s.core.clone());
    match again {
        Ok(again) => checks.extend(same_arrow("sharp after flat", &again.arrow, &sharp_arrow)),
        Err(err) => checks.push(CoherenceResult::from_law("sharp after flat: correspondence", &LawCheck::fail(err.to_string()), exact)),
    }

    // υ followed by (F^#, u^#) is isomorphic to (F, u) through multiplication
    let ua = universal_arrow_from(g, s.core.clone())?;
    let composite = compose_covariant(&ua.arrow, &sharp_arrow)?;
    let mult = CorrIso { domain: composite.corr.clone(), codomain: cc.corr.clone(), map: left_unitor(&tensor(&ua.arrow.corr, &sharp_arrow.corr)?) };
    checks.push(iso_result("factorization through the universal arrow", &CovariantIso { from: composite, to: cc.clone(), w: mult }));

    // # carries 2-arrows to 2-arrows
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let w = random_automorphism(&cc.corr, &mut rng);
    let moved = conjugate_arrow(cc, &w);
    match sharp_with(g, &moved.to, s.core.clone()) {
        Ok(s2) => {
            let iso = CovariantIso {
                from: sharp_arrow.clone(),
                to: s2.arrow.clone(),
                w: CorrIso { domain: sharp_arrow.corr.clone(), codomain: s2.arrow.corr.clone(), map: w },
            };
            checks.push(iso_result("sharp on 2-arrows", &iso));
        }
        Err(err) => checks.push(CoherenceResult::from_law("sharp on 2-arrows", &LawCheck::fail(err.to_string()), exact)),
    }
    Ok(RoundTrip { level: n, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pimsner::samples::{cuntz, sample_arrows};

    #[test]
    fn sample_arrows_round_trip() {
        for s in sample_arrows() {
            let rt = roundtrip_check(&s.graph, &s.arrow, 2, false).unwrap();
            assert!(rt.passed(), "{}: {:?}", s.name, rt.first_failure());
            assert!(rt.exact(), "{}", s.name);
        }
    }

    #[test]
    fn corrupted_sharp_fails_round_trip() {
        let s = &sample_arrows()[4];
        let rt = roundtrip_check(&s.graph, &s.arrow, 2, true).unwrap();
        assert!(!rt.passed());
    }

    #[test]
    fn sharp_needs_a_bimodule_target() {
        let g = cuntz(2, &[0]);
        let t = graph_triple(&g).unwrap();
        let cc = CovariantCorrespondence::identity(&t);
        assert_eq!(sharp(&g, &cc, 1).unwrap_err(), PimsnerError::TargetNotBimodule);
    }
}
