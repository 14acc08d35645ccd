//! Triples (A, E, J), covariant correspondences between them, their
//! 2-arrows, and instance checks of the bicategory coherence laws.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::corr::{
    associator, canonical_form, corr_multiplicity, find_iso, is_hilbert_bimodule, katsura_ideal, left_unitor, right_unitor,
    tensor, tensor_maps, verify_iso, CorrError, CorrIso, Correspondence, IsoReport, LawCheck, TensorProduct,
};
use crate::cstar::{AlgElement, FdCStarAlgebra, IdealSpec, StarHom};
use crate::hilbert::ModuleBasis;
use crate::linalg::{rank, Matrix, Scalar};
use crate::sparse::{LinMap, MapDiff};
use crate::witness_tolerance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BicatError {
    #[error("not an endo-correspondence")]
    NotEndo,
    #[error("ideal lives over a different algebra")]
    IdealMismatch,
    #[error("arrows do not compose: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Corr(#[from] CorrError),
}

/// An object `(A, E, J)`.
#[derive(Debug, Clone)]
pub struct CPTriple {
    pub corr: Correspondence,
    pub ideal: IdealSpec,
    bimodule_with_katsura: bool,
}

impl CPTriple {
    pub fn new(corr: Correspondence, ideal: IdealSpec) -> Result<Self, BicatError> {
        if corr.source() != corr.target() {
            return Err(BicatError::NotEndo);
        }
        if ideal.algebra() != corr.source() {
            return Err(BicatError::IdealMismatch);
        }
        let flag = is_hilbert_bimodule(&corr).is_some() && ideal == katsura_ideal(&corr);
        Ok(CPTriple { corr, ideal, bimodule_with_katsura: flag })
    }

    /// `(A, E, I_E)`.
    pub fn with_katsura(corr: Correspondence) -> Result<Self, BicatError> {
        let ideal = katsura_ideal(&corr);
        CPTriple::new(corr, ideal)
    }

    pub fn algebra(&self) -> &FdCStarAlgebra {
        self.corr.source()
    }

    pub fn is_hilbert_bimodule_with_katsura(&self) -> bool {
        self.bimodule_with_katsura
    }

    /// The ideal always acts by compacts in finite dimension.
    pub fn ideal_acts_by_compacts(&self) -> bool {
        true
    }
}

/// An arrow `(F, u)` with `u: E ⊗ F ⇒ F ⊗ G`.
#[derive(Debug, Clone)]
pub struct CovariantCorrespondence {
    pub source: CPTriple,
    pub target: CPTriple,
    pub corr: Correspondence,
    pub u: CorrIso,
    /// `E ⊗_A F`.
    pub ef: TensorProduct,
    /// `F ⊗_B G`.
    pub fg: TensorProduct,
}

impl CovariantCorrespondence {
    /// Wraps `u` given in the standard coordinates of `E⊗F` and `F⊗G`.
    pub fn new(source: CPTriple, target: CPTriple, corr: Correspondence, u: LinMap) -> Result<Self, BicatError> {
        if corr.source() != source.algebra() || corr.target() != target.algebra() {
            return Err(BicatError::Mismatch("correspondence endpoints".into()));
        }
        let ef = tensor(&source.corr, &corr)?;
        let fg = tensor(&corr, &target.corr)?;
        if u.cols() != ef.product.dim() || u.rows() != fg.product.dim() {
            return Err(BicatError::Mismatch(format!(
                "u must map dimension {} to {}, got {}x{}",
                ef.product.dim(),
                fg.product.dim(),
                u.rows(),
                u.cols()
            )));
        }
        let u = CorrIso { domain: ef.product.clone(), codomain: fg.product.clone(), map: u };
        Ok(CovariantCorrespondence { source, target, corr, u, ef, fg })
    }

    /// Uses the frame-matching witness for `u`, when the multiplicities allow one.
    pub fn with_found_iso(source: CPTriple, target: CPTriple, corr: Correspondence) -> Result<Self, BicatError> {
        let ef = tensor(&source.corr, &corr)?;
        let fg = tensor(&corr, &target.corr)?;
        let u = find_iso(&ef.product, &fg.product).ok_or_else(|| BicatError::Mismatch("E⊗F and F⊗G are not isomorphic".into()))?;
        Ok(CovariantCorrespondence { source, target, corr, u, ef, fg })
    }

    /// `(A, u)` with `u = l_E^{-1} ∘ r_E`.
    pub fn identity(t: &CPTriple) -> Self {
        let a = Correspondence::identity(t.algebra());
        let ef = tensor(&t.corr, &a).expect("same algebra");
        let fg = tensor(&a, &t.corr).expect("same algebra");
        let map = left_unitor(&fg).adjoint().compose(&right_unitor(&ef));
        let u = CorrIso { domain: ef.product.clone(), codomain: fg.product.clone(), map };
        CovariantCorrespondence { source: t.clone(), target: t.clone(), corr: a, u, ef, fg }
    }

    /// Same arrow with `u` replaced, keeping the tensor data.
    pub fn with_u(&self, map: LinMap) -> Self {
        let mut out = self.clone();
        out.u.map = map;
        out
    }
}

#[derive(Debug, Clone)]
pub struct CovariantReport {
    pub u: IsoReport,
    pub proper: bool,
    pub containment: LawCheck,
    /// `J_A = 0` or `J_B` is all of B: the containment holds for free.
    pub containment_automatic: bool,
}

impl CovariantReport {
    pub fn is_valid(&self) -> bool {
        self.u.is_valid() && self.proper && self.containment.ok
    }
}

pub fn check_covariant(cc: &CovariantCorrespondence) -> CovariantReport {
    let u = verify_iso(&cc.u);
    let containment = ideal_containment(&cc.corr, &cc.source.ideal, &cc.target.ideal);
    let containment_automatic = cc.source.ideal.is_empty() || cc.target.ideal.is_full();
    CovariantReport { u, proper: true, containment, containment_automatic }
}

/// `J · F ⊆ F · J'` as a subspace inclusion.
pub fn ideal_containment(f: &Correspondence, j: &IdealSpec, j_target: &IdealSpec) -> LawCheck {
    let m = f.module();
    let p = f.left_matrix_of(&j.unit());
    let support = m.support_indices(j_target);
    let q = Matrix::from_fn(m.dim(), support.len(), |r, c| if support[c] == r { Scalar::one() } else { Scalar::zero() });
    let joined = Matrix::hstack(&[p.clone(), q.clone()]).expect("same row count");
    if rank(&joined) == rank(&q) {
        LawCheck::pass()
    } else {
        let col = (0..p.cols()).find(|&c| (0..m.dim()).any(|r| !support.contains(&r) && !p[(r, c)].is_zero())).unwrap_or(0);
        LawCheck::fail(format!("basis vector {col} of J·F leaves F·J'"))
    }
}

/// The three tensor products and the associator `(XY)Z → X(YZ)`.
#[derive(Debug, Clone)]
pub struct Bracketing {
    pub xy: TensorProduct,
    pub xy_z: TensorProduct,
    pub yz: TensorProduct,
    pub x_yz: TensorProduct,
    pub forward: LinMap,
}

pub fn bracketing(x: &Correspondence, y: &Correspondence, z: &Correspondence) -> Result<Bracketing, CorrError> {
    let xy = tensor(x, y)?;
    let xy_z = tensor(&xy.product, z)?;
    let yz = tensor(y, z)?;
    let x_yz = tensor(x, &yz.product)?;
    let forward = associator(&xy, &xy_z, &yz, &x_yz);
    Ok(Bracketing { xy, xy_z, yz, x_yz, forward })
}

impl Bracketing {
    pub fn iso(&self) -> CorrIso {
        CorrIso { domain: self.xy_z.product.clone(), codomain: self.x_yz.product.clone(), map: self.forward.clone() }
    }
}

/// `(F ⊗ F₁, u ∙ u₁)`.
pub fn compose_covariant(cc: &CovariantCorrespondence, cc1: &CovariantCorrespondence) -> Result<CovariantCorrespondence, BicatError> {
    if cc.target.corr != cc1.source.corr || cc.target.ideal != cc1.source.ideal {
        return Err(BicatError::Mismatch("middle triples differ".into()));
    }
    let (e, f, g) = (&cc.source.corr, &cc.corr, &cc.target.corr);
    let (f1, h) = (&cc1.corr, &cc1.target.corr);
    let a1 = bracketing(e, f, f1)?;
    let a2 = bracketing(f, g, f1)?;
    let a3 = bracketing(f, f1, h)?;
    let u_id = tensor_maps(&cc.u.map, &LinMap::identity(f1.dim()), &a1.xy_z, &a2.xy_z);
    let id_u1 = tensor_maps(&LinMap::identity(f.dim()), &cc1.u.map, &a2.x_yz, &a3.x_yz);
    let map = a3.forward.adjoint().compose(&id_u1).compose(&a2.forward).compose(&u_id).compose(&a1.forward.adjoint());
    let corr = a1.yz.product.clone();
    let fg = a3.xy_z.clone();
    let u = CorrIso { domain: a1.x_yz.product.clone(), codomain: fg.product.clone(), map };
    Ok(CovariantCorrespondence { source: cc.source.clone(), target: cc1.target.clone(), corr, u, ef: a1.x_yz, fg })
}

/// A 2-arrow `w: (F, u) ⇒ (F', u')`.
#[derive(Debug, Clone)]
pub struct CovariantIso {
    pub from: CovariantCorrespondence,
    pub to: CovariantCorrespondence,
    pub w: CorrIso,
}

impl CovariantIso {
    pub fn identity(cc: &CovariantCorrespondence) -> Self {
        CovariantIso { from: cc.clone(), to: cc.clone(), w: CorrIso::identity(&cc.corr) }
    }

    /// `u' ∘ (1_E ⊗ w) = (w ⊗ 1_G) ∘ u`, plus `w` itself being unitary.
    pub fn check(&self) -> LawCheck {
        let rep = verify_iso(&self.w);
        if !rep.is_valid() {
            return LawCheck::fail(rep.first_failure().unwrap_or_default());
        }
        let e = self.from.source.corr.dim();
        let g = self.from.target.corr.dim();
        let lhs = self.to.u.map.compose(&tensor_maps(&LinMap::identity(e), &self.w.map, &self.from.ef, &self.to.ef));
        let rhs = tensor_maps(&self.w.map, &LinMap::identity(g), &self.from.fg, &self.to.fg).compose(&self.from.u.map);
        law_from_diff(lhs.compare(&rhs, witness_tolerance()), "square")
    }
}

fn law_from_diff(d: MapDiff, what: &str) -> LawCheck {
    match d {
        MapDiff::Equal => LawCheck::pass(),
        MapDiff::Differs { column, defect } => LawCheck::fail(format!("{what} differs on basis vector {column}, defect {defect:.3e}")),
        MapDiff::Shape => LawCheck::fail(format!("{what}: shape mismatch")),
    }
}

/// Transports `cc` along an automorphism `w` of its correspondence.
pub fn conjugate_arrow(cc: &CovariantCorrespondence, w: &LinMap) -> CovariantIso {
    let e = cc.source.corr.dim();
    let g = cc.target.corr.dim();
    let w_g = tensor_maps(w, &LinMap::identity(g), &cc.fg, &cc.fg);
    let e_w_inv = tensor_maps(&LinMap::identity(e), &w.adjoint(), &cc.ef, &cc.ef);
    let to = cc.with_u(w_g.compose(&cc.u.map).compose(&e_w_inv));
    let w = CorrIso { domain: cc.corr.clone(), codomain: cc.corr.clone(), map: w.clone() };
    CovariantIso { from: cc.clone(), to, w }
}

pub fn vertical_compose(w0: &CovariantIso, w1: &CovariantIso) -> Result<CovariantIso, BicatError> {
    if w0.to.corr != w1.from.corr || w0.to.u.map != w1.from.u.map {
        return Err(BicatError::Mismatch("vertical composition endpoints".into()));
    }
    Ok(CovariantIso { from: w0.from.clone(), to: w1.to.clone(), w: w1.w.then_after(&w0.w) })
}

pub fn horizontal_compose(w: &CovariantIso, w1: &CovariantIso) -> Result<CovariantIso, BicatError> {
    let from = compose_covariant(&w.from, &w1.from)?;
    let to = compose_covariant(&w.to, &w1.to)?;
    let t_from = tensor(&w.from.corr, &w1.from.corr)?;
    let t_to = tensor(&w.to.corr, &w1.to.corr)?;
    let map = tensor_maps(&w.w.map, &w1.w.map, &t_from, &t_to);
    let iso = CorrIso { domain: from.corr.clone(), codomain: to.corr.clone(), map };
    Ok(CovariantIso { from, to, w: iso })
}

/// Outcome of one coherence diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceResult {
    pub name: String,
    pub ok: bool,
    pub exact: bool,
    pub counterexample: Option<String>,
}

impl CoherenceResult {
    pub fn from_law(name: &str, law: &LawCheck, exact: bool) -> Self {
        CoherenceResult { name: name.into(), ok: law.ok, exact, counterexample: law.detail.clone() }
    }

    pub fn from_diff(name: &str, lhs: &LinMap, rhs: &LinMap) -> Self {
        let exact = lhs.is_exact() && rhs.is_exact();
        match lhs.compare(rhs, witness_tolerance()) {
            MapDiff::Equal => CoherenceResult { name: name.into(), ok: true, exact, counterexample: None },
            MapDiff::Differs { column, defect } => CoherenceResult {
                name: name.into(),
                ok: false,
                exact,
                counterexample: Some(format!("basis vector {column}, defect {defect:.3e}")),
            },
            MapDiff::Shape => CoherenceResult { name: name.into(), ok: false, exact, counterexample: Some("shape mismatch".into()) },
        }
    }
}

/// Flips the sign of the first column; a negative control.
pub fn corrupt_map(m: &LinMap) -> LinMap {
    let mut d = vec![Scalar::one(); m.cols()];
    if let Some(x) = d.first_mut() {
        *x = -Scalar::one();
    }
    m.compose(&LinMap::from_dense(&Matrix::diagonal(&d)))
}

/// `((WX)Y)Z → W(X(YZ))` both ways round.
pub fn pentagon(
    w: &Correspondence,
    x: &Correspondence,
    y: &Correspondence,
    z: &Correspondence,
    corrupt: bool,
) -> Result<CoherenceResult, CorrError> {
    let wx_y_z = bracketing(&tensor(w, x)?.product, y, z)?; // ((WX)Y)Z → (WX)(YZ)
    let w_x_yz = bracketing(w, x, &wx_y_z.yz.product)?; // (WX)(YZ) → W(X(YZ))
    let mut long_first = wx_y_z.forward.clone();
    if corrupt {
        long_first = corrupt_map(&long_first);
    }
    let top = w_x_yz.forward.compose(&long_first);

    let wxy = bracketing(w, x, y)?; // (WX)Y → W(XY)
    let w_xy_z = bracketing(w, &wxy.yz.product, z)?; // (W(XY))Z → W((XY)Z)
    let xyz = bracketing(x, y, z)?; // (XY)Z → X(YZ)
    let step1 = tensor_maps(&wxy.forward, &LinMap::identity(z.dim()), &wx_y_z.xy_z, &w_xy_z.xy_z);
    let step3 = tensor_maps(&LinMap::identity(w.dim()), &xyz.forward, &w_xy_z.x_yz, &w_x_yz.x_yz);
    let bottom = step3.compose(&w_xy_z.forward).compose(&step1);
    Ok(CoherenceResult::from_diff("pentagon", &top, &bottom))
}

/// `(1_X ⊗ l_Y) ∘ α = r_X ⊗ 1_Y` on `(X ⊗ B) ⊗ Y`.
pub fn triangle(x: &Correspondence, y: &Correspondence, corrupt: bool) -> Result<CoherenceResult, CorrError> {
    let unit = Correspondence::identity(x.target());
    let br = bracketing(x, &unit, y)?;
    let xy = tensor(x, y)?;
    let mut alpha = br.forward.clone();
    if corrupt {
        alpha = corrupt_map(&alpha);
    }
    let lhs = tensor_maps(&LinMap::identity(x.dim()), &left_unitor(&br.yz), &br.x_yz, &xy).compose(&alpha);
    let rhs = tensor_maps(&right_unitor(&br.xy), &LinMap::identity(y.dim()), &br.xy_z, &xy);
    Ok(CoherenceResult::from_diff("triangle", &lhs, &rhs))
}

/// Naturality of the associator under automorphisms of the three factors.
pub fn associator_naturality(
    x: &Correspondence,
    y: &Correspondence,
    z: &Correspondence,
    f: &LinMap,
    g: &LinMap,
    h: &LinMap,
) -> Result<CoherenceResult, CorrError> {
    let br = bracketing(x, y, z)?;
    let fg = tensor_maps(f, g, &br.xy, &br.xy);
    let fg_h = tensor_maps(&fg, h, &br.xy_z, &br.xy_z);
    let gh = tensor_maps(g, h, &br.yz, &br.yz);
    let f_gh = tensor_maps(f, &gh, &br.x_yz, &br.x_yz);
    Ok(CoherenceResult::from_diff("associator naturality", &br.forward.compose(&fg_h), &f_gh.compose(&br.forward)))
}

/// `(w₁'·w₁) ∙ (w₀'·w₀) = (w₁' ∙ w₀') · (w₁ ∙ w₀)` for automorphisms of `F₀: A ⤳ B`, `F₁: B ⤳ C`.
pub fn interchange(f0: &Correspondence, f1: &Correspondence, w0: &LinMap, w0p: &LinMap, w1: &LinMap, w1p: &LinMap) -> Result<CoherenceResult, CorrError> {
    let t = tensor(f0, f1)?;
    let lhs = tensor_maps(&w0p.compose(w0), &w1p.compose(w1), &t, &t);
    let rhs = tensor_maps(w0p, w1p, &t, &t).compose(&tensor_maps(w0, w1, &t, &t));
    Ok(CoherenceResult::from_diff("interchange", &lhs, &rhs))
}

/// An automorphism of `E` acting by the given unitaries on the multiplicity spaces.
///
/// `blocks[i][j]` is a `c_ij × c_ij` unitary; the result is transported
/// through the canonical frame of `E`.
pub fn multiplicity_automorphism(e: &Correspondence, blocks: &[Vec<Matrix>]) -> LinMap {
    let c = corr_multiplicity(e).0;
    let (canon, frame) = canonical_form(e);
    let a = e.source();
    let m = canon.module();
    let mut d = Matrix::zeros(m.dim(), m.dim());
    for j in 0..m.base().num_blocks() {
        let mut row_off = 0;
        for i in 0..a.num_blocks() {
            let n = a.block_size(i);
            let v = &blocks[i][j];
            for k in 0..c[i][j] {
                for k2 in 0..c[i][j] {
                    let x = &v[(k2, k)];
                    if x.is_zero() {
                        continue;
                    }
                    for r in 0..n {
                        for col in 0..m.base().block_size(j) {
                            let from = m.position(ModuleBasis { block: j, row: row_off + k * n + r, col });
                            let to = m.position(ModuleBasis { block: j, row: row_off + k2 * n + r, col });
                            d[(to, from)] = x.clone();
                        }
                    }
                }
            }
            row_off += c[i][j] * n;
        }
    }
    frame.adjoint().compose(&LinMap::from_dense(&d)).compose(&frame)
}

/// A unitary in ℚ(i): permutation, phases in {±1, ±i}, and one layer of
/// disjoint Pythagorean rotations.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    const TRIPLES: [(i64, i64, i64); 3] = [(3, 4, 5), (5, 12, 13), (8, 15, 17)];
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let phases = [Scalar::one(), -Scalar::one(), Scalar::i(), -Scalar::i()];
    let p = Matrix::from_fn(n, n, |r, c| if perm[c] == r { phases[rng.gen_range(0..4)].clone() } else { Scalar::zero() });
    let mut g = Matrix::identity(n);
    let mut k = 0;
    while k + 1 < n {
        if rng.gen_bool(0.6) {
            let (a, b, h) = TRIPLES[rng.gen_range(0..TRIPLES.len())];
            let (cs, sn) = (Scalar::frac(a, h), Scalar::frac(b, h));
            g[(k, k)] = cs.clone();
            g[(k + 1, k + 1)] = cs;
            g[(k, k + 1)] = -sn.clone();
            g[(k + 1, k)] = sn;
        }
        k += 2;
    }
    p.mul(&g)
}

/// `E` with its left action conjugated by unitaries on each module block.
pub fn twist(e: &Correspondence, unitaries: &[Matrix]) -> Result<Correspondence, CorrError> {
    let m = e.module();
    let k = m.compacts();
    let blocks = m.compacts_blocks();
    let images = e
        .source()
        .units()
        .into_iter()
        .map(|u| {
            let img = e.phi().image_of_unit(u);
            let parts = blocks.iter().enumerate().map(|(kb, &j)| unitaries[j].mul(img.block(kb)).mul(&unitaries[j].adjoint())).collect();
            AlgElement::from_blocks(&k, parts).expect("shapes")
        })
        .collect();
    let phi = StarHom::from_images(e.source().clone(), k, images)?;
    Correspondence::new(e.source().clone(), m.clone(), phi)
}

/// Module dimension bound for generated correspondences.
pub const RANDOM_MODULE_DIM: usize = 6;

pub fn random_algebra<R: Rng>(rng: &mut R) -> FdCStarAlgebra {
    let k = rng.gen_range(1..=3);
    let blocks = (0..k).map(|_| *[1, 1, 2, 3].choose(rng).expect("nonempty")).collect();
    FdCStarAlgebra::new(blocks).expect("positive sizes")
}

/// A nonzero correspondence `A ⤳ B` with module dimension at most
/// [`RANDOM_MODULE_DIM`], left action twisted by a random rational unitary.
/// `None` when no nonzero correspondence fits the bound.
pub fn random_correspondence<R: Rng>(a: &FdCStarAlgebra, b: &FdCStarAlgebra, rng: &mut R) -> Option<Correspondence> {
    let smallest = a.blocks().iter().flat_map(|n| b.blocks().iter().map(move |m| n * m)).min()?;
    if smallest > RANDOM_MODULE_DIM {
        return None;
    }
    loop {
        let c: Vec<Vec<usize>> =
            (0..a.num_blocks()).map(|_| (0..b.num_blocks()).map(|_| *[0, 1, 1, 2].choose(rng).expect("nonempty")).collect()).collect();
        let mult: Vec<usize> = (0..b.num_blocks()).map(|j| (0..a.num_blocks()).map(|i| c[i][j] * a.block_size(i)).sum()).collect();
        let dim: usize = mult.iter().zip(b.blocks()).map(|(p, m)| p * m).sum();
        if dim == 0 || dim > RANDOM_MODULE_DIM {
            continue;
        }
        let e = Correspondence::canonical(a, b, &c).expect("valid multiplicities");
        let us: Vec<Matrix> = mult.iter().map(|&p| random_unitary(p, rng)).collect();
        return Some(twist(&e, &us).expect("twisted correspondence stays valid"));
    }
}

/// A random automorphism of `E` built from rational unitaries on its multiplicity spaces.
pub fn random_automorphism<R: Rng>(e: &Correspondence, rng: &mut R) -> LinMap {
    let c = corr_multiplicity(e).0;
    let blocks: Vec<Vec<Matrix>> = c.iter().map(|row| row.iter().map(|&k| random_unitary(k, rng)).collect()).collect();
    multiplicity_automorphism(e, &blocks)
}

/// `k` composable random correspondences whose total product is nonzero.
pub fn random_chain<R: Rng>(k: usize, rng: &mut R) -> Vec<Correspondence> {
    'retry: loop {
        let mut alg = random_algebra(rng);
        let mut chain = Vec::with_capacity(k);
        while chain.len() < k {
            let next = random_algebra(rng);
            if let Some(e) = random_correspondence(&alg, &next, rng) {
                chain.push(e);
                alg = next;
            }
        }
        let mut c = corr_multiplicity(&chain[0]);
        for e in &chain[1..] {
            c = c.compose(&corr_multiplicity(e));
        }
        if c.matrix().iter().flatten().all(|&x| x == 0) {
            continue 'retry;
        }
        return chain;
    }
}

/// Pentagon and triangle on one seeded sample.
pub fn coherence_sample<R: Rng>(rng: &mut R, corrupt: bool) -> Result<(CoherenceResult, CoherenceResult), CorrError> {
    let chain = random_chain(4, rng);
    let p = pentagon(&chain[0], &chain[1], &chain[2], &chain[3], corrupt)?;
    let t = triangle(&chain[0], &chain[1], corrupt)?;
    Ok((p, t))
}

/// Pentagon and triangle with identity correspondences only.
pub fn identity_coherence(a: &FdCStarAlgebra) -> Result<(CoherenceResult, CoherenceResult), CorrError> {
    let id = Correspondence::identity(a);
    Ok((pentagon(&id, &id, &id, &id, false)?, triangle(&id, &id, false)?))
}

/// Interchange on a seeded pair of composable correspondences with random automorphisms.
pub fn interchange_sample<R: Rng>(rng: &mut R) -> Result<CoherenceResult, CorrError> {
    let chain = random_chain(2, rng);
    let (f0, f1) = (&chain[0], &chain[1]);
    let w0 = random_automorphism(f0, rng);
    let w0p = random_automorphism(f0, rng);
    let w1 = random_automorphism(f1, rng);
    let w1p = random_automorphism(f1, rng);
    interchange(f0, f1, &w0, &w0p, &w1, &w1p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{graph_correspondence, GraphSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Correspondence {
        graph_correspondence(&GraphSpec::from_indices(n, edges, &[]).unwrap()).unwrap().corr
    }

    #[test]
    fn identity_arrow_is_covariant() {
        let e = graph(2, &[(0, 1), (1, 0), (0, 0)]);
        let t = CPTriple::with_katsura(e).unwrap();
        let id = CovariantCorrespondence::identity(&t);
        let rep = check_covariant(&id);
        assert!(rep.is_valid(), "{rep:?}");
        assert!(id.u.map.is_exact());
    }

    #[test]
    fn empty_ideal_makes_containment_automatic() {
        let e = graph(1, &[(0, 0), (0, 0)]);
        let a = e.source().clone();
        let t = CPTriple::new(e.clone(), IdealSpec::empty(&a)).unwrap();
        let cc = CovariantCorrespondence::with_found_iso(t.clone(), t, e).unwrap();
        let rep = check_covariant(&cc);
        assert!(rep.containment_automatic && rep.is_valid());
    }

    #[test]
    fn pentagon_triangle_and_corruption() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let (p, t) = coherence_sample(&mut rng, false).unwrap();
            assert!(p.ok && t.ok && p.exact && t.exact, "{p:?} {t:?}");
        }
        let (p, t) = coherence_sample(&mut rng, true).unwrap();
        assert!(!p.ok && !t.ok);
        assert!(p.counterexample.is_some());
    }

    #[test]
    fn interchange_and_naturality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            assert!(interchange_sample(&mut rng).unwrap().ok);
        }
        let ch = random_chain(3, &mut rng);
        let (f, g, h) = (random_automorphism(&ch[0], &mut rng), random_automorphism(&ch[1], &mut rng), random_automorphism(&ch[2], &mut rng));
        assert!(associator_naturality(&ch[0], &ch[1], &ch[2], &f, &g, &h).unwrap().ok);
    }

    #[test]
    fn random_automorphisms_are_unitary_bimodule_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let ch = random_chain(1, &mut rng);
            let w = random_automorphism(&ch[0], &mut rng);
            let iso = CorrIso { domain: ch[0].clone(), codomain: ch[0].clone(), map: w };
            assert!(verify_iso(&iso).is_valid());
        }
    }

    #[test]
    fn composition_with_identity_and_covariant_isos() {
        let e = graph(2, &[(0, 1), (1, 0)]);
        let t = CPTriple::with_katsura(e.clone()).unwrap();
        assert!(t.is_hilbert_bimodule_with_katsura());
        let cc = CovariantCorrespondence::with_found_iso(t.clone(), t.clone(), e.clone()).unwrap();
        assert!(check_covariant(&cc).is_valid());
        let id = CovariantCorrespondence::identity(&t);
        let comp = compose_covariant(&cc, &id).unwrap();
        assert!(check_covariant(&comp).is_valid());
        assert_eq!(corr_multiplicity(&comp.corr), corr_multiplicity(&cc.corr));
        let comp2 = compose_covariant(&cc, &cc).unwrap();
        assert!(check_covariant(&comp2).is_valid());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_automorphism(&cc.corr, &mut rng);
        let sq = conjugate_arrow(&cc, &w);
        assert!(sq.check().ok);
        let sq2 = conjugate_arrow(&sq.to, &random_automorphism(&cc.corr, &mut rng));
        let v = vertical_compose(&sq, &sq2).unwrap();
        assert!(v.check().ok);
        let h = horizontal_compose(&sq, &CovariantIso::identity(&cc)).unwrap();
        assert!(h.check().ok);
        assert!(check_covariant(&h.to).is_valid());
    }
}
