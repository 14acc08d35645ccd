//! Named graphs and hand-built arrows used by tests, the CLI and the bindings.

use std::collections::BTreeMap;

use crate::bicat::{CPTriple, CovariantCorrespondence};
use crate::corr::{tensor, left_unitor, right_unitor, Correspondence, GraphSpec};
use crate::linalg::Matrix;
use crate::sparse::LinMap;

use super::fibers::graph_triple;
use super::rep::{Representation, RepresentationReport};
use super::stage::core_stage;
use super::PimsnerError;

pub fn cycle(n: usize, relative: &[usize]) -> GraphSpec {
    let edges: Vec<(usize, usize)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    GraphSpec::from_indices(n, &edges, relative).expect("cycle is a valid graph")
}

/// One vertex with `n` loops.
pub fn cuntz(n: usize, relative: &[usize]) -> GraphSpec {
    GraphSpec::from_indices(1, &vec![(0, 0); n], relative).expect("valid graph")
}

/// The cycle triple with its Katsura ideal, a Hilbert bimodule triple.
pub fn cycle_triple(n: usize) -> CPTriple {
    let all: Vec<usize> = (0..n).collect();
    graph_triple(&cycle(n, &all)).expect("cycle triple")
}

/// An arrow from a graph triple into a cycle triple: `F` has multiplicity
/// matrix `c` and `u` is the frame-matching isomorphism.
pub fn arrow_into_cycle(g: &GraphSpec, n: usize, c: &[Vec<usize>]) -> Result<CovariantCorrespondence, PimsnerError> {
    let source = graph_triple(g)?;
    let target = cycle_triple(n);
    let f = Correspondence::canonical(source.algebra(), target.algebra(), c)?;
    Ok(CovariantCorrespondence::with_found_iso(source, target, f)?)
}

/// A hand-built arrow with its source graph.
#[derive(Debug, Clone)]
pub struct SampleArrow {
    pub name: String,
    pub graph: GraphSpec,
    pub arrow: CovariantCorrespondence,
}

/// Arrows from graph triples into cycle triples covering identities,
/// rotations, a non-bimodule source and a source with a sink-free source vertex.
pub fn sample_arrows() -> Vec<SampleArrow> {
    let mut out = Vec::new();
    let mut push = |name: &str, g: GraphSpec, n: usize, c: Vec<Vec<usize>>| {
        let arrow = arrow_into_cycle(&g, n, &c).expect("sample arrow is valid");
        out.push(SampleArrow { name: name.into(), graph: g, arrow });
    };
    push("two-cycle identity", cycle(2, &[0, 1]), 2, vec![vec![1, 0], vec![0, 1]]);
    push("two-cycle swap", cycle(2, &[0, 1]), 2, vec![vec![0, 1], vec![1, 0]]);
    push("three-cycle identity", cycle(3, &[0, 1, 2]), 3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    push("three-cycle rotation", cycle(3, &[0, 1, 2]), 3, vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
    let loop_and_edge = GraphSpec::from_indices(2, &[(0, 0), (0, 1)], &[0, 1]).expect("valid graph");
    push("loop and edge onto two-cycle", loop_and_edge, 2, vec![vec![1, 1], vec![1, 1]]);
    let fan = GraphSpec::from_indices(2, &[(0, 0), (1, 0)], &[0]).expect("valid graph");
    push("loop with source onto three-cycle", fan, 3, vec![vec![1, 1, 1], vec![0, 0, 0]]);
    out
}

/// One loop included into two loops, with `F = A` and `u` the inclusion
/// `E ⊗ A ≅ E ↪ G ≅ A ⊗ G`: isometric but not unitary.
pub fn isometry_counterexample() -> CovariantCorrespondence {
    let source = graph_triple(&cuntz(1, &[0])).expect("one loop");
    let target = graph_triple(&cuntz(2, &[0])).expect("two loops");
    let f = Correspondence::identity(source.algebra());
    let ef = tensor(&source.corr, &f).expect("same algebra");
    let fg = tensor(&f, &target.corr).expect("same algebra");
    let inclusion = LinMap::from_dense(&Matrix::from_ints(&[&[1], &[0]]));
    let u = left_unitor(&fg).adjoint().compose(&inclusion).compose(&right_unitor(&ef));
    CovariantCorrespondence::new(source, target, f, u).expect("dimensions match")
}

/// The covariant representation of the two-loop stage, restricted to the
/// first loop: covariance for the single loop would need `p = θ_{1,1}`, which
/// fails because the second loop also contributes to `p`.
pub fn incompatible_covariance(level: usize) -> Result<RepresentationReport, PimsnerError> {
    let big = core_stage(&cuntz(2, &[0]), level)?;
    let rep = Representation::stage(&big);
    let small = cuntz(1, &[0]);
    let compact: BTreeMap<(usize, usize), _> = [((0, 0), rep.compact[&(0, 0)].clone())].into_iter().collect();
    let pulled = Representation { name: "two-loop stage on one loop".into(), graph: small.clone(), compact, ..rep };
    Ok(pulled.check(small.relative()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicat::check_covariant;
    use crate::corr::verify_iso;

    #[test]
    fn isometric_inclusion_is_rejected() {
        let cc = isometry_counterexample();
        let r = verify_iso(&cc.u);
        assert!(r.left_linear.ok && r.right_linear.ok && r.isometric.ok);
        assert!(!r.surjective.ok);
        assert!(!check_covariant(&cc).is_valid());
    }

    #[test]
    fn restricted_representation_is_not_covariant() {
        let r = incompatible_covariance(2).unwrap();
        assert!(r.laws_hold());
        assert!(!r.identity_criterion && !r.subspace_criterion);
    }
}
