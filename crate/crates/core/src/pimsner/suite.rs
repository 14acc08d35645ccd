//! Graph suites: the three-way bimodule characterization, and seeded random
//! graphs small enough for stage computations.

use std::collections::BTreeSet;

use rand::Rng;

use crate::cstar::IdealSpec;
use crate::corr::{graph_correspondence, GraphSpec};

use super::fibers::graph_triple;
use super::paths::paths_of_length;
use super::samples::{cuntz, cycle};
use super::stage::core_stage;
use super::PimsnerError;

/// Three independently computed answers to "is the graph triple already
/// a Hilbert-bimodule triple".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trichotomy {
    /// `A → F_N` is an isomorphism for each tested `N`.
    pub stage_maps: Vec<bool>,
    /// `E` is a Hilbert bimodule and `J` is its Katsura ideal.
    pub bimodule: bool,
    /// `φ` restricted to `J` is a block bijection onto the compacts.
    pub restricted_action: bool,
}

impl Trichotomy {
    pub fn stage_iso(&self) -> bool {
        self.stage_maps.iter().all(|&b| b)
    }

    pub fn coincide(&self) -> bool {
        self.stage_maps.iter().all(|&b| b == self.bimodule) && self.bimodule == self.restricted_action
    }
}

pub fn trichotomy(g: &GraphSpec, max_level: usize) -> Result<Trichotomy, PimsnerError> {
    let stage_maps = (1..=max_level).map(|n| core_stage(g, n).map(|s| s.stage_map().is_block_bijection())).collect::<Result<_, _>>()?;
    let bimodule = graph_triple(g)?.is_hilbert_bimodule_with_katsura();
    let gc = graph_correspondence(g)?;
    let j = IdealSpec::new(gc.corr.source(), g.relative().iter().copied())?;
    let restricted_action = gc.corr.phi().restrict(&j).is_block_bijection();
    Ok(Trichotomy { stage_maps, bimodule, restricted_action })
}

/// Every subset of the receiving vertices, in order of size.
pub fn relative_sets(g: &GraphSpec) -> Vec<BTreeSet<usize>> {
    let r: Vec<usize> = g.receivers().into_iter().collect();
    let mut out: Vec<BTreeSet<usize>> = (0..1usize << r.len()).map(|mask| (0..r.len()).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).collect()).collect();
    out.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    out
}

/// Cycles, Cuntz graphs, sinks and sources, each with several relative sets.
pub fn trichotomy_suite() -> Vec<(String, GraphSpec)> {
    let edge = GraphSpec::from_indices(2, &[(0, 1)], &[]).expect("valid graph");
    let loop_and_edge = GraphSpec::from_indices(2, &[(0, 0), (0, 1)], &[]).expect("valid graph");
    let merge = GraphSpec::from_indices(3, &[(0, 2), (1, 2)], &[]).expect("valid graph");
    let split = GraphSpec::from_indices(3, &[(0, 1), (0, 2), (1, 1)], &[]).expect("valid graph");
    let bases = [
        ("two-cycle", cycle(2, &[])),
        ("three-cycle", cycle(3, &[])),
        ("two loops", cuntz(2, &[])),
        ("three loops", cuntz(3, &[])),
        ("edge into a sink", edge),
        ("loop with an edge to a sink", loop_and_edge),
        ("two sources into one vertex", merge),
        ("source feeding a loop and a sink", split),
    ];
    let mut out = Vec::new();
    for (name, g) in bases {
        let sets = relative_sets(&g);
        let full = sets.last().cloned().unwrap_or_default();
        let mut chosen: Vec<BTreeSet<usize>> = vec![BTreeSet::new(), full.clone()];
        if let Some(proper) = sets.iter().find(|s| !s.is_empty() && **s != full) {
            chosen.push(proper.clone());
        }
        chosen.dedup();
        for j in chosen {
            let label = format!("{name}, J = {:?}", j.iter().collect::<Vec<_>>());
            out.push((label, g.with_relative(j)));
        }
    }
    out
}

/// Number of paths of length at most `k`; bounds the Fock truncation used by the oracles.
pub fn path_count(g: &GraphSpec, k: usize) -> usize {
    (0..=k).map(|l| paths_of_length(g, l).len()).sum()
}

/// A seeded graph with at most `max_vertices` vertices and `max_edges` edges,
/// at least one edge, and at most `max_paths` paths of length `≤ depth`.
pub fn random_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize, depth: usize, max_paths: usize) -> GraphSpec {
    loop {
        let n = rng.gen_range(1..=max_vertices);
        let m = rng.gen_range(1..=max_edges);
        let edges: Vec<(usize, usize)> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let g = GraphSpec::from_indices(n, &edges, &[]).expect("indices in range");
        if path_count(&g, depth) <= max_paths {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trichotomy_coincides_on_suite() {
        let suite = trichotomy_suite();
        assert!(suite.len() >= 12);
        let mut yes = 0;
        for (name, g) in &suite {
            let t = trichotomy(g, 3).unwrap();
            assert!(t.coincide(), "{name}: {t:?}");
            yes += t.bimodule as usize;
        }
        assert!(yes > 0 && yes < suite.len());
    }

    #[test]
    fn random_graphs_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 4, 6, 6, 400);
            assert!(g.num_vertices() <= 4 && !g.edges().is_empty() && g.edges().len() <= 6);
            assert!(path_count(&g, 6) <= 400);
        }
    }
}
