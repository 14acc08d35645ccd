//! Fock truncations, gauge-core stages of graph correspondences, the
//! universal arrow into the core triple, and the reflector transforms.

pub mod fibers;
pub mod fock;
pub mod graded;
pub mod paths;
pub mod reflect;
pub mod rep;
pub mod samples;
pub mod stage;
pub mod suite;

use thiserror::Error;

use crate::bicat::BicatError;
use crate::corr::CorrError;
use crate::cstar::CstarError;

pub use fibers::{
    core_triple, core_triple_from, graph_triple, o1_stage, stage_module, universal_arrow, universal_arrow_from, CoreTriple, DegreeOne, O1Stage,
    UniversalArrow,
};
pub use fock::{oracle_dimension, semi_saturation, stage_monomials, FockTruncation, OracleSpan, SemiSaturation};
pub use graded::{cp_correspondence, lambda_associativity, lambda_checks, GradedArrow, GradedReport};
pub use paths::{paths_of_length, paths_with_source, spectral_component, MonoComb, Monomial, Path};
pub use reflect::{flat, roundtrip_check, sharp, sharp_with, Flat, RoundTrip, Sharp};
pub use rep::{Representation, RepresentationReport};
pub use samples::{arrow_into_cycle, cuntz, cycle, cycle_triple, incompatible_covariance, isometry_counterexample, sample_arrows, SampleArrow};
pub use suite::{path_count, random_graph, relative_sets, trichotomy, trichotomy_suite, Trichotomy};
pub use stage::{bratteli, core_embedding, core_stage, stage_embedding, BratteliDiagram, CoreStage, StageBlock, StageElement, StageEmbedding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PimsnerError {
    #[error("relative vertex {vertex} receives no edge; only subsets of the Katsura ideal are supported")]
    RelativeOutsideKatsura { vertex: String },
    #[error("oracle mismatch for {what}: combinatorial {combinatorial}, oracle {oracle}")]
    OracleMismatch { what: String, combinatorial: usize, oracle: usize },
    #[error("stage embedding is not a *-homomorphism: {0}")]
    EmbeddingNotHomomorphism(String),
    #[error("stage {level} too small; level {required} needed")]
    StageInsufficient { level: usize, required: usize },
    #[error("target triple is not a Hilbert bimodule with its Katsura ideal")]
    TargetNotBimodule,
    #[error("source triple does not match: {0}")]
    SourceMismatch(String),
    #[error(transparent)]
    Corr(#[from] CorrError),
    #[error(transparent)]
    Bicat(#[from] BicatError),
    #[error(transparent)]
    Cstar(#[from] CstarError),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}
