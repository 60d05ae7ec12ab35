//! Sparse frames and weighted fusion frames with prescribed spectra.
//!
//! A frame is stored column by column; every column is supported on one row
//! or on two adjacent rows. [`stc_construct`] builds a frame whose frame
//! operator is `diag(spectrum)` from a ready ordering of squared norms,
//! [`str_construct`] repairs orderings on the fly, and the [`fusion`] module
//! groups columns into weighted subspaces. [`verify`] checks results with
//! dense linear algebra that shares no code with the constructions.

pub mod blocks;
pub mod error;
pub mod fusion;
pub mod reorder;
pub mod search;
pub mod stc;
pub mod types;
pub mod verify;

pub use blocks::{block_admissible, make_block, Block2x2, BlockSpec};
pub use error::{Error, ErrorKind};
pub use fusion::{
    assemble_fusion, assemble_parts, canonicalize, check_window_conditions, construct_weighted_fusion,
    construct_weighted_fusion_with, nontight_equidim_fusion, periodic_ordering, spread_ordering,
    tight_equidim_fusion, CanonicalStep, Canonicalized, ConditionCheck, ConstructionReport, FusionConstruction,
    LabeledNormSequence, OrderingStrategy, WindowReport,
};
pub use reorder::{str_construct, str_preconditions, ReorderMode, ReorderOutcome, StrVerdict};
pub use search::{exists_ready_permutation, ReadyCertificate, SearchConfig};
pub use stc::{greedy_construct, readiness_partition, stc_construct, ReadinessFailure};
pub use types::{
    trace_gap, Column, FusionFrame, FusionProblem, NormSequence, ReadyPartition, SparseFrame, Spectrum,
    SubspaceSpec, Tolerances,
};
pub use verify::{audit, AuditExpectations, AuditTarget, VerificationReport};
