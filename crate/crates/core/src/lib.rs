//! Exact analysis of doubling measures on uniform Cantor sets.
//!
//! A uniform Cantor set `E(n, c)` is built from `[0, 1]` by splitting every
//! component of level `k - 1` into `n_k` equal closed pieces separated by
//! `n_k - 1` equal gaps of length `c_k` times the parent length. Measures on
//! `E` are given by probability vectors, and the crate decides whether they
//! are doubling, cross-checks the answer by brute force over balls, and builds
//! doubling extensions to `[0, 1]` where they exist.
//!
//! All arithmetic is exact.

pub mod cantor;
pub mod checker;
pub mod extension;
pub mod geometry;
pub mod mass;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod sequence;
pub mod uniformity;

pub use cantor::{CantorConfig, ConfigError, GapContext, LevelStats, ProductTail, TailRegime};
pub use checker::{
    check_corollary, check_theorem1, check_theorem2, finite_verification_horizon, CheckError,
    Condition, ConditionRecord, Corollary, DoublingVerdict, Horizon, Outcome, DEFAULT_BUDGET,
};
pub use extension::{
    build_extension, check_restriction, check_theorem3, extension_doubling_evidence, lp_membership,
    DoublingEvidence, ExtensionError, ExtensionOptions, ExtensionVerdict, LpReason, LpVerdict,
    Piece, PieceKind, PiecewiseMeasure, RestrictionEvidence,
};
pub use geometry::{
    adjacent_boundary_words, component_interval, gap_interval, Interval, Lattice, Word, WordError,
};
pub use mass::{ball_measure, interval_measure, MassModel, MeasureBounds};
pub use measure::{
    Automaton, MatchingSequence, MatchingTail, MeasureError, MeasureSpec, ProbVector, TableEntry,
    WordMeasureRule,
};
pub use oracle::{
    ball_ratio, classify_series, doubling_series, enumerate_balls, growth_classification,
    sup_doubling_ratio, Ball, BallEnumeration, BallRatio, Growth, GrowthReport, OracleError,
    OracleOptions, OracleReport, SeriesPoint, DEFAULT_BALL_BUDGET,
};
pub use rational::{parse_rational, Rational};
pub use sequence::{SequenceError, SequenceSpec, TailRule};
pub use uniformity::{min_uniform_constant, UniformityReport};
