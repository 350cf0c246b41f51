//! Adjunction systems of interval charts: validation, quotient-point
//! identity, and neighborhood tracing.

pub mod build;
pub mod qset;
pub mod system;
pub mod validate;

pub use build::{close_transitions, merge_pieces};
pub use qset::{basic_nbhd, saturate, QOpenSet, Tail};
pub use system::{AdjunctionSystem, AtlasError, Chart, MfdPoint, PieceRef, QuotientPoint, Transition};
pub use validate::{validate_system, ValidationReport, Violation, ViolationKind};
