//! Deciding non-separation and the structure built on it.

mod graph;
mod maximality;
mod nh;
mod separation;
mod simplicity;

pub use graph::{bumpeq_classes, nh_graph, nh_iterate, product_nh, GraphError, NhGraph};
pub use maximality::{
    maximality_certificate, maximality_certificate_set, MaximalityCertificate, MaximalityError, Necessary,
};
pub use nh::{nh_of, sorted_check, NhDescription, NhFamily, SortedViolation};
pub use separation::{
    nbhds_meet, separation, separation_oracle, OracleResult, Separation, Verdict, VerdictKind, Witness,
};
pub use simplicity::{simplicity_at, Classification, SimplicityError, SimplicityReport};
