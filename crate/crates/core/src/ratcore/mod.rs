//! Exact rational scalar, interval and affine algebra, the index-expression
//! grammar, the limit engine, and closed-form cascades of pieces.

pub mod affine;
pub mod cascade;
pub mod expr;
pub mod interval;
pub mod limit;

pub use affine::{AffinePiece, Dir, Orientation};
pub use cascade::{
    AccDecl, AccKind, AccMatch, AccPair, AccPoint, Arity, Cascade, CascadeError, CascadeSpec, Cluster, Declared,
    Idx, LimitPoint, Plan, Progression, Side, Solve, Tier, HORIZON,
};
pub use expr::{pairing, unpair, EvalError, Expr, ExprParseError};
pub use interval::{Ext, Interval, OpenIntervalSet, SetOp};
pub use limit::{limit_eval, Direction, Frac, LimitError, LimitRecord, LimitValue};
