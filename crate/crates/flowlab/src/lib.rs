//! Floating-point reproduction of the manifolds `M^R` built from a recipe
//! `⟨G, N, Φ_t⟩`, and two planar demos.
//!
//! Everything is generic over [`Real`], which any `num_traits::Float` with
//! `FloatConst` satisfies; the aliases below fix `f64`.

pub mod acc;
pub mod demo;
pub mod recipe;
pub mod wset;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};

pub use acc::{accumulation_estimate, nh_predict, AccEstimate, AccParams, AccShape, Coverage, Prediction};
pub use demo::{planar_demo, radius_schedule, Demo, DemoPoint, SampledVerdict};
pub use recipe::{psi, Base, FlowError, FlowSpec, GFn, Recipe, SigmaVec};
pub use wset::{h_map, h_map_check, w_intersection_sample, w_residual, FloorPoint, HReport, WOutcome, WSpec};

pub trait Real: Float + FloatConst + Debug + Display + Send + Sync + 'static {
    /// `x` as `Self`; every float type holds an `f64` approximately.
    fn lit(x: f64) -> Self {
        Self::from(x).expect("float literal")
    }
}

impl<F: Float + FloatConst + Debug + Display + Send + Sync + 'static> Real for F {}

pub type Recipe64 = Recipe<f64>;
pub type FlowSpec64 = FlowSpec<f64>;
pub type AccEstimate64 = AccEstimate<f64>;
pub type AccParams64 = AccParams<f64>;
pub type WSpec64 = WSpec<f64>;
pub type DemoPoint64 = DemoPoint<f64>;
