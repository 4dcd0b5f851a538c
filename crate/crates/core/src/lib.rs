//! Minimum-power repeater insertion for multi-layer two-pin interconnects.
//!
//! The pipeline combines a coarse discrete dynamic program, a continuous
//! Lagrangian refinement of repeater widths and locations, and a second
//! dynamic program over a library and candidate set synthesized from the
//! refined solution.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the file
//! formats, benchmark harness and CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bench;
pub mod delay;
pub mod dp;
pub mod error;
pub mod io;
pub mod net;
pub mod rip;
pub mod scalar;

pub use analytic::{
    dtau_dx, refine, solve_widths, width_residuals, LagrangeState, RefineOutcome, RefineParams,
};
pub use delay::{power_proxy, stage_delay, total_delay, StageSpec};
pub use dp::{dp_min_delay, dp_min_power, prune_dominated, DpConfig, DpLabel, DpOptions};
pub use error::{Error, Result};
pub use net::{
    validate_net, ForbiddenZone, Net, Repeater, RepeaterSolution, Segment, Side, TechParams,
    WirePiece,
};
pub use rip::{rip, synthesize_config, RipOutcome, RipParams};
pub use scalar::Scalar;

pub type Tech64 = TechParams<f64>;
pub type Net64 = Net<f64>;
pub type Solution64 = RepeaterSolution<f64>;
pub type DpConfig64 = DpConfig<f64>;
pub type RipParams64 = RipParams<f64>;
pub type RefineParams64 = RefineParams<f64>;

pub type Tech32 = TechParams<f32>;
pub type Net32 = Net<f32>;
pub type Solution32 = RepeaterSolution<f32>;
