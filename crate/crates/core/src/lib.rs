//! Estimation of reachable and controllable output sets for opaque
//! discrete-time control systems, with probably-approximately-correct
//! guarantees.
//!
//! The library treats a system (for example a dialogue with a generative
//! model) as a black box: it can be stepped forward under a sequence of
//! inputs and read out into a measurement value. From sampled trajectories
//! it builds
//!
//! - per-turn **reachable set** estimates for a fixed initial state, with a
//!   coupon-collector style coverage guarantee over a finite quantization of
//!   the measurement space,
//! - **controllable set** estimates as the intersection of the reachable
//!   sets of independently sampled initial states, and
//! - bounding-interval estimates of the reachable set of the **expected**
//!   output for stochastic systems.
//!
//! Sample sizes for all of the above come from [`plan`], which evaluates the
//! PAC bounds exactly and can split an overall confidence budget between the
//! per-state and over-states parts to minimize total samples.
//!
//! Synthetic systems with analytic ground truth live in [`system`]; they back
//! the bound-validation harness in [`estimate`].

pub mod adapter;
pub mod estimate;
pub mod metrics;
pub mod plan;
pub mod seeds;
pub mod space;
pub mod system;
