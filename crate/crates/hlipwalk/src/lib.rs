//! Footstep planning and reduced-order gait simulation for bipedal walking.
//!
//! Walking is modeled with the hybrid linear inverted pendulum (H-LIP), whose
//! pre-impact state obeys exact linear step-to-step dynamics. On top of that
//! model the crate provides zonotope set arithmetic with outer invariant-set
//! computation, a dense active-set QP solver, path-following step planning by
//! model predictive control, and a perturbed surrogate walker for closed-loop
//! evaluation of the planner and the stepping feedback.

pub mod batch;
pub mod error;
pub mod geom;
pub mod hlip;
pub mod planner;
pub mod qp;
pub mod sim;

pub use error::{Error, Result};
