//! Simulation toolkit for superposing unknown pure states.
//!
//! The crate covers the constructive side (vec functions, vector-valued
//! state tomography, the random and entangled superposition pipeline) and
//! the obstruction side (winding numbers of 2-homogeneous functionals,
//! error audits of candidate superposition maps against the achievable
//! threshold).
//!
//! Module map:
//!
//! - [`linalg`]: state vectors, density operators, trace-norm geometry.
//! - [`format`]: JSON state and matrix encodings.
//! - [`vecfun`]: canonical and indexed vec maps, index selection rules.
//! - [`tomo`]: Born-rule sampling, linear-inversion reconstruction,
//!   calibrated schedules and vector estimates.
//! - [`superposer`]: target states, trace floors, copy budgets and the
//!   random / entangled superposition pipeline.
//! - [`circuit`]: postselection and multi-outcome circuits, Bell-pair
//!   identities and the `g` functional.
//! - [`obstruction`]: loops, winding numbers and the obstruction audit.
//! - [`table1`]: the many-outcome versus single-outcome meta-check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod format;
pub mod linalg;
pub mod obstruction;
pub mod rng;
pub mod superposer;
pub mod table1;
pub mod tol;
pub mod tomo;
pub mod vecfun;

pub use error::{Error, Result};
pub use linalg::{DensityOperator, PureDensity, StateVector, C64};
