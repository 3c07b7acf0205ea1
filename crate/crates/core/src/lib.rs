//! Averaged relaxed cutter methods for two-set convex feasibility.
//!
//! Given cutters `P_A`, `P_B` and relaxations `R^g = x + (2 - g)(P x - x)`,
//! the iteration is `x_{n+1} = lambda R_B^mu R_A^gamma x_n + (1 - lambda) x_n`.
//! Special cases: alternating projections `(1, 1, 1)`, Douglas-Rachford
//! `(0, 0, 1/2)`, Peaceman-Rachford `(0, 0, 1)`.
//!
//! * [`operators`]: sets, cutters, relaxations and the averaged step.
//! * [`functions`]: convex functions and their subgradient cutters.
//! * [`productspace`]: reduction of many sets to two on a product space.
//! * [`solver`]: iteration, stopping rules, traces and audits.
//! * [`gallery`]: named fixtures with known behaviour.
//! * [`instances`]: seeded random problems.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functions;
pub mod gallery;
pub mod instances;
pub mod operators;
mod point;
pub mod productspace;
pub mod solver;

pub use error::{Error, Result};
pub use functions::{subgradient_project, ConvexFunction};
pub use operators::{
    averaged_step, classify_params, psi, relax, Cutter, MethodName, Mode, OperatorParams,
    PrimitiveSet, StepRecord,
};
pub use point::Point;
pub use productspace::{lift, LiftedB, ProductProblem};
pub use solver::{
    solve, varying_params_solve, IterationTrace, StopRule, TerminationReason, TraceStep,
};
