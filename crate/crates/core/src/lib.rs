//! Manpower scheduling: staffing levels, attendance rosters and the solvers
//! that produce them.
//!
//! A [`domain::ProblemInstance`] describes jobs, shifts and bounds.
//! Requirements are written as [`constraints::ConstraintExpr`] formulas over
//! named atoms and scored through [`constraints::Measures`]. Headcounts are
//! searched by [`evolution::run_ea`] (one objective) or [`moea::run_moea`]
//! (several), attendance by [`evolution::solve_assignment`], and concrete
//! rosters come from [`tablegen`]. [`baselines`] holds exact and heuristic
//! comparison solvers.

pub mod baselines;
pub mod constraints;
pub mod domain;
pub mod error;
pub mod evolution;
pub mod moea;
pub mod objectives;
pub mod reference;
pub mod tablegen;

pub use error::{Error, Result};
