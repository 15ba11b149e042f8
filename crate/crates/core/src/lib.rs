//! Restarted primal-dual hybrid gradient (PDHG) solver for linear programs.
//!
//! The crate is organised as
//!
//! * [`lp_model`]: problem representation, MPS I/O, sparse matrices;
//! * [`scaling`]: Ruiz and Pock–Chambolle diagonal preconditioning;
//! * [`kkt`]: residuals, duality gap, weighted KKT error, termination test;
//! * [`pdhg`]: the restarted PDHG iteration;
//! * [`instance_gen`]: PageRank and random LP generators;
//! * [`bench`]: batch runs and shifted geometric means.
//!
//! Sparse products and vector reductions are data-parallel when the
//! `parallel` feature is on (the default). Reductions use a fixed chunking,
//! so results are bit-identical with or without it.

pub mod bench;
pub mod instance_gen;
pub mod kkt;
pub mod linalg;
pub mod lp_model;
pub mod pdhg;
pub mod scaling;

pub use kkt::{check_termination, compute_residuals, derive_lambda, kkt_omega, Iterate, ResidualReport};
pub use linalg::Exec;
pub use lp_model::{classify_bounds, stack_k, BoundClass, LpProblem, ObjSense, SparseMatrix};
pub use pdhg::{solve, SolveError, SolveResult, SolverParams, Status};
