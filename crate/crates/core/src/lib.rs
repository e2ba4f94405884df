//! Branch-and-cut solver for mixed integer bilevel linear programs.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the canonical problem data and input normalisation.
//! * [`simplex`] and [`milp`] are the self-contained LP and MILP engines.
//! * [`bilevel`] implements the follower value function, reactions and
//!   feasibility certificates.
//! * [`cuts`] contains every valid-inequality generator.
//! * [`search`] is the branch-and-cut driver.
//! * [`bruteforce`] enumerates small instances to provide ground truth.
//! * [`frontend`] covers file formats, instance generators, benchmarking and
//!   profile tables.

pub mod bilevel;
pub mod bruteforce;
pub mod cuts;
pub mod frontend;
pub mod milp;
pub mod model;
pub mod search;
pub mod simplex;

pub use model::{MiblpInstance, Point, EPS};
