//! Coarse-graining engine for stochastic and quantum dynamics.
//!
//! The crate decides whether a coarse-graining of a dynamical system is
//! compatible with its generator, constructs the reduced generator when it
//! is, and discovers compatible coarse-grainings from partitions and group
//! symmetries. It covers:
//!
//! - classical continuous-time Markov processes coarse-grained by state
//!   partitions ([`stochastic`]),
//! - quantum systems coarse-grained by bipartition tables ([`quantum`],
//!   [`dynamics`]),
//! - coarse-grainings induced by finite symmetry groups, including the
//!   commutant/bicommutant machinery and numerical block decomposition
//!   ([`symmetry`]),
//! - ready-made model systems for exercising all of the above ([`corpus`]).

pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quantum;
pub mod stochastic;
pub mod symmetry;

pub use error::{CgError, Result};
pub use linalg::{C64, CMat, CVec, OperatorSubspace, RMat, RVec};
pub use quantum::{BipartitionOperators, BipartitionTable, TableBlock};
pub use stochastic::{Partition, PermRep, RateMatrix};
pub use symmetry::{BlockStructure, Sector, UnitaryRep};
pub use dynamics::Superoperator;
